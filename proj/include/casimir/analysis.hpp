#pragma once

// The experimenter's side of the virtual experiment: calibrate each run from the 2 w1 channel,
// subtract the electrostatic background, and reduce ensembles of force curves.

#include "casimir/rig.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace casimir {

enum class FitWeighting { uniform, relative };

std::string to_string(FitWeighting w);
FitWeighting parse_fit_weighting(const std::string& s);

struct FitOptions {
  FitWeighting weighting = FitWeighting::uniform;
  int max_iterations = 200;
  double gradient_tolerance = 1e-10;  // relative gradient norm at the optimum
};

struct CalibrationResult {
  int run_id = 0;
  double d0 = 0.0;            // m
  double beta = 0.0;          // V/N
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();  // (d0, beta)
  double residual_norm = 0.0;  // V
  int points_used = 0;
  int iterations = 0;

  double sigma_d0() const { return std::sqrt(covariance(0, 0)); }
  double sigma_beta() const { return std::sqrt(covariance(1, 1)); }
};

/// Fits calib_2w1(d_pz) = beta * H(2 w1) * |G(d0 - d_pz)| * V_ac^2 / 2 by damped Gauss-Newton
/// (Levenberg-Marquardt) over (d0, beta). beta enters linearly and gets an analytic Jacobian
/// column; d0 uses central differences.
CalibrationResult fit_calibration(const RunRecord& run, const Instrument& inst,
                                  const FitOptions& opt = {});

enum class Provenance { casimir, electrostatic_background, hydrodynamic };

std::string to_string(Provenance p);

/// Separation-indexed curve. For casimir and electrostatic_background, `value` is the force
/// gradient over R (Pa, gradient = -dF/dd as in the Lifshitz module); for hydrodynamic it is
/// the quadrature force amplitude (N).
struct ForceCurve {
  int run_id = 0;
  Provenance provenance = Provenance::casimir;
  std::vector<double> separation;  // m
  std::vector<double> value;
  std::vector<bool> flagged;       // background > 50% of the total signal
};

/// F'_casimir / R = [inphase / (beta delta H(w2)) - F'_el(d)] / R with d = d0 - d_pz.
/// The optical-lever artifact is not modelled here and stays in the data.
ForceCurve extract_force_gradient(const RunRecord& run, const CalibrationResult& cal,
                                  const Instrument& inst);

/// Electrostatic background (the AC calibration drive) predicted from the fit.
ForceCurve electrostatic_background(const RunRecord& run, const CalibrationResult& cal,
                                    const Instrument& inst);

/// Quadrature channel mapped to a force amplitude.
ForceCurve extract_hydrodynamic(const RunRecord& run, const CalibrationResult& cal,
                                const Instrument& inst);

struct EnsembleStats {
  double probe_separation = 0.0;  // m
  std::vector<int> run_ids;
  std::vector<double> values;
  double mean = 0.0;
  double std_dev = 0.0;  // sample standard deviation
  double sem = 0.0;      // std / sqrt(N)
  std::vector<double> bin_edges;
  std::vector<int> bin_counts;
  std::string bin_rule = "freedman-diaconis";
};

/// Samples every curve at probe_d, interpolating linearly in 1/d^3 between the bracketing
/// points. Each curve needs a point within `window` of probe_d.
EnsembleStats ensemble_statistics(const std::vector<ForceCurve>& curves, double probe_d,
                                  double window, int min_curves = 30);

/// Mean, spread and histogram of per-run values at one separation.
EnsembleStats summarize_ensemble(double probe_d, std::vector<int> run_ids, std::vector<double> values);

/// Value of a curve at d, linear in 1/d^3 between neighbours.
double sample_curve(const ForceCurve& curve, double d);

struct PairRatio {
  double ratio = 0.0;        // mean_b / mean_a
  double uncertainty = 0.0;  // first-order propagation of the SEMs
};

PairRatio compare_pairs(const EnsembleStats& a, const EnsembleStats& b);

struct DriftFit {
  double slope = 0.0;      // m per run
  double intercept = 0.0;  // m
  double slope_sigma = 0.0;
};

/// Least-squares line through the fitted d0 of consecutive runs.
DriftFit fit_drift(const std::vector<CalibrationResult>& calibrations);

}  // namespace casimir
