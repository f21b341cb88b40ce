#pragma once

// Virtual force-spectroscopy rig: a stepped piezo sweep with AC electrostatic calibration at
// 2 w1, residual-potential nulling at w1, distance modulation at w2 and two lock-in channels
// (in-phase and quadrature). Lock-in amplitudes are synthesised analytically; the sensor is
// quasi-static because both drive frequencies sit far below the cantilever resonance.

#include "casimir/auxforce.hpp"
#include "casimir/lifshitz.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace casimir {

struct NoiseConfig {
  double calibration = 0.0;  // V rms on the 2 w1 lock-in output
  double inphase = 0.0;      // V rms on the w2 in-phase output
  double quadrature = 0.0;   // V rms on the w2 quadrature output
  double feedback = 0.0;     // V rms on the per-step residual-potential estimate
};

/// Everything the experimenter knows about the set-up.
struct Instrument {
  double radius = 100e-6;              // m
  double spring_constant = 1.0;        // N/m
  double resonance_hz = 1900.0;
  double f1_hz = 72.2;                 // electrostatic excitation
  double f2_hz = 119.0;                // distance modulation
  double modulation_amplitude = 3.85e-9;  // m
  double ac_amplitude = 0.04;          // V
  double dwell_s = 8.0;                // lock-in integration time per set-point
  double feedback_rate_hz = 50.0;      // integral controller update rate
  double feedback_gain = 0.05;         // normalised integral gain per update
  double viscosity = 1.85e-5;          // Pa s
  std::optional<double> slip_length;   // m
  double temperature = 300.0;          // K
  std::vector<double> setpoints;       // d_pz of the first run, m, strictly monotonic
  bool reapproach = true;              // re-reference the sweep each run to follow the drift
  NoiseConfig noise;
  double artifact_slope = 0.0;         // V per m of piezo extension, in-phase channel only
  std::string sphere = "gold";         // mirror names
  std::string plate = "gold";
  int runs = 1;
};

/// Hidden ground truth. Never read by the analysis.
struct TruthParams {
  double beta = 1e7;            // V/N, deflection-to-voltage conversion over the spring
  double d0 = 1150e-9;          // m, initial separation of the first run
  double drift_per_run = 0.0;   // m per run
  double v0_offset = 0.0;       // V
  double v0_variation = 0.0;    // V, smooth excursion across the sweep
};

struct RigConfig {
  Instrument instrument;
  TruthParams truth;
};

void validate(const RigConfig& cfg);

struct SetPointRecord {
  double d_pz = 0.0;               // m
  double calib_2w1 = 0.0;          // V
  double inphase_w2 = 0.0;         // V
  double quadrature_w2 = 0.0;      // V
  double v0_readback = 0.0;        // V, applied compensation
  double timestamp = 0.0;          // s since the start of the series
  bool feedback_unconverged = false;
  bool quasi_static_violation = false;
};

struct RunRecord {
  int run_id = 0;
  std::uint64_t seed = 0;
  std::vector<SetPointRecord> points;
  bool quasi_static_warning = false;
  bool feedback_warning = false;
};

struct TruthRecord {
  int run_id = 0;
  std::uint64_t seed = 0;
  double d0 = 0.0;
  double beta = 0.0;
  std::vector<double> separation;  // true d per set-point
  std::vector<double> v0;          // true residual potential per set-point
};

struct SimulatedRun {
  RunRecord record;
  TruthRecord truth;
};

/// Casimir force gradient (-dF/dd, N/m) as a function of separation.
using GradientModel = std::function<double(double)>;

GradientModel zero_gradient_model();

/// PFA gradient tabulated on a log-spaced grid and interpolated with a cubic B-spline in ln d
/// (the tabulated quantity is F'(d) d^4, which is slowly varying).
class GradientTable {
 public:
  GradientTable(const LayeredMirror& sphere, const LayeredMirror& plate, double radius,
                double d_min, double d_max, const LifshitzOptions& opt = {}, int points = 160,
                int threads = 1);
  double operator()(double d) const;
  double d_min() const { return d_min_; }
  double d_max() const { return d_max_; }

 private:
  double d_min_, d_max_, step_;
  std::vector<double> scaled_;
  std::function<double(double)> spline_;
};

/// Cantilever transfer function 1 / (1 - (f/f0)^2).
double transfer_function(double f_hz, double resonance_hz);
double calibration_transfer(const Instrument& inst);  // at 2 f1
double measurement_transfer(const Instrument& inst);  // at f2

inline constexpr double quasi_static_limit_rms = 80e-12;  // m

/// Optical-lever artifact: additive slope * d_pz on the in-phase channel.
double inject_artifact(double slope, double d_pz);

struct FeedbackResult {
  double compensation = 0.0;  // applied counter-bias (readback), V
  double residual = 0.0;      // true V0 - compensation, V
  bool converged = true;
};

/// Integral controller nulling the w1 lock-in output during one dwell. The controller normalises
/// its error signal by the simultaneously measured 2 w1 amplitude, so the loop gain does not
/// depend on the separation. Starts from `initial` (the previous set-point's value).
FeedbackResult v0_feedback(const Instrument& inst, double d, double true_v0, double initial = 0.0,
                           std::mt19937_64* rng = nullptr);

/// Run seeds derived deterministically from the series seed.
std::uint64_t run_seed(std::uint64_t series_seed, int run_index);

/// Simulates run `run_index` of a series. Throws ContactError if any set-point reaches d <= 0.
SimulatedRun simulate_run(const RigConfig& cfg, const GradientModel& casimir, int run_index,
                          std::uint64_t series_seed);

/// Simulates `cfg.instrument.runs` runs on up to `threads` workers.
std::vector<SimulatedRun> simulate_series(const RigConfig& cfg, const GradientModel& casimir,
                                          std::uint64_t series_seed, int threads = 1);

/// Set-points placing the first run at log-spaced separations from d_max down to d_min.
std::vector<double> setpoints_for_separations(double d0, double d_min, double d_max, int count);

/// Slope (V/m) for which the artifact equals `fraction` of the force signal at d_threshold in
/// the first run. Beyond d_threshold the relative deviation grows, below it shrinks.
double tune_artifact_slope(const RigConfig& cfg, const GradientModel& casimir,
                           double d_threshold = 120e-9, double fraction = 0.05);

/// Preset configurations: "gold" (Au-Au) or "ito" (Au-ITO).
RigConfig preset_config(const std::string& plate);

}  // namespace casimir
