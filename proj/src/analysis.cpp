#include "casimir/analysis.hpp"

#include "casimir/auxforce.hpp"
#include "casimir/errors.hpp"
#include "casimir/units.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace casimir {

std::string to_string(FitWeighting w) { return w == FitWeighting::uniform ? "uniform" : "relative"; }

FitWeighting parse_fit_weighting(const std::string& s) {
  if (s == "uniform") return FitWeighting::uniform;
  if (s == "relative") return FitWeighting::relative;
  throw ValidationError("unknown fit weighting '" + s + "' (expected uniform|relative)");
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::casimir: return "casimir";
    case Provenance::electrostatic_background: return "electrostatic-background";
    case Provenance::hydrodynamic: return "hydrodynamic";
  }
  return "unknown";
}

namespace {

constexpr double nm_scale = 1e-9;

struct CalibrationData {
  Eigen::ArrayXd d_pz;
  Eigen::ArrayXd signal;
  Eigen::ArrayXd weight;
};

// |G(d)| V_ac^2 / 2 * H(2 w1): calibration signal per unit beta.
Eigen::ArrayXd unit_response(const Eigen::ArrayXd& gaps, const Instrument& inst) {
  const double scale = calibration_transfer(inst) * 0.5 * inst.ac_amplitude * inst.ac_amplitude;
  Eigen::ArrayXd out(gaps.size());
  for (Eigen::Index i = 0; i < gaps.size(); ++i)
    out[i] = -electrostatic_force_exact(inst.radius, gaps[i], 1.0) * scale;
  return out;
}

}  // namespace

CalibrationResult fit_calibration(const RunRecord& run, const Instrument& inst, const FitOptions& opt) {
  const auto n = static_cast<Eigen::Index>(run.points.size());
  if (n < 10)
    throw ValidationError(fmt::format(
        "run {}: degenerate sweep, {} set-points (calibration needs at least 10)", run.run_id, n));
  if (!(inst.ac_amplitude > 0.0))
    throw ValidationError("calibration needs a nonzero AC amplitude");

  // Sort by d_pz so the fit does not depend on record order.
  std::vector<std::size_t> order(run.points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return run.points[a].d_pz < run.points[b].d_pz; });
  CalibrationData data{Eigen::ArrayXd(n), Eigen::ArrayXd(n), Eigen::ArrayXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = run.points[order[static_cast<std::size_t>(i)]];
    data.d_pz[i] = p.d_pz;
    data.signal[i] = p.calib_2w1;
  }
  if (opt.weighting == FitWeighting::uniform) {
    data.weight.setOnes();
  } else {
    const double floor = 1e-6 * data.signal.abs().maxCoeff();
    data.weight = 1.0 / data.signal.abs().max(floor);
  }
  const double max_dpz = data.d_pz.maxCoeff();
  const double min_dpz = data.d_pz.minCoeff();
  const double weighted_norm = (data.weight * data.signal).matrix().norm();
  if (!(weighted_norm > 0.0)) throw ValidationError("calibration channel carries no signal");

  // Initial guess: d0 100 nm beyond the deepest set-point, beta from the farthest point.
  double d0 = max_dpz + 100e-9;
  const Eigen::Index far = 0;  // smallest d_pz = largest separation
  Eigen::ArrayXd gaps0(1);
  gaps0[0] = d0 - data.d_pz[far];
  const double beta0 = data.signal[far] / unit_response(gaps0, inst)[0];
  if (!(beta0 > 0.0) || !std::isfinite(beta0))
    throw NumericalError("calibration: cannot initialise beta from the farthest set-point");

  // Parameters scaled to O(1): x = (d0 / 1 nm, beta / beta0).
  auto residuals = [&](const Eigen::Vector2d& x, bool& valid) {
    const double dd0 = x[0] * nm_scale;
    const Eigen::ArrayXd gaps = dd0 - data.d_pz;
    valid = (gaps > 0.0).all();
    if (!valid) return Eigen::VectorXd(Eigen::VectorXd::Zero(n));
    const Eigen::ArrayXd model = x[1] * beta0 * unit_response(gaps, inst);
    return Eigen::VectorXd((data.weight * (data.signal - model)).matrix());
  };
  auto jacobian = [&](const Eigen::Vector2d& x) {
    Eigen::MatrixXd jac(n, 2);
    const double dd0 = x[0] * nm_scale;
    const Eigen::ArrayXd gaps = dd0 - data.d_pz;
    const double h = 1e-5 * gaps.minCoeff();
    const Eigen::ArrayXd up = unit_response(gaps + h, inst);
    const Eigen::ArrayXd down = unit_response(gaps - h, inst);
    const Eigen::ArrayXd u = unit_response(gaps, inst);
    jac.col(0) = (-data.weight * x[1] * beta0 * (up - down) / (2.0 * h) * nm_scale).matrix();
    jac.col(1) = (-data.weight * beta0 * u).matrix();
    return jac;
  };

  Eigen::Vector2d x(d0 / nm_scale, 1.0);
  bool valid = true;
  Eigen::VectorXd r = residuals(x, valid);
  double cost = 0.5 * r.squaredNorm();
  double lambda = 1e-3;
  int iter = 0;
  bool converged = false;
  Eigen::MatrixXd jac = jacobian(x);
  for (; iter < opt.max_iterations; ++iter) {
    const Eigen::Vector2d grad = jac.transpose() * r;
    const double rel_grad = grad.norm() / (jac.norm() * weighted_norm);
    if (rel_grad <= opt.gradient_tolerance) {
      converged = true;
      break;
    }
    const Eigen::Matrix2d normal = jac.transpose() * jac;
    bool improved = false;
    while (lambda < 1e16) {
      Eigen::Matrix2d damped = normal;
      damped.diagonal() += lambda * normal.diagonal();
      const Eigen::Vector2d step = damped.ldlt().solve(-grad);
      const Eigen::Vector2d trial = x + step;
      bool trial_valid = true;
      const Eigen::VectorXd r_trial = residuals(trial, trial_valid);
      const double c_trial = 0.5 * r_trial.squaredNorm();
      if (trial_valid && std::isfinite(c_trial) && c_trial <= cost) {
        const bool stalled = (step.array().abs() <= 1e-15 * (x.array().abs() + 1e-15)).all();
        x = trial;
        r = r_trial;
        cost = c_trial;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        if (stalled) lambda = 1e16;  // nothing left to gain
        break;
      }
      lambda *= 10.0;
    }
    jac = jacobian(x);
    if (!improved || lambda >= 1e16) {
      // No downhill step exists at machine precision: accept if the gradient is small.
      const Eigen::Vector2d g = jac.transpose() * r;
      converged = g.norm() / (jac.norm() * weighted_norm) <= std::sqrt(opt.gradient_tolerance);
      break;
    }
  }
  if (!converged)
    throw NumericalError(fmt::format("run {}: calibration fit did not converge after {} iterations "
                                     "(best d0 = {:.6g} nm, beta = {:.6g} V/N)",
                                     run.run_id, iter, x[0], x[1] * beta0),
                         cost);

  CalibrationResult out;
  out.run_id = run.run_id;
  out.d0 = x[0] * nm_scale;
  out.beta = x[1] * beta0;
  out.points_used = static_cast<int>(n);
  out.iterations = iter;
  out.residual_norm = r.norm();

  const double gap_far = out.d0 - min_dpz;
  const double gap_near = out.d0 - max_dpz;
  if (gap_far / gap_near < 5.0)
    throw ValidationError(fmt::format(
        "run {}: degenerate sweep, separations span only a factor {:.3g} (need >= 5)", run.run_id,
        gap_far / gap_near));

  // Covariance from the Jacobian at the optimum. Columns are equilibrated before the inverse,
  // then mapped back to physical units.
  const Eigen::Array2d col_norm = jac.colwise().norm().transpose().array();
  if (!(col_norm > 0.0).all())
    throw NumericalError(fmt::format("run {}: singular calibration Jacobian", run.run_id));
  const Eigen::MatrixXd jac_eq = jac * (1.0 / col_norm).matrix().asDiagonal();
  const Eigen::Matrix2d normal = jac_eq.transpose() * jac_eq;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(normal);
  if (!(eig.eigenvalues()[0] > 1e-14 * eig.eigenvalues()[1]))
    throw NumericalError(fmt::format("run {}: singular calibration Jacobian", run.run_id));
  double s2 = r.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(n - 2, 1));
  s2 = std::max(s2, std::pow(1e-15 * weighted_norm, 2) / static_cast<double>(n));
  const Eigen::Array2d to_phys = Eigen::Array2d(nm_scale, beta0) / col_norm;
  out.covariance = s2 * to_phys.matrix().asDiagonal() * normal.inverse() * to_phys.matrix().asDiagonal();
  return out;
}

namespace {

std::vector<double> gaps_from(const RunRecord& run, const CalibrationResult& cal) {
  std::vector<double> d;
  for (const auto& p : run.points) {
    const double gap = cal.d0 - p.d_pz;
    if (!(gap > 0.0))
      throw ValidationError(fmt::format("run {}: calibrated separation <= 0 at d_pz = {:.4g} m",
                                        run.run_id, p.d_pz));
    d.push_back(gap);
  }
  return d;
}

}  // namespace

ForceCurve extract_force_gradient(const RunRecord& run, const CalibrationResult& cal,
                                  const Instrument& inst) {
  if (!(inst.modulation_amplitude > 0.0))
    throw ValidationError("force-gradient extraction needs a nonzero modulation amplitude");
  ForceCurve c;
  c.run_id = run.run_id;
  c.provenance = Provenance::casimir;
  c.separation = gaps_from(run, cal);
  const double scale = cal.beta * inst.modulation_amplitude * measurement_transfer(inst);
  for (std::size_t i = 0; i < run.points.size(); ++i) {
    const double d = c.separation[i];
    const double total = run.points[i].inphase_w2 / scale;
    const double background = 0.5 * electrostatic_force_gradient(inst.radius, d, inst.ac_amplitude);
    c.value.push_back((total - background) / inst.radius);
    c.flagged.push_back(std::abs(background) > 0.5 * std::abs(total));
  }
  return c;
}

ForceCurve electrostatic_background(const RunRecord& run, const CalibrationResult& cal,
                                    const Instrument& inst) {
  ForceCurve c;
  c.run_id = run.run_id;
  c.provenance = Provenance::electrostatic_background;
  c.separation = gaps_from(run, cal);
  for (double d : c.separation) {
    c.value.push_back(0.5 * electrostatic_force_gradient(inst.radius, d, inst.ac_amplitude) /
                      inst.radius);
    c.flagged.push_back(false);
  }
  return c;
}

ForceCurve extract_hydrodynamic(const RunRecord& run, const CalibrationResult& cal,
                                const Instrument& inst) {
  ForceCurve c;
  c.run_id = run.run_id;
  c.provenance = Provenance::hydrodynamic;
  c.separation = gaps_from(run, cal);
  const double scale = cal.beta * measurement_transfer(inst);
  for (const auto& p : run.points) {
    c.value.push_back(p.quadrature_w2 / scale);
    c.flagged.push_back(false);
  }
  return c;
}

double sample_curve(const ForceCurve& curve, double d) {
  const std::size_t n = curve.separation.size();
  if (n == 0) throw ValidationError("cannot sample an empty curve");
  if (n == 1) return curve.value[0];
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return curve.separation[a] < curve.separation[b];
  });
  std::size_t hi = 1;
  while (hi + 1 < n && curve.separation[order[hi]] < d) ++hi;
  const std::size_t i0 = order[hi - 1], i1 = order[hi];
  const double x0 = std::pow(curve.separation[i0], -3);
  const double x1 = std::pow(curve.separation[i1], -3);
  const double x = std::pow(d, -3);
  if (x1 == x0) return curve.value[i0];
  const double t = (x - x0) / (x1 - x0);
  return curve.value[i0] + t * (curve.value[i1] - curve.value[i0]);
}

EnsembleStats ensemble_statistics(const std::vector<ForceCurve>& curves, double probe_d,
                                  double window, int min_curves) {
  if (static_cast<int>(curves.size()) < min_curves)
    throw ValidationError(fmt::format("ensemble statistics need at least {} curves, got {}",
                                      min_curves, curves.size()));
  if (!(probe_d > 0.0) || !(window > 0.0))
    throw ValidationError("ensemble statistics: probe separation and window must be positive");

  EnsembleStats s;
  s.probe_separation = probe_d;
  std::vector<int> missing;
  for (const auto& c : curves) {
    double nearest = std::numeric_limits<double>::infinity();
    for (double d : c.separation) nearest = std::min(nearest, std::abs(d - probe_d));
    if (nearest > window) {
      missing.push_back(c.run_id);
      continue;
    }
    s.run_ids.push_back(c.run_id);
    s.values.push_back(sample_curve(c, probe_d));
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i)
      list += (i ? "," : "") + std::to_string(missing[i]);
    if (missing.size() > 20) list += ",...";
    throw ValidationError(fmt::format("{} run(s) lack a point within {:.3g} nm of {:.4g} nm: {}",
                                      missing.size(), window / units::nm, probe_d / units::nm, list));
  }

  return summarize_ensemble(probe_d, std::move(s.run_ids), std::move(s.values));
}

EnsembleStats summarize_ensemble(double probe_d, std::vector<int> run_ids, std::vector<double> values) {
  if (values.empty()) throw ValidationError("ensemble has no values");
  EnsembleStats s;
  s.probe_separation = probe_d;
  s.run_ids = std::move(run_ids);
  s.values = std::move(values);
  const Eigen::Map<const Eigen::ArrayXd> v(s.values.data(), static_cast<Eigen::Index>(s.values.size()));
  const double n = static_cast<double>(v.size());
  // Shifted by the first value: exact for identical values, less cancellation otherwise.
  s.mean = v[0] + (v - v[0]).mean();
  s.std_dev = v.size() > 1 ? std::sqrt((v - s.mean).square().sum() / (n - 1.0)) : 0.0;
  s.sem = s.std_dev / std::sqrt(n);

  std::vector<double> sorted = s.values;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * (n - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  const double lo = sorted.front(), hi = sorted.back();
  const double width = 2.0 * iqr / std::cbrt(n);
  int bins = 1;
  if (width > 0.0 && hi > lo) bins = std::clamp(static_cast<int>(std::ceil((hi - lo) / width)), 1, 1000);
  const double step = bins > 1 ? width : (hi > lo ? hi - lo : 0.0);
  for (int b = 0; b <= bins; ++b) s.bin_edges.push_back(lo + b * step);
  s.bin_counts.assign(static_cast<std::size_t>(bins), 0);
  for (double x : s.values) {
    int b = step > 0.0 ? static_cast<int>((x - lo) / step) : 0;
    b = std::clamp(b, 0, bins - 1);
    ++s.bin_counts[static_cast<std::size_t>(b)];
  }
  return s;
}

PairRatio compare_pairs(const EnsembleStats& a, const EnsembleStats& b) {
  if (std::abs(a.probe_separation - b.probe_separation) > 1e-12 * std::abs(a.probe_separation))
    throw ValidationError(fmt::format("ensembles probe different separations ({:.4g} vs {:.4g} nm)",
                                      a.probe_separation / units::nm, b.probe_separation / units::nm));
  if (a.mean == 0.0) throw ValidationError("compare_pairs: reference ensemble has zero mean");
  PairRatio out;
  out.ratio = b.mean / a.mean;
  const double ra = a.sem / a.mean;
  const double rb = b.mean != 0.0 ? b.sem / b.mean : 0.0;
  out.uncertainty = b.mean != 0.0 ? std::abs(out.ratio) * std::hypot(ra, rb) : b.sem / std::abs(a.mean);
  return out;
}

DriftFit fit_drift(const std::vector<CalibrationResult>& calibrations) {
  const auto n = static_cast<Eigen::Index>(calibrations.size());
  if (n < 3) throw ValidationError("drift fit needs at least 3 runs");
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = calibrations[static_cast<std::size_t>(i)].run_id;
    y[i] = calibrations[static_cast<std::size_t>(i)].d0;
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(y);
  const double s2 = (y - design * coef).squaredNorm() / static_cast<double>(n - 2);
  const Eigen::Matrix2d cov = s2 * (design.transpose() * design).inverse();
  return {coef[1], coef[0], std::sqrt(cov(1, 1))};
}

}  // namespace casimir
