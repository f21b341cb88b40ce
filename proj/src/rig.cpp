#include "casimir/rig.hpp"

#include "casimir/errors.hpp"
#include "casimir/parallel.hpp"
#include "casimir/units.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <fmt/format.h>

#include <cmath>
#include <memory>

namespace casimir {

void validate(const RigConfig& cfg) {
  const Instrument& in = cfg.instrument;
  auto positive = [](double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x))
      throw ValidationError(fmt::format("rig config: {} must be positive", what));
  };
  positive(in.radius, "radius");
  positive(in.spring_constant, "spring constant");
  positive(in.resonance_hz, "resonance frequency");
  positive(in.f1_hz, "f1");
  positive(in.f2_hz, "f2");
  positive(in.dwell_s, "dwell time");
  positive(in.feedback_rate_hz, "feedback rate");
  positive(in.viscosity, "viscosity");
  positive(in.temperature, "temperature");
  positive(cfg.truth.beta, "conversion factor");
  positive(cfg.truth.d0, "d0");
  if (!(in.modulation_amplitude >= 0.0)) throw ValidationError("rig config: modulation amplitude must be >= 0");
  if (!(in.ac_amplitude >= 0.0)) throw ValidationError("rig config: AC amplitude must be >= 0");
  if (!(in.feedback_gain > 0.0 && in.feedback_gain < 1.0))
    throw ValidationError("rig config: feedback gain must lie in (0, 1)");
  if (in.f1_hz == in.f2_hz) throw ValidationError("rig config: f1 and f2 must differ");
  if (!(2.0 * in.f1_hz < 0.5 * in.resonance_hz && in.f2_hz < 0.5 * in.resonance_hz))
    throw ValidationError("rig config: drive frequencies must lie well below the resonance");
  if (in.setpoints.size() < 2) throw ValidationError("rig config: need at least 2 set-points");
  const bool ascending = in.setpoints[1] > in.setpoints[0];
  for (std::size_t i = 1; i < in.setpoints.size(); ++i)
    if ((in.setpoints[i] > in.setpoints[i - 1]) != ascending || in.setpoints[i] == in.setpoints[i - 1])
      throw ValidationError("rig config: set-points must be strictly monotonic");
  if (in.runs < 1) throw ValidationError("rig config: runs must be >= 1");
  const NoiseConfig& n = in.noise;
  for (double s : {n.calibration, n.inphase, n.quadrature, n.feedback})
    if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("rig config: noise levels must be >= 0");
  if (in.slip_length && !(*in.slip_length >= 0.0))
    throw ValidationError("rig config: slip length must be >= 0");
}

GradientModel zero_gradient_model() {
  return [](double) { return 0.0; };
}

GradientTable::GradientTable(const LayeredMirror& sphere, const LayeredMirror& plate, double radius,
                             double d_min, double d_max, const LifshitzOptions& opt, int points,
                             int threads)
    : d_min_(d_min), d_max_(d_max) {
  if (!(d_min > 0.0 && d_max > d_min)) throw ValidationError("gradient table: bad separation range");
  if (points < 8) throw ValidationError("gradient table: need at least 8 points");
  step_ = std::log(d_max / d_min) / (points - 1);
  scaled_.assign(static_cast<std::size_t>(points), 0.0);
  parallel_for(points, threads, [&](int i) {
    const double d = (i + 1 == points) ? d_max : d_min * std::exp(step_ * i);
    const double g = sphere_plate_force_gradient(radius, d, sphere, plate, opt).value;
    scaled_[static_cast<std::size_t>(i)] = g * std::pow(d, 4);
  });
  auto spline = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
      scaled_.data(), scaled_.size(), std::log(d_min), step_);
  spline_ = [spline](double x) { return (*spline)(x); };
}

double GradientTable::operator()(double d) const {
  // Allow round-off at the ends of the range.
  if (!(d >= d_min_ * (1.0 - 1e-12) && d <= d_max_ * (1.0 + 1e-12)))
    throw ValidationError(fmt::format("gradient table: d = {:.4g} m outside [{:.4g}, {:.4g}]", d,
                                      d_min_, d_max_));
  const double x = std::clamp(std::log(d), std::log(d_min_), std::log(d_max_));
  return spline_(x) / std::pow(d, 4);
}

double transfer_function(double f_hz, double resonance_hz) {
  const double r = f_hz / resonance_hz;
  return 1.0 / (1.0 - r * r);
}

double calibration_transfer(const Instrument& inst) {
  return transfer_function(2.0 * inst.f1_hz, inst.resonance_hz);
}

double measurement_transfer(const Instrument& inst) {
  return transfer_function(inst.f2_hz, inst.resonance_hz);
}

double inject_artifact(double slope, double d_pz) { return slope * d_pz; }

FeedbackResult v0_feedback(const Instrument& inst, double d, double true_v0, double initial,
                           std::mt19937_64* rng) {
  FeedbackResult out;
  out.compensation = initial;
  out.residual = true_v0 - initial;
  if (inst.ac_amplitude == 0.0) {
    // No w1 excitation, nothing to lock onto.
    out.converged = false;
    return out;
  }
  if (!(d > 0.0)) throw ContactError("feedback: sphere-plate contact");
  std::normal_distribution<double> normal(0.0, 1.0);
  const int steps = std::max(1, static_cast<int>(std::lround(inst.dwell_s * inst.feedback_rate_hz)));
  const int tail = std::max(1, steps / 10);
  double tail_sum = 0.0;
  for (int s = 0; s < steps; ++s) {
    // w1 amplitude / (4 * 2w1 amplitude / V_ac) = dV; G(d) cancels in the ratio.
    double estimate = true_v0 - out.compensation;
    if (rng && inst.noise.feedback > 0.0) estimate += inst.noise.feedback * normal(*rng);
    out.compensation += inst.feedback_gain * estimate;
    if (s >= steps - tail) tail_sum += estimate;
  }
  out.residual = true_v0 - out.compensation;
  out.converged = std::abs(tail_sum / tail) <= 1e-4;
  return out;
}

std::uint64_t run_seed(std::uint64_t series_seed, int run_index) {
  // splitmix64 finaliser over (seed, index).
  std::uint64_t z = series_seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(run_index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {

double v0_profile(const TruthParams& t, std::size_t i, std::size_t n) {
  const double s = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
  return t.v0_offset + t.v0_variation * 0.5 * (1.0 - std::cos(units::pi * s));
}

}  // namespace

SimulatedRun simulate_run(const RigConfig& cfg, const GradientModel& casimir, int run_index,
                          std::uint64_t series_seed) {
  validate(cfg);
  const Instrument& in = cfg.instrument;
  const TruthParams& truth = cfg.truth;

  SimulatedRun out;
  const std::uint64_t seed = run_seed(series_seed, run_index);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  out.record.run_id = run_index;
  out.record.seed = seed;
  out.truth.run_id = run_index;
  out.truth.seed = seed;
  out.truth.beta = truth.beta;
  out.truth.d0 = truth.d0 + truth.drift_per_run * run_index;

  const double shift = in.reapproach ? truth.drift_per_run * run_index : 0.0;
  const double h_cal = calibration_transfer(in);
  const double h_meas = measurement_transfer(in);
  const double vac2 = in.ac_amplitude * in.ac_amplitude;
  const HydroConfig hydro{in.viscosity, in.slip_length, 2.0 * units::pi * in.f2_hz,
                          in.modulation_amplitude};
  const std::size_t n = in.setpoints.size();
  const double run_start = run_index * in.dwell_s * static_cast<double>(n);

  double compensation = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    SetPointRecord p;
    p.d_pz = in.setpoints[i] + shift;
    const double d = out.truth.d0 - p.d_pz;
    if (!(d > 0.0))
      throw ContactError(fmt::format("run {}: sphere-plate contact at set-point {} (d_pz = {:.4g} m, "
                                     "d0 = {:.4g} m)",
                                     run_index, i, p.d_pz, out.truth.d0));
    p.timestamp = run_start + in.dwell_s * static_cast<double>(i);

    const double v0 = v0_profile(truth, i, n);
    const FeedbackResult fb = v0_feedback(in, d, v0, compensation, &rng);
    compensation = fb.compensation;
    p.v0_readback = fb.compensation;
    p.feedback_unconverged = in.ac_amplitude > 0.0 && !fb.converged;

    const double g = electrostatic_force_exact(in.radius, d, 1.0);
    const double g_grad = electrostatic_force_gradient(in.radius, d, 1.0);
    const double f_2w1 = 0.5 * g * vac2;
    const double grad_total = casimir(d) + g_grad * (fb.residual * fb.residual + 0.5 * vac2);
    const double hydro_amp = hydrodynamic_quadrature_amplitude(hydro, in.radius, d);

    p.calib_2w1 = truth.beta * h_cal * std::abs(f_2w1) + in.noise.calibration * normal(rng);
    p.inphase_w2 = truth.beta * h_meas * in.modulation_amplitude * grad_total +
                   inject_artifact(in.artifact_slope, p.d_pz) + in.noise.inphase * normal(rng);
    p.quadrature_w2 = truth.beta * h_meas * hydro_amp + in.noise.quadrature * normal(rng);

    // Conservative cantilever responses to the two drives.
    const double x_cal = std::abs(f_2w1) * h_cal / in.spring_constant;
    const double x_mod = std::abs(grad_total * in.modulation_amplitude) * h_meas / in.spring_constant;
    p.quasi_static_violation = std::hypot(x_cal, x_mod) / std::sqrt(2.0) > quasi_static_limit_rms;

    out.record.quasi_static_warning = out.record.quasi_static_warning || p.quasi_static_violation;
    out.record.feedback_warning = out.record.feedback_warning || p.feedback_unconverged;
    out.record.points.push_back(p);
    out.truth.separation.push_back(d);
    out.truth.v0.push_back(v0);
  }
  return out;
}

std::vector<SimulatedRun> simulate_series(const RigConfig& cfg, const GradientModel& casimir,
                                          std::uint64_t series_seed, int threads) {
  validate(cfg);
  std::vector<SimulatedRun> runs(static_cast<std::size_t>(cfg.instrument.runs));
  parallel_for(cfg.instrument.runs, threads, [&](int r) {
    runs[static_cast<std::size_t>(r)] = simulate_run(cfg, casimir, r, series_seed);
  });
  return runs;
}

std::vector<double> setpoints_for_separations(double d0, double d_min, double d_max, int count) {
  if (!(d_min > 0.0 && d_max > d_min && d0 > d_max) || count < 2)
    throw ValidationError("set-points: need 0 < d_min < d_max < d0 and count >= 2");
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    const double d = d_max * std::pow(d_min / d_max, static_cast<double>(i) / (count - 1));
    out.push_back(d0 - d);
  }
  return out;
}

double tune_artifact_slope(const RigConfig& cfg, const GradientModel& casimir, double d_threshold,
                           double fraction) {
  const Instrument& in = cfg.instrument;
  const double d_pz = cfg.truth.d0 - d_threshold;
  if (!(d_pz > 0.0)) throw ValidationError("artifact tuning: threshold beyond d0");
  const double grad = casimir(d_threshold) +
                      electrostatic_force_gradient(in.radius, d_threshold, in.ac_amplitude) * 0.5;
  const double signal = cfg.truth.beta * measurement_transfer(in) * in.modulation_amplitude * grad;
  return fraction * signal / d_pz;
}

RigConfig preset_config(const std::string& plate) {
  RigConfig cfg;
  Instrument& in = cfg.instrument;
  TruthParams& t = cfg.truth;
  in.runs = 580;
  in.setpoints = setpoints_for_separations(t.d0, 60e-9, 1100e-9, 50);
  in.noise.calibration = 2e-7;
  in.noise.quadrature = 2e-6;
  in.noise.feedback = 1e-4;
  t.v0_offset = 0.020;
  if (plate == "gold") {
    in.plate = "gold";
    in.noise.inphase = 1.6e-5;
    // 5% of the force signal at d = 120 nm, measured against the gold-gold Lifshitz curve.
    in.artifact_slope = -3.8;
    t.drift_per_run = 0.1e-9;
    t.v0_variation = 1e-3;
  } else if (plate == "ito") {
    in.plate = "ito-on-glass";
    in.noise.inphase = 0.89e-5;
    // The transparent plate reflects little stray light: 1% at d = 120 nm.
    in.artifact_slope = -0.44;
    t.drift_per_run = 0.2e-9;
    t.v0_variation = 3e-3;
  } else {
    throw ValidationError("preset preset must be 'gold' or 'ito'");
  }
  return cfg;
}

}  // namespace casimir
