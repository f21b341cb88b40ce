#include "casimir/auxforce.hpp"

#include "casimir/errors.hpp"
#include "casimir/units.hpp"

#include <fmt/format.h>

#include <cmath>

namespace casimir {

namespace {

void check_geometry(double radius, double d) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw ValidationError("electrostatics: radius must be positive");
  if (!(d > 0.0) || !std::isfinite(d))
    throw ValidationError("electrostatics: separation must be positive");
}

// sum_n t_n(a) (force) or sum_n dt_n/da (gradient), with a = acosh(1 + d/R).
template <bool Derivative>
double bispherical_sum(double radius, double d, const SeriesOptions& opt) {
  check_geometry(radius, d);
  if (d / radius < 1e-6)
    throw NumericalError(
        fmt::format("electrostatic series converges too slowly at d/R = {:.3g} (< 1e-6)", d / radius),
        opt.tolerance);
  const double x = d / radius;
  // acosh(1 + x) without cancellation for small x.
  const double a = std::log1p(x + std::sqrt(x * (x + 2.0)));
  const double coth_a = 1.0 / std::tanh(a);
  const double csch2_a = 1.0 / (std::sinh(a) * std::sinh(a));

  double sum = 0.0;
  double last = 0.0;
  for (int n = 2; n <= opt.max_terms; ++n) {
    const double na = n * a;
    if (na > 700.0) return sum;  // remaining terms underflow
    const double sh = std::sinh(na);
    const double coth_na = 1.0 / std::tanh(na);
    double term;
    if constexpr (Derivative) {
      const double csch2_na = 1.0 / (sh * sh);
      term = (-csch2_a + n * n * csch2_na) / sh - n * (coth_a - n * coth_na) * coth_na / sh;
    } else {
      term = (coth_a - n * coth_na) / sh;
    }
    sum += term;
    last = term;
    if (std::abs(last) < opt.tolerance * std::abs(sum)) return sum;
  }
  throw NumericalError(
      fmt::format("electrostatic series not converged after {} terms", opt.max_terms),
      sum != 0.0 ? std::abs(last / sum) : 1.0);
}

}  // namespace

double electrostatic_force_exact(double radius, double d, double voltage, SeriesOptions opt) {
  if (voltage == 0.0) {
    check_geometry(radius, d);
    return 0.0;
  }
  return 2.0 * units::pi * units::epsilon0 * voltage * voltage *
         bispherical_sum<false>(radius, d, opt);
}

double electrostatic_force_gradient(double radius, double d, double voltage, SeriesOptions opt) {
  if (voltage == 0.0) {
    check_geometry(radius, d);
    return 0.0;
  }
  const double x = d / radius;
  // da/dd = 1 / (R sinh a), sinh a = sqrt(x (x + 2)).
  const double dadd = 1.0 / (radius * std::sqrt(x * (x + 2.0)));
  const double dF_dd =
      2.0 * units::pi * units::epsilon0 * voltage * voltage * bispherical_sum<true>(radius, d, opt) * dadd;
  return -dF_dd;
}

double electrostatic_force_pfa(double radius, double d, double voltage) {
  check_geometry(radius, d);
  return -units::pi * units::epsilon0 * radius * voltage * voltage / d;
}

double electrostatic_gradient_pfa(double radius, double d, double voltage) {
  check_geometry(radius, d);
  return -units::pi * units::epsilon0 * radius * voltage * voltage / (d * d);
}

void validate(const ElectrostaticConfig& cfg) {
  if (!(cfg.radius > 0.0)) throw ValidationError("electrostatic config: radius must be positive");
  if (!(cfg.series_tolerance > 0.0 && cfg.series_tolerance <= 1e-4))
    throw ValidationError("electrostatic config: series tolerance must lie in (0, 1e-4]");
  if (!(cfg.omega1 >= 0.0)) throw ValidationError("electrostatic config: omega1 must be >= 0");
  if (!std::isfinite(cfg.ac_amplitude) || !std::isfinite(cfg.residual_v0) ||
      !std::isfinite(cfg.compensation_voltage))
    throw ValidationError("electrostatic config: voltages must be finite");
}

ElectrostaticHarmonics electrostatic_harmonics(const ElectrostaticConfig& cfg, double d) {
  validate(cfg);
  ElectrostaticHarmonics h;
  h.capacitance_factor =
      electrostatic_force_exact(cfg.radius, d, 1.0, SeriesOptions{cfg.series_tolerance});
  const double dv = cfg.residual_v0 - cfg.compensation_voltage;
  const double vac = cfg.ac_amplitude;
  const double g = h.capacitance_factor;
  h.dc = g * (dv * dv + 0.5 * vac * vac);
  h.omega1_amplitude = 2.0 * g * dv * vac;
  h.two_omega1_amplitude = 0.5 * g * vac * vac;
  return h;
}

void validate(const HydroConfig& cfg) {
  if (!(cfg.viscosity > 0.0) || !std::isfinite(cfg.viscosity))
    throw ValidationError("hydrodynamic config: viscosity must be positive");
  if (cfg.slip_length && !(*cfg.slip_length >= 0.0))
    throw ValidationError("hydrodynamic config: slip length must be >= 0");
  if (!(cfg.omega2 >= 0.0) || !(cfg.modulation_amplitude >= 0.0))
    throw ValidationError("hydrodynamic config: omega2 and modulation amplitude must be >= 0");
}

double slip_factor(const HydroConfig& cfg, double d) {
  if (!cfg.slip_length || *cfg.slip_length == 0.0) return 1.0;
  const double b = *cfg.slip_length;
  const double u = d / (6.0 * b);
  return 2.0 * u * ((1.0 + u) * std::log1p(1.0 / u) - 1.0);
}

double hydrodynamic_force(const HydroConfig& cfg, double radius, double d, double gap_velocity) {
  validate(cfg);
  if (!(d > 0.0)) throw ValidationError("hydrodynamics: separation must be positive");
  if (!std::isfinite(gap_velocity)) throw ValidationError("hydrodynamics: velocity must be finite");
  return -6.0 * units::pi * cfg.viscosity * radius * radius * gap_velocity / d * slip_factor(cfg, d);
}

double hydrodynamic_quadrature_amplitude(const HydroConfig& cfg, double radius, double d) {
  return -hydrodynamic_force(cfg, radius, d, cfg.omega2 * cfg.modulation_amplitude);
}

}  // namespace casimir
