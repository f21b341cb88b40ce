#pragma once

// Auxiliary sphere-plate forces: electrostatics (exact bispherical series and its harmonic
// content under AC drive) and the squeeze-film hydrodynamic drag.
//
// Forces are negative when attractive (pointing toward the plate). "Gradient" follows the
// Lifshitz module: gradient = -dF/dd, the derivative of the attractive force magnitude.

#include <optional>

namespace casimir {

struct SeriesOptions {
  double tolerance = 1e-8;  // stop when |last term| < tolerance * |partial sum|
  int max_terms = 100000;
};

/// Exact sphere-plane electrostatic force for radius R, gap d and potential difference V:
/// F = 2 pi eps0 V^2 sum_{n>=1} [coth a - n coth(n a)] / sinh(n a), cosh a = 1 + d/R.
/// Throws NumericalError for d/R < 1e-6 (series too slow) or if the term cap is reached.
double electrostatic_force_exact(double radius, double d, double voltage, SeriesOptions opt = {});

/// -dF/dd of the exact series, differentiated term by term.
double electrostatic_force_gradient(double radius, double d, double voltage, SeriesOptions opt = {});

/// PFA limits, used for checks and initial guesses.
double electrostatic_force_pfa(double radius, double d, double voltage);
double electrostatic_gradient_pfa(double radius, double d, double voltage);

struct ElectrostaticConfig {
  double radius = 100e-6;          // m
  double ac_amplitude = 0.0;       // V
  double omega1 = 0.0;             // rad/s
  double residual_v0 = 0.0;        // V, contact potential
  double compensation_voltage = 0.0;  // V, applied counter-bias
  double series_tolerance = 1e-8;
};

void validate(const ElectrostaticConfig& cfg);

/// F(t) = F_dc + omega1_amplitude cos(w1 t) + two_omega1_amplitude cos(2 w1 t) for
/// V(t) = dV + V_ac cos(w1 t) with dV = V0 - V_comp. The amplitudes are signed cosine
/// coefficients (negative for an attractive drive).
struct ElectrostaticHarmonics {
  double dc = 0.0;
  double omega1_amplitude = 0.0;
  double two_omega1_amplitude = 0.0;
  double capacitance_factor = 0.0;  // G(d) = F(d, 1 V)
};

ElectrostaticHarmonics electrostatic_harmonics(const ElectrostaticConfig& cfg, double d);

struct HydroConfig {
  double viscosity = 1.85e-5;             // Pa s, air at 300 K
  std::optional<double> slip_length;      // m; none = no-slip
  double omega2 = 0.0;                    // rad/s
  double modulation_amplitude = 0.0;      // m
};

void validate(const HydroConfig& cfg);

/// First-order slip correction to the Reynolds drag (1 without slip).
double slip_factor(const HydroConfig& cfg, double d);

/// Reynolds sphere-plate drag F = -6 pi eta R^2 v / d * f_slip(d), where v = dd/dt is the
/// rate of change of the gap.
double hydrodynamic_force(const HydroConfig& cfg, double radius, double d, double gap_velocity);

/// Amplitude of the drag for a sinusoidal gap modulation of amplitude delta at omega2. The
/// drag is in quadrature with the displacement.
double hydrodynamic_quadrature_amplitude(const HydroConfig& cfg, double radius, double d);

}  // namespace casimir
