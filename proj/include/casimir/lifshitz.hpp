#pragma once

// Finite-temperature Lifshitz theory between planar layered mirrors, and the sphere-plate
// force through the proximity force approximation (PFA).
//
// Sign conventions:
//   pressure P < 0 and free energy E < 0 mean attraction;
//   sphere-plate force F = 2 pi R E(d) (negative = attractive);
//   sphere-plate force gradient F' = 2 pi R P(d) = -dF/dd, i.e. the derivative of the
//   attractive force magnitude. It is negative and |F'| is what a force-gradient
//   measurement reports.

#include "casimir/materials.hpp"

#include <Eigen/Core>

#include <map>
#include <string>
#include <vector>

namespace casimir {

enum class ZeroFrequencyPolicy { drude, plasma };

std::string to_string(ZeroFrequencyPolicy p);
ZeroFrequencyPolicy parse_zero_frequency_policy(const std::string& s);

struct Layer {
  Material material;
  double thickness = 0.0;  // m
};

/// Films (outermost first) on a semi-infinite substrate, facing a vacuum gap.
struct LayeredMirror {
  std::string name;
  std::vector<Layer> layers;
  Material substrate;
};

void validate(const LayeredMirror& mirror);

LayeredMirror half_space(const Material& material);

/// Named mirrors built from a material library: every material as a half-space, plus
/// "ito-on-glass" (190 nm ITO film on float glass) when ito and glass are present.
std::map<std::string, LayeredMirror> default_mirrors(const MaterialLibrary& lib);

struct Reflection {
  double te = 0.0;
  double tm = 0.0;
};

/// Imaginary-frequency Fresnel coefficients at (xi, k). xi = 0 uses the zero-frequency
/// policy forms; the ideal-metal sentinel yields (te, tm) = (-1, +1) everywhere.
Reflection reflection_coefficients(const LayeredMirror& mirror, double xi, double k,
                                   ZeroFrequencyPolicy policy = ZeroFrequencyPolicy::drude);

struct MatsubaraGrid {
  double temperature = 300.0;  // K
  double spacing = 0.0;        // xi_1, rad/s
  int max_terms = 2000;        // hard cap on l
  double tail_tolerance = 1e-8;

  double frequency(int l) const { return spacing * l; }
};

struct CutoffPolicy {
  int max_terms = 2000;
  double tail_tolerance = 1e-8;
};

MatsubaraGrid matsubara_frequencies(double temperature, CutoffPolicy policy = {});

struct QuadratureSpec {
  /// Order of the Gauss-Laguerre rule used beyond the adaptive window.
  int nodes = 16;
  double rel_tol = 1e-6;
  /// Panel budget of the adaptive Gauss-Kronrod window, per Matsubara term.
  int max_panels = 400;
};

void validate(const QuadratureSpec& q);

struct LifshitzResult {
  double value = 0.0;
  double error_estimate = 0.0;  // relative
  int terms = 0;                // Matsubara terms summed explicitly
  bool tail_completed = false;  // cap hit; remainder integrated continuously
};

struct LifshitzOptions {
  MatsubaraGrid grid = matsubara_frequencies(300.0);
  QuadratureSpec quad{};
  ZeroFrequencyPolicy policy = ZeroFrequencyPolicy::drude;
};

/// Casimir pressure between parallel plates (Pa). Throws NumericalError carrying the
/// achieved error estimate if the panel budget is exhausted.
LifshitzResult plate_plate_pressure(const LayeredMirror& m1, const LayeredMirror& m2, double d,
                                    const LifshitzOptions& opt = {});

/// Casimir free energy per unit area (J/m^2).
LifshitzResult plate_plate_free_energy(const LayeredMirror& m1, const LayeredMirror& m2, double d,
                                       const LifshitzOptions& opt = {});

struct SpherePlateResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool pfa_warning = false;  // d / R > 0.05
};

inline constexpr double pfa_validity_limit = 0.05;

SpherePlateResult sphere_plate_force(double radius, double d, const LayeredMirror& sphere,
                                     const LayeredMirror& plate, const LifshitzOptions& opt = {});
SpherePlateResult sphere_plate_force_gradient(double radius, double d, const LayeredMirror& sphere,
                                              const LayeredMirror& plate,
                                              const LifshitzOptions& opt = {});

/// Theory curve over a separation grid, evaluated in parallel over d. Each separation is an
/// independent pure computation with a fixed reduction order, so the result does not depend
/// on the thread count.
struct TheoryCurve {
  Eigen::ArrayXd separation;  // m
  Eigen::ArrayXd pressure;    // Pa
  Eigen::ArrayXd energy;      // J/m^2
  Eigen::ArrayXd force;       // N
  Eigen::ArrayXd gradient;    // N/m
  std::vector<bool> pfa_warning;
};

TheoryCurve compute_theory_curve(const LayeredMirror& sphere, const LayeredMirror& plate,
                                 double radius, const Eigen::ArrayXd& separations,
                                 const LifshitzOptions& opt = {}, int threads = 1);

}  // namespace casimir
