#include "casimir/lifshitz.hpp"

#include "casimir/errors.hpp"
#include "casimir/parallel.hpp"
#include "casimir/quadrature.hpp"
#include "casimir/units.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace casimir {

std::string to_string(ZeroFrequencyPolicy p) {
  return p == ZeroFrequencyPolicy::drude ? "drude" : "plasma";
}

ZeroFrequencyPolicy parse_zero_frequency_policy(const std::string& s) {
  if (s == "drude") return ZeroFrequencyPolicy::drude;
  if (s == "plasma") return ZeroFrequencyPolicy::plasma;
  throw ValidationError("unknown zero-frequency policy '" + s + "' (expected drude|plasma)");
}

void validate(const LayeredMirror& mirror) {
  for (const auto& layer : mirror.layers)
    if (!(layer.thickness > 0.0) || !std::isfinite(layer.thickness))
      throw ValidationError("mirror '" + mirror.name + "': layer thickness must be positive");
}

LayeredMirror half_space(const Material& material) {
  return LayeredMirror{material.name(), {}, material};
}

std::map<std::string, LayeredMirror> default_mirrors(const MaterialLibrary& lib) {
  std::map<std::string, LayeredMirror> out;
  for (const auto& name : lib.names()) out.emplace(name, half_space(lib.get(name)));
  if (lib.contains("ito") && lib.contains("glass"))
    out["ito-on-glass"] =
        LayeredMirror{"ito-on-glass", {{lib.get("ito"), defaults::ito_film_thickness}}, lib.get("glass")};
  return out;
}

void validate(const QuadratureSpec& q) {
  if (!(q.rel_tol > 0.0 && q.rel_tol <= 1e-3))
    throw ValidationError("quadrature tolerance must lie in (0, 1e-3]");
  if (q.nodes < 8) throw ValidationError("quadrature node count must be >= 8");
  if (q.max_panels < 4) throw ValidationError("quadrature panel budget must be >= 4");
}

MatsubaraGrid matsubara_frequencies(double temperature, CutoffPolicy policy) {
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    throw ValidationError("temperature must be positive");
  MatsubaraGrid g;
  g.temperature = temperature;
  g.spacing = 2.0 * units::pi * units::boltzmann * temperature / units::hbar;
  g.max_terms = policy.max_terms;
  g.tail_tolerance = policy.tail_tolerance;
  return g;
}

namespace {

// One medium of a mirror, sampled at a fixed imaginary frequency.
struct SampledMedium {
  bool ideal = false;
  double eps = 1.0;            // eps(i xi), xi > 0
  StaticResponse statics{};    // xi = 0
};

struct SampledMirror {
  std::vector<SampledMedium> media;  // layers then substrate; truncated at the first ideal medium
  std::vector<double> thickness;     // one per layer (media.size() - 1 entries)
  double xi = 0.0;
  ZeroFrequencyPolicy policy = ZeroFrequencyPolicy::drude;
};

SampledMedium sample_medium(const Material& m, double xi) {
  SampledMedium s;
  if (m.is_ideal()) {
    s.ideal = true;
    return s;
  }
  if (xi > 0.0)
    s.eps = eval_epsilon(m.model(), xi);
  else
    s.statics = static_response(m.model());
  return s;
}

SampledMirror sample_mirror(const LayeredMirror& mirror, double xi, ZeroFrequencyPolicy policy) {
  SampledMirror out;
  out.xi = xi;
  out.policy = policy;
  for (const auto& layer : mirror.layers) {
    out.media.push_back(sample_medium(layer.material, xi));
    if (out.media.back().ideal) return out;
    out.thickness.push_back(layer.thickness);
  }
  out.media.push_back(sample_medium(mirror.substrate, xi));
  return out;
}

double clamped_decay(double exponent) {
  // exp(-x) for x >= 0 without producing denormal noise or NaN.
  if (!(exponent < 700.0)) return 0.0;
  return std::exp(-exponent);
}

// Interface reflection from medium a (above) to medium b (below) at xi = 0, TM polarization.
double static_tm_interface(const SampledMedium* a, const SampledMedium& b, ZeroFrequencyPolicy p) {
  const StaticResponse vac{};
  const StaticResponse& sa = a ? a->statics : vac;
  const StaticResponse& sb = b.statics;
  if (!sa.conductor && !sb.conductor)
    return (sb.permittivity - sa.permittivity) / (sb.permittivity + sa.permittivity);
  if (sb.conductor && !sa.conductor) return 1.0;
  if (sa.conductor && !sb.conductor) return -1.0;
  const double wa = p == ZeroFrequencyPolicy::drude ? sa.dc_weight : sa.plasma_frequency_sq;
  const double wb = p == ZeroFrequencyPolicy::drude ? sb.dc_weight : sb.plasma_frequency_sq;
  if (std::isinf(wa) && std::isinf(wb)) return 0.0;
  if (std::isinf(wb)) return 1.0;
  if (std::isinf(wa)) return -1.0;
  return (wb - wa) / (wb + wa);
}

// Bottom-up two-interface recursion. q = sqrt(k^2 + xi^2/c^2) is the vacuum wavevector.
Reflection reflect(const SampledMirror& sm, double q) {
  const std::size_t n = sm.media.size();
  if (n == 1 && sm.media[0].ideal) return {-1.0, 1.0};

  const double xi_c = sm.xi / units::speed_of_light;
  const double xi_c2 = xi_c * xi_c;

  // Normal wavevector in each medium (index -1 is the vacuum gap).
  auto kappa = [&](std::size_t i) {
    const SampledMedium& m = sm.media[i];
    if (sm.xi > 0.0) return std::sqrt(q * q + (m.eps - 1.0) * xi_c2);
    if (sm.policy == ZeroFrequencyPolicy::plasma && m.statics.conductor)
      return std::sqrt(q * q + m.statics.plasma_frequency_sq /
                                   (units::speed_of_light * units::speed_of_light));
    return q;
  };
  auto kappa_te = [&](std::size_t i) { return kappa(i); };
  auto kappa_tm = [&](std::size_t i) { return sm.xi > 0.0 ? kappa(i) : q; };

  auto interface = [&](std::ptrdiff_t above, std::size_t below) -> Reflection {
    const SampledMedium& b = sm.media[below];
    if (b.ideal) return {-1.0, 1.0};
    const double ka_te = above < 0 ? q : kappa_te(static_cast<std::size_t>(above));
    const double kb_te = kappa_te(below);
    Reflection r;
    if (sm.xi == 0.0 && sm.policy == ZeroFrequencyPolicy::drude)
      r.te = 0.0;
    else
      r.te = (ka_te - kb_te) / (ka_te + kb_te);
    if (sm.xi > 0.0) {
      const double ea = above < 0 ? 1.0 : sm.media[static_cast<std::size_t>(above)].eps;
      const double ka = above < 0 ? q : kappa_tm(static_cast<std::size_t>(above));
      const double kb = kappa_tm(below);
      r.tm = (b.eps * ka - ea * kb) / (b.eps * ka + ea * kb);
    } else {
      const SampledMedium* a = above < 0 ? nullptr : &sm.media[static_cast<std::size_t>(above)];
      r.tm = static_tm_interface(a, b, sm.policy);
    }
    return r;
  };

  Reflection r = interface(static_cast<std::ptrdiff_t>(n) - 2, n - 1);
  for (std::ptrdiff_t j = static_cast<std::ptrdiff_t>(n) - 2; j >= 0; --j) {
    const auto layer = static_cast<std::size_t>(j);
    const Reflection top = interface(j - 1, layer);
    const double e_te = clamped_decay(2.0 * kappa_te(layer) * sm.thickness[layer]);
    const double e_tm = clamped_decay(2.0 * kappa_tm(layer) * sm.thickness[layer]);
    r.te = (top.te + r.te * e_te) / (1.0 + top.te * r.te * e_te);
    r.tm = (top.tm + r.tm * e_tm) / (1.0 + top.tm * r.tm * e_tm);
  }
  return r;
}

enum class Quantity { pressure, energy };

// Integrand in y = 2 q d, multiplied by e^{shift}. For the pressure
//   y^2 R e^{-y} / (1 - R e^{-y}),
// for the energy
//   y ln(1 - R e^{-y}),
// summed over both polarizations.
struct Integrand {
  const SampledMirror* a;
  const SampledMirror* b;
  double d;
  Quantity quantity;
  double shift = 0.0;

  double operator()(double y) const {
    const double q = y / (2.0 * d);
    const Reflection ra = reflect(*a, q);
    const Reflection rb = reflect(*b, q);
    const double rs[2] = {ra.te * rb.te, ra.tm * rb.tm};
    const double decay = std::exp(-y);
    double total = 0.0;
    for (double r : rs) {
      if (r == 0.0) continue;
      if (quantity == Quantity::pressure) {
        // e^{y} - R written to stay accurate when R -> 1 and y -> 0.
        const double denom = std::expm1(y) + (1.0 - r);
        total += y * y * r * std::exp(shift) / denom;
      } else {
        total += y * std::log1p(-r * decay) * std::exp(shift);
      }
    }
    return total;
  }
};

constexpr double window_width = 30.0;

struct TermResult {
  double value = 0.0;
  double abs_error = 0.0;
  bool converged = true;
};

// Int_{y0}^{inf} integrand dy: adaptive Gauss-Kronrod over [y0, y0 + W], Gauss-Laguerre beyond.
TermResult frequency_integral(const SampledMirror& a, const SampledMirror& b, double d, double y0,
                              Quantity quantity, const QuadratureSpec& quad,
                              const GaussRule& laguerre) {
  TermResult out;
  Integrand f{&a, &b, d, quantity, 0.0};
  const auto window = integrate_adaptive(f, y0, y0 + window_width, quad.rel_tol, 0.0,
                                         quad.max_panels, 4);
  const double start = y0 + window_width;
  double tail = 0.0;
  for (Eigen::Index i = 0; i < laguerre.nodes.size(); ++i) {
    Integrand g{&a, &b, d, quantity, laguerre.nodes[i]};
    tail += laguerre.weights[i] * g(start + laguerre.nodes[i]);
  }
  out.value = window.value + tail;
  out.abs_error = window.error;
  out.converged = window.converged;
  return out;
}

// (1/(8 d^3)) and (1/(4 d^2)) Jacobians of the y substitution times the thermal prefactor.
double prefactor(Quantity quantity, double temperature, double d) {
  const double kt = units::boltzmann * temperature;
  if (quantity == Quantity::pressure) return -kt / units::pi / (8.0 * d * d * d);
  return kt / (2.0 * units::pi) / (4.0 * d * d);
}

LifshitzResult lifshitz_sum(const LayeredMirror& m1, const LayeredMirror& m2, double d,
                            const LifshitzOptions& opt, Quantity quantity) {
  if (!(d >= 1e-9 && d <= 1e-5))
    throw ValidationError(fmt::format("separation {:.4g} m outside [1 nm, 10 um]", d));
  validate(m1);
  validate(m2);
  validate(opt.quad);
  const MatsubaraGrid& grid = opt.grid;
  if (!(grid.spacing > 0.0)) throw ValidationError("Matsubara grid not initialised");
  if (grid.max_terms < 1) throw ValidationError("Matsubara cap must be >= 1");

  const GaussRule laguerre = gauss_laguerre(opt.quad.nodes);
  const double y_per_l = 2.0 * grid.spacing * d / units::speed_of_light;

  auto term_at = [&](double xi, double y0) {
    const SampledMirror a = sample_mirror(m1, xi, opt.policy);
    const SampledMirror b = sample_mirror(m2, xi, opt.policy);
    TermResult t = frequency_integral(a, b, d, y0, quantity, opt.quad, laguerre);
    if (!t.converged) {
      const double rel = t.value != 0.0 ? t.abs_error / std::abs(t.value) : t.abs_error;
      throw NumericalError(
          fmt::format("Lifshitz quadrature did not converge at xi = {:.4g} rad/s, d = {:.4g} m "
                      "(achieved relative error {:.3g})",
                      xi, d, rel),
          rel);
    }
    return t;
  };

  std::vector<double> terms;
  std::vector<double> errors;
  double partial = 0.0;
  double tail_estimate = 0.0;
  bool converged = false;
  for (int l = 0; l <= grid.max_terms; ++l) {
    const double weight = l == 0 ? 0.5 : 1.0;
    const TermResult t = term_at(grid.frequency(l), y_per_l * l);
    terms.push_back(weight * t.value);
    errors.push_back(weight * t.abs_error);
    partial += terms.back();
    if (l >= 5) {
      const double last = terms[l];
      const double earlier = terms[l - 4];
      if (last == 0.0 && partial == 0.0) {
        converged = true;
        break;
      }
      if (earlier != 0.0 && last / earlier > 0.0 && std::abs(last) < std::abs(earlier)) {
        const double ratio = std::pow(last / earlier, 0.25);
        tail_estimate = std::abs(last) * ratio / (1.0 - ratio);
        if (tail_estimate < grid.tail_tolerance * std::abs(partial)) {
          converged = true;
          break;
        }
      }
    }
  }

  LifshitzResult out;
  out.terms = static_cast<int>(terms.size());
  double sum = pairwise_sum(terms);
  double abs_error = pairwise_sum(errors);

  if (!converged) {
    // Midpoint (Euler-Maclaurin) completion: sum_{l > L} f(l) ~ Int_{L+1/2}^inf f(u) du,
    // integrated in v = u * y_per_l where the integrand decays like e^{-v}.
    const double v_start = (grid.max_terms + 0.5) * y_per_l;
    auto g = [&](double v) { return term_at(v / y_per_l * grid.spacing, v).value; };
    const auto window = integrate_adaptive(g, v_start, v_start + 40.0, opt.quad.rel_tol, 0.0,
                                           opt.quad.max_panels, 4);
    double far = 0.0;
    for (Eigen::Index i = 0; i < laguerre.nodes.size(); ++i) {
      const double v = v_start + 40.0 + laguerre.nodes[i];
      far += laguerre.weights[i] * std::exp(laguerre.nodes[i]) * g(v);
    }
    const double tail = (window.value + far) / y_per_l;
    sum += tail;
    abs_error += window.error / y_per_l;
    out.tail_completed = true;
    tail_estimate = 0.0;
  }

  out.value = prefactor(quantity, grid.temperature, d) * sum;
  out.error_estimate = sum != 0.0 ? (abs_error + tail_estimate) / std::abs(sum) : 0.0;
  return out;
}

}  // namespace

Reflection reflection_coefficients(const LayeredMirror& mirror, double xi, double k,
                                   ZeroFrequencyPolicy policy) {
  if (!(xi >= 0.0) || !std::isfinite(xi)) throw ValidationError("reflection: xi must be >= 0");
  if (!(k > 0.0) || !std::isfinite(k)) throw ValidationError("reflection: k must be > 0");
  validate(mirror);
  const SampledMirror sm = sample_mirror(mirror, xi, policy);
  const double xi_c = xi / units::speed_of_light;
  return reflect(sm, std::hypot(k, xi_c));
}

LifshitzResult plate_plate_pressure(const LayeredMirror& m1, const LayeredMirror& m2, double d,
                                    const LifshitzOptions& opt) {
  return lifshitz_sum(m1, m2, d, opt, Quantity::pressure);
}

LifshitzResult plate_plate_free_energy(const LayeredMirror& m1, const LayeredMirror& m2, double d,
                                       const LifshitzOptions& opt) {
  return lifshitz_sum(m1, m2, d, opt, Quantity::energy);
}

namespace {
void check_radius(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw ValidationError("sphere radius must be positive");
}
}  // namespace

SpherePlateResult sphere_plate_force(double radius, double d, const LayeredMirror& sphere,
                                     const LayeredMirror& plate, const LifshitzOptions& opt) {
  check_radius(radius);
  const LifshitzResult e = plate_plate_free_energy(sphere, plate, d, opt);
  return {2.0 * units::pi * radius * e.value, e.error_estimate, d / radius > pfa_validity_limit};
}

SpherePlateResult sphere_plate_force_gradient(double radius, double d, const LayeredMirror& sphere,
                                              const LayeredMirror& plate,
                                              const LifshitzOptions& opt) {
  check_radius(radius);
  const LifshitzResult p = plate_plate_pressure(sphere, plate, d, opt);
  return {2.0 * units::pi * radius * p.value, p.error_estimate, d / radius > pfa_validity_limit};
}

TheoryCurve compute_theory_curve(const LayeredMirror& sphere, const LayeredMirror& plate,
                                 double radius, const Eigen::ArrayXd& separations,
                                 const LifshitzOptions& opt, int threads) {
  check_radius(radius);
  const auto n = separations.size();
  TheoryCurve c;
  c.separation = separations;
  c.pressure.resize(n);
  c.energy.resize(n);
  c.pfa_warning.assign(static_cast<std::size_t>(n), false);
  parallel_for(static_cast<int>(n), threads, [&](int i) {
    const double d = separations[i];
    c.pressure[i] = plate_plate_pressure(sphere, plate, d, opt).value;
    c.energy[i] = plate_plate_free_energy(sphere, plate, d, opt).value;
  });
  c.force = 2.0 * units::pi * radius * c.energy;
  c.gradient = 2.0 * units::pi * radius * c.pressure;
  for (Eigen::Index i = 0; i < n; ++i)
    c.pfa_warning[static_cast<std::size_t>(i)] = separations[i] / radius > pfa_validity_limit;
  return c;
}

}  // namespace casimir
