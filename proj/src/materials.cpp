#include "casimir/materials.hpp"

#include "casimir/errors.hpp"
#include "casimir/quadrature.hpp"
#include "casimir/units.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <sstream>

namespace casimir {

DielectricModel::DielectricModel(Drude m) : model_(m) {}
DielectricModel::DielectricModel(LorentzPoles m) : model_(std::move(m)) {}
DielectricModel::DielectricModel(TabulatedLoss m) : model_(std::move(m)) {}
DielectricModel::DielectricModel(Composite m) : model_(std::move(m)) {}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

// Int_0^1 u^{p-1} / (1 + a^2 u^2) du: the high-frequency power-law tail after the
// substitution u = omega_max / omega.
double high_tail_integral(double a, double p) {
  if (p == 3.0) {
    const double a2 = a * a;
    if (a < 1e-3) return 1.0 / 3.0 - a2 / 5.0 + a2 * a2 / 7.0;
    return (1.0 - std::atan(a) / a) / a2;
  }
  const auto r = integrate_adaptive(
      [a, p](double u) { return std::pow(u, p - 1.0) / (1.0 + a * a * u * u); }, 0.0, 1.0,
      1e-12, 0.0, 200, 4);
  return r.value;
}

// Int over the piecewise-linear eps'' of omega eps'' / (omega^2 + xi^2), using only every
// `stride`-th grid point (the last point is always kept). xi = 0 gives the static integral
// Int eps''/omega.
double kk_integral(const TabulatedLoss& tab, double xi, std::size_t stride) {
  const auto& w = tab.omega;
  const auto& e = tab.eps_imag;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < w.size(); i += stride) idx.push_back(i);
  if (idx.back() != w.size() - 1) idx.push_back(w.size() - 1);

  double total = 0.0;
  const double w_lo = w[idx.front()];
  const double w_hi = w[idx.back()];

  if (tab.low_extension == LowFrequencyExtension::drude) {
    const double amp = e[idx.front()] * w_lo;  // eps'' = amp / omega below the grid
    if (amp > 0.0) {
      if (xi == 0.0) return std::numeric_limits<double>::infinity();
      total += amp / xi * std::atan(w_lo / xi);
    }
  }

  for (std::size_t j = 0; j + 1 < idx.size(); ++j) {
    const double w1 = w[idx[j]], w2 = w[idx[j + 1]];
    const double e1 = e[idx[j]], e2 = e[idx[j + 1]];
    const double slope = (e2 - e1) / (w2 - w1);
    const double intercept = e1 - slope * w1;
    if (xi == 0.0) {
      total += intercept * std::log(w2 / w1) + slope * (w2 - w1);
      continue;
    }
    const double log_part = std::log1p((w2 * w2 - w1 * w1) / (w1 * w1 + xi * xi));
    const double x1 = w1 / xi, x2 = w2 / xi;
    const double atan_diff = std::atan((x2 - x1) / (1.0 + x1 * x2));
    total += 0.5 * intercept * log_part + slope * ((w2 - w1) - xi * atan_diff);
  }

  const double e_hi = e[idx.back()];
  if (e_hi > 0.0) {
    const double a = xi / w_hi;
    total += e_hi * (xi == 0.0 ? 1.0 / tab.high_exponent : high_tail_integral(a, tab.high_exponent));
  }
  return total;
}

}  // namespace

void validate(const TabulatedLoss& tab) {
  if (tab.omega.size() < 2) throw ValidationError("tabulated loss needs at least 2 grid points");
  if (tab.omega.size() != tab.eps_imag.size())
    throw ValidationError("tabulated loss: omega and eps_imag differ in length");
  for (std::size_t i = 0; i < tab.omega.size(); ++i) {
    if (!(std::isfinite(tab.omega[i]) && tab.omega[i] > 0.0))
      throw ValidationError("tabulated loss: grid frequencies must be positive and finite");
    if (!finite_nonneg(tab.eps_imag[i]))
      throw ValidationError("tabulated loss: eps'' must be finite and >= 0");
    if (i > 0 && !(tab.omega[i] > tab.omega[i - 1]))
      throw ValidationError("tabulated loss: grid must be strictly ascending");
  }
  if (!(tab.high_exponent > 0.0 && std::isfinite(tab.high_exponent)))
    throw ValidationError("tabulated loss: high-frequency exponent must be positive");
}

void validate(const DielectricModel& model) {
  std::visit(overloaded{
                 [](const Drude& m) {
                   if (!finite_nonneg(m.plasma_frequency) || !finite_nonneg(m.relaxation_rate))
                     throw ValidationError("Drude parameters must be finite and >= 0");
                 },
                 [](const LorentzPoles& m) {
                   for (const auto& p : m.poles)
                     if (!finite_nonneg(p.strength) || !finite_nonneg(p.resonance) ||
                         !finite_nonneg(p.damping))
                       throw ValidationError("Lorentz pole parameters must be finite and >= 0");
                 },
                 [](const TabulatedLoss& m) { validate(m); },
                 [](const Composite& m) {
                   for (const auto& t : m.terms) validate(t);
                 },
             },
             model.variant());
}

KkResult kk_to_imag_axis(const TabulatedLoss& tab, double xi) {
  if (!(xi > 0.0) || !std::isfinite(xi))
    throw ValidationError("kk_to_imag_axis: xi must be positive and finite");
  validate(tab);
  const double fine = kk_integral(tab, xi, 1);
  KkResult out;
  out.value = 1.0 + 2.0 / units::pi * fine;
  if (tab.omega.size() >= 3) {
    const double coarse = kk_integral(tab, xi, 2);
    // Linear interpolation is second order, so halving the resolution quadruples the error.
    out.error_estimate = 2.0 / units::pi * std::abs(fine - coarse) / 3.0 / out.value;
  }
  out.quality_warning = out.error_estimate > 1e-6;
  return out;
}

double eval_epsilon(const DielectricModel& model, double xi) {
  if (!(xi > 0.0) || !std::isfinite(xi))
    throw ValidationError("eval_epsilon: xi must be positive and finite (xi = 0 is handled by "
                          "the zero-frequency policy)");
  return std::visit(
      overloaded{
          [xi](const Drude& m) {
            return 1.0 + m.plasma_frequency * m.plasma_frequency / (xi * (xi + m.relaxation_rate));
          },
          [xi](const LorentzPoles& m) {
            double eps = 1.0;
            for (const auto& p : m.poles) {
              const double w2 = p.resonance * p.resonance;
              if (w2 == 0.0) continue;
              eps += p.strength * w2 / (w2 + xi * xi + p.damping * xi);
            }
            return eps;
          },
          [xi](const TabulatedLoss& m) { return kk_to_imag_axis(m, xi).value; },
          [xi](const Composite& m) {
            double eps = 1.0;
            for (const auto& t : m.terms) eps += eval_epsilon(t, xi) - 1.0;
            return eps;
          },
      },
      model.variant());
}

StaticResponse static_response(const DielectricModel& model) {
  return std::visit(
      overloaded{
          [](const Drude& m) {
            StaticResponse s;
            if (m.plasma_frequency > 0.0) {
              const double wp2 = m.plasma_frequency * m.plasma_frequency;
              s.conductor = true;
              s.dc_weight = m.relaxation_rate > 0.0 ? wp2 / m.relaxation_rate
                                                    : std::numeric_limits<double>::infinity();
              s.plasma_frequency_sq = wp2;
            }
            return s;
          },
          [](const LorentzPoles& m) {
            StaticResponse s;
            for (const auto& p : m.poles)
              if (p.resonance > 0.0) s.permittivity += p.strength;
            return s;
          },
          [](const TabulatedLoss& m) {
            validate(m);
            StaticResponse s;
            if (m.low_extension == LowFrequencyExtension::drude && m.eps_imag.front() > 0.0) {
              s.conductor = true;
              s.dc_weight = m.eps_imag.front() * m.omega.front();
            } else {
              s.permittivity = 1.0 + 2.0 / units::pi * kk_integral(m, 0.0, 1);
            }
            return s;
          },
          [](const Composite& m) {
            StaticResponse s;
            for (const auto& t : m.terms) {
              const StaticResponse r = static_response(t);
              s.conductor = s.conductor || r.conductor;
              s.permittivity += r.permittivity - 1.0;
              s.dc_weight += r.dc_weight;
              s.plasma_frequency_sq += r.plasma_frequency_sq;
            }
            return s;
          },
      },
      model.variant());
}

TabulatedLoss ingest_nk_table(std::istream& source, LowFrequencyExtension low) {
  std::string line;
  int col_abscissa = -1, col_n = -1, col_k = -1;
  NkAbscissa abscissa = NkAbscissa::wavelength_nm;
  bool have_header = false;
  std::vector<std::pair<double, double>> rows;  // (omega, eps'')

  auto split = [](const std::string& s) {
    std::string t = s;
    std::replace_if(t.begin(), t.end(), [](char c) { return c == ',' || c == ';' || c == '\t'; },
                    ' ');
    std::istringstream is(t);
    std::vector<std::string> out;
    for (std::string tok; is >> tok;) out.push_back(tok);
    return out;
  };

  int line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto fields = split(line);
    if (!have_header) {
      for (int i = 0; i < static_cast<int>(fields.size()); ++i) {
        if (fields[i] == "wavelength_nm") {
          col_abscissa = i;
          abscissa = NkAbscissa::wavelength_nm;
        } else if (fields[i] == "omega_rad_s") {
          col_abscissa = i;
          abscissa = NkAbscissa::omega_rad_s;
        } else if (fields[i] == "n") {
          col_n = i;
        } else if (fields[i] == "k") {
          col_k = i;
        }
      }
      if (col_abscissa < 0)
        throw ValidationError("n,k table: header must declare wavelength_nm or omega_rad_s");
      if (col_n < 0 || col_k < 0) throw ValidationError("n,k table: header must declare n and k");
      have_header = true;
      continue;
    }
    const int needed = std::max({col_abscissa, col_n, col_k}) + 1;
    if (static_cast<int>(fields.size()) < needed)
      throw ValidationError("n,k table: too few columns on line " + std::to_string(line_no));
    double x, n, k;
    try {
      x = std::stod(fields[col_abscissa]);
      n = std::stod(fields[col_n]);
      k = std::stod(fields[col_k]);
    } catch (const std::exception&) {
      throw ValidationError("n,k table: unparsable number on line " + std::to_string(line_no));
    }
    if (!(x > 0.0) || !std::isfinite(x))
      throw ValidationError("n,k table: abscissa must be positive on line " +
                            std::to_string(line_no));
    if (n < 0.0 || k < 0.0 || !std::isfinite(n) || !std::isfinite(k))
      throw ValidationError("n,k table: negative n or k on line " + std::to_string(line_no));
    const double omega = abscissa == NkAbscissa::wavelength_nm
                             ? 2.0 * units::pi * units::speed_of_light / (x * units::nm)
                             : x;
    rows.emplace_back(omega, 2.0 * n * k);
  }
  if (!have_header) throw ValidationError("n,k table: missing header / unit convention");
  if (rows.size() < 2) throw ValidationError("n,k table: need at least 2 rows");

  std::sort(rows.begin(), rows.end());
  TabulatedLoss tab;
  tab.low_extension = low;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].first == rows[i - 1].first)
      throw ValidationError("n,k table: duplicate frequency");
    tab.omega.push_back(rows[i].first);
    tab.eps_imag.push_back(rows[i].second);
  }
  return tab;
}

Material::Material(std::string name, DielectricModel model)
    : name_(std::move(name)), medium_(std::move(model)) {
  validate(std::get<DielectricModel>(medium_));
}

Material::Material(std::string name, IdealMetal) : name_(std::move(name)), medium_(IdealMetal{}) {}

const DielectricModel& Material::model() const {
  if (is_ideal()) throw ValidationError("material '" + name_ + "' is the ideal-metal sentinel");
  return std::get<DielectricModel>(medium_);
}

void MaterialLibrary::add(Material material) {
  const std::string key = material.name();
  materials_.insert_or_assign(key, std::move(material));
}

bool MaterialLibrary::contains(const std::string& name) const { return materials_.count(name) > 0; }

const Material& MaterialLibrary::get(const std::string& name) const {
  const auto it = materials_.find(name);
  if (it == materials_.end()) throw ValidationError("unknown material '" + name + "'");
  return it->second;
}

std::vector<std::string> MaterialLibrary::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : materials_) out.push_back(k);
  return out;
}

namespace defaults {

DielectricModel gold() {
  return Drude{units::from_ev(gold_plasma_ev), units::from_ev(gold_damping_ev)};
}

DielectricModel ito() {
  const double wp = units::from_ev(ito_plasma_ev);
  // DC limit of the Drude term: sigma = eps0 wp^2 / gamma = 1 / rho.
  const double gamma = units::epsilon0 * wp * wp * ito_resistivity_ohm_m;
  return Composite{{Drude{wp, gamma},
                    LorentzPoles{{{ito_pole_strength, units::from_ev(ito_pole_resonance_ev), 0.0}}}}};
}

DielectricModel glass() {
  return LorentzPoles{{{glass_pole_strength, glass_pole_resonance, 0.0}}};
}

DielectricModel vacuum() { return Composite{}; }

}  // namespace defaults

MaterialLibrary MaterialLibrary::defaults() {
  MaterialLibrary lib;
  lib.add(Material("gold", defaults::gold()));
  lib.add(Material("ito", defaults::ito()));
  lib.add(Material("glass", defaults::glass()));
  lib.add(Material("vacuum", defaults::vacuum()));
  lib.add(Material("ideal-metal", IdealMetal{}));
  return lib;
}

}  // namespace casimir
