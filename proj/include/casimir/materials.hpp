#pragma once

// Dielectric response on the imaginary frequency axis.
//
// Every model is evaluated as eps(i xi) for xi > 0 in rad/s. The value is real, >= 1 and
// non-increasing in xi for passive media. The xi = 0 limit is never taken through
// eval_epsilon; callers that need it (the Lifshitz l = 0 term) use static_response().

#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace casimir {

struct Drude {
  double plasma_frequency = 0.0;  // rad/s
  double relaxation_rate = 0.0;   // rad/s
};

struct LorentzPole {
  double strength = 0.0;   // oscillator strength f, dimensionless
  double resonance = 0.0;  // rad/s
  double damping = 0.0;    // rad/s
};

struct LorentzPoles {
  std::vector<LorentzPole> poles;
};

/// Below the lowest tabulated frequency eps'' is either continued as A/omega
/// (conductor) or set to zero (insulator).
enum class LowFrequencyExtension { drude, zero };

struct TabulatedLoss {
  std::vector<double> omega;     // strictly ascending, rad/s
  std::vector<double> eps_imag;  // eps''(omega) >= 0
  LowFrequencyExtension low_extension = LowFrequencyExtension::zero;
  /// Above the grid eps'' decays as (omega_max / omega)^high_exponent.
  double high_exponent = 3.0;
};

class DielectricModel;

/// Sum of susceptibilities: eps = 1 + sum(eps_i - 1).
struct Composite {
  std::vector<DielectricModel> terms;
};

class DielectricModel {
 public:
  using Variant = std::variant<Drude, LorentzPoles, TabulatedLoss, Composite>;

  DielectricModel() : model_(Composite{}) {}
  DielectricModel(Drude m);
  DielectricModel(LorentzPoles m);
  DielectricModel(TabulatedLoss m);
  DielectricModel(Composite m);

  const Variant& variant() const { return model_; }

 private:
  Variant model_;
};

/// Throws ValidationError when the model violates its invariants
/// (negative strengths, non-ascending grids, ...).
void validate(const DielectricModel& model);
void validate(const TabulatedLoss& tab);

double eval_epsilon(const DielectricModel& model, double xi);

struct KkResult {
  double value = 1.0;
  double error_estimate = 0.0;  // relative
  bool quality_warning = false;
};

/// Kramers-Kronig continuation of tabulated absorption onto the imaginary axis:
/// eps(i xi) = 1 + (2/pi) Int_0^inf omega eps''(omega) / (omega^2 + xi^2) d omega.
/// eps'' is interpolated linearly between grid points and each segment is integrated in
/// closed form, so the only error is the interpolation error. That error is estimated from
/// the half-resolution grid; above 1e-6 relative the result carries a quality warning.
KkResult kk_to_imag_axis(const TabulatedLoss& tab, double xi);

/// Low-frequency behaviour used by the zero-frequency Lifshitz term.
struct StaticResponse {
  bool conductor = false;
  /// Finite static permittivity for insulators.
  double permittivity = 1.0;
  /// Sum of omega_p^2 / gamma over conducting terms; proportional to the DC conductivity.
  double dc_weight = 0.0;
  /// Sum of omega_p^2 over Drude terms (plasma-model screening).
  double plasma_frequency_sq = 0.0;
};

StaticResponse static_response(const DielectricModel& model);

/// Column convention of an n,k table.
enum class NkAbscissa { wavelength_nm, omega_rad_s };

/// Parses a delimited n,k table. The first non-comment line is a header naming the columns
/// (wavelength_nm or omega_rad_s, n, k, in any order). Returns eps'' = 2nk on an ascending
/// omega grid.
TabulatedLoss ingest_nk_table(std::istream& source,
                              LowFrequencyExtension low = LowFrequencyExtension::zero);

/// Marker for a perfect reflector. Never evaluated as a dielectric function.
struct IdealMetal {};

class Material {
 public:
  Material() = default;
  Material(std::string name, DielectricModel model);
  Material(std::string name, IdealMetal);

  const std::string& name() const { return name_; }
  bool is_ideal() const { return std::holds_alternative<IdealMetal>(medium_); }
  /// Throws ValidationError for the ideal-metal sentinel.
  const DielectricModel& model() const;

 private:
  std::string name_;
  std::variant<DielectricModel, IdealMetal> medium_;
};

class MaterialLibrary {
 public:
  /// Bundled materials: gold, ito, glass, vacuum, ideal-metal.
  static MaterialLibrary defaults();

  void add(Material material);
  bool contains(const std::string& name) const;
  /// Throws ValidationError for unknown names.
  const Material& get(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, Material> materials_;
};

namespace defaults {

// Gold: literature-typical Drude parameters.
inline constexpr double gold_plasma_ev = 9.0;
inline constexpr double gold_damping_ev = 0.035;

// ITO: resistivity 1.6e-4 Ohm cm fixes omega_p^2 / gamma; an interband pole supplies the
// UV background (eps_inf = 3).
inline constexpr double ito_resistivity_ohm_m = 1.6e-6;
inline constexpr double ito_plasma_ev = 1.2;
inline constexpr double ito_pole_strength = 2.0;
inline constexpr double ito_pole_resonance_ev = 5.0;
inline constexpr double ito_film_thickness = 190e-9;

// Float glass: one UV pole, eps(0) = 2.1.
inline constexpr double glass_pole_strength = 1.1;
inline constexpr double glass_pole_resonance = 1.6e16;

DielectricModel gold();
DielectricModel ito();
DielectricModel glass();
DielectricModel vacuum();

}  // namespace defaults

}  // namespace casimir
