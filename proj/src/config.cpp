#include "casimir/config.hpp"

#include "casimir/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace casimir {

std::string to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "structured"; }

OutputFormat parse_output_format(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "structured") return OutputFormat::structured;
  throw ValidationError("unknown output format '" + s + "' (expected csv|structured)");
}

Eigen::ArrayXd SweepSettings::grid() const {
  if (points == 1) return Eigen::ArrayXd::Constant(1, d_min);
  if (log_spacing)
    return Eigen::ArrayXd::LinSpaced(points, std::log(d_min), std::log(d_max)).exp();
  return Eigen::ArrayXd::LinSpaced(points, d_min, d_max);
}

const LayeredMirror& PipelineConfig::mirror(const std::string& name) const {
  const auto it = mirrors.find(name);
  if (it == mirrors.end()) throw ValidationError("unknown mirror '" + name + "'");
  return it->second;
}

void validate(const PipelineConfig& cfg) {
  if (cfg.threads < 1) throw ValidationError("threads must be >= 1");
  if (!(cfg.radius > 0.0)) throw ValidationError("geometry: radius must be positive");
  validate(cfg.lifshitz.quad);
  for (const auto& [name, m] : cfg.mirrors) validate(m);

  const auto& e = cfg.epsilon;
  cfg.materials.get(e.material);
  if (!(e.xi_min > 0.0 && e.xi_max >= e.xi_min)) throw ValidationError("epsilon: need 0 < xi_min <= xi_max");
  if (e.points < 1) throw ValidationError("epsilon: points must be >= 1");

  const auto& s = cfg.sweep;
  if (!(s.d_min >= 1e-9 && s.d_max <= 10e-6 && s.d_max >= s.d_min))
    throw ValidationError("sweep: separations must satisfy 1 nm <= d_min <= d_max <= 10 um");
  if (s.points < 1) throw ValidationError("sweep: points must be >= 1");
  if (s.points > 1 && s.d_max == s.d_min) throw ValidationError("sweep: d_max must exceed d_min");
  for (const auto& [a, b] : s.pairs) {
    cfg.mirror(a);
    cfg.mirror(b);
  }

  validate(cfg.rig);
  cfg.mirror(cfg.rig.instrument.sphere);
  cfg.mirror(cfg.rig.instrument.plate);

  const auto& a = cfg.analysis;
  if (a.probes.empty()) throw ValidationError("analysis: need at least one probe separation");
  for (double p : a.probes)
    if (!(p > 0.0)) throw ValidationError("analysis: probe separations must be positive");
  if (!(a.window > 0.0)) throw ValidationError("analysis: window must be positive");
  if (a.min_curves < 2) throw ValidationError("analysis: min_curves must be >= 2");
  if (a.fit.max_iterations < 1) throw ValidationError("analysis: max_iterations must be >= 1");
}

namespace {

using Keys = std::map<std::string, std::string>;

// One INI section with its schema; every key must be consumed.
class Section {
 public:
  Section(std::string name, Keys keys) : name_(std::move(name)), keys_(std::move(keys)) {}

  void allow(std::initializer_list<const char*> allowed) const {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : keys_)
      if (!ok.count(k)) throw ValidationError(fmt::format("[{}]: unknown key '{}'", name_, k));
  }

  bool has(const std::string& key) const { return keys_.count(key) > 0; }

  std::string str(const std::string& key) const { return keys_.at(key); }

  double number(const std::string& key) const {
    const std::string& s = keys_.at(key);
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(out))
      throw ValidationError(fmt::format("[{}] {}: '{}' is not a number", name_, key, s));
    return out;
  }

  long long integer(const std::string& key) const {
    const std::string& s = keys_.at(key);
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw ValidationError(fmt::format("[{}] {}: '{}' is not an integer", name_, key, s));
    return out;
  }

  bool boolean(const std::string& key) const {
    const std::string& s = keys_.at(key);
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    throw ValidationError(fmt::format("[{}] {}: '{}' is not a boolean", name_, key, s));
  }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    std::stringstream ss(keys_.at(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      if (b == std::string::npos) continue;
      out.push_back(item.substr(b, e - b + 1));
    }
    return out;
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : list(key)) {
      Section tmp(name_, {{key, item}});
      out.push_back(tmp.number(key));
    }
    return out;
  }

  // Assigns `scale * value` when the key is present.
  void set(const std::string& key, double& target, double scale = 1.0) const {
    if (has(key)) target = number(key) * scale;
  }
  void set(const std::string& key, int& target) const {
    if (has(key)) target = static_cast<int>(integer(key));
  }
  void set(const std::string& key, std::string& target) const {
    if (has(key)) target = str(key);
  }

  const std::string& name() const { return name_; }

 private:
  std::string name_;
  Keys keys_;
};

Material parse_material(const std::string& name, const Section& s) {
  s.allow({"ideal", "drude_plasma_ev", "drude_damping_ev", "resistivity_ohm_m", "lorentz_strength",
           "lorentz_resonance_ev", "lorentz_damping_ev", "nk_table", "nk_low_extension"});
  if (s.has("ideal") && s.boolean("ideal")) return Material(name, IdealMetal{});

  Composite model;
  if (s.has("drude_plasma_ev")) {
    const double wp = units::from_ev(s.number("drude_plasma_ev"));
    double gamma = 0.0;
    if (s.has("drude_damping_ev") && s.has("resistivity_ohm_m"))
      throw ValidationError(fmt::format("[{}]: give drude_damping_ev or resistivity_ohm_m, not both", s.name()));
    if (s.has("drude_damping_ev")) gamma = units::from_ev(s.number("drude_damping_ev"));
    if (s.has("resistivity_ohm_m")) gamma = units::epsilon0 * wp * wp * s.number("resistivity_ohm_m");
    model.terms.emplace_back(Drude{wp, gamma});
  }
  if (s.has("lorentz_strength")) {
    const auto f = s.numbers("lorentz_strength");
    const auto w = s.has("lorentz_resonance_ev") ? s.numbers("lorentz_resonance_ev") : std::vector<double>{};
    auto g = s.has("lorentz_damping_ev") ? s.numbers("lorentz_damping_ev") : std::vector<double>(f.size(), 0.0);
    if (w.size() != f.size() || g.size() != f.size())
      throw ValidationError(fmt::format("[{}]: Lorentz lists differ in length", s.name()));
    LorentzPoles poles;
    for (std::size_t i = 0; i < f.size(); ++i)
      poles.poles.push_back({f[i], units::from_ev(w[i]), units::from_ev(g[i])});
    model.terms.emplace_back(std::move(poles));
  }
  if (s.has("nk_table")) {
    std::ifstream in(s.str("nk_table"));
    if (!in) throw IoError("cannot open n,k table '" + s.str("nk_table") + "'");
    auto low = LowFrequencyExtension::zero;
    if (s.has("nk_low_extension")) {
      const std::string v = s.str("nk_low_extension");
      if (v == "drude") low = LowFrequencyExtension::drude;
      else if (v != "zero") throw ValidationError(fmt::format("[{}]: nk_low_extension must be drude|zero", s.name()));
    }
    model.terms.emplace_back(ingest_nk_table(in, low));
  }
  if (model.terms.size() == 1) return Material(name, model.terms.front());
  return Material(name, std::move(model));
}

LayeredMirror parse_mirror(const std::string& name, const Section& s, const MaterialLibrary& lib) {
  s.allow({"layers", "substrate"});
  if (!s.has("substrate")) throw ValidationError(fmt::format("[{}]: substrate is required", s.name()));
  LayeredMirror m{name, {}, lib.get(s.str("substrate"))};
  if (s.has("layers")) {
    for (const auto& item : s.list("layers")) {
      const auto colon = item.find(':');
      if (colon == std::string::npos)
        throw ValidationError(fmt::format("[{}]: layer '{}' must read material:thickness_nm", s.name(), item));
      Section tmp(s.name(), {{"thickness", item.substr(colon + 1)}});
      m.layers.push_back({lib.get(item.substr(0, colon)), tmp.number("thickness") * units::nm});
    }
  }
  validate(m);
  return m;
}

}  // namespace

PipelineConfig parse_config(std::istream& source) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(source, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }

  // Section names contain dots, so the tree is walked directly rather than through paths.
  std::map<std::string, Section> sections;
  for (const auto& [name, node] : tree) {
    if (node.empty() && !node.data().empty())
      throw ValidationError(fmt::format("config: key '{}' outside any section", name));
    Keys keys;
    for (const auto& [key, value] : node) keys[key] = value.data();
    sections.emplace(name, Section(name, std::move(keys)));
  }
  static const std::set<std::string> known{"meta", "run", "lifshitz", "geometry", "epsilon",
                                           "sweep", "rig", "truth", "analysis"};
  for (const auto& [name, s] : sections)
    if (!known.count(name) && name.rfind("material.", 0) != 0 && name.rfind("mirror.", 0) != 0)
      throw ValidationError(fmt::format("config: unknown section [{}]", name));
  auto section = [&](const std::string& name) -> const Section* {
    const auto it = sections.find(name);
    return it == sections.end() ? nullptr : &it->second;
  };

  PipelineConfig cfg;
  if (const auto* s = section("meta")) {
    s->allow({"schema"});
    if (s->has("schema") && s->integer("schema") != config_schema_version)
      throw ValidationError(fmt::format("config: schema {} is not supported (expected {})",
                                        s->str("schema"), config_schema_version));
  }
  if (const auto* s = section("run")) {
    s->allow({"seed", "threads", "format"});
    if (s->has("seed")) cfg.seed = static_cast<std::uint64_t>(s->integer("seed"));
    s->set("threads", cfg.threads);
    if (s->has("format")) cfg.format = parse_output_format(s->str("format"));
  }

  for (const auto& [name, s] : sections)
    if (name.rfind("material.", 0) == 0) cfg.materials.add(parse_material(name.substr(9), s));
  cfg.mirrors = default_mirrors(cfg.materials);
  for (const auto& [name, s] : sections)
    if (name.rfind("mirror.", 0) == 0) cfg.mirrors[name.substr(7)] = parse_mirror(name.substr(7), s, cfg.materials);

  if (const auto* s = section("lifshitz")) {
    s->allow({"temperature_k", "zero_frequency", "max_terms", "tail_tolerance", "rel_tol",
              "laguerre_nodes", "max_panels"});
    CutoffPolicy cut;
    double temperature = cfg.lifshitz.grid.temperature;
    s->set("temperature_k", temperature);
    s->set("max_terms", cut.max_terms);
    s->set("tail_tolerance", cut.tail_tolerance);
    if (cut.max_terms < 1) throw ValidationError("[lifshitz] max_terms must be >= 1");
    if (!(cut.tail_tolerance > 0.0)) throw ValidationError("[lifshitz] tail_tolerance must be positive");
    cfg.lifshitz.grid = matsubara_frequencies(temperature, cut);
    if (s->has("zero_frequency")) cfg.lifshitz.policy = parse_zero_frequency_policy(s->str("zero_frequency"));
    s->set("rel_tol", cfg.lifshitz.quad.rel_tol);
    s->set("laguerre_nodes", cfg.lifshitz.quad.nodes);
    s->set("max_panels", cfg.lifshitz.quad.max_panels);
  }
  if (const auto* s = section("geometry")) {
    s->allow({"radius_um"});
    s->set("radius_um", cfg.radius, units::um);
  }
  if (const auto* s = section("epsilon")) {
    s->allow({"material", "xi_min_ev", "xi_max_ev", "points"});
    s->set("material", cfg.epsilon.material);
    s->set("xi_min_ev", cfg.epsilon.xi_min, units::ev_to_rad_per_s);
    s->set("xi_max_ev", cfg.epsilon.xi_max, units::ev_to_rad_per_s);
    s->set("points", cfg.epsilon.points);
  }
  if (const auto* s = section("sweep")) {
    s->allow({"d_min_nm", "d_max_nm", "points", "spacing", "pairs"});
    s->set("d_min_nm", cfg.sweep.d_min, units::nm);
    s->set("d_max_nm", cfg.sweep.d_max, units::nm);
    s->set("points", cfg.sweep.points);
    if (s->has("spacing")) {
      const std::string v = s->str("spacing");
      if (v != "log" && v != "linear") throw ValidationError("[sweep] spacing must be log|linear");
      cfg.sweep.log_spacing = v == "log";
    }
    if (s->has("pairs")) {
      cfg.sweep.pairs.clear();
      for (const auto& item : s->list("pairs")) {
        const auto slash = item.find('/');
        if (slash == std::string::npos)
          throw ValidationError("[sweep] pairs entries must read sphere/plate, got '" + item + "'");
        cfg.sweep.pairs.emplace_back(item.substr(0, slash), item.substr(slash + 1));
      }
    }
  }

  const Section* rig = section("rig");
  const Section* truth = section("truth");
  if (rig) {
    rig->allow({"preset", "spring_constant_n_per_m", "resonance_hz", "f1_hz", "f2_hz",
                "modulation_nm", "ac_amplitude_v", "dwell_s", "feedback_rate_hz", "feedback_gain",
                "viscosity_pa_s", "slip_length_nm", "setpoints_nm", "separation_min_nm",
                "separation_max_nm", "setpoint_count", "reapproach", "noise_calibration_v",
                "noise_inphase_v", "noise_quadrature_v", "noise_feedback_v",
                "artifact_slope_v_per_m", "sphere", "plate", "runs"});
    if (rig->has("preset")) cfg.rig = preset_config(rig->str("preset"));
  }
  bool regrid = false;
  if (truth) {
    truth->allow({"beta_v_per_n", "d0_nm", "drift_nm_per_run", "v0_offset_v", "v0_variation_v"});
    TruthParams& t = cfg.rig.truth;
    truth->set("beta_v_per_n", t.beta);
    truth->set("d0_nm", t.d0, units::nm);
    truth->set("drift_nm_per_run", t.drift_per_run, units::nm);
    truth->set("v0_offset_v", t.v0_offset);
    truth->set("v0_variation_v", t.v0_variation);
    regrid = truth->has("d0_nm");
  }
  Instrument& in = cfg.rig.instrument;
  in.radius = cfg.radius;
  in.temperature = cfg.lifshitz.grid.temperature;
  double sep_min = 60e-9, sep_max = 1100e-9;
  int count = 50;
  if (rig) {
    rig->set("spring_constant_n_per_m", in.spring_constant);
    rig->set("resonance_hz", in.resonance_hz);
    rig->set("f1_hz", in.f1_hz);
    rig->set("f2_hz", in.f2_hz);
    rig->set("modulation_nm", in.modulation_amplitude, units::nm);
    rig->set("ac_amplitude_v", in.ac_amplitude);
    rig->set("dwell_s", in.dwell_s);
    rig->set("feedback_rate_hz", in.feedback_rate_hz);
    rig->set("feedback_gain", in.feedback_gain);
    rig->set("viscosity_pa_s", in.viscosity);
    if (rig->has("slip_length_nm")) in.slip_length = rig->number("slip_length_nm") * units::nm;
    if (rig->has("reapproach")) in.reapproach = rig->boolean("reapproach");
    rig->set("noise_calibration_v", in.noise.calibration);
    rig->set("noise_inphase_v", in.noise.inphase);
    rig->set("noise_quadrature_v", in.noise.quadrature);
    rig->set("noise_feedback_v", in.noise.feedback);
    rig->set("artifact_slope_v_per_m", in.artifact_slope);
    rig->set("sphere", in.sphere);
    rig->set("plate", in.plate);
    rig->set("runs", in.runs);
    rig->set("separation_min_nm", sep_min, units::nm);
    rig->set("separation_max_nm", sep_max, units::nm);
    rig->set("setpoint_count", count);
    regrid = regrid || rig->has("separation_min_nm") || rig->has("separation_max_nm") ||
             rig->has("setpoint_count");
    if (rig->has("setpoints_nm")) {
      if (rig->has("separation_min_nm") || rig->has("separation_max_nm") || rig->has("setpoint_count"))
        throw ValidationError("[rig] give setpoints_nm or separation_min/max_nm + setpoint_count, not both");
      in.setpoints.clear();
      for (double v : rig->numbers("setpoints_nm")) in.setpoints.push_back(v * units::nm);
      regrid = false;
    }
  }
  if (regrid) in.setpoints = setpoints_for_separations(cfg.rig.truth.d0, sep_min, sep_max, count);

  if (const auto* s = section("analysis")) {
    s->allow({"weighting", "max_iterations", "probes_nm", "window_nm", "min_curves"});
    if (s->has("weighting")) cfg.analysis.fit.weighting = parse_fit_weighting(s->str("weighting"));
    s->set("max_iterations", cfg.analysis.fit.max_iterations);
    if (s->has("probes_nm")) {
      cfg.analysis.probes.clear();
      for (double v : s->numbers("probes_nm")) cfg.analysis.probes.push_back(v * units::nm);
    }
    s->set("window_nm", cfg.analysis.window, units::nm);
    s->set("min_curves", cfg.analysis.min_curves);
  }

  validate(cfg);
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return parse_config(in);
}

nlohmann::json model_to_json(const DielectricModel& model) {
  using nlohmann::json;
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Drude>) {
          return {{"type", "drude"}, {"plasma_frequency_rad_s", m.plasma_frequency},
                  {"relaxation_rate_rad_s", m.relaxation_rate}};
        } else if constexpr (std::is_same_v<T, LorentzPoles>) {
          json poles = json::array();
          for (const auto& p : m.poles)
            poles.push_back({{"strength", p.strength}, {"resonance_rad_s", p.resonance},
                             {"damping_rad_s", p.damping}});
          return {{"type", "lorentz"}, {"poles", poles}};
        } else if constexpr (std::is_same_v<T, TabulatedLoss>) {
          return {{"type", "tabulated"}, {"omega_rad_s", m.omega}, {"eps_imag", m.eps_imag},
                  {"low_extension", m.low_extension == LowFrequencyExtension::drude ? "drude" : "zero"},
                  {"high_exponent", m.high_exponent}};
        } else {
          json terms = json::array();
          for (const auto& t : m.terms) terms.push_back(model_to_json(t));
          return {{"type", "composite"}, {"terms", terms}};
        }
      },
      model.variant());
}

nlohmann::json instrument_to_json(const Instrument& in) {
  nlohmann::json j;
  j["radius_m"] = in.radius;
  j["spring_constant_n_per_m"] = in.spring_constant;
  j["resonance_hz"] = in.resonance_hz;
  j["f1_hz"] = in.f1_hz;
  j["f2_hz"] = in.f2_hz;
  j["modulation_amplitude_m"] = in.modulation_amplitude;
  j["ac_amplitude_v"] = in.ac_amplitude;
  j["dwell_s"] = in.dwell_s;
  j["feedback_rate_hz"] = in.feedback_rate_hz;
  j["feedback_gain"] = in.feedback_gain;
  j["viscosity_pa_s"] = in.viscosity;
  j["slip_length_m"] = in.slip_length ? nlohmann::json(*in.slip_length) : nlohmann::json(nullptr);
  j["temperature_k"] = in.temperature;
  j["setpoints_m"] = in.setpoints;
  j["reapproach"] = in.reapproach;
  j["noise"] = {{"calibration_v", in.noise.calibration}, {"inphase_v", in.noise.inphase},
                {"quadrature_v", in.noise.quadrature}, {"feedback_v", in.noise.feedback}};
  j["artifact_slope_v_per_m"] = in.artifact_slope;
  j["sphere"] = in.sphere;
  j["plate"] = in.plate;
  j["runs"] = in.runs;
  return j;
}

Instrument instrument_from_json(const nlohmann::json& j) {
  try {
    Instrument in;
    in.radius = j.at("radius_m").get<double>();
    in.spring_constant = j.at("spring_constant_n_per_m").get<double>();
    in.resonance_hz = j.at("resonance_hz").get<double>();
    in.f1_hz = j.at("f1_hz").get<double>();
    in.f2_hz = j.at("f2_hz").get<double>();
    in.modulation_amplitude = j.at("modulation_amplitude_m").get<double>();
    in.ac_amplitude = j.at("ac_amplitude_v").get<double>();
    in.dwell_s = j.at("dwell_s").get<double>();
    in.feedback_rate_hz = j.at("feedback_rate_hz").get<double>();
    in.feedback_gain = j.at("feedback_gain").get<double>();
    in.viscosity = j.at("viscosity_pa_s").get<double>();
    if (!j.at("slip_length_m").is_null()) in.slip_length = j.at("slip_length_m").get<double>();
    in.temperature = j.at("temperature_k").get<double>();
    in.setpoints = j.at("setpoints_m").get<std::vector<double>>();
    in.reapproach = j.at("reapproach").get<bool>();
    const auto& n = j.at("noise");
    in.noise = {n.at("calibration_v").get<double>(), n.at("inphase_v").get<double>(),
                n.at("quadrature_v").get<double>(), n.at("feedback_v").get<double>()};
    in.artifact_slope = j.at("artifact_slope_v_per_m").get<double>();
    in.sphere = j.at("sphere").get<std::string>();
    in.plate = j.at("plate").get<std::string>();
    in.runs = j.at("runs").get<int>();
    return in;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("instrument record: ") + e.what());
  }
}

nlohmann::json config_to_json(const PipelineConfig& cfg, bool include_truth) {
  using nlohmann::json;
  json j;
  j["schema"] = config_schema_version;
  // Thread count is left out: it never changes results.
  j["run"] = {{"seed", cfg.seed}, {"format", to_string(cfg.format)}};
  json materials = json::object();
  for (const auto& name : cfg.materials.names()) {
    const Material& m = cfg.materials.get(name);
    materials[name] = m.is_ideal() ? json{{"type", "ideal-metal"}} : model_to_json(m.model());
  }
  j["materials"] = materials;
  json mirrors = json::object();
  for (const auto& [name, m] : cfg.mirrors) {
    json layers = json::array();
    for (const auto& l : m.layers) layers.push_back({{"material", l.material.name()}, {"thickness_m", l.thickness}});
    mirrors[name] = {{"layers", layers}, {"substrate", m.substrate.name()}};
  }
  j["mirrors"] = mirrors;
  const auto& g = cfg.lifshitz.grid;
  j["lifshitz"] = {{"temperature_k", g.temperature}, {"zero_frequency", to_string(cfg.lifshitz.policy)},
                   {"max_terms", g.max_terms}, {"tail_tolerance", g.tail_tolerance},
                   {"rel_tol", cfg.lifshitz.quad.rel_tol}, {"laguerre_nodes", cfg.lifshitz.quad.nodes},
                   {"max_panels", cfg.lifshitz.quad.max_panels}};
  j["geometry"] = {{"radius_m", cfg.radius}};
  j["epsilon"] = {{"material", cfg.epsilon.material}, {"xi_min_rad_s", cfg.epsilon.xi_min},
                  {"xi_max_rad_s", cfg.epsilon.xi_max}, {"points", cfg.epsilon.points}};
  json pairs = json::array();
  for (const auto& [a, b] : cfg.sweep.pairs) pairs.push_back(a + "/" + b);
  j["sweep"] = {{"d_min_m", cfg.sweep.d_min}, {"d_max_m", cfg.sweep.d_max}, {"points", cfg.sweep.points},
                {"spacing", cfg.sweep.log_spacing ? "log" : "linear"}, {"pairs", pairs}};
  j["rig"] = instrument_to_json(cfg.rig.instrument);
  if (include_truth) {
    const auto& t = cfg.rig.truth;
    j["truth"] = {{"beta_v_per_n", t.beta}, {"d0_m", t.d0}, {"drift_m_per_run", t.drift_per_run},
                  {"v0_offset_v", t.v0_offset}, {"v0_variation_v", t.v0_variation}};
  }
  std::vector<double> probes = cfg.analysis.probes;
  j["analysis"] = {{"weighting", to_string(cfg.analysis.fit.weighting)},
                   {"max_iterations", cfg.analysis.fit.max_iterations},
                   {"probes_m", probes}, {"window_m", cfg.analysis.window},
                   {"min_curves", cfg.analysis.min_curves}, {"bin_rule", "freedman-diaconis"}};
  return j;
}

std::string config_hash(const PipelineConfig& cfg) {
  const std::string text = config_to_json(cfg, true).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace casimir
