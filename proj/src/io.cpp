#include "casimir/io.hpp"

#include "casimir/errors.hpp"
#include "casimir/units.hpp"

#include <fmt/format.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace casimir {

using nlohmann::json;

std::string version_string() { return CASIMIR_VERSION; }

json output_meta(const PipelineConfig& cfg) {
  return {{"version", version_string()}, {"config_hash", config_hash(cfg)}, {"config", config_to_json(cfg)}};
}

std::string format_number(double x) { return fmt::format("{:.17g}", x); }

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + p.parent_path().string() + "': " + ec.message());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string preamble(const std::string& kind, const json& meta) {
  std::string out = fmt::format("# kind: {}\n", kind);
  out += fmt::format("# version: {}\n", meta.at("version").get<std::string>());
  out += fmt::format("# config_hash: {}\n", meta.at("config_hash").get<std::string>());
  out += fmt::format("# config: {}\n", meta.at("config").dump());
  return out;
}

json document(const std::string& kind, const json& meta) {
  json j;
  j["kind"] = kind;
  j["meta"] = meta;
  return j;
}

std::string num(double x) { return format_number(x); }

std::vector<std::string> split(const std::string& line, char delim = ',') {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(line);
  while (std::getline(ss, item, delim)) out.push_back(item);
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw IoError(where + ": bad number '" + s + "'");
  return out;
}

// Comment lines "# key: value" and data rows of a delimited file.
struct Delimited {
  std::map<std::string, std::string> header;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

Delimited parse_delimited(const std::string& text, const std::string& what) {
  Delimited d;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        const auto key = line.substr(1, colon - 1);
        const auto b = key.find_first_not_of(' ');
        d.header[b == std::string::npos ? "" : key.substr(b)] = line.substr(std::min(colon + 2, line.size()));
      }
      continue;
    }
    if (d.columns.empty()) {
      d.columns = split(line);
      continue;
    }
    auto row = split(line);
    if (row.size() != d.columns.size())
      throw IoError(fmt::format("{}: row has {} fields, header has {}", what, row.size(), d.columns.size()));
    d.rows.push_back(std::move(row));
  }
  if (d.columns.empty()) throw IoError(what + ": missing column header");
  return d;
}

std::size_t column(const Delimited& d, const std::string& name, const std::string& what) {
  for (std::size_t i = 0; i < d.columns.size(); ++i)
    if (d.columns[i] == name) return i;
  throw IoError(what + ": missing column '" + name + "'");
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(what + ": " + e.what());
  }
}

}  // namespace

std::string theory_csv(const std::vector<PairCurve>& pairs, const json& meta) {
  std::string out = preamble("force-curve", meta);
  out += "d_nm,pressure_Pa,force_N,force_gradient_N_per_m,force_gradient_over_R_Pa,energy_J_per_m2,"
         "pfa_warning,material_pair,zero_freq_policy\n";
  for (const auto& p : pairs) {
    const auto& c = p.curve;
    for (Eigen::Index i = 0; i < c.separation.size(); ++i)
      out += fmt::format("{},{},{},{},{},{},{},{},{}\n", num(c.separation[i] / units::nm), num(c.pressure[i]),
                         num(c.force[i]), num(c.gradient[i]), num(c.gradient[i] / p.radius),
                         num(c.energy[i]), c.pfa_warning[static_cast<std::size_t>(i)] ? 1 : 0,
                         p.label(), to_string(p.policy));
  }
  return out;
}

json theory_json(const std::vector<PairCurve>& pairs, const json& meta) {
  json j = document("force-curve", meta);
  j["pairs"] = json::array();
  for (const auto& p : pairs) {
    const auto& c = p.curve;
    auto vec = [](const Eigen::ArrayXd& a) { return std::vector<double>(a.data(), a.data() + a.size()); };
    std::vector<double> over_r = vec(c.gradient / p.radius);
    j["pairs"].push_back({{"material_pair", p.label()}, {"sphere", p.sphere}, {"plate", p.plate},
                          {"zero_freq_policy", to_string(p.policy)}, {"radius_m", p.radius},
                          {"d_m", vec(c.separation)}, {"pressure_Pa", vec(c.pressure)},
                          {"energy_J_per_m2", vec(c.energy)}, {"force_N", vec(c.force)},
                          {"force_gradient_N_per_m", vec(c.gradient)},
                          {"force_gradient_over_R_Pa", over_r}, {"pfa_warning", c.pfa_warning}});
  }
  return j;
}

std::string ratio_csv(const std::vector<PairCurve>& pairs, const json& meta) {
  if (pairs.size() < 2) throw ValidationError("ratio output needs at least two material pairs");
  std::string out = preamble("force-ratio", meta);
  out += "d_nm,numerator_pair,denominator_pair,gradient_ratio\n";
  const auto& ref = pairs.front().curve;
  for (std::size_t k = 1; k < pairs.size(); ++k) {
    const auto& c = pairs[k].curve;
    for (Eigen::Index i = 0; i < ref.separation.size(); ++i) {
      const double ratio = ref.gradient[i] != 0.0 ? c.gradient[i] / ref.gradient[i]
                                                  : std::numeric_limits<double>::quiet_NaN();
      out += fmt::format("{},{},{},{}\n", num(ref.separation[i] / units::nm), pairs[k].label(),
                         pairs.front().label(), num(ratio));
    }
  }
  return out;
}

std::string run_csv(const RunRecord& run, const json& meta) {
  std::string out = preamble("run", meta);
  out += fmt::format("# run_id: {}\n# seed: {}\n", run.run_id, run.seed);
  out += "d_pz_m,calib_2w1_V,inphase_w2_V,quadrature_w2_V,v0_readback_V,timestamp_s,"
         "feedback_unconverged,quasi_static_violation\n";
  for (const auto& p : run.points)
    out += fmt::format("{},{},{},{},{},{},{},{}\n", num(p.d_pz), num(p.calib_2w1), num(p.inphase_w2),
                       num(p.quadrature_w2), num(p.v0_readback), num(p.timestamp),
                       p.feedback_unconverged ? 1 : 0, p.quasi_static_violation ? 1 : 0);
  return out;
}

RunFile parse_run_csv(const std::string& text) {
  const std::string what = "run file";
  const Delimited d = parse_delimited(text, what);
  for (const char* key : {"config", "config_hash", "run_id", "seed"})
    if (!d.header.count(key)) throw IoError(fmt::format("{}: missing '# {}:' header", what, key));
  RunFile f;
  f.instrument = instrument_from_json(parse_json(d.header.at("config"), what).at("rig"));
  f.config_hash = d.header.at("config_hash");
  f.record.run_id = static_cast<int>(parse_double(d.header.at("run_id"), what));
  f.record.seed = std::stoull(d.header.at("seed"));
  const std::size_t c[] = {column(d, "d_pz_m", what),          column(d, "calib_2w1_V", what),
                           column(d, "inphase_w2_V", what),    column(d, "quadrature_w2_V", what),
                           column(d, "v0_readback_V", what),   column(d, "timestamp_s", what),
                           column(d, "feedback_unconverged", what), column(d, "quasi_static_violation", what)};
  for (const auto& row : d.rows) {
    SetPointRecord p;
    p.d_pz = parse_double(row[c[0]], what);
    p.calib_2w1 = parse_double(row[c[1]], what);
    p.inphase_w2 = parse_double(row[c[2]], what);
    p.quadrature_w2 = parse_double(row[c[3]], what);
    p.v0_readback = parse_double(row[c[4]], what);
    p.timestamp = parse_double(row[c[5]], what);
    p.feedback_unconverged = row[c[6]] == "1";
    p.quasi_static_violation = row[c[7]] == "1";
    f.record.feedback_warning = f.record.feedback_warning || p.feedback_unconverged;
    f.record.quasi_static_warning = f.record.quasi_static_warning || p.quasi_static_violation;
    f.record.points.push_back(p);
  }
  return f;
}

json run_to_json(const RunRecord& run) {
  json points = json::array();
  for (const auto& p : run.points)
    points.push_back({{"d_pz_m", p.d_pz}, {"calib_2w1_V", p.calib_2w1}, {"inphase_w2_V", p.inphase_w2},
                      {"quadrature_w2_V", p.quadrature_w2}, {"v0_readback_V", p.v0_readback},
                      {"timestamp_s", p.timestamp}, {"feedback_unconverged", p.feedback_unconverged},
                      {"quasi_static_violation", p.quasi_static_violation}});
  return {{"run_id", run.run_id}, {"seed", run.seed}, {"quasi_static_warning", run.quasi_static_warning},
          {"feedback_warning", run.feedback_warning}, {"points", points}};
}

RunRecord run_from_json(const json& j) {
  try {
    RunRecord r;
    r.run_id = j.at("run_id").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.quasi_static_warning = j.at("quasi_static_warning").get<bool>();
    r.feedback_warning = j.at("feedback_warning").get<bool>();
    for (const auto& p : j.at("points"))
      r.points.push_back({p.at("d_pz_m").get<double>(), p.at("calib_2w1_V").get<double>(),
                          p.at("inphase_w2_V").get<double>(), p.at("quadrature_w2_V").get<double>(),
                          p.at("v0_readback_V").get<double>(), p.at("timestamp_s").get<double>(),
                          p.at("feedback_unconverged").get<bool>(), p.at("quasi_static_violation").get<bool>()});
    return r;
  } catch (const json::exception& e) {
    throw IoError(std::string("run record: ") + e.what());
  }
}

json run_bundle_json(const std::vector<RunRecord>& runs, const json& meta) {
  json j = document("run-bundle", meta);
  j["runs"] = json::array();
  for (const auto& r : runs) j["runs"].push_back(run_to_json(r));
  return j;
}

std::vector<RunFile> parse_run_bundle(const std::string& text) {
  const json j = parse_json(text, "run bundle");
  if (j.value("kind", "") != "run-bundle") throw IoError("run bundle: document kind is not 'run-bundle'");
  try {
    const Instrument inst = instrument_from_json(j.at("meta").at("config").at("rig"));
    const std::string hash = j.at("meta").at("config_hash").get<std::string>();
    std::vector<RunFile> out;
    for (const auto& r : j.at("runs")) out.push_back({run_from_json(r), inst, hash});
    return out;
  } catch (const json::exception& e) {
    throw IoError(std::string("run bundle: ") + e.what());
  }
}

std::vector<RunFile> load_runs(const std::vector<std::string>& paths) {
  std::vector<RunFile> out;
  for (const auto& path : paths) {
    const std::string text = read_text_file(path);
    if (std::filesystem::path(path).extension() == ".json") {
      for (auto& f : parse_run_bundle(text)) out.push_back(std::move(f));
    } else {
      out.push_back(parse_run_csv(text));
    }
  }
  return out;
}

json truth_json(const std::vector<TruthRecord>& truth, const json& meta) {
  json j = document("truth", meta);
  j["test_only"] = true;
  j["note"] = "hidden simulation truth for validation; never an analysis input";
  j["runs"] = json::array();
  for (const auto& t : truth)
    j["runs"].push_back({{"run_id", t.run_id}, {"seed", t.seed}, {"d0_m", t.d0}, {"beta_v_per_n", t.beta},
                         {"separation_m", t.separation}, {"v0_v", t.v0}});
  return j;
}

std::string calibration_csv(const std::vector<CalibrationResult>& cals, const json& meta) {
  std::string out = preamble("calibration", meta);
  out += "run_id,d0_m,sigma_d0_m,beta_V_per_N,sigma_beta_V_per_N,cov_d0_beta,residual_norm_V,"
         "points_used,iterations\n";
  for (const auto& c : cals)
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", c.run_id, num(c.d0), num(c.sigma_d0()), num(c.beta),
                       num(c.sigma_beta()), num(c.covariance(0, 1)), num(c.residual_norm), c.points_used,
                       c.iterations);
  return out;
}

json calibration_json(const std::vector<CalibrationResult>& cals, const json& meta) {
  json j = document("calibration", meta);
  j["runs"] = json::array();
  for (const auto& c : cals)
    j["runs"].push_back({{"run_id", c.run_id}, {"d0_m", c.d0}, {"beta_v_per_n", c.beta},
                         {"covariance", {{c.covariance(0, 0), c.covariance(0, 1)},
                                         {c.covariance(1, 0), c.covariance(1, 1)}}},
                         {"residual_norm_v", c.residual_norm}, {"points_used", c.points_used},
                         {"iterations", c.iterations}});
  return j;
}

namespace {

const char* value_unit(Provenance p) { return p == Provenance::hydrodynamic ? "N" : "Pa"; }

}  // namespace

std::string force_curves_csv(const std::vector<ForceCurve>& curves, const json& meta) {
  std::string out = preamble("force-curves", meta);
  out += "# value: force_gradient_over_R_Pa (casimir, electrostatic-background); force_amplitude_N "
         "(hydrodynamic)\n";
  out += "run_id,provenance,d_nm,value,flagged\n";
  for (const auto& c : curves)
    for (std::size_t i = 0; i < c.separation.size(); ++i)
      out += fmt::format("{},{},{},{},{}\n", c.run_id, to_string(c.provenance), num(c.separation[i] / units::nm),
                         num(c.value[i]), c.flagged[i] ? 1 : 0);
  return out;
}

json force_curves_json(const std::vector<ForceCurve>& curves, const json& meta) {
  json j = document("force-curves", meta);
  j["curves"] = json::array();
  for (const auto& c : curves)
    j["curves"].push_back({{"run_id", c.run_id}, {"provenance", to_string(c.provenance)},
                           {"unit", value_unit(c.provenance)}, {"d_m", c.separation}, {"value", c.value},
                           {"flagged", c.flagged}});
  return j;
}

std::string ensemble_csv(const EnsembleStats& s, const json& meta) {
  std::string out = preamble("ensemble", meta);
  out += fmt::format("# probe_separation_m: {}\n", num(s.probe_separation));
  out += fmt::format("# n: {}\n# mean: {}\n# std: {}\n# sem: {}\n", s.values.size(), num(s.mean),
                     num(s.std_dev), num(s.sem));
  out += fmt::format("# bin_rule: {}\n", s.bin_rule);
  std::string edges, counts;
  for (std::size_t i = 0; i < s.bin_edges.size(); ++i) edges += (i ? " " : "") + num(s.bin_edges[i]);
  for (std::size_t i = 0; i < s.bin_counts.size(); ++i) counts += (i ? " " : "") + std::to_string(s.bin_counts[i]);
  out += fmt::format("# bin_edges: {}\n# bin_counts: {}\n", edges, counts);
  out += "run_id,value\n";
  for (std::size_t i = 0; i < s.values.size(); ++i) out += fmt::format("{},{}\n", s.run_ids[i], num(s.values[i]));
  return out;
}

json ensemble_json(const EnsembleStats& s, const json& meta) {
  json j = document("ensemble", meta);
  j["probe_separation_m"] = s.probe_separation;
  j["n"] = s.values.size();
  j["mean"] = s.mean;
  j["std"] = s.std_dev;
  j["sem"] = s.sem;
  j["histogram"] = {{"bin_rule", s.bin_rule}, {"edges", s.bin_edges}, {"counts", s.bin_counts}};
  j["run_ids"] = s.run_ids;
  j["values"] = s.values;
  return j;
}

EnsembleStats load_ensemble(const std::string& path) {
  const std::string text = read_text_file(path);
  if (std::filesystem::path(path).extension() == ".json") {
    const json j = parse_json(text, path);
    if (j.value("kind", "") != "ensemble") throw IoError(path + ": document kind is not 'ensemble'");
    try {
      return summarize_ensemble(j.at("probe_separation_m").get<double>(), j.at("run_ids").get<std::vector<int>>(),
                                j.at("values").get<std::vector<double>>());
    } catch (const json::exception& e) {
      throw IoError(path + ": " + e.what());
    }
  }
  const Delimited d = parse_delimited(text, path);
  if (!d.header.count("probe_separation_m")) throw IoError(path + ": missing probe separation header");
  const std::size_t id_col = column(d, "run_id", path), v_col = column(d, "value", path);
  std::vector<int> ids;
  std::vector<double> values;
  for (const auto& row : d.rows) {
    ids.push_back(static_cast<int>(parse_double(row[id_col], path)));
    values.push_back(parse_double(row[v_col], path));
  }
  return summarize_ensemble(parse_double(d.header.at("probe_separation_m"), path), std::move(ids),
                            std::move(values));
}

}  // namespace casimir
