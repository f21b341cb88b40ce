#pragma once

// File formats. Delimited files start with '#' comment lines carrying the code version, the
// config hash and the resolved configuration as one-line JSON; structured files are JSON
// documents with the same information under "meta". Numbers are written with 17 significant
// digits so they round-trip exactly.

#include "casimir/analysis.hpp"
#include "casimir/config.hpp"
#include "casimir/lifshitz.hpp"
#include "casimir/rig.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace casimir {

std::string version_string();

/// {"version", "config_hash", "config"} block embedded in every output.
nlohmann::json output_meta(const PipelineConfig& cfg);

std::string format_number(double x);

/// Writes a file, creating parent directories. Throws IoError.
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

struct PairCurve {
  std::string sphere;
  std::string plate;
  ZeroFrequencyPolicy policy = ZeroFrequencyPolicy::drude;
  double radius = 0.0;
  TheoryCurve curve;

  std::string label() const { return sphere + "/" + plate; }
};

std::string theory_csv(const std::vector<PairCurve>& pairs, const nlohmann::json& meta);
nlohmann::json theory_json(const std::vector<PairCurve>& pairs, const nlohmann::json& meta);
/// Gradient ratio of every later pair to the first one, per separation.
std::string ratio_csv(const std::vector<PairCurve>& pairs, const nlohmann::json& meta);

/// One run with the instrument description it was recorded under.
struct RunFile {
  RunRecord record;
  Instrument instrument;
  std::string config_hash;
};

std::string run_csv(const RunRecord& run, const nlohmann::json& meta);
RunFile parse_run_csv(const std::string& text);

nlohmann::json run_to_json(const RunRecord& run);
RunRecord run_from_json(const nlohmann::json& j);
nlohmann::json run_bundle_json(const std::vector<RunRecord>& runs, const nlohmann::json& meta);
std::vector<RunFile> parse_run_bundle(const std::string& text);

/// Loads run files (.csv or bundled .json) in the given order.
std::vector<RunFile> load_runs(const std::vector<std::string>& paths);

nlohmann::json truth_json(const std::vector<TruthRecord>& truth, const nlohmann::json& meta);

std::string calibration_csv(const std::vector<CalibrationResult>& cals, const nlohmann::json& meta);
nlohmann::json calibration_json(const std::vector<CalibrationResult>& cals, const nlohmann::json& meta);

/// Long format: one row per (run, separation, provenance).
std::string force_curves_csv(const std::vector<ForceCurve>& curves, const nlohmann::json& meta);
nlohmann::json force_curves_json(const std::vector<ForceCurve>& curves, const nlohmann::json& meta);

std::string ensemble_csv(const EnsembleStats& stats, const nlohmann::json& meta);
nlohmann::json ensemble_json(const EnsembleStats& stats, const nlohmann::json& meta);
/// Reads either ensemble format; the statistics are recomputed from the stored values.
EnsembleStats load_ensemble(const std::string& path);

}  // namespace casimir
