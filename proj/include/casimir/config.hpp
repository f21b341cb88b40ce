#pragma once

// Pipeline configuration: a sectioned key/value (INI) document resolved into typed settings.
// The schema is described in docs/config.md. Unknown sections and keys are rejected.

#include "casimir/analysis.hpp"
#include "casimir/lifshitz.hpp"
#include "casimir/materials.hpp"
#include "casimir/rig.hpp"
#include "casimir/units.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace casimir {

inline constexpr int config_schema_version = 1;

enum class OutputFormat { csv, structured };

std::string to_string(OutputFormat f);
OutputFormat parse_output_format(const std::string& s);

struct EpsilonSettings {
  std::string material = "gold";
  double xi_min = units::from_ev(0.01);  // rad/s
  double xi_max = units::from_ev(100.0);
  int points = 50;
};

struct SweepSettings {
  double d_min = 50e-9;  // m
  double d_max = 1100e-9;
  int points = 40;
  bool log_spacing = true;
  /// (sphere mirror, plate mirror) pairs.
  std::vector<std::pair<std::string, std::string>> pairs{{"gold", "gold"}, {"gold", "ito-on-glass"}};

  Eigen::ArrayXd grid() const;
};

struct AnalysisSettings {
  FitOptions fit{};
  std::vector<double> probes{80e-9, 120e-9};  // m
  double window = 5e-9;                        // m
  int min_curves = 30;
};

struct PipelineConfig {
  MaterialLibrary materials = MaterialLibrary::defaults();
  std::map<std::string, LayeredMirror> mirrors = default_mirrors(MaterialLibrary::defaults());
  LifshitzOptions lifshitz{};
  double radius = 100e-6;  // m
  EpsilonSettings epsilon{};
  SweepSettings sweep{};
  RigConfig rig = preset_config("gold");
  AnalysisSettings analysis{};
  std::uint64_t seed = 1;
  int threads = 1;
  OutputFormat format = OutputFormat::csv;

  const LayeredMirror& mirror(const std::string& name) const;
};

void validate(const PipelineConfig& cfg);

/// Parses an INI document. Keys not listed in the schema raise ValidationError.
PipelineConfig parse_config(std::istream& in);
PipelineConfig load_config(const std::string& path);

/// Resolved configuration. The hidden rig truth is excluded unless asked for.
nlohmann::json config_to_json(const PipelineConfig& cfg, bool include_truth = false);

/// FNV-1a over the compact JSON of the full resolved configuration, as 16 hex digits.
std::string config_hash(const PipelineConfig& cfg);

nlohmann::json instrument_to_json(const Instrument& inst);
Instrument instrument_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const DielectricModel& model);

}  // namespace casimir
