#include "casimir/config.hpp"
#include "casimir/errors.hpp"
#include "casimir/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace casimir;

namespace {

PipelineConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "casimir_test_config_io";
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("empty document gives the defaults") {
  const PipelineConfig cfg = parse("");
  CHECK_NOTHROW(validate(cfg));
  CHECK(cfg.seed == 1);
  CHECK(cfg.format == OutputFormat::csv);
  CHECK(cfg.radius == 100e-6);
  CHECK(cfg.sweep.pairs.size() == 2);
  CHECK(cfg.rig.instrument.setpoints.size() == 50);
  CHECK(cfg.mirrors.count("ito-on-glass"));
}

TEST_CASE("sections are resolved into typed settings") {
  const PipelineConfig cfg = parse(R"(
[meta]
schema = 1
[run]
seed = 42
format = structured
threads = 2
[lifshitz]
temperature_k = 295
zero_frequency = plasma
[geometry]
radius_um = 50
[sweep]
d_min_nm = 60
d_max_nm = 600
points = 12
spacing = linear
pairs = gold/slab, gold/gold
[material.silver]
drude_plasma_ev = 9.0
drude_damping_ev = 0.02
[material.doped]
drude_plasma_ev = 1.0
resistivity_ohm_m = 2e-6
lorentz_strength = 1.5, 0.5
lorentz_resonance_ev = 4, 8
[mirror.slab]
layers = silver:30, doped:100
substrate = glass
[rig]
preset = ito
runs = 12
separation_min_nm = 70
separation_max_nm = 600
setpoint_count = 20
[truth]
d0_nm = 900
[analysis]
weighting = relative
probes_nm = 90
window_nm = 4
min_curves = 10
)");
  CHECK(cfg.seed == 42);
  CHECK(cfg.threads == 2);
  CHECK(cfg.format == OutputFormat::structured);
  CHECK(cfg.lifshitz.grid.temperature == 295.0);
  CHECK(cfg.lifshitz.policy == ZeroFrequencyPolicy::plasma);
  CHECK(cfg.radius == doctest::Approx(50e-6));
  CHECK(cfg.rig.instrument.radius == doctest::Approx(50e-6));
  CHECK_FALSE(cfg.sweep.log_spacing);
  CHECK(cfg.sweep.grid().size() == 12);
  CHECK(cfg.sweep.grid()[11] == doctest::Approx(600e-9));
  REQUIRE(cfg.sweep.pairs.size() == 2);
  CHECK(cfg.sweep.pairs[0].second == "slab");
  const LayeredMirror& slab = cfg.mirror("slab");
  REQUIRE(slab.layers.size() == 2);
  CHECK(slab.layers[1].thickness == doctest::Approx(100e-9));
  CHECK(slab.layers[1].material.name() == "doped");
  CHECK(cfg.rig.instrument.plate == "ito-on-glass");
  CHECK(cfg.rig.instrument.runs == 12);
  REQUIRE(cfg.rig.instrument.setpoints.size() == 20);
  CHECK(900e-9 - cfg.rig.instrument.setpoints.back() == doctest::Approx(70e-9));
  CHECK(cfg.analysis.fit.weighting == FitWeighting::relative);
  REQUIRE(cfg.analysis.probes.size() == 1);
  CHECK(cfg.analysis.probes[0] == doctest::Approx(90e-9));
  CHECK(cfg.analysis.min_curves == 10);
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("unknown or malformed input is rejected") {
  CHECK_THROWS_AS(parse("[sweep]\nd_minimum_nm = 3\n"), ValidationError);
  CHECK_THROWS_AS(parse("[plotting]\ncolor = red\n"), ValidationError);
  CHECK_THROWS_AS(parse("[meta]\nschema = 2\n"), ValidationError);
  CHECK_THROWS_AS(parse("[sweep]\npoints = many\n"), ValidationError);
  CHECK_THROWS_AS(parse("[sweep]\npairs = gold-gold\n"), ValidationError);
  CHECK_THROWS_AS(parse("[mirror.x]\nlayers = gold:10\n"), ValidationError);
  CHECK_THROWS_AS(parse("[mirror.x]\nsubstrate = adamantium\n"), ValidationError);
  CHECK_THROWS_AS(parse("[rig]\nsetpoints_nm = 1, 2\nsetpoint_count = 4\n"), ValidationError);
  CHECK_THROWS_AS(parse("[run]\nformat = xml\n"), ValidationError);
  CHECK_THROWS_AS(load_config("/nonexistent/casimir.ini"), IoError);
}

TEST_CASE("config hash") {
  const PipelineConfig a = parse("");
  PipelineConfig b = parse("[run]\nthreads = 4\n");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b.rig.truth.beta *= 2.0;
  CHECK(config_hash(a) != config_hash(b));
  CHECK_FALSE(config_to_json(b).at("rig").contains("truth"));
  CHECK(config_to_json(b, true).contains("truth"));
}

TEST_CASE("instrument survives the json round trip") {
  Instrument in = preset_config("ito").instrument;
  in.slip_length = 5e-9;
  const Instrument back = instrument_from_json(instrument_to_json(in));
  CHECK(back.setpoints == in.setpoints);
  CHECK(back.noise.inphase == in.noise.inphase);
  CHECK(back.artifact_slope == in.artifact_slope);
  CHECK(back.slip_length == in.slip_length);
  CHECK(back.plate == in.plate);
}

TEST_CASE("run files round trip exactly") {
  PipelineConfig cfg = parse("");
  cfg.rig.instrument.runs = 2;
  const auto runs = simulate_series(cfg.rig, zero_gradient_model(), 3);
  const auto meta = output_meta(cfg);

  const RunFile f = parse_run_csv(run_csv(runs[1].record, meta));
  CHECK(f.config_hash == config_hash(cfg));
  CHECK(f.record.run_id == 1);
  CHECK(f.record.seed == runs[1].record.seed);
  CHECK(f.instrument.setpoints == cfg.rig.instrument.setpoints);
  REQUIRE(f.record.points.size() == runs[1].record.points.size());
  for (std::size_t i = 0; i < f.record.points.size(); ++i) {
    CHECK(f.record.points[i].inphase_w2 == runs[1].record.points[i].inphase_w2);
    CHECK(f.record.points[i].calib_2w1 == runs[1].record.points[i].calib_2w1);
    CHECK(f.record.points[i].timestamp == runs[1].record.points[i].timestamp);
  }

  const auto bundle = parse_run_bundle(run_bundle_json({runs[0].record, runs[1].record}, meta).dump());
  REQUIRE(bundle.size() == 2);
  CHECK(bundle[0].record.points[7].quadrature_w2 == runs[0].record.points[7].quadrature_w2);

  CHECK_THROWS_AS(parse_run_csv("d_pz_m\n1\n"), IoError);
  CHECK_THROWS_AS(parse_run_bundle("{\"kind\": \"truth\"}"), IoError);
}

TEST_CASE("ensemble files reload") {
  const EnsembleStats s = summarize_ensemble(80e-9, {0, 1, 2, 3}, {-40.1, -41.7, -39.2, -40.0});
  const PipelineConfig cfg = parse("");
  const std::string dir = scratch_dir();
  write_text_file(dir + "/e.csv", ensemble_csv(s, output_meta(cfg)));
  write_text_file(dir + "/e.json", ensemble_json(s, output_meta(cfg)).dump());
  for (const char* name : {"/e.csv", "/e.json"}) {
    const EnsembleStats back = load_ensemble(dir + name);
    CHECK(back.values == s.values);
    CHECK(back.run_ids == s.run_ids);
    CHECK(back.mean == s.mean);
    CHECK(back.probe_separation == s.probe_separation);
  }
  CHECK_THROWS_AS(read_text_file(dir + "/missing.csv"), IoError);
}

TEST_CASE("numbers are written to round trip") {
  for (double x : {0.1, 1.0 / 3.0, -6.02214076e23, 1e-300})
    CHECK(std::stod(format_number(x)) == x);
}
