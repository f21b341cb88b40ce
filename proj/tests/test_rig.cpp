#include "casimir/errors.hpp"
#include "casimir/rig.hpp"

#include <doctest.h>

#include <cmath>

using namespace casimir;

namespace {

RigConfig quiet(const std::string& plate = "gold") {
  RigConfig cfg = preset_config(plate);
  cfg.instrument.noise = {};
  cfg.instrument.runs = 3;
  return cfg;
}

const GradientTable& gold_table() {
  static const auto mirrors = default_mirrors(MaterialLibrary::defaults());
  static const GradientTable t(mirrors.at("gold"), mirrors.at("gold"), 100e-6, 50e-9, 1200e-9);
  return t;
}

}  // namespace

TEST_CASE("transfer functions") {
  CHECK(transfer_function(0.0, 1900.0) == 1.0);
  const Instrument in;
  CHECK(calibration_transfer(in) == doctest::Approx(1.0 / (1.0 - std::pow(144.4 / 1900.0, 2))));
  CHECK(measurement_transfer(in) > 1.0);
  CHECK(measurement_transfer(in) < 1.01);
}

TEST_CASE("without AC drive only the drag remains") {
  RigConfig cfg = quiet();
  cfg.instrument.ac_amplitude = 0.0;
  cfg.instrument.artifact_slope = 0.0;
  cfg.truth.v0_offset = 0.0;
  cfg.truth.v0_variation = 0.0;
  const SimulatedRun run = simulate_run(cfg, zero_gradient_model(), 0, 7);
  for (const auto& p : run.record.points) {
    CHECK(p.calib_2w1 == 0.0);
    CHECK(p.inphase_w2 == 0.0);
    CHECK(p.quadrature_w2 > 0.0);
    CHECK_FALSE(p.feedback_unconverged);
  }
}

TEST_CASE("drift moves the true separation") {
  RigConfig cfg = quiet();
  const SimulatedRun first = simulate_run(cfg, zero_gradient_model(), 0, 1);
  const SimulatedRun last = simulate_run(cfg, zero_gradient_model(), 579, 1);
  CHECK((last.truth.d0 - first.truth.d0) == doctest::Approx(57.9e-9).epsilon(1e-9));
  // Re-approach keeps the separations of every run on the same grid.
  for (std::size_t i = 0; i < first.truth.separation.size(); ++i)
    CHECK(last.truth.separation[i] == doctest::Approx(first.truth.separation[i]).epsilon(1e-9));

  cfg.instrument.reapproach = false;
  const SimulatedRun fixed = simulate_run(cfg, zero_gradient_model(), 100, 1);
  CHECK(fixed.truth.separation[0] - first.truth.separation[0] == doctest::Approx(10e-9).epsilon(1e-6));
}

TEST_CASE("residual-potential feedback") {
  Instrument in = quiet().instrument;
  SUBCASE("settles on the residual potential") {
    in.noise.feedback = 1e-4;
    std::mt19937_64 rng(3);
    const FeedbackResult r = v0_feedback(in, 100e-9, 3e-3, 0.0, &rng);
    CHECK(r.converged);
    CHECK(std::abs(r.compensation - 3e-3) < 1e-4);
  }
  SUBCASE("zero stays zero") {
    const FeedbackResult r = v0_feedback(in, 100e-9, 0.0);
    CHECK(r.compensation == 0.0);
    CHECK(r.residual == 0.0);
  }
  SUBCASE("tracks a step") {
    const FeedbackResult a = v0_feedback(in, 100e-9, 0.02, 0.0);
    const FeedbackResult b = v0_feedback(in, 90e-9, 0.025, a.compensation);
    CHECK(b.compensation == doctest::Approx(0.025).epsilon(1e-6));
    CHECK(b.converged);
  }
  SUBCASE("no excitation no lock") {
    in.ac_amplitude = 0.0;
    CHECK_FALSE(v0_feedback(in, 100e-9, 0.02).converged);
  }
}

TEST_CASE("artifact is linear in the piezo extension") {
  CHECK(inject_artifact(-3.8, 2e-6) == doctest::Approx(2.0 * inject_artifact(-3.8, 1e-6)));
  CHECK(inject_artifact(0.0, 1e-6) == 0.0);
}

TEST_CASE("gold artifact exceeds five percent only beyond 120 nm") {
  RigConfig cfg = quiet("gold");
  const GradientTable& table = gold_table();
  RigConfig clean = cfg;
  clean.instrument.artifact_slope = 0.0;
  const SimulatedRun with = simulate_run(cfg, table, 0, 1);
  const SimulatedRun without = simulate_run(clean, table, 0, 1);
  for (std::size_t i = 0; i < with.record.points.size(); ++i) {
    const double d = with.truth.separation[i];
    const double rel = std::abs(with.record.points[i].inphase_w2 / without.record.points[i].inphase_w2 - 1.0);
    if (d > 125e-9) CHECK(rel > 0.05);
    if (d < 115e-9) CHECK(rel < 0.05);
  }
  const double tuned = tune_artifact_slope(clean, table, 120e-9, 0.05);
  CHECK(cfg.instrument.artifact_slope == doctest::Approx(tuned).epsilon(0.01));
}

TEST_CASE("runs are deterministic") {
  RigConfig cfg = preset_config("ito");
  cfg.instrument.runs = 4;
  const auto a = simulate_series(cfg, zero_gradient_model(), 11, 1);
  const auto b = simulate_series(cfg, zero_gradient_model(), 11, 3);
  const auto c = simulate_series(cfg, zero_gradient_model(), 12, 1);
  REQUIRE(a.size() == 4);
  for (std::size_t r = 0; r < a.size(); ++r) {
    CHECK(a[r].record.seed == b[r].record.seed);
    CHECK(a[r].record.seed != c[r].record.seed);
    for (std::size_t i = 0; i < a[r].record.points.size(); ++i) {
      CHECK(a[r].record.points[i].inphase_w2 == b[r].record.points[i].inphase_w2);
      CHECK(a[r].record.points[i].calib_2w1 == b[r].record.points[i].calib_2w1);
      CHECK(a[r].record.points[i].v0_readback == b[r].record.points[i].v0_readback);
    }
  }
  CHECK(run_seed(1, 0) != run_seed(1, 1));
}

TEST_CASE("contact is reported") {
  RigConfig cfg = quiet();
  cfg.truth.d0 = cfg.instrument.setpoints.back() - 1e-9;
  CHECK_THROWS_AS(simulate_run(cfg, zero_gradient_model(), 0, 1), ContactError);
}

TEST_CASE("quasi-static check") {
  RigConfig cfg = quiet();
  const SimulatedRun ok = simulate_run(cfg, zero_gradient_model(), 0, 1);
  CHECK_FALSE(ok.record.quasi_static_warning);
  cfg.instrument.ac_amplitude = 0.2;
  const SimulatedRun hard = simulate_run(cfg, zero_gradient_model(), 0, 1);
  CHECK(hard.record.quasi_static_warning);
  CHECK(hard.record.points.back().quasi_static_violation);
  CHECK_FALSE(hard.record.points.front().quasi_static_violation);
}

TEST_CASE("configuration checks") {
  RigConfig cfg = quiet();
  cfg.instrument.f2_hz = cfg.instrument.f1_hz;
  CHECK_THROWS_AS(validate(cfg), ValidationError);
  cfg = quiet();
  std::swap(cfg.instrument.setpoints[0], cfg.instrument.setpoints[1]);
  CHECK_THROWS_AS(validate(cfg), ValidationError);
  CHECK_THROWS_AS(preset_config("silver"), ValidationError);
  CHECK_THROWS_AS(setpoints_for_separations(100e-9, 60e-9, 1100e-9, 10), ValidationError);
}
