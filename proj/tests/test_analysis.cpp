#include "casimir/analysis.hpp"
#include "casimir/errors.hpp"
#include "casimir/units.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace casimir;

namespace {

RigConfig quiet() {
  RigConfig cfg = preset_config("gold");
  cfg.instrument.noise = {};
  cfg.instrument.artifact_slope = 0.0;
  cfg.instrument.runs = 1;
  return cfg;
}

GradientModel ideal_metal(double radius) {
  return [radius](double d) {
    const double p = -units::pi * units::pi * units::hbar * units::speed_of_light / (240.0 * std::pow(d, 4));
    return 2.0 * units::pi * radius * p;
  };
}

CalibrationResult truth_calibration(const SimulatedRun& run) {
  CalibrationResult c;
  c.run_id = run.record.run_id;
  c.d0 = run.truth.d0;
  c.beta = run.truth.beta;
  return c;
}

ForceCurve constant_curve(int id, double value) {
  ForceCurve c;
  c.run_id = id;
  for (double d : {60e-9, 80e-9, 100e-9}) {
    c.separation.push_back(d);
    c.value.push_back(value);
    c.flagged.push_back(false);
  }
  return c;
}

}  // namespace

TEST_CASE("noise-free calibration round trip") {
  const RigConfig cfg = quiet();
  const SimulatedRun run = simulate_run(cfg, ideal_metal(cfg.instrument.radius), 0, 5);
  const CalibrationResult cal = fit_calibration(run.record, cfg.instrument);
  CHECK(std::abs(cal.d0 - run.truth.d0) < 0.1e-9);
  CHECK(cal.beta == doctest::Approx(run.truth.beta).epsilon(1e-3));
  CHECK(cal.points_used == 50);
  CHECK(cal.sigma_d0() >= 0.0);

  FitOptions relative;
  relative.weighting = FitWeighting::relative;
  const CalibrationResult rel = fit_calibration(run.record, cfg.instrument, relative);
  CHECK(std::abs(rel.d0 - run.truth.d0) < 0.1e-9);
}

TEST_CASE("noisy calibration reports its uncertainty") {
  RigConfig cfg = preset_config("gold");
  const SimulatedRun run = simulate_run(cfg, ideal_metal(cfg.instrument.radius), 0, 5);
  const CalibrationResult cal = fit_calibration(run.record, cfg.instrument);
  CHECK(cal.sigma_d0() > 0.0);
  CHECK(cal.sigma_beta() > 0.0);
  CHECK(std::abs(cal.d0 - run.truth.d0) < 5.0 * cal.sigma_d0());
  CHECK(std::abs(cal.beta - run.truth.beta) < 5.0 * cal.sigma_beta());
}

TEST_CASE("too few set-points are degenerate") {
  const RigConfig cfg = quiet();
  SimulatedRun run = simulate_run(cfg, zero_gradient_model(), 0, 1);
  run.record.points.resize(2);
  CHECK_THROWS_WITH_AS(fit_calibration(run.record, cfg.instrument), doctest::Contains("degenerate"), ValidationError);
}

TEST_CASE("calibration ignores record order") {
  const RigConfig cfg = quiet();
  const SimulatedRun run = simulate_run(cfg, zero_gradient_model(), 0, 1);
  RunRecord shuffled = run.record;
  std::reverse(shuffled.points.begin(), shuffled.points.end());
  std::rotate(shuffled.points.begin(), shuffled.points.begin() + 7, shuffled.points.end());
  const CalibrationResult a = fit_calibration(run.record, cfg.instrument);
  const CalibrationResult b = fit_calibration(shuffled, cfg.instrument);
  CHECK(a.d0 == b.d0);
  CHECK(a.beta == b.beta);
}

TEST_CASE("ideal-metal force gradient is recovered") {
  const RigConfig cfg = quiet();
  const double r = cfg.instrument.radius;
  const GradientModel model = ideal_metal(r);
  const SimulatedRun run = simulate_run(cfg, model, 0, 2);
  const CalibrationResult cal = fit_calibration(run.record, cfg.instrument);
  const ForceCurve c = extract_force_gradient(run.record, cal, cfg.instrument);
  REQUIRE(c.value.size() == run.truth.separation.size());
  for (std::size_t i = 0; i < c.value.size(); ++i)
    CHECK(c.value[i] == doctest::Approx(model(run.truth.separation[i]) / r).epsilon(5e-3));
}

TEST_CASE("background subtraction is exact") {
  RigConfig cfg = quiet();
  cfg.truth.v0_offset = 0.0;
  cfg.truth.v0_variation = 0.0;
  const SimulatedRun run = simulate_run(cfg, zero_gradient_model(), 0, 3);
  const ForceCurve bg = electrostatic_background(run.record, truth_calibration(run), cfg.instrument);
  const ForceCurve exact = extract_force_gradient(run.record, truth_calibration(run), cfg.instrument);
  for (std::size_t i = 0; i < exact.value.size(); ++i) CHECK(std::abs(exact.value[i]) <= 1e-10 * std::abs(bg.value[i]));

  const ForceCurve fitted = extract_force_gradient(run.record, fit_calibration(run.record, cfg.instrument), cfg.instrument);
  for (std::size_t i = 0; i < fitted.value.size(); ++i) {
    CHECK(std::abs(fitted.value[i]) <= 1e-6 * std::abs(bg.value[i]));
    CHECK(fitted.flagged[i]);
  }
}

TEST_CASE("hydrodynamic curve") {
  RigConfig cfg = quiet();
  const SimulatedRun run = simulate_run(cfg, zero_gradient_model(), 0, 4);
  const CalibrationResult cal = fit_calibration(run.record, cfg.instrument);
  const ForceCurve h = extract_hydrodynamic(run.record, cal, cfg.instrument);
  const HydroConfig hydro{cfg.instrument.viscosity, {}, 2.0 * units::pi * cfg.instrument.f2_hz,
                          cfg.instrument.modulation_amplitude};
  for (std::size_t i = 0; i < h.value.size(); ++i)
    CHECK(h.value[i] == doctest::Approx(hydrodynamic_quadrature_amplitude(hydro, cfg.instrument.radius,
                                                                          run.truth.separation[i])).epsilon(5e-3));

  cfg.instrument.modulation_amplitude = 0.0;
  const SimulatedRun still = simulate_run(cfg, zero_gradient_model(), 0, 4);
  for (double v : extract_hydrodynamic(still.record, cal, cfg.instrument).value) CHECK(v == 0.0);
  CHECK_THROWS_AS(extract_force_gradient(still.record, cal, cfg.instrument), ValidationError);
}

TEST_CASE("curve sampling is linear in inverse cube") {
  ForceCurve c;
  for (double d : {100e-9, 60e-9, 80e-9}) {
    c.separation.push_back(d);
    c.value.push_back(3.0 * std::pow(d, -3) + 1.0);
  }
  CHECK(sample_curve(c, 70e-9) == doctest::Approx(3.0 * std::pow(70e-9, -3) + 1.0).epsilon(1e-12));
  CHECK(sample_curve(c, 80e-9) == doctest::Approx(c.value[2]));
}

TEST_CASE("ensemble statistics") {
  SUBCASE("identical curves have no spread") {
    std::vector<ForceCurve> curves;
    for (int i = 0; i < 30; ++i) curves.push_back(constant_curve(i, -41.3));
    const EnsembleStats s = ensemble_statistics(curves, 80e-9, 5e-9);
    CHECK(s.mean == -41.3);
    CHECK(s.std_dev == 0.0);
    CHECK(s.sem == 0.0);
    CHECK(s.bin_counts.size() == 1);
    CHECK(s.bin_counts[0] == 30);
  }
  SUBCASE("sem falls as one over root n") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> normal(-50.0, 2.5);
    std::vector<double> values(1600);
    for (double& v : values) v = normal(rng);
    const auto small = summarize_ensemble(80e-9, {}, std::vector<double>(values.begin(), values.begin() + 100));
    const auto large = summarize_ensemble(80e-9, {}, values);
    CHECK(large.std_dev == doctest::Approx(2.5).epsilon(0.05));
    CHECK(small.sem / large.sem == doctest::Approx(4.0 * small.std_dev / large.std_dev).epsilon(1e-12));
    int total = 0;
    for (int n : large.bin_counts) total += n;
    CHECK(total == 1600);
    CHECK(large.bin_edges.size() == large.bin_counts.size() + 1);
  }
  SUBCASE("missing coverage names the runs") {
    std::vector<ForceCurve> curves;
    for (int i = 0; i < 30; ++i) curves.push_back(constant_curve(i, 1.0));
    curves[4].separation = {200e-9, 300e-9, 400e-9};
    CHECK_THROWS_WITH_AS(ensemble_statistics(curves, 80e-9, 5e-9), doctest::Contains(": 4"), ValidationError);
  }
  SUBCASE("too few curves") {
    std::vector<ForceCurve> curves(5, constant_curve(0, 1.0));
    CHECK_THROWS_AS(ensemble_statistics(curves, 80e-9, 5e-9), ValidationError);
  }
}

TEST_CASE("pair comparison") {
  const EnsembleStats a = summarize_ensemble(80e-9, {}, {-10.0, -11.0, -9.0});
  const EnsembleStats b = summarize_ensemble(80e-9, {}, {-5.0, -5.5, -4.5});
  CHECK(compare_pairs(a, a).ratio == 1.0);
  const PairRatio ab = compare_pairs(a, b), ba = compare_pairs(b, a);
  CHECK(ab.ratio == doctest::Approx(0.5));
  CHECK(ba.ratio == doctest::Approx(1.0 / ab.ratio));
  CHECK(ab.uncertainty > 0.0);
  CHECK_THROWS_AS(compare_pairs(summarize_ensemble(80e-9, {}, {0.0}), b), ValidationError);
  CHECK_THROWS_AS(compare_pairs(a, summarize_ensemble(120e-9, {}, {1.0})), ValidationError);
}

TEST_CASE("drift line") {
  std::vector<CalibrationResult> cals;
  for (int i = 0; i < 20; ++i) {
    CalibrationResult c;
    c.run_id = i;
    c.d0 = 1150e-9 + 0.2e-9 * i;
    cals.push_back(c);
  }
  const DriftFit f = fit_drift(cals);
  CHECK(f.slope == doctest::Approx(0.2e-9).epsilon(1e-9));
  CHECK(f.intercept == doctest::Approx(1150e-9).epsilon(1e-12));
  cals.resize(2);
  CHECK_THROWS_AS(fit_drift(cals), ValidationError);
}

TEST_CASE("weighting names") {
  CHECK(parse_fit_weighting("relative") == FitWeighting::relative);
  CHECK(to_string(FitWeighting::uniform) == "uniform");
  CHECK_THROWS_AS(parse_fit_weighting("robust"), ValidationError);
  CHECK(to_string(Provenance::electrostatic_background) == "electrostatic-background");
}
