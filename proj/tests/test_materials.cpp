#include "casimir/errors.hpp"
#include "casimir/materials.hpp"
#include "casimir/units.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace casimir;

namespace {

TabulatedLoss sample_loss(double lo, double hi, int n, auto&& eps_imag) {
  TabulatedLoss tab;
  for (int i = 0; i < n; ++i) {
    const double w = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    tab.omega.push_back(w);
    tab.eps_imag.push_back(eps_imag(w));
  }
  return tab;
}

}  // namespace

TEST_CASE("drude spot value") {
  const double wp = units::from_ev(9.0), gamma = units::from_ev(0.035);
  const double eps = eval_epsilon(Drude{wp, gamma}, units::from_ev(1.0));
  CHECK(eps == doctest::Approx(1.0 + 81.0 / 1.035).epsilon(1e-12));
  CHECK(eps == doctest::Approx(79.26).epsilon(1e-4));
}

TEST_CASE("lorentz pole at its resonance") {
  const double w0 = 1e15;
  CHECK(eval_epsilon(LorentzPoles{{{1.0, w0, 0.0}}}, w0) == doctest::Approx(1.5));
}

TEST_CASE("vanishing plasma frequency gives vacuum") {
  CHECK(eval_epsilon(Drude{0.0, 1e13}, 1e14) == 1.0);
  CHECK(eval_epsilon(defaults::vacuum(), 1e14) == 1.0);
}

TEST_CASE("non-positive xi is rejected") {
  CHECK_THROWS_AS(eval_epsilon(defaults::gold(), 0.0), ValidationError);
  CHECK_THROWS_AS(eval_epsilon(defaults::gold(), -1.0), ValidationError);
  CHECK_THROWS_AS(eval_epsilon(defaults::gold(), NAN), ValidationError);
}

TEST_CASE("invalid parameters") {
  CHECK_THROWS_AS(validate(DielectricModel(Drude{-1.0, 1.0})), ValidationError);
  CHECK_THROWS_AS(validate(DielectricModel(LorentzPoles{{{-0.5, 1e15, 0.0}}})), ValidationError);
  TabulatedLoss tab{{2.0, 1.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(validate(tab), ValidationError);
}

TEST_CASE("kk of zero absorption is one") {
  const auto tab = sample_loss(1e12, 1e17, 50, [](double) { return 0.0; });
  const KkResult r = kk_to_imag_axis(tab, 1e15);
  CHECK(r.value == 1.0);
  CHECK_FALSE(r.quality_warning);
}

TEST_CASE("kk reproduces a damped lorentzian") {
  const double f = 2.0, w0 = 5e15, g = 4e14;
  auto loss = [&](double w) {
    const double a = w0 * w0 - w * w;
    return f * w0 * w0 * g * w / (a * a + g * g * w * w);
  };
  const auto tab = sample_loss(1e11, 1e19, 20000, loss);
  for (double xi : {1e13, 1e14, 1e15, 1e16, 1e17}) {
    const double exact = eval_epsilon(LorentzPoles{{{f, w0, g}}}, xi);
    CHECK(kk_to_imag_axis(tab, xi).value == doctest::Approx(exact).epsilon(1e-3));
  }
}

TEST_CASE("kk reproduces drude with the low-frequency extension") {
  const double wp = units::from_ev(9.0), gamma = units::from_ev(0.035);
  auto tab = sample_loss(1e11, 1e19, 20000,
                         [&](double w) { return wp * wp * gamma / (w * (w * w + gamma * gamma)); });
  tab.low_extension = LowFrequencyExtension::drude;
  for (double xi : {1e13, 1e14, 1e15, 1e16, 1e17}) {
    const double exact = eval_epsilon(Drude{wp, gamma}, xi);
    CHECK(kk_to_imag_axis(tab, xi).value == doctest::Approx(exact).epsilon(1e-3));
  }
  const StaticResponse s = static_response(tab);
  CHECK(s.conductor);
  // The extension starts at the first grid point, slightly below the DC limit.
  CHECK(s.dc_weight == doctest::Approx(wp * wp / gamma).epsilon(1e-5));
}

TEST_CASE("coarse tables carry a quality warning") {
  const auto tab = sample_loss(1e14, 1e16, 6, [](double w) { return 1e30 / (w * w); });
  CHECK(kk_to_imag_axis(tab, 1e15).quality_warning);
}

TEST_CASE("nk ingestion") {
  std::istringstream in(
      "# sample table\n"
      "wavelength_nm, n, k\n"
      "500, 2, 3\n"
      "1000, 1, 1\n");
  const TabulatedLoss tab = ingest_nk_table(in);
  REQUIRE(tab.omega.size() == 2);
  CHECK(tab.omega[0] < tab.omega[1]);
  CHECK(tab.omega[1] == doctest::Approx(3.767e15).epsilon(1e-3));
  CHECK(tab.eps_imag[1] == doctest::Approx(12.0));
  CHECK(tab.eps_imag[0] == doctest::Approx(2.0));
}

TEST_CASE("nk ingestion ignores row and column order") {
  std::istringstream a("omega_rad_s n k\n1e15 1 0.5\n2e15 2 0.25\n3e15 1.5 1\n");
  std::istringstream b("k;n;omega_rad_s\n1;1.5;3e15\n0.5;1;1e15\n0.25;2;2e15\n");
  const TabulatedLoss ta = ingest_nk_table(a), tb = ingest_nk_table(b);
  CHECK(ta.omega == tb.omega);
  CHECK(ta.eps_imag == tb.eps_imag);
  CHECK(kk_to_imag_axis(ta, 1e15).value == kk_to_imag_axis(tb, 1e15).value);
}

TEST_CASE("nk ingestion rejects malformed tables") {
  std::istringstream no_header("500 2 3\n600 1 1\n");
  CHECK_THROWS_AS(ingest_nk_table(no_header), ValidationError);
  std::istringstream negative("wavelength_nm n k\n500 2 -3\n600 1 1\n");
  CHECK_THROWS_AS(ingest_nk_table(negative), ValidationError);
  std::istringstream duplicate("omega_rad_s n k\n1e15 1 1\n1e15 2 2\n");
  CHECK_THROWS_AS(ingest_nk_table(duplicate), ValidationError);
}

TEST_CASE("ito dc conductivity matches its resistivity") {
  const StaticResponse s = static_response(defaults::ito());
  REQUIRE(s.conductor);
  const double sigma = units::epsilon0 * s.dc_weight;
  const double target = 1.0 / defaults::ito_resistivity_ohm_m;
  CHECK(sigma >= 0.5 * target);
  CHECK(sigma <= 2.0 * target);
}

TEST_CASE("glass is a static insulator") {
  const StaticResponse s = static_response(defaults::glass());
  CHECK_FALSE(s.conductor);
  CHECK(s.permittivity == doctest::Approx(2.1));
}

TEST_CASE("bundled models are monotone and at least one") {
  const auto lib = MaterialLibrary::defaults();
  for (const auto& name : lib.names()) {
    const Material& m = lib.get(name);
    if (m.is_ideal()) continue;
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 200; ++i) {
      const double xi = 1e11 * std::pow(1e8, i / 200.0);
      const double eps = eval_epsilon(m.model(), xi);
      CHECK(eps >= 1.0);
      CHECK(eps <= prev);
      prev = eps;
    }
  }
}

TEST_CASE("material library lookup") {
  const auto lib = MaterialLibrary::defaults();
  CHECK(lib.contains("gold"));
  CHECK(lib.get("ideal-metal").is_ideal());
  CHECK_THROWS_AS(lib.get("ideal-metal").model(), ValidationError);
  CHECK_THROWS_AS(lib.get("unobtainium"), ValidationError);
}
