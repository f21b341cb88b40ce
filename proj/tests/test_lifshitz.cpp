#include "casimir/errors.hpp"
#include "casimir/lifshitz.hpp"
#include "casimir/units.hpp"
#include "oracle/lifshitz_oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace casimir;

namespace {

const MaterialLibrary& lib() {
  static const MaterialLibrary l = MaterialLibrary::defaults();
  return l;
}

const LayeredMirror& mirror(const std::string& name) {
  static const auto m = default_mirrors(lib());
  return m.at(name);
}

double ideal_pressure(double d) {
  return -units::pi * units::pi * units::hbar * units::speed_of_light / (240.0 * std::pow(d, 4));
}

LifshitzOptions at_temperature(double t) {
  LifshitzOptions opt;
  opt.grid = matsubara_frequencies(t);
  return opt;
}

}  // namespace

TEST_CASE("matsubara spacing") {
  const MatsubaraGrid g = matsubara_frequencies(300.0);
  CHECK(g.spacing == doctest::Approx(2.468e14).epsilon(1e-3));
  CHECK(g.frequency(3) == doctest::Approx(3.0 * g.spacing));
  CHECK(matsubara_frequencies(150.0).spacing == doctest::Approx(0.5 * g.spacing).epsilon(1e-15));
  CHECK_THROWS_AS(matsubara_frequencies(0.0), ValidationError);
}

TEST_CASE("reflection limits") {
  const double xi = 1e15, k = 1e7;
  const Reflection vac = reflection_coefficients(mirror("vacuum"), xi, k);
  CHECK(vac.te == 0.0);
  CHECK(vac.tm == 0.0);
  for (double x : {0.0, 1e12, 1e16}) {
    const Reflection id = reflection_coefficients(mirror("ideal-metal"), x, k);
    CHECK(id.te == -1.0);
    CHECK(id.tm == 1.0);
  }
  const Reflection au = reflection_coefficients(mirror("gold"), xi, k);
  CHECK(au.te < 0.0);
  CHECK(au.te > -1.0);
  CHECK(au.tm > 0.0);
  CHECK(au.tm < 1.0);
}

TEST_CASE("zero-frequency policies") {
  const double k = 1e6;
  const Reflection drude = reflection_coefficients(mirror("gold"), 0.0, k, ZeroFrequencyPolicy::drude);
  CHECK(drude.te == 0.0);
  CHECK(drude.tm == 1.0);
  const Reflection plasma = reflection_coefficients(mirror("gold"), 0.0, k, ZeroFrequencyPolicy::plasma);
  CHECK(plasma.te < -0.9);
  CHECK(plasma.tm == 1.0);
  CHECK(parse_zero_frequency_policy(to_string(ZeroFrequencyPolicy::plasma)) == ZeroFrequencyPolicy::plasma);
  CHECK_THROWS_AS(parse_zero_frequency_policy("hydrodynamic"), ValidationError);
}

TEST_CASE("stack reflection matches the transfer-matrix reference") {
  const oracle::Stack ref = oracle::ito_on_glass();
  for (double xi : {1e13, 2.468e14, 5e15, 1e17})
    for (double k : {1e5, 1e7, 3e8}) {
      const Reflection r = reflection_coefficients(mirror("ito-on-glass"), xi, k);
      const auto [te, tm] = oracle::reflection(ref, xi, k);
      CHECK(r.te == doctest::Approx(te).epsilon(1e-12));
      CHECK(r.tm == doctest::Approx(tm).epsilon(1e-12));
    }
}

TEST_CASE("film on its own substrate is a half-space") {
  const Material& au = lib().get("gold");
  const LayeredMirror film{"film", {{au, 40e-9}}, au};
  for (double k : {1e6, 1e8}) {
    const Reflection a = reflection_coefficients(film, 1e15, k);
    const Reflection b = reflection_coefficients(mirror("gold"), 1e15, k);
    CHECK(a.te == doctest::Approx(b.te).epsilon(1e-13));
    CHECK(a.tm == doctest::Approx(b.tm).epsilon(1e-13));
  }
  const double pa = plate_plate_pressure(film, mirror("gold"), 100e-9).value;
  const double pb = plate_plate_pressure(mirror("gold"), mirror("gold"), 100e-9).value;
  CHECK(pa == doctest::Approx(pb).epsilon(1e-9));
}

TEST_CASE("thick film approaches the film half-space") {
  const LayeredMirror thick{"thick", {{lib().get("ito"), 2e-6}}, lib().get("glass")};
  const double a = plate_plate_pressure(mirror("gold"), thick, 100e-9).value;
  const double b = plate_plate_pressure(mirror("gold"), mirror("ito"), 100e-9).value;
  CHECK(a == doctest::Approx(b).epsilon(1e-4));
}

TEST_CASE("engine agrees with the brute-force reference") {
  const oracle::Stack au = oracle::half_space(oracle::gold());
  const oracle::Stack ito = oracle::ito_on_glass();
  for (double d : {60e-9, 250e-9}) {
    CHECK(plate_plate_pressure(mirror("gold"), mirror("gold"), d).value ==
          doctest::Approx(oracle::pressure(au, au, d, 300.0)).epsilon(1e-4));
    CHECK(plate_plate_pressure(mirror("gold"), mirror("ito-on-glass"), d).value ==
          doctest::Approx(oracle::pressure(au, ito, d, 300.0)).epsilon(1e-4));
    CHECK(plate_plate_free_energy(mirror("gold"), mirror("ito-on-glass"), d).value ==
          doctest::Approx(oracle::free_energy(au, ito, d, 300.0)).epsilon(1e-4));
  }
}

TEST_CASE("ideal-metal limit") {
  const double d = 100e-9;
  const auto opt = at_temperature(1.0);
  const LifshitzResult p = plate_plate_pressure(mirror("ideal-metal"), mirror("ideal-metal"), d, opt);
  const LifshitzResult e = plate_plate_free_energy(mirror("ideal-metal"), mirror("ideal-metal"), d, opt);
  CHECK(p.value == doctest::Approx(ideal_pressure(d)).epsilon(1e-6));
  CHECK(e.value == doctest::Approx(ideal_pressure(d) * d / 3.0).epsilon(1e-6));
  CHECK(p.tail_completed);
}

TEST_CASE("vacuum exerts no force") {
  CHECK(plate_plate_pressure(mirror("vacuum"), mirror("gold"), 100e-9).value == 0.0);
  CHECK(plate_plate_free_energy(mirror("vacuum"), mirror("vacuum"), 100e-9).value == 0.0);
}

TEST_CASE("free energy and pressure are consistent") {
  const double d = 80e-9, h = 0.5e-9;
  const auto& a = mirror("gold");
  const auto& b = mirror("ito-on-glass");
  const double de = (plate_plate_free_energy(a, b, d + h).value - plate_plate_free_energy(a, b, d - h).value) / (2.0 * h);
  CHECK(plate_plate_pressure(a, b, d).value == doctest::Approx(-de).epsilon(1e-3));
}

TEST_CASE("pressure shape") {
  double prev = -std::numeric_limits<double>::infinity();
  for (double d = 50e-9; d <= 1100e-9; d *= 1.3) {
    const double au = plate_plate_pressure(mirror("gold"), mirror("gold"), d).value;
    const double ito = plate_plate_pressure(mirror("gold"), mirror("ito-on-glass"), d).value;
    CHECK(au < 0.0);
    CHECK(ito < 0.0);
    CHECK(au > prev);
    CHECK(std::abs(ito) < std::abs(au));
    CHECK(std::abs(au) < std::abs(ideal_pressure(d)));
    prev = au;
  }
}

TEST_CASE("sphere-plate proximity force") {
  const auto& id = mirror("ideal-metal");
  const SpherePlateResult g = sphere_plate_force_gradient(100e-6, 100e-9, id, id);
  CHECK(g.value / 100e-6 == doctest::Approx(-81.7).epsilon(1e-3));
  CHECK_FALSE(g.pfa_warning);

  const double f1 = sphere_plate_force(50e-6, 100e-9, mirror("gold"), mirror("gold")).value;
  const double f2 = sphere_plate_force(100e-6, 100e-9, mirror("gold"), mirror("gold")).value;
  CHECK(f2 == doctest::Approx(2.0 * f1).epsilon(1e-14));
  CHECK(f1 < 0.0);

  CHECK(sphere_plate_force(1e-6, 100e-9, id, id).pfa_warning);
  CHECK_THROWS_AS(sphere_plate_force(-1.0, 100e-9, id, id), ValidationError);
}

TEST_CASE("separation range is enforced") {
  CHECK_THROWS_AS(plate_plate_pressure(mirror("gold"), mirror("gold"), 0.5e-9), ValidationError);
  CHECK_THROWS_AS(plate_plate_pressure(mirror("gold"), mirror("gold"), 20e-6), ValidationError);
}

TEST_CASE("theory curve is independent of the thread count") {
  Eigen::ArrayXd d = Eigen::ArrayXd::LinSpaced(7, 50e-9, 500e-9);
  const auto& a = mirror("gold");
  const auto& b = mirror("ito-on-glass");
  const TheoryCurve one = compute_theory_curve(a, b, 100e-6, d, {}, 1);
  const TheoryCurve three = compute_theory_curve(a, b, 100e-6, d, {}, 3);
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    CHECK(one.pressure[i] == three.pressure[i]);
    CHECK(one.energy[i] == three.energy[i]);
    CHECK(one.gradient[i] == three.gradient[i]);
    CHECK(one.gradient[i] == doctest::Approx(2.0 * units::pi * 100e-6 * one.pressure[i]).epsilon(1e-15));
  }
}
