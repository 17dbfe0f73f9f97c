#include <doctest.h>

#include <cmath>

#include "cqed/error.hpp"
#include "cqed/geometry.hpp"
#include "cqed/units.hpp"

using namespace cqed;
using namespace cqed::geometry;

namespace {

// Bessel roots from scipy.special.jnp_zeros / jn_zeros.
constexpr double kP11 = 1.8411837813406595;
constexpr double kP21 = 3.0542369282271404;
constexpr double kP01 = 3.8317059702075125;
constexpr double kJ01 = 2.4048255576957724;

HoleSpec te11(double radius, double depth = 0.0) { return {radius, depth, {ModeFamily::TE, 1, 1}}; }

}  // namespace

TEST_CASE("bessel roots against scipy") {
  CHECK(bessel_root(ModeFamily::TE, 1, 1) == doctest::Approx(kP11).epsilon(1e-12));
  CHECK(bessel_root(ModeFamily::TE, 2, 1) == doctest::Approx(kP21).epsilon(1e-12));
  CHECK(bessel_root(ModeFamily::TE, 0, 1) == doctest::Approx(kP01).epsilon(1e-12));
  CHECK(bessel_root(ModeFamily::TM, 0, 1) == doctest::Approx(kJ01).epsilon(1e-12));
  CHECK_THROWS_AS(bessel_root(ModeFamily::TE, 1, 0), ValidationError);
  CHECK_THROWS_AS(bessel_root(ModeFamily::TM, -1, 1), ValidationError);
}

TEST_CASE("cutoff of the drilled hole") {
  CHECK(cutoff_frequency(te11(2.38e-3)) == doctest::Approx(36911442530.94674).epsilon(1e-10));
  CHECK(cutoff_frequency(te11(4.76e-3)) == doctest::Approx(0.5 * cutoff_frequency(te11(2.38e-3))).epsilon(1e-14));
  HoleSpec te21 = te11(2.38e-3);
  te21.mode.n = 2;
  CHECK(cutoff_frequency(te21) / cutoff_frequency(te11(2.38e-3)) == doctest::Approx(kP21 / kP11).epsilon(1e-12));
  CHECK_THROWS_AS(cutoff_frequency(te11(0.0)), ValidationError);
}

TEST_CASE("propagation constant") {
  const auto hole = te11(2.38e-3);
  const double fc = cutoff_frequency(hole);
  // Continuous through zero at cutoff; k_c itself is ~770 1/m.
  CHECK(propagation_constant(hole, fc).magnitude < 1e-3);

  const auto b7 = propagation_constant(hole, 7e9);
  CHECK(b7.evanescent);
  CHECK(b7.magnitude == doctest::Approx(759.5680641634199).epsilon(1e-10));

  const auto b2 = propagation_constant(hole, 2.0 * fc);
  CHECK_FALSE(b2.evanescent);
  const double kc = kP11 / 2.38e-3;
  CHECK(b2.magnitude == doctest::Approx(kc * std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("evanescent attenuation") {
  const auto hole = te11(2.38e-3, 15e-3);
  CHECK(evanescent_attenuation(hole, 7e9) == doctest::Approx(1.1268256299195859e-05).epsilon(1e-8));
  CHECK(evanescent_attenuation(te11(2.38e-3, 0.0), 7e9) == 1.0);
  const double once = evanescent_attenuation(hole, 7e9);
  CHECK(evanescent_attenuation(te11(2.38e-3, 30e-3), 7e9) == doctest::Approx(once * once).epsilon(1e-12));
  CHECK_THROWS_AS(evanescent_attenuation(hole, 40e9), ValidationError);
  CHECK(external_q_ratio(hole, te11(2.38e-3, 2.38e-3), 7e9) == doctest::Approx(211873072.66361713).epsilon(1e-8));
}

TEST_CASE("rectangular spectrum closed form") {
  const auto s = rect_spectrum(0.03, 0.03, 1, 1);
  REQUIRE(s.frequencies.size() == 1);
  CHECK(s.frequencies[0] == doctest::Approx(0.5 * constants::c * std::sqrt(2.0) / 0.03).epsilon(1e-14));

  // Very long cavity: every (1, m) sits at the height cutoff c / 2h.
  const auto lng = rect_spectrum(4e-3, 1e3, 1, 5);
  for (double f : lng.frequencies) CHECK(f == doctest::Approx(constants::c / 8e-3).epsilon(1e-9));

  // h = 4 mm, l = 140 mm: spacings grow with m toward c / 2l.
  const auto r = rect_spectrum(4e-3, 0.14, 1, 400);
  const double limit = constants::c / (2.0 * 0.14);
  for (std::size_t i = 1; i < r.spacings.size(); ++i) CHECK(r.spacings[i] > r.spacings[i - 1]);
  for (double s : r.spacings) CHECK(s < limit);
  CHECK(r.spacings.back() > 0.99 * limit);
}

TEST_CASE("tapered solver reduces to the closed form") {
  CavityProfile p;
  p.h0_m = 25e-3;
  p.length_m = 0.15;
  const auto fd = tapered_spectrum(p, 12e9);
  const auto cf = rect_spectrum(p.h0_m, p.length_m, 1, 60);
  REQUIRE(fd.frequencies.size() >= 9);
  for (std::size_t i = 0; i < fd.frequencies.size(); ++i)
    CHECK(fd.frequencies[i] == doctest::Approx(cf.frequencies[i]).epsilon(1e-3));
}

TEST_CASE("quadratic taper evens out mode spacing") {
  // Long enough that the first nine modes sit near cutoff, as in the multimode cavity.
  CavityProfile flat;
  flat.h0_m = 28e-3;
  flat.length_m = 0.25;
  CavityProfile taper = flat;
  taper.taper_coeff = 0.10 * flat.h0_m / (flat.length_m * flat.length_m);
  const auto a = tapered_spectrum(flat, 12e9);
  const auto b = tapered_spectrum(taper, 12e9);
  REQUIRE(a.frequencies.size() >= 9);
  REQUIRE(b.frequencies.size() >= 9);
  CHECK(spacing_spread(b, 1, 8) < spacing_spread(a, 1, 8));
}

TEST_CASE("tapered solver converges with the grid") {
  CavityProfile p;
  p.h0_m = 25e-3;
  p.length_m = 0.15;
  p.taper_coeff = 0.1 * p.h0_m / (p.length_m * p.length_m);
  p.grid_points = 1024;
  const auto coarse = tapered_spectrum(p, 10e9);
  p.grid_points = 4096;
  const auto fine = tapered_spectrum(p, 10e9);
  REQUIRE(coarse.frequencies.size() == fine.frequencies.size());
  for (std::size_t i = 0; i < fine.frequencies.size(); ++i)
    CHECK(std::abs(coarse.frequencies[i] / fine.frequencies[i] - 1.0) < 1e-4);
}

TEST_CASE("parallel sweep matches single runs") {
  std::vector<CavityProfile> ps(4);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    ps[i].h0_m = 25e-3;
    ps[i].length_m = 0.15;
    ps[i].taper_coeff = 0.03 * static_cast<double>(i) * ps[i].h0_m / (0.15 * 0.15);
    ps[i].grid_points = 512;
  }
  const auto sweep = tapered_spectrum_sweep(ps, 10e9);
  for (std::size_t i = 0; i < ps.size(); ++i) CHECK(sweep[i].frequencies == tapered_spectrum(ps[i], 10e9).frequencies);
}
