#include <doctest.h>

#include <cmath>
#include <random>

#include "cqed/bcs_surface.hpp"
#include "cqed/error.hpp"
#include "cqed/units.hpp"

using namespace cqed;
using namespace cqed::bcs;

namespace {

TempSweep synthetic(double f0, double p, double tc, std::optional<double> qmax, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  TempSweep s;
  s.f0_hz = f0;
  for (int i = 0; i < 30; ++i) {
    const double t = tc * (0.1 + 0.75 * i / 29.0);
    s.temperature_k.push_back(t);
    s.df_over_f.push_back(frequency_shift_model(t, f0, p, tc) * (1.0 + noise * n01(rng)));
    if (qmax) s.q_int.push_back(q_int_model(t, f0, p, tc, *qmax) * (1.0 + noise * n01(rng)));
  }
  return s;
}

}  // namespace

TEST_CASE("Mattis-Bardeen against dense quadrature") {
  // Brute-force quadrature of the BCS integrals with the interpolated gap.
  const auto s = mattis_bardeen(9e9, 0.3, 1.2);
  CHECK(s.sigma1 == doctest::Approx(0.00945858997235826).epsilon(1e-6));
  CHECK(s.sigma2 == doctest::Approx(15.2670407474874).epsilon(1e-6));
}

TEST_CASE("zero-temperature limits") {
  const double tc = 1.2, f = 5e9;
  const auto cold = mattis_bardeen(f, 0.04 * tc, tc);
  CHECK(cold.sigma1 < 1e-8);
  CHECK(cold.sigma2 == doctest::Approx(sigma2_zero_temperature(f, tc)).epsilon(1e-6));
  const double delta0 = gap(1e-6, tc);
  for (double fl : {1e8, 1e7})
    CHECK(sigma2_zero_temperature(fl, tc) / (M_PI * delta0 / (constants::h * fl)) == doctest::Approx(1.0).epsilon(2e-3));
}

TEST_CASE("sigma2 falls monotonically with temperature") {
  const double tc = 1.2;
  std::vector<double> temps;
  for (int i = 0; i <= 60; ++i) temps.push_back(tc * (0.1 + 0.89 * i / 60.0));
  const auto sweep = mattis_bardeen_sweep(9e9, temps, tc);
  for (std::size_t i = 1; i < sweep.size(); ++i) CHECK(sweep[i].sigma2 < sweep[i - 1].sigma2);
  for (std::size_t i = 0; i < temps.size(); i += 15) CHECK(sweep[i].sigma2 == mattis_bardeen(9e9, temps[i], tc).sigma2);
}

TEST_CASE("gap equation agrees with the interpolation") {
  for (double r : {0.2, 0.5, 0.8})
    CHECK(gap(r * 1.2, 1.2, GapModel::GapEquation) == doctest::Approx(gap(r * 1.2, 1.2)).epsilon(0.02));
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(mattis_bardeen(9e9, 1.3, 1.2), ValidationError);
  CHECK_THROWS_AS(mattis_bardeen(9e9, 0.0, 1.2), ValidationError);
  CHECK_THROWS_AS(mattis_bardeen(200e9, 0.3, 1.2), ValidationError);
}

TEST_CASE("model limits") {
  for (double t : {0.2, 0.6, 1.0}) CHECK(frequency_shift_model(t, 9e9, 0.0, 1.31) == 0.0);
  CHECK(q_int_model(0.02, 9e9, 4.61e-5, 1.31, 5e7) == doctest::Approx(5e7).epsilon(1e-6));
  double last = 1e300;
  for (int i = 0; i < 20; ++i) {
    const double q = q_int_model(0.15 + 0.05 * i, 9e9, 2e-5, 1.25, 5e7);
    CHECK(q < last);
    last = q;
  }
}

TEST_CASE("frequency-shift round trip") {
  const auto f = fit_frequency_shift(synthetic(9e9, 4.61e-5, 1.31, std::nullopt, 0.005, 7));
  CHECK(f.p_mag == doctest::Approx(4.61e-5).epsilon(0.03));
  CHECK(f.tc_k == doctest::Approx(1.31).epsilon(0.03));
}

TEST_CASE("Q versus temperature round trip") {
  const auto f = fit_q_vs_temperature(synthetic(9e9, 2e-5, 1.25, 5e7, 0.005, 8));
  CHECK(f.p_mag == doctest::Approx(2e-5).epsilon(0.05));
  CHECK(f.tc_k == doctest::Approx(1.25).epsilon(0.05));
  REQUIRE(f.q_int_max);
  CHECK(*f.q_int_max == doctest::Approx(5e7).epsilon(0.05));
}

TEST_CASE("joint fit and the London depth") {
  BcsFitOptions o;
  o.surface_participation_per_m = 187.0;
  const auto f = fit_joint(synthetic(9e9, 4.61e-5, 1.31, 1e9, 0.0, 1), o);
  CHECK(f.p_mag == doctest::Approx(4.61e-5).epsilon(1e-4));
  REQUIRE(f.lambda_l_m);
  CHECK(*f.lambda_l_m == doctest::Approx(f.p_mag / 187.0).epsilon(1e-12));
  CHECK(london_depth(4.61e-5, 187.0) == doctest::Approx(246.524064171123e-9).epsilon(1e-9));
}

TEST_CASE("Pippard inversion") {
  CHECK(pippard_mean_free_path(16e-9 * std::sqrt(2.0)) == doctest::Approx(1600e-9).epsilon(1e-12));
  CHECK(pippard_mean_free_path(235e-9) == doctest::Approx(1600e-9 / (std::pow(235.0 / 16.0, 2) - 1.0)).epsilon(1e-12));
  CHECK(pippard_mean_free_path(235e-9) == doctest::Approx(7.45e-9).epsilon(0.01));
  CHECK(pippard_mean_free_path(37.6e-9) == doctest::Approx(353.8e-9).epsilon(1e-3));
  CHECK_THROWS_AS(pippard_mean_free_path(10e-9), ValidationError);
}
