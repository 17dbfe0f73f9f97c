#include <doctest.h>

#include <cmath>

#include "cqed/bbq.hpp"
#include "cqed/drive_control.hpp"
#include "cqed/error.hpp"
#include "cqed/units.hpp"

using namespace cqed;
using namespace cqed::drive;

namespace {

const bbq::DressedSystem& nine_mode() {
  static const bbq::DressedSystem d = bbq::quantize(bbq::nine_mode_system());
  return d;
}

constexpr std::size_t kReadout = 9;

}  // namespace

TEST_CASE("steady-state displacements") {
  const auto& d = nine_mode();
  const double drive = d.mode_hz[kReadout] - 1e9;
  const auto zero = steady_displacements(d, 0.0, drive);
  CHECK(zero.xi == 0.0);
  CHECK(zero.eta == 0.0);
  const auto x = steady_displacements(d, 10e6, drive);
  CHECK(x.xi == doctest::Approx(5e-3).epsilon(1e-12));
  const auto y = steady_displacements(d, 20e6, drive);
  CHECK(y.xi == doctest::Approx(2.0 * x.xi).epsilon(1e-14));
  CHECK(y.eta == doctest::Approx(2.0 * x.eta).epsilon(1e-14));
}

TEST_CASE("sideband plan bookkeeping") {
  const auto& d = nine_mode();
  const auto p = sideband_plan(d, 2, 30e6);
  CHECK(p.xi_d == doctest::Approx(p.xi_t + p.xi_r).epsilon(1e-14));
  CHECK(p.g_hz ==
        doctest::Approx(d.e_c_hz * d.beta_t * d.beta_t * std::abs(d.beta[2] * d.beta[kReadout]) * p.xi_d).epsilon(1e-12));
  CHECK(p.pi_time_s == doctest::Approx(1.0 / (4.0 * std::sqrt(2.0) * p.g_hz)).epsilon(1e-14));
  CHECK(p.half_period_1_over_2g_s == doctest::Approx(1.0 / (2.0 * p.g_hz)).epsilon(1e-14));
  CHECK(p.bare_drive_hz == doctest::Approx(2.0 * d.transmon_hz - d.mode_hz[2] - d.alpha_hz).epsilon(1e-14));
  CHECK(p.n_r == doctest::Approx(p.xi_r * p.xi_r).epsilon(1e-14));
  CHECK_THROWS_AS(sideband_plan(d, kReadout, 30e6), ValidationError);
  CHECK_THROWS_AS(sideband_plan(d, 42, 30e6), ValidationError);
}

TEST_CASE("Stark term vanishes for equal participations") {
  auto d = nine_mode();
  d.beta[2] = d.beta_t;
  CHECK(sideband_plan(d, 2, 30e6).stark_hz == doctest::Approx(0.0));
}

TEST_CASE("required drive grows with mode frequency") {
  double last = 0.0;
  for (std::size_t m = 0; m < 7; ++m) {
    const double eps = epsilon_for_rate(nine_mode(), m, 625e3);
    CHECK(eps > last);
    CHECK(sideband_plan(nine_mode(), m, eps).g_hz == doctest::Approx(625e3).epsilon(1e-6));
    last = eps;
  }
}

TEST_CASE("thermal dephasing") {
  const double gamma = 1.0 / 86e-6;
  CHECK(dephasing_limit(1e6, gamma, 0.0) == 0.0);
  const double chi_hz = 1e3 * gamma / two_pi;  // chi / gamma = 1000 in angular units
  CHECK(dephasing_limit(chi_hz, gamma, 0.012) == doctest::Approx(0.012 * gamma).epsilon(0.02));
  // Small chi: Gamma -> chi^2 n (1 + n) / gamma.
  for (double ratio : {1e-3, 1e-2}) {
    const double chi = ratio * gamma;
    const double series = chi * chi * 0.012 * 1.012 / gamma;
    CHECK(dephasing_limit(chi / two_pi, gamma, 0.012) == doctest::Approx(series).epsilon(ratio));
  }
}

TEST_CASE("T2 composition across the thermal band") {
  CHECK(t2_limit(2e-3, 0.0) == doctest::Approx(4e-3));
  const double chi = nine_mode().chi_hz[2];
  const double gamma = 1.0 / 86e-6;
  // numpy evaluation of the same closed form
  CHECK(t2_limit(2e-3, dephasing_limit(chi, gamma, 0.007)) == doctest::Approx(0.003017545051383491).epsilon(1e-9));
  CHECK(t2_limit(2e-3, dephasing_limit(chi, gamma, 0.012)) == doctest::Approx(0.002567165679742265).epsilon(1e-9));
  CHECK(t2_limit(2e-3, dephasing_limit(chi, gamma, 0.017)) == doctest::Approx(0.0022337678670918374).epsilon(1e-9));
}

TEST_CASE("blockade hierarchy and optimum") {
  const auto ok = blockade_params(1e6, 107e3, 10e3, 86e-6, 86e-6);
  CHECK(ok.hierarchy_ok);
  CHECK(ok.subspace_rabi_hz == doctest::Approx(20e3));
  CHECK_FALSE(blockade_params(1e6, 107e3, 107e3, 86e-6, 86e-6).hierarchy_ok);

  // Grid search of leakage + Purcell over eps.
  const double om = two_pi * 107e3, chi = two_pi * 1e6, tq = 86e-6;
  double best = 0.0, best_cost = 1e300;
  for (double e = 100.0; e < 200e3; e *= 1.001) {
    const double w = two_pi * e;
    const double cost = w / (om * om * tq) + om * om / (w * chi * chi * tq);
    if (cost < best_cost) best_cost = cost, best = e;
  }
  CHECK(ok.optimal_epsilon_hz == doctest::Approx(best).epsilon(0.05));
  CHECK(ok.minimum_error == doctest::Approx(best_cost).epsilon(1e-4));
}
