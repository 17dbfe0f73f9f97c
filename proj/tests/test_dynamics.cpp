#include <doctest.h>

#include <cmath>

#include "cqed/bbq.hpp"
#include "cqed/drive_control.hpp"
#include "cqed/dynamics.hpp"
#include "cqed/error.hpp"
#include "cqed/kernels.hpp"
#include "cqed/resonator_fit.hpp"
#include "cqed/units.hpp"

using namespace cqed;
using namespace cqed::dyn;

namespace {

const bbq::DressedSystem& nine_mode() {
  static const bbq::DressedSystem d = bbq::quantize(bbq::nine_mode_system());
  return d;
}

std::vector<double> grid(double t_end, int n) {
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = t_end * i / (n - 1);
  return t;
}

Op random_hermitian(Eigen::Index n, int seed) {
  std::srand(static_cast<unsigned>(seed));
  Op a = Op::Random(n, n);
  return a + a.adjoint();
}

}  // namespace

TEST_CASE("tensor-product space") {
  const Space s({3, 4});
  CHECK(s.dim() == 12);
  CHECK(s.index({1, 2}) == 6);
  const Op a = s.destroy(1);
  CHECK((a.adjoint() * a - s.number(1)).norm() < 1e-14);
  const Op rho = projector(s.ket({2, 1}));
  CHECK((s.partial_trace_keep(rho, 0) - projector(Eigen::VectorXcd::Unit(3, 2))).norm() < 1e-14);
  CHECK_THROWS_AS(Space({100, 100}, 4096), ValidationError);
  CHECK_THROWS_AS(Space({1, 4}), ValidationError);
}

TEST_CASE("dispersive Hamiltonian is diagonal with chi ladders") {
  const auto& d = nine_mode();
  HilbertConfig cfg;
  cfg.transmon_dim = 3;
  cfg.mode_dims = {6};
  cfg.active_modes = {2};
  const Op h = build_hamiltonian(d, cfg);
  CHECK((h - Op(h.diagonal().asDiagonal())).norm() == 0.0);
  const Space s(cfg);
  for (int n = 0; n < 6; ++n) {
    const double shift = (h(s.index({1, n}), s.index({1, n})) - h(s.index({1, 0}), s.index({1, 0}))).real() -
                         (h(s.index({0, n}), s.index({0, n})) - h(s.index({0, 0}), s.index({0, 0}))).real();
    CHECK(shift == doctest::Approx(-angular(d.chi_hz[2]) * n).epsilon(1e-12));
  }
  cfg.mode_dims = {200};
  cfg.transmon_dim = 30;
  CHECK_THROWS_AS(build_hamiltonian(d, cfg), ValidationError);
}

TEST_CASE("quartic form reproduces the dispersive shift") {
  // Three transmon levels are not enough here: the quartic term mixes in |3> and |4>
  // and the shift comes out 16% high. Six levels match the bbq oracle.
  const auto& d = nine_mode();
  const Space s({6, 6});
  const std::vector<std::size_t> modes{0};
  const Op h = quartic_hamiltonian(d, s, modes);
  Eigen::SelfAdjointEigenSolver<Op> es(h);
  auto energy = [&](int nt, int nm) {
    Eigen::Index best = 0;
    es.eigenvectors().row(s.index({nt, nm})).cwiseAbs2().maxCoeff(&best);
    return es.eigenvalues()(best);
  };
  const double chi = -(energy(1, 1) - energy(1, 0) - energy(0, 1) + energy(0, 0)) / two_pi;
  CHECK(chi == doctest::Approx(d.chi_hz[0]).epsilon(0.05));
  CHECK(chi == doctest::Approx(bbq::numeric_couplings(d, modes, 6).chi_hz[0]).epsilon(1e-6));
}

TEST_CASE("Lindblad kernels agree with each other") {
  const Op h = random_hermitian(12, 3);
  std::vector<Op> c{Op::Random(12, 12), Op::Random(12, 12)};
  const kernels::LindbladGenerator gen(h, c);
  Op rho = random_hermitian(12, 4);
  Op a(12, 12), b(12, 12);
  kernels::lindblad_rhs_serial(gen, rho, a);
  kernels::lindblad_rhs_parallel(gen, rho, b);
  CHECK((a - b).norm() < 1e-12 * a.norm());
  const Op ls = kernels::liouvillian_serial(h, c);
  CHECK((ls - kernels::liouvillian_parallel(h, c)).norm() < 1e-12 * ls.norm());
  const Eigen::VectorXcd v = ls * Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
  CHECK((v - Eigen::Map<const Eigen::VectorXcd>(a.data(), a.size())).norm() < 1e-10 * a.norm());
}

TEST_CASE("free decay of one photon") {
  const Space s(std::vector<int>{4});
  Channels ch;
  ch.subsystems = {{1e-3, std::numeric_limits<double>::infinity(), 0.0}};
  const auto c = collapse_operators(s, ch);
  const Op rho0 = projector(s.ket({1}));
  const auto t = grid(5e-3, 51);
  Hamiltonian h;
  h.h0 = Op::Zero(4, 4);
  const std::vector<Observable> obs{{"n", s.number(0)}};
  const auto exact = evolve(h, rho0, c, t, obs);
  // A zero-amplitude drive forces the RK4 path.
  h.drives.push_back({s.destroy(0), [](double) { return cplx{}; }});
  const auto rk = evolve(h, rho0, c, t, obs);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(std::abs(exact.values[0][i] - std::exp(-t[i] / 1e-3)) < 1e-4);
    CHECK(std::abs(rk.values[0][i] - std::exp(-t[i] / 1e-3)) < 1e-4);
  }
  CHECK(exact.max_trace_error < 1e-8);
  CHECK(rk.max_trace_error < 1e-8);
  CHECK(rk.max_hermiticity_error < 1e-8);
}

TEST_CASE("Rabi oscillation at the drive strength") {
  const double omega = two_pi * 1e6;
  const Space s(std::vector<int>{2});
  const Op sp = s.destroy(0).adjoint();
  Hamiltonian h;
  h.h0 = Op::Zero(2, 2);
  h.drives.push_back({sp, [omega](double) { return cplx(0.5 * omega, 0.0); }});
  const double t_pi = std::numbers::pi / omega;
  const auto t = grid(2.0 * t_pi, 401);
  const auto r = evolve(h, projector(s.ket({0})), {}, t, {{"pe", s.projector(0, 1)}});
  for (std::size_t i = 0; i < t.size(); ++i)
    CHECK(r.values[0][i] == doctest::Approx(std::pow(std::sin(0.5 * omega * t[i]), 2)).epsilon(1e-3));
  // Locate the first maximum by a parabola through the peak samples.
  const auto& p = r.values[0];
  std::size_t k = 1;
  while (p[k + 1] > p[k]) ++k;
  const double denom = p[k - 1] - 2 * p[k] + p[k + 1];
  const double tk = t[k] + 0.5 * (p[k - 1] - p[k + 1]) / denom * (t[1] - t[0]);
  CHECK(1.0 / (2.0 * tk) == doctest::Approx(omega / two_pi).epsilon(1e-3));
}

TEST_CASE("thermal steady state obeys detailed balance") {
  const double n = 0.012;
  const Space s(std::vector<int>{3});
  Channels ch;
  ch.subsystems = {{86e-6, std::numeric_limits<double>::infinity(), n}};
  Hamiltonian h;
  h.h0 = Op::Zero(3, 3);
  const auto r = evolve(h, projector(s.ket({0})), collapse_operators(s, ch), {0.0, 3e-3},
                        {{"p0", s.projector(0, 0)}, {"p1", s.projector(0, 1)}});
  CHECK(r.values[1].back() / r.values[0].back() == doctest::Approx(n / (1.0 + n)).epsilon(0.01));
}

TEST_CASE("mode Ramsey decay under a thermal transmon") {
  const auto& d = nine_mode();
  HilbertConfig cfg;
  cfg.transmon_dim = 3;
  cfg.mode_dims = {2};
  cfg.active_modes = {2};
  const Space s(cfg);
  const double n_th = 0.012, t1q = 86e-6;
  Channels ch;
  ch.subsystems = {{t1q, std::numeric_limits<double>::infinity(), n_th}, {}};
  Hamiltonian h;
  h.h0 = build_hamiltonian(d, cfg);
  // Transmon starts thermal, mode in (|0> + |1>)/sqrt(2).
  Op q = Op::Zero(3, 3);
  q(0, 0) = 1.0 / (1.0 + n_th);
  q(1, 1) = n_th / (1.0 + n_th);
  Op m = Op::Constant(2, 2, 0.5);
  Op rho0 = Op::Zero(6, 6);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) rho0(s.index({i, j}), s.index({i, k})) = q(i, i) * m(j, k);
  const auto t = grid(3e-3, 61);
  const Op a = s.destroy(1);
  const Op x = a + a.adjoint();
  Op y = a - a.adjoint();
  y *= cplx(0.0, -1.0);
  const auto r = evolve(h, rho0, collapse_operators(s, ch), t, {{"x", x}, {"y", y}});
  std::vector<double> mag;
  for (std::size_t i = 0; i < t.size(); ++i) mag.push_back(std::hypot(r.values[0][i], r.values[1][i]));
  const auto fit = fit::fit_exponential(t, mag, false);
  const double expected = drive::dephasing_limit(d.chi_hz[2], 1.0 / t1q, n_th);
  CHECK(1.0 / fit.tau == doctest::Approx(expected).epsilon(0.10));
}

TEST_CASE("propagator composes") {
  const Op h = random_hermitian(4, 7);
  const std::vector<Op> c{0.1 * Op::Random(4, 4)};
  Op rho = random_hermitian(4, 8);
  rho = rho * rho.adjoint();
  rho /= rho.trace();
  const Op once = propagate_constant(h, c, rho, 0.4);
  const Op twice = propagate_constant(h, c, propagate_constant(h, c, rho, 0.2), 0.2);
  CHECK((once - twice).norm() < 1e-12);
  CHECK(std::abs(once.trace() - 1.0) < 1e-12);
}
