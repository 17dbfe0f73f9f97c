#include <doctest.h>

#include <cmath>
#include <random>

#include "cqed/error.hpp"
#include "cqed/resonator_fit.hpp"

using namespace cqed;
using namespace cqed::fit;

namespace {

ResonatorParams rates(double f0, double ki, double k1, double k2) {
  ResonatorParams p;
  p.f0_hz = f0;
  p.kappa_i_hz = ki;
  p.kappa1_hz = k1;
  p.kappa2_hz = k2;
  return p;
}

SynthesisOptions window(const ResonatorParams& p, double noise, std::uint64_t seed) {
  const double w = p.kappa_i_hz + p.kappa1_hz + p.kappa2_hz;
  SynthesisOptions o;
  o.f_lo_hz = p.f0_hz - 10.0 * w;
  o.f_hi_hz = p.f0_hz + 10.0 * w;
  o.noise_rel = noise;
  o.seed = seed;
  return o;
}

double rel(double a, double b) { return std::abs(a / b - 1.0); }

}  // namespace

TEST_CASE("transmission line shape") {
  const auto p = rates(7e9, 30e3, 50e3, 70e3);
  CHECK(std::abs(model_s21(p, p.f0_hz)) == doctest::Approx(2.0 * std::sqrt(50e3 * 70e3) / 150e3).epsilon(1e-12));
  CHECK(std::abs(model_s21(rates(7e9, 1e3, 1e3, 1e3), 7e9)) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  // Dense scan for the half-power points of |S21|^2.
  const double peak = std::norm(model_s21(p, p.f0_hz));
  double lo = 0.0, hi = 0.0;
  for (double df = 0.0; df < 1e6; df += 1.0)
    if (std::norm(model_s21(p, p.f0_hz + df)) < 0.5 * peak) {
      hi = df;
      break;
    }
  for (double df = 0.0; df < 1e6; df += 1.0)
    if (std::norm(model_s21(p, p.f0_hz - df)) < 0.5 * peak) {
      lo = df;
      break;
    }
  CHECK(lo + hi == doctest::Approx(2.0 * 150e3).epsilon(2e-5));
}

TEST_CASE("reflection line shape") {
  CHECK(std::abs(model_s11(rates(5e9, 20e3, 20e3, 0.0), 5e9)) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(model_s11(rates(5e9, 30e3, 10e3, 0.0), 5e9)) == doctest::Approx(0.5).epsilon(1e-12));
  for (double f : {4.9e9, 5e9, 5.0001e9}) CHECK(std::abs(model_s11(rates(5e9, 30e3, 0.0, 0.0), f)) == doctest::Approx(1.0));
}

TEST_CASE("noiseless round trip is exact") {
  const auto p = rates(7e9, 40e3, 90e3, 90e3);
  const auto f = fit_trace(synthesize_trace(TraceKind::Transmission, p, window(p, 0.0, 1)));
  CHECK(rel(f.params.f0_hz, p.f0_hz) < 1e-9);
  CHECK(rel(f.params.kappa_i_hz, p.kappa_i_hz) < 1e-6);
  CHECK(rel(f.params.kappa1_hz, p.kappa1_hz) < 1e-6);
  CHECK(rel(f.params.kappa2_hz, p.kappa2_hz) < 1e-6);

  auto q = rates(6e9, 25e3, 60e3, 0.0);
  auto opts = window(q, 0.0, 1);
  opts.gain = std::polar(0.3, 1.1);
  opts.delay_s = 4e-9;
  const auto g = fit_trace(synthesize_trace(TraceKind::Reflection, q, opts));
  CHECK(rel(g.params.kappa_i_hz, q.kappa_i_hz) < 1e-6);
  CHECK(rel(g.params.kappa1_hz, q.kappa1_hz) < 1e-6);
  CHECK(std::abs(g.gain - opts.gain) < 1e-6);
}

TEST_CASE("noisy round trips stay within 2 percent") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int draw = 0; draw < 20; ++draw) {
    const double f0 = 5e9 + 3e9 * u(rng);
    const double ki = 20e3 + 60e3 * u(rng);
    const double k1 = ki * (0.7 + 1.6 * u(rng));
    for (auto kind : {TraceKind::Transmission, TraceKind::Reflection}) {
      const auto p = rates(f0, ki, k1, kind == TraceKind::Transmission ? k1 : 0.0);
      const auto f = fit_trace(synthesize_trace(kind, p, window(p, 0.005, 100 + draw)));
      CHECK(rel(f.params.f0_hz, f0) < 1e-6);
      CHECK(rel(f.params.kappa_i_hz, ki) < 0.02);
      CHECK(rel(f.params.kappa1_hz, k1) < 0.02);
    }
  }
}

TEST_CASE("high-Q trace recovers Q_int") {
  const auto p = rates(10e9, 500.0, 800.0, 800.0);  // Q_int = 1e7
  const auto f = fit_trace(synthesize_trace(TraceKind::Transmission, p, window(p, 0.005, 5)));
  CHECK(f.q_int / p.q_int() > 0.98);
  CHECK(f.q_int / p.q_int() < 1.02);
}

TEST_CASE("batch fits keep input order and match serial fits") {
  std::vector<Trace> traces;
  for (int i = 0; i < 6; ++i) {
    const auto p = rates(6e9 + 1e8 * i, 30e3, 50e3 + 5e3 * i, 0.0);
    traces.push_back(synthesize_trace(TraceKind::Reflection, p, window(p, 0.005, 40 + i)));
  }
  const auto batch = fit_traces(traces);
  for (std::size_t i = 0; i < traces.size(); ++i) CHECK(batch[i].params.f0_hz == fit_trace(traces[i]).params.f0_hz);
}

TEST_CASE("degenerate traces are rejected") {
  Trace t;
  t.frequency_hz = {1.0, 2.0, 3.0};
  t.value = {1.0, 1.0, 1.0};
  CHECK_THROWS_AS(fit_trace(t), ValidationError);

  const auto p = rates(7e9, 40e3, 90e3, 90e3);
  auto bad = synthesize_trace(TraceKind::Transmission, p, window(p, 0.0, 1));
  std::swap(bad.frequency_hz[3], bad.frequency_hz[4]);
  CHECK_THROWS_AS(fit_trace(bad), ValidationError);
}

TEST_CASE("exponential and damped cosine helpers") {
  std::vector<double> t, y, c;
  for (int i = 0; i < 60; ++i) {
    t.push_back(i * 1e-4);
    y.push_back(0.8 * std::exp(-t.back() / 2e-3) + 0.05);
    c.push_back(0.5 + 0.4 * std::exp(-t.back() / 3e-3) * std::cos(2 * M_PI * 2500.0 * t.back() + 0.3));
  }
  const auto e = fit_exponential(t, y);
  CHECK(e.tau == doctest::Approx(2e-3).epsilon(1e-8));
  CHECK(e.offset == doctest::Approx(0.05).epsilon(1e-8));
  const auto d = fit_damped_cosine(t, c);
  CHECK(d.tau == doctest::Approx(3e-3).epsilon(1e-6));
  CHECK(d.frequency_hz == doctest::Approx(2500.0).epsilon(1e-8));
}
