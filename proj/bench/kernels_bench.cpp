// Serial reference kernels against their OpenMP versions on the dispersive
// transmon + storage-mode Hamiltonian with decay on every subsystem.

#include <benchmark/benchmark.h>

#include "cqed/bbq.hpp"
#include "cqed/dynamics.hpp"
#include "cqed/kernels.hpp"

using namespace cqed;

namespace {

struct Problem {
  dyn::Op h;
  std::vector<dyn::Op> c;
  dyn::Op rho;
};

Problem make(int mode_dim, int modes) {
  static const auto dressed = bbq::quantize(bbq::nine_mode_system());
  dyn::HilbertConfig cfg;
  cfg.transmon_dim = 3;
  cfg.mode_dims.assign(static_cast<std::size_t>(modes), mode_dim);
  cfg.active_modes.clear();
  for (int m = 0; m < modes; ++m) cfg.active_modes.push_back(static_cast<std::size_t>(m));
  const dyn::Space space(cfg);
  dyn::Channels ch;
  ch.subsystems.assign(static_cast<std::size_t>(modes) + 1, dyn::Decay{2e-3, 4e-3, 0.01});
  ch.subsystems[0] = dyn::Decay{86e-6, 120e-6, 0.012};
  Problem p{dyn::build_hamiltonian(dressed, cfg), dyn::collapse_operators(space, ch), {}};
  const Eigen::VectorXcd v = Eigen::VectorXcd::Random(space.dim()).normalized();
  p.rho = v * v.adjoint();
  return p;
}

void rhs(benchmark::State& state, bool parallel) {
  const auto p = make(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const kernels::LindbladGenerator gen(p.h, p.c);
  dyn::Op out(p.rho.rows(), p.rho.cols());
  for (auto _ : state) {
    parallel ? kernels::lindblad_rhs_parallel(gen, p.rho, out) : kernels::lindblad_rhs_serial(gen, p.rho, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["dim"] = static_cast<double>(p.rho.rows());
}

void liouvillian(benchmark::State& state, bool parallel) {
  const auto p = make(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    auto l = parallel ? kernels::liouvillian_parallel(p.h, p.c) : kernels::liouvillian_serial(p.h, p.c);
    benchmark::DoNotOptimize(l.data());
  }
  state.counters["dim"] = static_cast<double>(p.rho.rows());
}

void BM_RhsSerial(benchmark::State& s) { rhs(s, false); }
void BM_RhsParallel(benchmark::State& s) { rhs(s, true); }
void BM_LiouvillianSerial(benchmark::State& s) { liouvillian(s, false); }
void BM_LiouvillianParallel(benchmark::State& s) { liouvillian(s, true); }

}  // namespace

BENCHMARK(BM_RhsSerial)->Args({6, 1})->Args({6, 2})->Args({8, 2})->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_RhsParallel)->Args({6, 1})->Args({6, 2})->Args({8, 2})->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_LiouvillianSerial)->Args({4, 1})->Args({4, 2})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_LiouvillianParallel)->Args({4, 1})->Args({4, 2})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
