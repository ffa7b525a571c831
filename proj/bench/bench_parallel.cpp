// Serial reference vs OpenMP kernels. Thread count via BKE_THREADS.

#include "bke/kernels.hpp"
#include "bke/pseudolik.hpp"
#include "bke/random.hpp"
#include "bke/reference.hpp"
#include "bke/testing.hpp"

#include <benchmark/benchmark.h>

namespace {

bke::Matrix normal(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  bke::Rng rng(seed);
  bke::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

const bke::SEKernelParams kParams{0.8, bke::kLebesgueLimit, 1.0};

void BM_GramSerial(benchmark::State& state) {
  const bke::Matrix x = normal(state.range(0), 2, 1);
  for (auto _ : state) benchmark::DoNotOptimize(bke::reference::gram(x, kParams, bke::GramKind::R));
}

void BM_GramParallel(benchmark::State& state) {
  const bke::Matrix x = normal(state.range(0), 2, 1);
  for (auto _ : state) benchmark::DoNotOptimize(bke::gram(x, kParams, bke::GramKind::R));
}

void BM_JacobianSerial(benchmark::State& state) {
  const bke::Matrix x = normal(state.range(0), 2, 2);
  const bke::Landmarks z(normal(100, 2, 3));
  for (auto _ : state) benchmark::DoNotOptimize(bke::reference::log_jacobian_sum(x, z, kParams));
}

void BM_JacobianParallel(benchmark::State& state) {
  const bke::Matrix x = normal(state.range(0), 2, 2);
  const bke::Landmarks z(normal(100, 2, 3));
  for (auto _ : state) benchmark::DoNotOptimize(bke::log_jacobian_sum(x, z, kParams));
}

void BM_MmdPermSerial(benchmark::State& state) {
  const bke::Matrix g = bke::gram(normal(state.range(0), 2, 4), kParams, bke::GramKind::K);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        bke::reference::mmd_permutation_statistics(g, state.range(0) / 2, bke::MMDVariant::Biased, 100, 1));
  }
}

void BM_MmdPermParallel(benchmark::State& state) {
  const bke::Matrix g = bke::gram(normal(state.range(0), 2, 4), kParams, bke::GramKind::K);
  for (auto _ : state) {
    benchmark::DoNotOptimize(bke::mmd_permutation_statistics(g, state.range(0) / 2, bke::MMDVariant::Biased, 100, 1));
  }
}

void BM_HsicPermSerial(benchmark::State& state) {
  const bke::Matrix kc = bke::double_centre(bke::gram(normal(state.range(0), 2, 5), kParams, bke::GramKind::K));
  const bke::Matrix l = bke::gram(normal(state.range(0), 1, 6), kParams, bke::GramKind::K);
  for (auto _ : state) benchmark::DoNotOptimize(bke::reference::hsic_permutation_statistics(kc, l, 100, 1));
}

void BM_HsicPermParallel(benchmark::State& state) {
  const bke::Matrix kc = bke::double_centre(bke::gram(normal(state.range(0), 2, 5), kParams, bke::GramKind::K));
  const bke::Matrix l = bke::gram(normal(state.range(0), 1, 6), kParams, bke::GramKind::K);
  for (auto _ : state) benchmark::DoNotOptimize(bke::hsic_permutation_statistics(kc, l, 100, 1));
}

}  // namespace

BENCHMARK(BM_GramSerial)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GramParallel)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JacobianSerial)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JacobianParallel)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MmdPermSerial)->Arg(400)->Arg(1600)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MmdPermParallel)->Arg(400)->Arg(1600)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HsicPermSerial)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HsicPermParallel)->Arg(400)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
