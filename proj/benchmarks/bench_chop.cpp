// Throughput of the scalar rounding primitive and the chopped kernels
// relative to plain double arithmetic.

#include <benchmark/benchmark.h>

#include <random>

#include "kreg/chop.hpp"

namespace {

using namespace kreg;

Vector random_vector(std::size_t n, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

void bm_chop_scalar(benchmark::State& state) {
  const PrecisionFormat fmt = PrecisionFormat::half();
  const Vector v = random_vector(1024, 3);
  for (auto _ : state) {
    double acc = 0.0;
    for (double x : v) acc += chop(x, fmt);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(bm_chop_scalar);

void bm_chopped_dot(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  ChopContext ctx{PrecisionFormat::half()};
  const Vector x = random_vector(n, 5), y = random_vector(n, 6);
  for (auto _ : state) benchmark::DoNotOptimize(chopped_dot(x, y, ctx));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(bm_chopped_dot)->Arg(1024)->Arg(8192);

void bm_plain_dot(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const Vector x = random_vector(n, 5), y = random_vector(n, 6);
  for (auto _ : state) benchmark::DoNotOptimize(dot(x, y));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(bm_plain_dot)->Arg(1024)->Arg(8192);

void bm_chopped_matvec(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  ChopContext ctx{PrecisionFormat::q52()};
  DenseMatrix m(n, n);
  const Vector vals = random_vector(n * n, 7);
  std::copy(vals.begin(), vals.end(), m.data().begin());
  const Vector x = random_vector(n, 8);
  for (auto _ : state) benchmark::DoNotOptimize(chopped_matvec(m, x, ctx));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(bm_chopped_matvec)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
