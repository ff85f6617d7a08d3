// Per-iteration cost of the Hessenberg process vs Arnoldi, and of the full
// CMRH/GMRES solves, on the spectra test problem.

#include <benchmark/benchmark.h>

#include "kreg/hybrid.hpp"
#include "kreg/problems.hpp"

namespace {

using namespace kreg;

void bm_hessenberg_pivoted(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const TestProblem p = with_noise(spectra(n), 1e-2, 1);
  for (auto _ : state) {
    KrylovDecomposition d = build_decomposition(
        KrylovKind::hessenberg_pivoted, p.op, p.b, 20);
    benchmark::DoNotOptimize(d.hess(0, 0));
  }
}
BENCHMARK(bm_hessenberg_pivoted)->Arg(64)->Arg(256);

void bm_arnoldi(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const TestProblem p = with_noise(spectra(n), 1e-2, 1);
  for (auto _ : state) {
    KrylovDecomposition d = build_decomposition(KrylovKind::arnoldi, p.op, p.b, 20);
    benchmark::DoNotOptimize(d.hess(0, 0));
  }
}
BENCHMARK(bm_arnoldi)->Arg(64)->Arg(256);

void bm_cmrh(benchmark::State& state) {
  const TestProblem p = with_noise(spectra(static_cast<std::size_t>(state.range(0))), 1e-2, 1);
  SolveOptions opts;
  opts.max_iters = 20;
  opts.store_solutions = false;
  for (auto _ : state) {
    IterationHistory h = cmrh(p.op, p.b, opts);
    benchmark::DoNotOptimize(h.residual_norms.back());
  }
}
BENCHMARK(bm_cmrh)->Arg(64)->Arg(256);

void bm_hcmrh_gcv(benchmark::State& state) {
  const TestProblem p = with_noise(spectra(static_cast<std::size_t>(state.range(0))), 1e-2, 1);
  SolveOptions opts;
  opts.max_iters = 20;
  opts.store_solutions = false;
  for (auto _ : state) {
    IterationHistory h = hcmrh(p.op, p.b, opts, ParamRule::gcv());
    benchmark::DoNotOptimize(h.lambdas.back());
  }
}
BENCHMARK(bm_hcmrh_gcv)->Arg(64)->Arg(256);

void bm_jacobi_svd(benchmark::State& state) {
  const TestProblem p = spectra(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    SvdResult svd = jacobi_svd(*p.op.dense);
    benchmark::DoNotOptimize(svd.singular_values.front());
  }
}
BENCHMARK(bm_jacobi_svd)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
