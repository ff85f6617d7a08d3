#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kreg/analysis.hpp"
#include "kreg/problems.hpp"
#include "kreg/solvers.hpp"
#include "test_util.hpp"

using namespace kreg;
using namespace kreg::testing;

namespace {

double rel_diff(const Vector& a, const Vector& b) {
  double acc = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += (a[i] - b[i]) * (a[i] - b[i]);
    scale += b[i] * b[i];
  }
  return std::sqrt(acc / scale);
}

// Chebyshev polynomial values T_k(z) by the three-term recurrence.
double cheb_t(std::size_t k, double z) {
  double tm = 1.0, t = z;
  if (k == 0) return tm;
  for (std::size_t i = 1; i < k; ++i) {
    const double next = 2.0 * z * t - tm;
    tm = t;
    t = next;
  }
  return t;
}

}  // namespace

TEST_CASE("cmrh solves the identity in one step") {
  const LinearOperator op = from_dense(DenseMatrix::identity(5));
  const Vector b = random_vector(5, 1);
  SolveOptions opts;
  opts.max_iters = 10;
  const IterationHistory h = cmrh(op, b, opts);
  CHECK(h.iterations() == 1);
  CHECK(h.stop_reason == StopReason::breakdown);
  CHECK(rel_diff(h.final_solution, b) < 1e-14);
  CHECK(h.residual_norms[0] < 1e-14 * norm2(b));
}

TEST_CASE("cmrh reaches the direct solution with a full Krylov space") {
  const DenseMatrix a = near_identity(5, 0.3, 5);
  const Vector b = random_vector(5, 2);
  SolveOptions opts;
  opts.max_iters = 5;
  const IterationHistory h = cmrh(from_dense(a), b, opts);
  const Vector exact = svd_solve(a, b);
  CHECK(rel_diff(h.final_solution, exact) < 1e-10);
}

TEST_CASE("cmrh semiconverges on noisy shaw") {
  TestProblem p = with_noise(shaw(64), 1e-2, 3);
  SolveOptions opts;
  opts.max_iters = 40;
  opts.record_errors_against = p.x_true;
  const IterationHistory h = cmrh(p.op, p.b, opts);
  const HistoryMetrics metrics = history_metrics(h, p.x_true);
  CHECK(metrics.min_error < metrics.final_error);  // strict interior minimum
  CHECK(metrics.best_iteration < h.iterations());
}

TEST_CASE("cmrh quasi-residual is monotone nonincreasing") {
  TestProblem p = with_noise(spectra(32), 1e-2, 1);
  SolveOptions opts;
  opts.max_iters = 20;
  const IterationHistory h = cmrh(p.op, p.b, opts);
  for (std::size_t k = 1; k < h.quasi_residual_norms.size(); ++k)
    CHECK(h.quasi_residual_norms[k] <=
          h.quasi_residual_norms[k - 1] * (1.0 + 1e-12) + 1e-15);
}

TEST_CASE("gmres solves the identity in one step") {
  const LinearOperator op = from_dense(DenseMatrix::identity(4));
  const Vector b = random_vector(4, 3);
  SolveOptions opts;
  opts.max_iters = 10;
  const IterationHistory h = gmres(op, b, opts);
  CHECK(h.iterations() == 1);
  CHECK(rel_diff(h.final_solution, b) < 1e-14);
}

TEST_CASE("gmres true residuals are monotone nonincreasing") {
  const DenseMatrix a = random_matrix(6, 6, 17);
  const Vector b = random_vector(6, 4);
  SolveOptions opts;
  opts.max_iters = 6;
  const IterationHistory h = gmres(from_dense(a), b, opts);
  for (std::size_t k = 1; k < h.residual_norms.size(); ++k)
    CHECK(h.residual_norms[k] <= h.residual_norms[k - 1] + 1e-12 * norm2(b));
}

TEST_CASE("theorem 2.2 sandwich for cmrh and gmres residuals") {
  for (TestProblem p : {with_noise(shaw(32), 1e-2, 5), with_noise(spectra(64), 1e-2, 6)}) {
    SolveOptions opts;
    opts.max_iters = 12;
    opts.store_solutions = false;
    const IterationHistory hc = cmrh(p.op, p.b, opts);
    const IterationHistory hg = gmres(p.op, p.b, opts);
    const std::size_t k_top = std::min(hc.iterations(), hg.iterations());
    const double nb = norm2(p.b);
    for (std::size_t k = 0; k < k_top; ++k) {
      CHECK(hg.residual_norms[k] <= hc.residual_norms[k] + 1e-10 * nb);
      const QrResult qr = qr_factor(hc.decomposition->basis.leading_columns(k + 2 <= hc.decomposition->basis.cols() ? k + 2 : hc.decomposition->basis.cols()));
      const double kappa = condition_number_2(qr.R);
      if (std::isfinite(kappa))
        CHECK(hc.residual_norms[k] <= kappa * hg.residual_norms[k] * (1.0 + 1e-8) + 1e-10 * nb);
    }
  }
}

TEST_CASE("cmrh and gmres both solve well-conditioned systems to high accuracy") {
  const DenseMatrix a = near_identity(8, 0.1, 23);
  const Vector b = random_vector(8, 5);
  SolveOptions opts;
  opts.max_iters = 8;
  const IterationHistory hc = cmrh(from_dense(a), b, opts);
  const IterationHistory hg = gmres(from_dense(a), b, opts);
  CHECK(hc.residual_norms.back() < 1e-8 * norm2(b));
  CHECK(hg.residual_norms.back() < 1e-8 * norm2(b));
}

TEST_CASE("landweber on the identity takes a 0.99 step") {
  const LinearOperator op = from_dense(DenseMatrix::identity(3));
  const Vector b{1.0, -0.5, 2.0};
  SolveOptions opts;
  opts.max_iters = 1;
  const IterationHistory h = landweber(op, b, opts, SpectralBounds{1.0, 1.0});
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(h.final_solution[i] == doctest::Approx(0.99 * b[i]).epsilon(1e-15));
}

TEST_CASE("landweber contracts geometrically on an SPD diagonal") {
  // omega = 0.99/4; error factors are 1 - omega sigma^2 in {0.7525, 0.01},
  // so 60 iterations push the error below 1e-6.
  const DenseMatrix a = DenseMatrix::from_rows({{1, 0}, {0, 2}});
  const Vector b{1.0, 1.0};
  SolveOptions opts;
  opts.max_iters = 60;
  const IterationHistory h = landweber(from_dense(a), b, opts, SpectralBounds{1.0, 2.0});
  const Vector exact{1.0, 0.5};
  CHECK(rel_diff(h.final_solution, exact) < 1e-6);
}

TEST_CASE("landweber requires a transpose") {
  LinearOperator op;
  op.n_rows = 2;
  op.n_cols = 2;
  op.apply = [](const Vector& v) { return v; };
  SolveOptions opts;
  CHECK_THROWS_AS(landweber(op, {1.0, 1.0}, opts), std::invalid_argument);
}

TEST_CASE("richardson converges geometrically on the identity") {
  const LinearOperator op = from_dense(DenseMatrix::identity(3));
  const Vector b{2.0, -1.0, 0.5};
  SolveOptions opts;
  opts.max_iters = 30;
  opts.record_errors_against = b;  // x_true = b for A = I
  const IterationHistory h = richardson(op, b, opts, SpectralBounds{1.0, 1.0});
  const double ratio = std::abs(1.0 - 0.99 / 2.0);
  for (std::size_t k = 1; k < h.relative_errors.size(); ++k)
    CHECK(h.relative_errors[k] == doctest::Approx(h.relative_errors[k - 1] * ratio).epsilon(1e-10));
}

TEST_CASE("richardson fixed point is the exact solution") {
  const DenseMatrix a = DenseMatrix::from_rows({{1, 0}, {0, 3}});
  const Vector b{1.0, 3.0};
  SolveOptions opts;
  opts.max_iters = 400;
  const IterationHistory h = richardson(from_dense(a), b, opts, SpectralBounds{1.0, 3.0});
  const Vector exact{1.0, 1.0};
  CHECK(rel_diff(h.final_solution, exact) < 1e-6);
}

TEST_CASE("richardson diverges on a matrix with a negative eigenvalue") {
  const DenseMatrix a = DenseMatrix::from_rows({{-1, 0}, {0, 2}});
  const Vector b{1.0, 1.0};
  SolveOptions opts;
  opts.max_iters = 50;
  const IterationHistory h = richardson(from_dense(a), b, opts, SpectralBounds{1.0, 2.0});
  CHECK(norm2(h.final_solution) > 1e4);
}

TEST_CASE("chebyshev semi-iteration matches the polynomial oracle on the identity") {
  // Normal equations are the identity; with bounds [1, 1.001] the error after
  // k steps is exactly ||e_0|| / T_k(z0) with z0 = (hi+lo)/(hi-lo).
  const LinearOperator op = from_dense(DenseMatrix::identity(4));
  const Vector b = random_vector(4, 31);
  SolveOptions opts;
  opts.max_iters = 3;
  opts.record_errors_against = b;
  const IterationHistory h = chebyshev_semi_iteration(op, b, {1.0, 1.001}, opts);
  const double z0 = (1.001 + 1.0) / (1.001 - 1.0);
  for (std::size_t k = 1; k <= 3; ++k)
    CHECK(h.relative_errors[k - 1] ==
          doctest::Approx(1.0 / cheb_t(k, z0)).epsilon(1e-6));
  // Unit-scale error drops below 1e-8 at the third step (1/T_3 ~ 3e-11).
  CHECK(h.relative_errors[2] < 1e-8);
}

TEST_CASE("chebyshev error respects the minimax bound on an SPD system") {
  const DenseMatrix a = DenseMatrix::from_rows({{2, 0}, {0, 3}});
  const Vector b{2.0, 3.0};  // x_true = (1, 1)
  SolveOptions opts;
  opts.max_iters = 10;
  opts.record_errors_against = Vector{1.0, 1.0};
  // Normal equations spectrum {4, 9}.
  const IterationHistory h = chebyshev_semi_iteration(from_dense(a), b, {4.0, 9.0}, opts);
  const double z0 = (9.0 + 4.0) / (9.0 - 4.0);
  const double e0 = std::sqrt(2.0) / std::sqrt(2.0);  // ||x_true - 0|| / ||x_true|| = 1
  for (std::size_t k = 1; k <= h.relative_errors.size(); ++k)
    CHECK(h.relative_errors[k - 1] <= e0 / cheb_t(k, z0) * (1.0 + 1e-10) + 1e-15);
}

TEST_CASE("chebyshev rejects a nonpositive lower bound") {
  const LinearOperator op = from_dense(DenseMatrix::identity(3));
  SolveOptions opts;
  CHECK_THROWS_AS(chebyshev_semi_iteration(op, {1, 1, 1}, {0.0, 1.0}, opts),
                  std::invalid_argument);
}

TEST_CASE("chebyshev interval presets") {
  const SpectralBounds bounds{0.1, 2.0};
  const auto paper = chebyshev_interval_paper(bounds);
  CHECK(paper.first == doctest::Approx(0.01));
  CHECK(paper.second == doctest::Approx(0.01001));
  const auto conventional = chebyshev_interval_conventional(bounds);
  CHECK(conventional.first == doctest::Approx(0.01));
  CHECK(conventional.second == doctest::Approx(4.0));
}

TEST_CASE("spectral bounds come from the dense SVD when not supplied") {
  const DenseMatrix a = DenseMatrix::from_rows({{3, 0}, {0, 0.5}});
  const SpectralBounds sb = spectral_bounds(from_dense(a));
  CHECK(sb.s_small == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sb.s_large == doctest::Approx(3.0).epsilon(1e-12));
}
