#include "kreg/analysis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace kreg {

FilterFactorTable filter_factors(const Vector& x_k, const SvdResult& svd_a, const Vector& b,
                                 std::size_t iteration) {
  const std::size_t n = svd_a.V.rows();
  if (x_k.size() != n || b.size() != svd_a.U.rows())
    throw std::invalid_argument("filter_factors: dimension mismatch");

  FilterFactorTable table;
  table.iteration = iteration;
  table.factors.assign(svd_a.singular_values.size(), 0.0);
  table.masked.assign(svd_a.singular_values.size(), false);
  const double mask_threshold = 1e-14 * norm2(b);
  for (std::size_t i = 0; i < svd_a.singular_values.size(); ++i) {
    const double ub = dot(svd_a.U.col(i), b);
    if (std::abs(ub) <= mask_threshold) {
      table.masked[i] = true;
      table.factors[i] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const double vx = dot(svd_a.V.col(i), x_k);
    table.factors[i] = svd_a.singular_values[i] * vx / ub;
  }
  return table;
}

SvdResult full_svd(const LinearOperator& op) {
  if (op.n_rows > 2048 || op.n_cols > 2048)
    throw std::invalid_argument(
        "full_svd: dense analysis is limited to n <= 2048; reduce the problem size");
  const DenseMatrix a = to_dense(op);
  return a.rows() >= a.cols() ? jacobi_svd(a) : jacobi_svd(transpose(a));
}

Vector projected_singular_values(const KrylovDecomposition& decomp) {
  if (decomp.steps() == 0)
    throw std::invalid_argument("projected_singular_values: empty decomposition");
  return jacobi_svd(decomp.hess).singular_values;
}

std::vector<BoundReportRow> bound_report(const TestProblem& problem, std::size_t k_max) {
  SolveOptions opts;
  opts.max_iters = k_max;
  opts.store_solutions = false;
  const IterationHistory hc = cmrh(problem.op, problem.b, opts);
  const IterationHistory hg = gmres(problem.op, problem.b, opts);
  const std::size_t k_top = std::min(hc.iterations(), hg.iterations());

  std::vector<BoundReportRow> rows;
  for (std::size_t k = 1; k <= k_top; ++k) {
    BoundReportRow row;
    row.k = k;
    row.r_cmrh = hc.residual_norms[k - 1];
    row.r_gmres = hg.residual_norms[k - 1];
    const std::size_t basis_cols = std::min<std::size_t>(k + 1, hc.decomposition->basis.cols());
    const QrResult qr = qr_factor(hc.decomposition->basis.leading_columns(basis_cols));
    row.kappa_r = condition_number_2(qr.R);
    row.margin_lower = row.r_cmrh - row.r_gmres;
    row.margin_upper = std::isfinite(row.kappa_r)
                           ? row.kappa_r * row.r_gmres - row.r_cmrh
                           : std::numeric_limits<double>::infinity();
    rows.push_back(row);
  }
  return rows;
}

HistoryMetrics history_metrics(const IterationHistory& history, const Vector& x_true) {
  HistoryMetrics metrics;
  if (!history.relative_errors.empty()) {
    metrics.relative_errors = history.relative_errors;
  } else if (!history.solutions.empty()) {
    const double nx = norm2(x_true);
    for (const Vector& x : history.solutions) {
      double acc = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - x_true[i]) * (x[i] - x_true[i]);
      metrics.relative_errors.push_back(std::sqrt(acc) / nx);
    }
  } else {
    throw std::invalid_argument("history_metrics: history has neither errors nor solutions");
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < metrics.relative_errors.size(); ++i)
    if (metrics.relative_errors[i] < metrics.relative_errors[best]) best = i;
  metrics.best_iteration = best + 1;
  metrics.min_error = metrics.relative_errors[best];
  metrics.final_error = metrics.relative_errors.back();
  metrics.semiconvergent = best + 1 < metrics.relative_errors.size() &&
                           metrics.final_error >= 1.1 * metrics.min_error;
  return metrics;
}

}  // namespace kreg
