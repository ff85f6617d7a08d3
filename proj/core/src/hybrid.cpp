#include "kreg/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace kreg {

namespace {

// Complement filter lambda^2/(sigma^2 + lambda^2) with the pseudoinverse
// convention at sigma = lambda = 0 (that direction is fully outside range(H)).
double complement_filter(double sigma, double lambda) {
  if (lambda == 0.0) return sigma == 0.0 ? 1.0 : 0.0;
  const double l2 = lambda * lambda;
  return l2 / (sigma * sigma + l2);
}

}  // namespace

ProjectedTikhonovContext make_projected_context(const DenseMatrix& hess, double beta) {
  if (hess.rows() != hess.cols() + 1)
    throw std::invalid_argument("make_projected_context: hess must be (k+1) x k");
  ProjectedTikhonovContext ctx;
  ctx.k = hess.cols();
  ctx.beta = beta;
  ctx.hess_svd = jacobi_svd(hess);
  ctx.u_t_e1.assign(ctx.k, 0.0);
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < ctx.k; ++i) {
    ctx.u_t_e1[i] = ctx.hess_svd.U(0, i);
    sum_sq += ctx.u_t_e1[i] * ctx.u_t_e1[i];
  }
  // ||U_full^T e_1|| = 1, so the (k+1)-th squared component is the deficit.
  ctx.tail_sq = std::max(0.0, 1.0 - sum_sq);
  return ctx;
}

Vector projected_tikhonov_solve(const ProjectedTikhonovContext& ctx, double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0)
    throw std::invalid_argument("projected_tikhonov_solve: lambda must be finite and >= 0");
  const std::size_t k = ctx.k;
  Vector w(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const double s = ctx.hess_svd.singular_values[i];
    const double denom = s * s + lambda * lambda;
    w[i] = denom == 0.0 ? 0.0 : s * ctx.beta * ctx.u_t_e1[i] / denom;
  }
  return multiply(ctx.hess_svd.V, w);
}

double gcv_value(const ProjectedTikhonovContext& ctx, double lambda) {
  const std::size_t k = ctx.k;
  double num = ctx.tail_sq;
  double trace = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double f = complement_filter(ctx.hess_svd.singular_values[i], lambda);
    const double term = f * ctx.u_t_e1[i];
    num += term * term;
    trace += f;
  }
  return static_cast<double>(k) * ctx.beta * ctx.beta * num / (trace * trace);
}

double gcv_stop_value(const ProjectedTikhonovContext& ctx, double lambda,
                      std::size_t ambient_n) {
  const std::size_t k = ctx.k;
  if (k >= ambient_n)
    throw std::invalid_argument("gcv_stop_value: requires k < ambient dimension");
  double num = ctx.tail_sq;
  double trace = static_cast<double>(ambient_n - k);
  for (std::size_t i = 0; i < k; ++i) {
    const double f = complement_filter(ctx.hess_svd.singular_values[i], lambda);
    const double term = f * ctx.u_t_e1[i];
    num += term * term;
    trace += f;
  }
  return static_cast<double>(ambient_n) * ctx.beta * ctx.beta * num / (trace * trace);
}

namespace {

// Shared lambda search: log grid on [max(1e-12, 1e-10 sigma_max), sigma_max]
// plus lambda = 0, then golden-section refinement to 1e-6 relative width.
double minimize_over_lambda(const std::function<double(double)>& objective, double sigma_max) {
  if (!(sigma_max > 0.0)) return 0.0;
  constexpr std::size_t kGridPoints = 200;
  const double lo = std::max(1e-12, 1e-10 * sigma_max);
  const double hi = sigma_max;

  Vector grid;
  grid.reserve(kGridPoints + 1);
  grid.push_back(0.0);
  const double ratio = std::log(hi / lo) / static_cast<double>(kGridPoints - 1);
  for (std::size_t i = 0; i < kGridPoints; ++i)
    grid.push_back(lo * std::exp(ratio * static_cast<double>(i)));

  double best_lambda = grid[0];
  double best_value = objective(grid[0]);
  std::size_t best_index = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = objective(grid[i]);
    if (v < best_value) {
      best_value = v;
      best_lambda = grid[i];
      best_index = i;
    }
  }
  if (best_index == 0) return 0.0;  // no bracket below lambda = 0

  double a = grid[best_index - 1];
  double b = best_index + 1 < grid.size() ? grid[best_index + 1] : hi;
  if (!(b > a)) return best_lambda;

  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = objective(x1);
  double f2 = objective(x2);
  while (b - a > 1e-6 * b) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = objective(x2);
    }
    if (f1 < best_value) {
      best_value = f1;
      best_lambda = x1;
    }
    if (f2 < best_value) {
      best_value = f2;
      best_lambda = x2;
    }
  }
  return best_lambda;
}

}  // namespace

double gcv_minimize(const ProjectedTikhonovContext& ctx) {
  const double sigma_max = ctx.hess_svd.singular_values.empty()
                               ? 0.0
                               : ctx.hess_svd.singular_values.front();
  return minimize_over_lambda([&](double l) { return gcv_value(ctx, l); }, sigma_max);
}

double optimal_lambda(const ProjectedTikhonovContext& ctx, const DenseMatrix& basis_k,
                      const Vector& x_true, const Vector& x0) {
  if (basis_k.cols() != ctx.k)
    throw std::invalid_argument("optimal_lambda: basis has wrong number of columns");
  const DenseMatrix lv = multiply(basis_k, ctx.hess_svd.V);  // n x k, fixed per iteration
  auto objective = [&](double lambda) {
    Vector w(ctx.k, 0.0);
    for (std::size_t i = 0; i < ctx.k; ++i) {
      const double s = ctx.hess_svd.singular_values[i];
      const double denom = s * s + lambda * lambda;
      w[i] = denom == 0.0 ? 0.0 : s * ctx.beta * ctx.u_t_e1[i] / denom;
    }
    double acc = 0.0;
    for (std::size_t r = 0; r < lv.rows(); ++r) {
      double xr = x0[r];
      for (std::size_t j = 0; j < ctx.k; ++j) xr += lv(r, j) * w[j];
      acc += (xr - x_true[r]) * (xr - x_true[r]);
    }
    return acc;
  };
  const double sigma_max = ctx.hess_svd.singular_values.empty()
                               ? 0.0
                               : ctx.hess_svd.singular_values.front();
  return minimize_over_lambda(objective, sigma_max);
}

StopDecision should_stop(const StoppingState& state) {
  const Vector& g = state.ghat_values;
  if (g.size() < 2) throw std::invalid_argument("should_stop: needs at least 2 values");

  const double delta = std::abs(g[g.size() - 1] - g[g.size() - 2]);
  const double ref = std::abs(g.front());
  const double flatness = ref == 0.0
                              ? (delta == 0.0 ? 0.0 : std::numeric_limits<double>::infinity())
                              : delta / ref;
  if (flatness < state.tol) return StopDecision::flat;

  std::size_t best = 0;
  for (std::size_t i = 1; i < g.size(); ++i)
    if (g[i] < g[best]) best = i;
  if (g.size() - 1 - best >= state.window) return StopDecision::window;

  return StopDecision::none;
}

namespace {

double stacked_residual_norm(const LinearOperator& op, const Vector& b, double lambda,
                             const Vector& x) {
  Vector ax = op.apply(x);
  double acc = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) acc += (b[i] - ax[i]) * (b[i] - ax[i]);
  for (double xi : x) acc += lambda * lambda * xi * xi;
  return std::sqrt(acc);
}

IterationHistory hybrid_solve(KrylovKind kind, const LinearOperator& op, const Vector& b,
                              const SolveOptions& opts, const ParamRule& rule,
                              const GcvStopRule& stop) {
  if (op.n_rows != op.n_cols) throw std::invalid_argument("hybrid solver: operator not square");
  const std::size_t n = op.n_cols;
  if (b.size() != n) throw std::invalid_argument("hybrid solver: rhs dimension mismatch");
  if (rule.kind == ParamRule::Kind::optimal && !opts.record_errors_against)
    throw std::invalid_argument("hybrid solver: optimal rule needs record_errors_against");

  Vector x0(n, 0.0);
  if (opts.x0) {
    if (opts.x0->size() != n) throw std::invalid_argument("x0 dimension mismatch");
    x0 = *opts.x0;
  }
  Vector r0(b);
  if (opts.x0) {
    Vector ax0 = op.apply(x0);
    for (std::size_t i = 0; i < n; ++i) r0[i] -= ax0[i];
  }

  auto state = std::make_shared<KrylovDecomposition>(build_decomposition(kind, op, r0, 0));

  IterationHistory history;
  history.stop_reason = StopReason::max_iters;
  for (std::size_t k = 1; k <= opts.max_iters; ++k) {
    if (!state->breakdown) extend(*state, op);
    if (state->steps() < k) {
      history.stop_reason = StopReason::breakdown;
      break;
    }
    const ProjectedTikhonovContext ctx = make_projected_context(state->hess, state->beta);

    double lambda = 0.0;
    switch (rule.kind) {
      case ParamRule::Kind::gcv:
        lambda = gcv_minimize(ctx);
        break;
      case ParamRule::Kind::optimal:
        lambda = optimal_lambda(ctx, state->basis.leading_columns(k),
                                *opts.record_errors_against, x0);
        break;
      case ParamRule::Kind::fixed:
        lambda = rule.fixed_lambda;
        break;
    }

    const Vector y = projected_tikhonov_solve(ctx, lambda);
    Vector x(x0);
    for (std::size_t j = 0; j < k; ++j) axpy(y[j], state->basis.col(j), x);

    // Data-fit part of the projected objective.
    Vector fit(k + 1, 0.0);
    fit[0] = state->beta;
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t i = 0; i < k + 1; ++i) fit[i] -= state->hess(i, j) * y[j];

    Vector r = op.apply(x);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    history.residual_norms.push_back(norm2(r));
    history.quasi_residual_norms.push_back(norm2(fit));
    history.lambdas.push_back(lambda);
    history.ghat_values.push_back(k < n ? gcv_stop_value(ctx, lambda, n)
                                        : std::numeric_limits<double>::quiet_NaN());
    if (opts.record_errors_against) {
      const Vector& xt = *opts.record_errors_against;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += (x[i] - xt[i]) * (x[i] - xt[i]);
      history.relative_errors.push_back(std::sqrt(acc) / norm2(xt));
    }
    if (opts.store_solutions) history.solutions.push_back(x);
    history.final_solution = x;

    if (state->breakdown) {
      history.stop_reason = StopReason::breakdown;
      break;
    }
    if (rule.kind == ParamRule::Kind::gcv && history.ghat_values.size() >= 2) {
      const StopDecision decision =
          should_stop({history.ghat_values, stop.tol, stop.window});
      if (decision == StopDecision::flat) {
        history.stop_reason = StopReason::gcv_flat;
        break;
      }
      if (decision == StopDecision::window) {
        history.stop_reason = StopReason::gcv_window;
        break;
      }
    }
  }
  history.decomposition = state;
  return history;
}

}  // namespace

IterationHistory hcmrh(const LinearOperator& op, const Vector& b, const SolveOptions& opts,
                       const ParamRule& rule, const GcvStopRule& stop) {
  return hybrid_solve(KrylovKind::hessenberg_pivoted, op, b, opts, rule, stop);
}

IterationHistory hybrid_gmres(const LinearOperator& op, const Vector& b,
                              const SolveOptions& opts, const ParamRule& rule,
                              const GcvStopRule& stop) {
  return hybrid_solve(KrylovKind::arnoldi, op, b, opts, rule, stop);
}

std::vector<HybridBoundRow> hybrid_residual_bound_check(const LinearOperator& op,
                                                        const Vector& b, double lambda,
                                                        std::size_t k_max) {
  const KrylovDecomposition hd =
      build_decomposition(KrylovKind::hessenberg_pivoted, op, b, k_max);
  const KrylovDecomposition ad = build_decomposition(KrylovKind::arnoldi, op, b, k_max);
  const std::size_t k_top = std::min({k_max, hd.steps(), ad.steps()});

  std::vector<HybridBoundRow> rows;
  const Vector x0(op.n_cols, 0.0);
  for (std::size_t k = 1; k <= k_top; ++k) {
    const ProjectedTikhonovContext ctx_h =
        make_projected_context(top_left(hd.hess, k + 1, k), hd.beta);
    const ProjectedTikhonovContext ctx_a =
        make_projected_context(top_left(ad.hess, k + 1, k), ad.beta);

    const Vector y_c = projected_tikhonov_solve(ctx_h, lambda);
    const Vector y_g = projected_tikhonov_solve(ctx_a, lambda);
    Vector x_c(x0), x_g(x0);
    for (std::size_t j = 0; j < k; ++j) {
      axpy(y_c[j], hd.basis.col(j), x_c);
      axpy(y_g[j], ad.basis.col(j), x_g);
    }

    // Singular values of blkdiag(L_{k+1}, L_k) are the union over the blocks.
    // At the full dimension the basis has only k columns and both blocks agree.
    const std::size_t big_cols = std::min<std::size_t>(k + 1, hd.basis.cols());
    const SvdResult s_big = jacobi_svd(hd.basis.leading_columns(big_cols));
    const SvdResult s_small = jacobi_svd(hd.basis.leading_columns(k));
    const double smax = std::max(s_big.singular_values.front(), s_small.singular_values.front());
    const double smin = std::min(s_big.singular_values.back(), s_small.singular_values.back());

    HybridBoundRow row;
    row.k = k;
    row.hr_cmrh = stacked_residual_norm(op, b, lambda, x_c);
    row.hr_gmres = stacked_residual_norm(op, b, lambda, x_g);
    row.kappa_lbar = smin == 0.0 ? std::numeric_limits<double>::infinity() : smax / smin;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace kreg
