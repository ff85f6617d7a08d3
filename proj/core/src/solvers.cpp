#include "kreg/solvers.hpp"

#include <cmath>
#include <stdexcept>

namespace kreg {

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::max_iters:
      return "max_iters";
    case StopReason::breakdown:
      return "breakdown";
    case StopReason::gcv_flat:
      return "gcv_flat";
    case StopReason::gcv_window:
      return "gcv_window";
  }
  return "unknown";
}

void HessenbergLeastSquares::add_column(std::span<const double> column) {
  const std::size_t k = r_cols_.size();
  if (column.size() != k + 2)
    throw std::invalid_argument("HessenbergLeastSquares: column length mismatch");
  Vector v(column.begin(), column.end());
  for (std::size_t i = 0; i < k; ++i) {
    const double x = v[i], y = v[i + 1];
    v[i] = cos_[i] * x + sin_[i] * y;
    v[i + 1] = -sin_[i] * x + cos_[i] * y;
  }
  const double x = v[k], y = v[k + 1];
  const double r = std::hypot(x, y);
  double c = 1.0, s = 0.0;
  if (r > 0.0) {
    c = x / r;
    s = y / r;
  }
  v[k] = c * x + s * y;
  v[k + 1] = 0.0;
  cos_.push_back(c);
  sin_.push_back(s);
  g_.push_back(-s * g_[k]);
  g_[k] = c * g_[k];
  r_cols_.push_back(std::move(v));
}

Vector HessenbergLeastSquares::solve() const {
  const std::size_t k = r_cols_.size();
  Vector y(k, 0.0);
  for (std::size_t ii = k; ii-- > 0;) {
    double acc = g_[ii];
    for (std::size_t j = ii + 1; j < k; ++j) acc -= r_cols_[j][ii] * y[j];
    const double rii = r_cols_[ii][ii];
    if (rii == 0.0)
      throw std::runtime_error("HessenbergLeastSquares: singular projected system");
    y[ii] = acc / rii;
  }
  return y;
}

namespace {

Vector resolve_x0(const SolveOptions& opts, std::size_t n) {
  if (!opts.x0) return Vector(n, 0.0);
  if (opts.x0->size() != n) throw std::invalid_argument("x0 dimension mismatch");
  return *opts.x0;
}

void record_iterate(IterationHistory& history, const LinearOperator& op, const Vector& b,
                    const SolveOptions& opts, const Vector& x) {
  Vector r = op.apply(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  history.residual_norms.push_back(norm2(r));
  if (opts.record_errors_against) {
    const Vector& xt = *opts.record_errors_against;
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - xt[i]) * (x[i] - xt[i]);
    history.relative_errors.push_back(std::sqrt(acc) / norm2(xt));
  }
  if (opts.store_solutions) history.solutions.push_back(x);
  history.final_solution = x;
}

IterationHistory krylov_solve(KrylovKind kind, const LinearOperator& op, const Vector& b,
                              const SolveOptions& opts) {
  if (op.n_rows != op.n_cols) throw std::invalid_argument("krylov solver: operator not square");
  const std::size_t n = op.n_cols;
  if (b.size() != n) throw std::invalid_argument("krylov solver: rhs dimension mismatch");
  const Vector x0 = resolve_x0(opts, n);

  Vector r0(b);
  if (opts.x0) {
    Vector ax0 = op.apply(x0);
    for (std::size_t i = 0; i < n; ++i) r0[i] -= ax0[i];
  }

  auto state = std::make_shared<KrylovDecomposition>(
      build_decomposition(kind, op, r0, 0));
  HessenbergLeastSquares ls(state->beta);

  IterationHistory history;
  history.stop_reason = StopReason::max_iters;
  for (std::size_t k = 1; k <= opts.max_iters; ++k) {
    if (!state->breakdown) extend(*state, op);
    if (state->steps() < k) {
      history.stop_reason = StopReason::breakdown;
      break;
    }
    Vector hcol(state->hess.col(k - 1).begin(), state->hess.col(k - 1).end());
    ls.add_column(hcol);
    Vector y;
    try {
      y = ls.solve();
    } catch (const std::runtime_error&) {
      history.stop_reason = StopReason::breakdown;
      history.diagnostic = "singular projected system";
      break;
    }
    Vector x(x0);
    for (std::size_t j = 0; j < k; ++j) axpy(y[j], state->basis.col(j), x);
    record_iterate(history, op, b, opts, x);
    history.quasi_residual_norms.push_back(ls.quasi_residual());
    if (state->breakdown) {
      history.stop_reason = StopReason::breakdown;
      break;
    }
  }
  history.decomposition = state;
  return history;
}

}  // namespace

IterationHistory cmrh(const LinearOperator& op, const Vector& b, const SolveOptions& opts) {
  return krylov_solve(KrylovKind::hessenberg_pivoted, op, b, opts);
}

IterationHistory gmres(const LinearOperator& op, const Vector& b, const SolveOptions& opts) {
  return krylov_solve(KrylovKind::arnoldi, op, b, opts);
}

SpectralBounds spectral_bounds(const LinearOperator& op) {
  const DenseMatrix a = to_dense(op);
  const SvdResult svd = a.rows() >= a.cols() ? jacobi_svd(a) : jacobi_svd(transpose(a));
  return {svd.singular_values.back(), svd.singular_values.front()};
}

IterationHistory landweber(const LinearOperator& op, const Vector& b, const SolveOptions& opts,
                           std::optional<SpectralBounds> bounds) {
  if (!op.has_transpose()) throw std::invalid_argument("landweber: operator has no transpose");
  const SpectralBounds sb = bounds ? *bounds : spectral_bounds(op);
  const double omega =
      0.99 / std::max(sb.s_small * sb.s_small, sb.s_large * sb.s_large);

  const std::size_t n = op.n_cols;
  Vector x = resolve_x0(opts, n);
  IterationHistory history;
  for (std::size_t k = 0; k < opts.max_iters; ++k) {
    Vector r = op.apply(x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    Vector g = op.apply_transpose(r);
    axpy(omega, g, x);
    record_iterate(history, op, b, opts, x);
  }
  history.stop_reason = StopReason::max_iters;
  return history;
}

IterationHistory richardson(const LinearOperator& op, const Vector& b, const SolveOptions& opts,
                            std::optional<SpectralBounds> bounds,
                            std::optional<double> step_denominator) {
  if (op.n_rows != op.n_cols) throw std::invalid_argument("richardson: operator not square");
  double denom;
  if (step_denominator) {
    denom = *step_denominator;
  } else {
    const SpectralBounds sb = bounds ? *bounds : spectral_bounds(op);
    denom = sb.s_small + sb.s_large;
  }
  if (denom == 0.0) throw std::invalid_argument("richardson: zero step denominator");
  const double omega = 0.99 / denom;

  Vector x = resolve_x0(opts, op.n_cols);
  IterationHistory history;
  for (std::size_t k = 0; k < opts.max_iters; ++k) {
    Vector r = op.apply(x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    axpy(omega, r, x);
    record_iterate(history, op, b, opts, x);
  }
  history.stop_reason = StopReason::max_iters;
  return history;
}

IterationHistory chebyshev_semi_iteration(const LinearOperator& op, const Vector& b,
                                          std::pair<double, double> interval,
                                          const SolveOptions& opts) {
  if (!op.has_transpose())
    throw std::invalid_argument("chebyshev_semi_iteration: operator has no transpose");
  const auto [lo, hi] = interval;
  if (!(lo > 0.0) || !(hi > lo))
    throw std::invalid_argument("chebyshev_semi_iteration: requires 0 < lo < hi");

  const LinearOperator normal = normal_equations(op);
  const Vector rhs = op.apply_transpose(b);
  // Two-term form with center d and half-width c; the error polynomial is
  // T_k((d-t)/c) / T_k(d/c), the minimax polynomial on [lo, hi].
  const double d = (hi + lo) / 2.0;
  const double c = (hi - lo) / 2.0;
  const double sigma1 = d / c;

  Vector x = resolve_x0(opts, op.n_cols);
  Vector r = normal.apply(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
  Vector w(r);
  scale(1.0 / d, {w.data(), w.size()});
  double rho = 1.0 / sigma1;

  IterationHistory history;
  for (std::size_t k = 0; k < opts.max_iters; ++k) {
    axpy(1.0, w, x);
    Vector mw = normal.apply(w);
    axpy(-1.0, mw, r);
    record_iterate(history, op, b, opts, x);
    const double rho_next = 1.0 / (2.0 * sigma1 - rho);
    for (std::size_t i = 0; i < w.size(); ++i)
      w[i] = rho_next * rho * w[i] + (2.0 * rho_next / c) * r[i];
    rho = rho_next;
  }
  history.stop_reason = StopReason::max_iters;
  return history;
}

std::pair<double, double> chebyshev_interval_paper(const SpectralBounds& bounds) {
  const double m = std::min(bounds.s_small * bounds.s_small, bounds.s_large * bounds.s_large);
  return {m, 1.001 * m};
}

std::pair<double, double> chebyshev_interval_conventional(const SpectralBounds& bounds) {
  return {bounds.s_small * bounds.s_small, bounds.s_large * bounds.s_large};
}

}  // namespace kreg
