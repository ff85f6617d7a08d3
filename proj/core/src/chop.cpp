#include "kreg/chop.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace kreg {

double PrecisionFormat::max_finite() const {
  return (2.0 - std::ldexp(1.0, -significand_bits)) * std::ldexp(1.0, emax());
}

double PrecisionFormat::smallest_subnormal() const {
  return std::ldexp(1.0, emin() - significand_bits);
}

double PrecisionFormat::smallest_normal() const { return std::ldexp(1.0, emin()); }

double PrecisionFormat::unit_roundoff() const {
  return std::ldexp(1.0, -significand_bits - 1);
}

double chop(double x, const PrecisionFormat& fmt) {
  if (fmt.exponent_bits < 2 || fmt.significand_bits < 1)
    throw std::invalid_argument("chop: malformed precision format");
  if (x == 0.0 || !std::isfinite(x)) return x;  // signed zeros and inf/nan pass through

  int e = 0;
  (void)std::frexp(x, &e);   // |x| in [2^(e-1), 2^e)
  const int binade = e - 1;  // |x| = f * 2^binade, f in [1, 2)
  const int t = fmt.significand_bits;

  if (binade < fmt.emin()) {
    if (!fmt.subnormals) {
      const double lim = fmt.smallest_normal();
      const double ax = std::abs(x);
      if (ax > 0.5 * lim) return std::copysign(lim, x);
      return std::copysign(0.0, x);  // ties at lim/2 flush to zero
    }
    const double q = fmt.smallest_subnormal();
    return std::nearbyint(x / q) * q;  // q is a power of two, division exact
  }

  const double q = std::ldexp(1.0, binade - t);
  const double y = std::nearbyint(x / q) * q;
  if (std::abs(y) > fmt.max_finite())
    return std::copysign(std::numeric_limits<double>::infinity(), x);
  return y;
}

double chopped_norm2(std::span<const double> v, const ChopContext& ctx) {
  ++ctx.counters->norm_calls;
  double acc = 0.0;
  for (double vi : v) acc = chop(acc + chop(vi * vi, ctx.format), ctx.format);
  return chop(std::sqrt(acc), ctx.format);
}

double chopped_dot(std::span<const double> x, std::span<const double> y,
                   const ChopContext& ctx) {
  ++ctx.counters->dot_calls;
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    acc = chop(acc + chop(x[i] * y[i], ctx.format), ctx.format);
  return acc;
}

Vector chopped_axpy(double alpha, std::span<const double> x, std::span<const double> y,
                    const ChopContext& ctx) {
  ++ctx.counters->axpy_calls;
  Vector out(y.begin(), y.end());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = chop(out[i] + chop(alpha * x[i], ctx.format), ctx.format);
  return out;
}

Vector chopped_matvec(const RowSource& rows, const Vector& x, const ChopContext& ctx) {
  if (x.size() != rows.n_cols) throw std::invalid_argument("chopped_matvec: dimension mismatch");
  ++ctx.counters->matvec_calls;
  Vector y(rows.n_rows, 0.0);
  Vector buf(rows.n_cols);
  for (std::size_t i = 0; i < rows.n_rows; ++i) {
    rows.fill_row(i, buf);
    double acc = 0.0;
    for (std::size_t j = 0; j < rows.n_cols; ++j)
      acc = chop(acc + chop(buf[j] * x[j], ctx.format), ctx.format);
    y[i] = acc;
  }
  return y;
}

Vector chopped_matvec(const DenseMatrix& m, const Vector& x, const ChopContext& ctx) {
  if (x.size() != m.cols()) throw std::invalid_argument("chopped_matvec: dimension mismatch");
  ++ctx.counters->matvec_calls;
  Vector y(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j)
      acc = chop(acc + chop(m(i, j) * x[j], ctx.format), ctx.format);
    y[i] = acc;
  }
  return y;
}

Vector chopped_divide(std::span<const double> v, double denom, const ChopContext& ctx) {
  ++ctx.counters->divide_calls;
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = chop(v[i] / denom, ctx.format);
  return out;
}

namespace {

void record_chopped_iterate(IterationHistory& history, const RowSource& rows, const Vector& b,
                            const SolveOptions& opts, const Vector& x) {
  Vector ax = apply_rows(rows, x);
  double acc = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) acc += (b[i] - ax[i]) * (b[i] - ax[i]);
  history.residual_norms.push_back(std::sqrt(acc));
  if (opts.record_errors_against) {
    const Vector& xt = *opts.record_errors_against;
    double err = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) err += (x[i] - xt[i]) * (x[i] - xt[i]);
    history.relative_errors.push_back(std::sqrt(err) / norm2(xt));
  }
  if (opts.store_solutions) history.solutions.push_back(x);
  history.final_solution = x;
}

IterationHistory chopped_cmrh(const RowSource& rows, const Vector& b, const ChopContext& ctx,
                              const SolveOptions& opts) {
  const std::size_t n = rows.n_cols;
  IterationHistory history;
  history.stop_reason = StopReason::max_iters;

  // Pivot selection is magnitude comparison only; no norms or dot products.
  std::size_t i0 = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(b[i]) > std::abs(b[i0])) i0 = i;
  const double beta = b[i0];
  if (beta == 0.0 || !std::isfinite(beta)) {
    history.stop_reason = StopReason::breakdown;
    history.diagnostic = "starting vector has no usable pivot entry";
    return history;
  }
  std::vector<std::size_t> pivot(n);
  for (std::size_t i = 0; i < n; ++i) pivot[i] = i;
  std::swap(pivot[0], pivot[i0]);

  std::vector<Vector> basis;
  basis.push_back(chopped_divide(b, beta, ctx));
  HessenbergLeastSquares ls(beta);

  for (std::size_t k = 1; k <= opts.max_iters && k <= n; ++k) {
    Vector u = chopped_matvec(rows, basis[k - 1], ctx);
    Vector hcol(k + 1, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      const double hjk = u[pivot[j]];
      hcol[j] = hjk;
      if (hjk != 0.0) u = chopped_axpy(-hjk, basis[j], u, ctx);
      u[pivot[j]] = 0.0;
    }

    std::size_t best = k;
    double best_mag = -1.0;
    for (std::size_t i = k; i < n; ++i) {
      const double mag = std::abs(u[pivot[i]]);
      if (mag > best_mag) {
        best_mag = mag;
        best = i;
      }
    }
    const double h_next = (k < n) ? u[pivot[best]] : 0.0;
    bool stop_after_iterate = false;
    std::string stop_note;
    if (!std::isfinite(h_next)) {
      stop_after_iterate = true;
      stop_note = "hessenberg continuation entry is non-finite";
    } else if (h_next == 0.0) {
      stop_after_iterate = true;
      stop_note = "hessenberg breakdown: zero continuation entry";
    }
    if (!stop_after_iterate) hcol[k] = h_next;
    ls.add_column(hcol);

    Vector y;
    try {
      y = ls.solve();
    } catch (const std::runtime_error&) {
      history.stop_reason = StopReason::breakdown;
      history.diagnostic = "singular projected system";
      break;
    }
    Vector x(n, 0.0);
    for (std::size_t j = 0; j < k; ++j) x = chopped_axpy(y[j], basis[j], x, ctx);
    record_chopped_iterate(history, rows, b, opts, x);
    history.quasi_residual_norms.push_back(ls.quasi_residual());

    if (stop_after_iterate) {
      history.stop_reason = StopReason::breakdown;
      history.diagnostic = stop_note;
      break;
    }
    std::swap(pivot[k], pivot[best]);
    basis.push_back(chopped_divide(u, h_next, ctx));
  }
  return history;
}

IterationHistory chopped_gmres(const RowSource& rows, const Vector& b, const ChopContext& ctx,
                               const SolveOptions& opts) {
  const std::size_t n = rows.n_cols;
  IterationHistory history;
  history.stop_reason = StopReason::max_iters;

  const double beta = chopped_norm2(b, ctx);
  if (beta == 0.0) {
    history.stop_reason = StopReason::breakdown;
    history.diagnostic = "rhs norm underflowed to zero";
    return history;
  }
  if (!std::isfinite(beta)) {
    history.stop_reason = StopReason::breakdown;
    history.diagnostic = "rhs norm overflowed";
    return history;
  }

  std::vector<Vector> basis;
  basis.push_back(chopped_divide(b, beta, ctx));
  HessenbergLeastSquares ls(beta);

  for (std::size_t k = 1; k <= opts.max_iters && k <= n; ++k) {
    Vector u = chopped_matvec(rows, basis[k - 1], ctx);
    Vector hcol(k + 1, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      const double hjk = chopped_dot(basis[j], u, ctx);
      hcol[j] = hjk;
      u = chopped_axpy(-hjk, basis[j], u, ctx);
    }
    const double h_next = (k < n) ? chopped_norm2(u, ctx) : 0.0;
    bool stop_after_iterate = false;
    std::string stop_note;
    if (!std::isfinite(h_next)) {
      stop_after_iterate = true;
      stop_note = "basis norm overflowed";
    } else if (h_next == 0.0) {
      stop_after_iterate = true;
      stop_note = k < n ? "basis norm is zero: numerical orthogonality reached"
                        : "full space reached";
    } else {
      hcol[k] = h_next;
    }
    ls.add_column(hcol);

    Vector y;
    try {
      y = ls.solve();
    } catch (const std::runtime_error&) {
      history.stop_reason = StopReason::breakdown;
      history.diagnostic = "singular projected system";
      break;
    }
    Vector x(n, 0.0);
    for (std::size_t j = 0; j < k; ++j) x = chopped_axpy(y[j], basis[j], x, ctx);
    record_chopped_iterate(history, rows, b, opts, x);
    history.quasi_residual_norms.push_back(ls.quasi_residual());

    if (stop_after_iterate) {
      history.stop_reason = StopReason::breakdown;
      history.diagnostic = stop_note;
      break;
    }
    basis.push_back(chopped_divide(u, h_next, ctx));
  }
  return history;
}

}  // namespace

IterationHistory run_under_precision(ChoppedSolver solver, const RowSource& rows,
                                     const Vector& b, const ChopContext& ctx,
                                     const SolveOptions& opts) {
  if (rows.n_rows != rows.n_cols)
    throw std::invalid_argument("run_under_precision: operator not square");
  if (b.size() != rows.n_cols)
    throw std::invalid_argument("run_under_precision: rhs dimension mismatch");
  if (opts.x0)
    throw std::invalid_argument("run_under_precision: nonzero x0 not supported");
  return solver == ChoppedSolver::cmrh ? chopped_cmrh(rows, b, ctx, opts)
                                       : chopped_gmres(rows, b, ctx, opts);
}

IterationHistory run_under_precision(ChoppedSolver solver, const TestProblem& problem,
                                     const ChopContext& ctx, const SolveOptions& opts) {
  std::shared_ptr<const DenseMatrix> dense = problem.op.dense;
  if (!dense) {
    if (problem.op.n_cols > 2048)
      throw std::invalid_argument(
          "run_under_precision: matrix-free operator too large to materialize");
    dense = std::make_shared<const DenseMatrix>(to_dense(problem.op));
  }
  SolveOptions local = opts;
  if (!local.record_errors_against) local.record_errors_against = problem.x_true;
  return run_under_precision(solver, rows_from_dense(dense), problem.b, ctx, local);
}

ArnoldiDiagonalReport arnoldi_diagonal_report(const TestProblem& problem, std::size_t k_max) {
  const KrylovDecomposition decomp =
      build_decomposition(KrylovKind::arnoldi, problem.op, problem.b, k_max);
  ArnoldiDiagonalReport report;
  report.half_unit_roundoff = PrecisionFormat::half().unit_roundoff();
  for (std::size_t k = 0; k < decomp.steps(); ++k)
    report.abs_diagonal.push_back(std::abs(decomp.hess(k, k)));
  return report;
}

}  // namespace kreg
