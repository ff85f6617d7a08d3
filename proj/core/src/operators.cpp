#include "kreg/operators.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kreg {

double gaussian_kernel_value(double sigma, double offset) {
  return std::exp(-(offset * offset) / (2.0 * sigma * sigma)) /
         (sigma * std::sqrt(2.0 * std::numbers::pi));
}

LinearOperator from_dense(DenseMatrix m) {
  if (!m.all_finite()) throw std::invalid_argument("from_dense: non-finite entries");
  auto shared = std::make_shared<const DenseMatrix>(std::move(m));
  LinearOperator op;
  op.n_rows = shared->rows();
  op.n_cols = shared->cols();
  op.apply = [shared](const Vector& x) { return multiply(*shared, x); };
  op.apply_transpose = [shared](const Vector& y) { return multiply_transpose(*shared, y); };
  op.dense = shared;
  return op;
}

LinearOperator normal_equations(const LinearOperator& op) {
  if (!op.has_transpose())
    throw std::invalid_argument("normal_equations: operator has no transpose");
  LinearOperator out;
  out.n_rows = op.n_cols;
  out.n_cols = op.n_cols;
  auto fwd = op.apply;
  auto adj = op.apply_transpose;
  out.apply = [fwd, adj](const Vector& x) { return adj(fwd(x)); };
  out.apply_transpose = out.apply;  // A^T A is symmetric
  return out;
}

namespace {

// One 1-D convolution pass with the truncated Gaussian kernel (offsets up to
// n-1). Zero boundary is the plain Toeplitz matvec; reflexive extends the
// signal by half-sample reflection at both ends.
void blur_pass_1d(const Vector& kernel, BlurBoundary boundary,
                  std::span<const double> x, std::span<double> y) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  auto sample = [&](std::ptrdiff_t j) -> double {
    if (j >= 0 && j < n) return x[static_cast<std::size_t>(j)];
    if (boundary == BlurBoundary::zero) return 0.0;
    if (j < 0) return x[static_cast<std::size_t>(-j - 1)];
    return x[static_cast<std::size_t>(2 * n - 1 - j)];
  };
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t m = -(n - 1); m <= n - 1; ++m)
      acc += kernel[static_cast<std::size_t>(std::abs(m))] * sample(i - m);
    y[static_cast<std::size_t>(i)] = acc;
  }
}

}  // namespace

LinearOperator gaussian_blur_2d(std::size_t side, double sigma, BlurBoundary boundary) {
  if (side < 2) throw std::invalid_argument("gaussian_blur_2d: side must be >= 2");
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_blur_2d: sigma must be positive");

  Vector kernel(side);
  for (std::size_t m = 0; m < side; ++m)
    kernel[m] = gaussian_kernel_value(sigma, static_cast<double>(m));

  const std::size_t n = side * side;
  auto apply = [kernel, boundary, side](const Vector& x) {
    if (x.size() != side * side)
      throw std::invalid_argument("gaussian_blur_2d: image size mismatch");
    Vector tmp(x.size()), out(x.size());
    // Columns of the image are contiguous in the flattened vector.
    for (std::size_t c = 0; c < side; ++c)
      blur_pass_1d(kernel, boundary, {x.data() + c * side, side},
                   {tmp.data() + c * side, side});
    Vector row_in(side), row_out(side);
    for (std::size_t r = 0; r < side; ++r) {
      for (std::size_t c = 0; c < side; ++c) row_in[c] = tmp[r + c * side];
      blur_pass_1d(kernel, boundary, row_in, row_out);
      for (std::size_t c = 0; c < side; ++c) out[r + c * side] = row_out[c];
    }
    return out;
  };

  LinearOperator op;
  op.n_rows = n;
  op.n_cols = n;
  op.apply = apply;
  op.apply_transpose = apply;  // symmetric kernel, symmetric boundary handling
  return op;
}

DenseMatrix to_dense(const LinearOperator& op) {
  if (op.dense) return *op.dense;
  DenseMatrix m(op.n_rows, op.n_cols);
  Vector e(op.n_cols, 0.0);
  for (std::size_t j = 0; j < op.n_cols; ++j) {
    e[j] = 1.0;
    Vector col = op.apply(e);
    std::copy(col.begin(), col.end(), m.col(j).begin());
    e[j] = 0.0;
  }
  return m;
}

RowSource rows_from_dense(std::shared_ptr<const DenseMatrix> m) {
  RowSource rows;
  rows.n_rows = m->rows();
  rows.n_cols = m->cols();
  rows.fill_row = [m](std::size_t i, std::span<double> out) {
    for (std::size_t j = 0; j < m->cols(); ++j) out[j] = (*m)(i, j);
  };
  return rows;
}

Vector apply_rows(const RowSource& rows, const Vector& x) {
  if (x.size() != rows.n_cols) throw std::invalid_argument("apply_rows: dimension mismatch");
  Vector y(rows.n_rows, 0.0);
  Vector buf(rows.n_cols);
  for (std::size_t i = 0; i < rows.n_rows; ++i) {
    rows.fill_row(i, buf);
    y[i] = dot(buf, x);
  }
  return y;
}

}  // namespace kreg
