#pragma once

#include <functional>
#include <memory>

#include "kreg/linalg.hpp"

namespace kreg {

enum class BlurBoundary { zero, reflexive };

/// Forward map with explicit dimensions. apply_transpose may be empty for
/// operators that do not expose an adjoint. Immutable after construction.
struct LinearOperator {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::function<Vector(const Vector&)> apply;
  std::function<Vector(const Vector&)> apply_transpose;
  // Set when the operator is backed by an explicit matrix; avoids
  // re-materialization for spectral bounds and exports.
  std::shared_ptr<const DenseMatrix> dense;

  bool has_transpose() const { return static_cast<bool>(apply_transpose); }
};

LinearOperator from_dense(DenseMatrix m);

// x -> A^T(A x); requires apply_transpose.
LinearOperator normal_equations(const LinearOperator& op);

// Kronecker-structured blur T (x) T of a 1-D Gaussian Toeplitz kernel with
// width sigma, acting on side*side images flattened column-major
// (pixel (r,c) -> index r + c*side, 0-based). Applied as two 1-D passes.
LinearOperator gaussian_blur_2d(std::size_t side, double sigma,
                                BlurBoundary boundary = BlurBoundary::zero);

// 1-D Gaussian Toeplitz matrix entries t(|i-j|) used by the blur and by the
// spectra test problem.
double gaussian_kernel_value(double sigma, double offset);

// Materialize an operator column by column (uses `dense` when present).
DenseMatrix to_dense(const LinearOperator& op);

/// Row-wise access to a matrix that may be too large to materialize. Used by
/// the simulated-precision kernels, which need entry-level control over the
/// accumulation order.
struct RowSource {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::function<void(std::size_t i, std::span<double> out)> fill_row;
};

RowSource rows_from_dense(std::shared_ptr<const DenseMatrix> m);

// b = A x computed row by row in working precision.
Vector apply_rows(const RowSource& rows, const Vector& x);

}  // namespace kreg
