#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace kreg {

using Vector = std::vector<double>;

/// Dense column-major matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i + j * rows_]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i + j * rows_]; }

  std::span<double> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> col(std::size_t j) const { return {data_.data() + j * rows_, rows_}; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  void append_column(std::span<const double> column);
  DenseMatrix leading_columns(std::size_t k) const;
  bool all_finite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct SvdResult {
  DenseMatrix U;            // m x n, orthonormal columns
  Vector singular_values;   // nonincreasing, nonnegative
  DenseMatrix V;            // n x n, orthonormal columns
};

struct QrResult {
  DenseMatrix Q;  // m x n, orthonormal columns
  DenseMatrix R;  // n x n, upper triangular, nonnegative diagonal
  bool rank_deficient = false;
};

// Thin SVD by one-sided Jacobi with cyclic sweeps. Requires rows >= cols >= 1
// and finite entries.
SvdResult jacobi_svd(const DenseMatrix& m);

// Thin Householder QR, rows >= cols. Diagonal of R is made nonnegative.
// A numerically zero diagonal entry sets rank_deficient instead of failing.
QrResult qr_factor(const DenseMatrix& m);

// sigma_max / sigma_min; +infinity for singular, throws on the zero matrix.
double condition_number_2(const DenseMatrix& m);

// Back substitution; throws on a zero diagonal entry.
Vector solve_upper_triangular(const DenseMatrix& r, const Vector& rhs);

// Vector helpers.
double norm2(std::span<const double> v);
double norm_inf(std::span<const double> v);
double dot(std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);  // y += alpha*x
void scale(double alpha, std::span<double> x);

// Matrix helpers.
DenseMatrix top_left(const DenseMatrix& a, std::size_t rows, std::size_t cols);
DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);
Vector multiply(const DenseMatrix& a, const Vector& x);
Vector multiply_transpose(const DenseMatrix& a, const Vector& x);  // A^T x
DenseMatrix transpose(const DenseMatrix& a);
double frobenius_norm(const DenseMatrix& a);

}  // namespace kreg
