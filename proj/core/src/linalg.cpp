#include "kreg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace kreg {

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t nr = rows.size();
  const std::size_t nc = nr == 0 ? 0 : rows.begin()->size();
  DenseMatrix m(nr, nc);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != nc) throw std::invalid_argument("from_rows: ragged rows");
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

void DenseMatrix::append_column(std::span<const double> column) {
  if (cols_ == 0 && rows_ == 0) rows_ = column.size();
  if (column.size() != rows_) throw std::invalid_argument("append_column: length mismatch");
  data_.insert(data_.end(), column.begin(), column.end());
  ++cols_;
}

DenseMatrix DenseMatrix::leading_columns(std::size_t k) const {
  if (k > cols_) throw std::invalid_argument("leading_columns: k > cols");
  DenseMatrix m(rows_, k);
  std::copy(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(rows_ * k),
            m.data_.begin());
  return m;
}

bool DenseMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(double alpha, std::span<double> x) {
  for (double& v : x) v *= alpha;
}

DenseMatrix top_left(const DenseMatrix& a, std::size_t rows, std::size_t cols) {
  if (rows > a.rows() || cols > a.cols()) throw std::invalid_argument("top_left: block too large");
  DenseMatrix m(rows, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) m(i, j) = a(i, j);
  return m;
}

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("multiply: dimension mismatch");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double bkj = b(k, j);
      if (bkj == 0.0) continue;
      for (std::size_t i = 0; i < a.rows(); ++i) c(i, j) += a(i, k) * bkj;
    }
  return c;
}

Vector multiply(const DenseMatrix& a, const Vector& x) {
  if (a.cols() != x.size()) throw std::invalid_argument("multiply: dimension mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t j = 0; j < a.cols(); ++j) axpy(x[j], a.col(j), y);
  return y;
}

Vector multiply_transpose(const DenseMatrix& a, const Vector& x) {
  if (a.rows() != x.size()) throw std::invalid_argument("multiply_transpose: dimension mismatch");
  Vector y(a.cols(), 0.0);
  for (std::size_t j = 0; j < a.cols(); ++j) y[j] = dot(a.col(j), x);
  return y;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) t(j, i) = a(i, j);
  return t;
}

double frobenius_norm(const DenseMatrix& a) {
  return norm2(a.data());
}

namespace {

// Unit vector orthogonal to the already-filled columns of u (those in `filled`),
// used to complete U when a singular value is exactly zero.
void fill_orthonormal_column(DenseMatrix& u, std::size_t target,
                             const std::vector<bool>& filled) {
  const std::size_t m = u.rows();
  Vector best;
  double best_norm = -1.0;
  for (std::size_t trial = 0; trial < m; ++trial) {
    Vector cand(m, 0.0);
    cand[trial] = 1.0;
    for (std::size_t j = 0; j < u.cols(); ++j) {
      if (!filled[j]) continue;
      axpy(-dot(u.col(j), cand), u.col(j), cand);
    }
    const double nrm = norm2(cand);
    if (nrm > best_norm) {
      best_norm = nrm;
      best = cand;
    }
    if (nrm > 0.5) break;  // good enough, stop probing
  }
  if (best_norm <= 0.0) throw std::runtime_error("jacobi_svd: cannot complete U basis");
  scale(1.0 / best_norm, {best.data(), best.size()});
  std::copy(best.begin(), best.end(), u.col(target).begin());
}

}  // namespace

SvdResult jacobi_svd(const DenseMatrix& m) {
  const std::size_t nr = m.rows(), nc = m.cols();
  if (nr < nc || nc == 0) throw std::invalid_argument("jacobi_svd: requires rows >= cols >= 1");
  if (!m.all_finite()) throw std::invalid_argument("jacobi_svd: non-finite input entry");

  DenseMatrix w = m;
  DenseMatrix v = DenseMatrix::identity(nc);
  constexpr double kTol = 1e-14;
  constexpr int kMaxSweeps = 60;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < nc; ++p) {
      for (std::size_t q = p + 1; q < nc; ++q) {
        const double app = dot(w.col(p), w.col(p));
        const double aqq = dot(w.col(q), w.col(q));
        const double apq = dot(w.col(p), w.col(q));
        if (apq == 0.0 || std::abs(apq) <= kTol * std::sqrt(app * aqq)) continue;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        auto rotate = [&](DenseMatrix& mat) {
          auto cp = mat.col(p);
          auto cq = mat.col(q);
          for (std::size_t i = 0; i < mat.rows(); ++i) {
            const double xp = cp[i], xq = cq[i];
            cp[i] = c * xp - s * xq;
            cq[i] = s * xp + c * xq;
          }
        };
        rotate(w);
        rotate(v);
        rotated = true;
      }
    }
    if (!rotated) break;
  }

  SvdResult out;
  out.U = DenseMatrix(nr, nc);
  out.V = v;
  out.singular_values.assign(nc, 0.0);
  std::vector<bool> filled(nc, false);
  for (std::size_t j = 0; j < nc; ++j) {
    const double sigma = norm2(w.col(j));
    out.singular_values[j] = sigma;
    if (sigma > 0.0) {
      auto src = w.col(j);
      auto dst = out.U.col(j);
      for (std::size_t i = 0; i < nr; ++i) dst[i] = src[i] / sigma;
      filled[j] = true;
    }
  }
  for (std::size_t j = 0; j < nc; ++j) {
    if (!filled[j]) {
      fill_orthonormal_column(out.U, j, filled);
      filled[j] = true;
    }
  }

  // Sort nonincreasing, permuting U and V consistently.
  std::vector<std::size_t> order(nc);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.singular_values[a] > out.singular_values[b];
  });
  SvdResult sorted;
  sorted.U = DenseMatrix(nr, nc);
  sorted.V = DenseMatrix(nc, nc);
  sorted.singular_values.assign(nc, 0.0);
  for (std::size_t j = 0; j < nc; ++j) {
    const std::size_t src = order[j];
    sorted.singular_values[j] = out.singular_values[src];
    std::copy(out.U.col(src).begin(), out.U.col(src).end(), sorted.U.col(j).begin());
    std::copy(out.V.col(src).begin(), out.V.col(src).end(), sorted.V.col(j).begin());
  }
  return sorted;
}

QrResult qr_factor(const DenseMatrix& m) {
  const std::size_t nr = m.rows(), nc = m.cols();
  if (nr < nc || nc == 0) throw std::invalid_argument("qr_factor: requires rows >= cols >= 1");
  if (!m.all_finite()) throw std::invalid_argument("qr_factor: non-finite input entry");

  DenseMatrix a = m;
  // Householder vectors, one per column, stored full-length for simplicity.
  std::vector<Vector> reflectors(nc);
  for (std::size_t k = 0; k < nc; ++k) {
    Vector v(nr, 0.0);
    double xnorm = 0.0;
    for (std::size_t i = k; i < nr; ++i) {
      v[i] = a(i, k);
      xnorm += v[i] * v[i];
    }
    xnorm = std::sqrt(xnorm);
    if (xnorm == 0.0) {
      reflectors[k] = Vector(nr, 0.0);
      continue;  // column already zero below the diagonal
    }
    const double alpha = (a(k, k) >= 0.0 ? -xnorm : xnorm);
    v[k] -= alpha;
    const double vtv = dot({v.data(), v.size()}, {v.data(), v.size()});
    if (vtv > 0.0) {
      for (std::size_t j = k; j < nc; ++j) {
        auto colj = a.col(j);
        const double coef = 2.0 * dot({v.data(), v.size()}, colj) / vtv;
        axpy(-coef, {v.data(), v.size()}, colj);
      }
      a(k, k) = alpha;
      for (std::size_t i = k + 1; i < nr; ++i) a(i, k) = 0.0;
    }
    reflectors[k] = std::move(v);
  }

  QrResult out;
  out.R = DenseMatrix(nc, nc);
  for (std::size_t j = 0; j < nc; ++j)
    for (std::size_t i = 0; i <= j; ++i) out.R(i, j) = a(i, j);

  // Q = H_1 ... H_nc applied to the leading identity block.
  out.Q = DenseMatrix(nr, nc);
  for (std::size_t j = 0; j < nc; ++j) out.Q(j, j) = 1.0;
  for (std::size_t k = nc; k-- > 0;) {
    const Vector& v = reflectors[k];
    const double vtv = dot({v.data(), v.size()}, {v.data(), v.size()});
    if (vtv == 0.0) continue;
    for (std::size_t j = 0; j < nc; ++j) {
      auto colj = out.Q.col(j);
      const double coef = 2.0 * dot({v.data(), v.size()}, colj) / vtv;
      axpy(-coef, {v.data(), v.size()}, colj);
    }
  }

  // Sign convention: nonnegative diagonal of R.
  for (std::size_t j = 0; j < nc; ++j) {
    if (out.R(j, j) < 0.0) {
      for (std::size_t c = j; c < nc; ++c) out.R(j, c) = -out.R(j, c);
      scale(-1.0, out.Q.col(j));
    }
  }

  const double deficiency_tol =
      frobenius_norm(m) * std::numeric_limits<double>::epsilon() * static_cast<double>(nr);
  for (std::size_t j = 0; j < nc; ++j)
    if (std::abs(out.R(j, j)) <= deficiency_tol) out.rank_deficient = true;
  return out;
}

double condition_number_2(const DenseMatrix& m) {
  bool nonzero = std::any_of(m.data().begin(), m.data().end(), [](double v) { return v != 0.0; });
  if (!nonzero) throw std::invalid_argument("condition_number_2: zero matrix");
  const SvdResult svd = m.rows() >= m.cols() ? jacobi_svd(m) : jacobi_svd(transpose(m));
  const double smax = svd.singular_values.front();
  const double smin = svd.singular_values.back();
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

Vector solve_upper_triangular(const DenseMatrix& r, const Vector& rhs) {
  const std::size_t n = r.rows();
  if (r.cols() != n || rhs.size() != n)
    throw std::invalid_argument("solve_upper_triangular: dimension mismatch");
  Vector x(rhs);
  for (std::size_t ii = n; ii-- > 0;) {
    if (r(ii, ii) == 0.0)
      throw std::runtime_error("solve_upper_triangular: singular system (zero diagonal)");
    for (std::size_t j = ii + 1; j < n; ++j) x[ii] -= r(ii, j) * x[j];
    x[ii] /= r(ii, ii);
  }
  return x;
}

}  // namespace kreg
