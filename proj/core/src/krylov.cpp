#include "kreg/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kreg {

namespace {

std::vector<std::size_t> identity_permutation(std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  return p;
}

void append_hess_column(KrylovDecomposition& state, const Vector& column) {
  const std::size_t k = state.hess.cols();
  DenseMatrix grown(k + 2, k + 1);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < state.hess.rows(); ++i) grown(i, j) = state.hess(i, j);
  for (std::size_t i = 0; i < column.size(); ++i) grown(i, k) = column[i];
  state.hess = std::move(grown);
}

void check_extendable(const KrylovDecomposition& state, const LinearOperator& op) {
  if (op.n_rows != op.n_cols || op.n_cols != state.dimension())
    throw std::invalid_argument("krylov extend: operator/state dimension mismatch");
}

}  // namespace

KrylovDecomposition hessenberg_init(const Vector& r0) {
  if (norm2(r0) == 0.0) throw std::invalid_argument("hessenberg_init: r0 is zero");
  const double beta = r0[0];
  if (beta == 0.0)
    throw std::invalid_argument(
        "hessenberg_init: first entry of r0 is zero; use the pivoted variant");
  KrylovDecomposition state;
  state.kind = KrylovKind::hessenberg;
  state.beta = beta;
  state.pivot = identity_permutation(r0.size());
  Vector l1(r0);
  for (double& v : l1) v /= beta;  // keeps the unit entry exact
  state.basis.append_column(l1);
  return state;
}

KrylovDecomposition hessenberg_pivoted_init(const Vector& r0) {
  if (norm2(r0) == 0.0) throw std::invalid_argument("hessenberg_pivoted_init: r0 is zero");
  const std::size_t n = r0.size();
  std::size_t i0 = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(r0[i]) > std::abs(r0[i0])) i0 = i;
  KrylovDecomposition state;
  state.kind = KrylovKind::hessenberg_pivoted;
  state.beta = r0[i0];
  state.pivot = identity_permutation(n);
  std::swap(state.pivot[0], state.pivot[i0]);
  Vector l1(r0);
  for (double& v : l1) v /= state.beta;  // l1(i0) = 1 exactly
  state.basis.append_column(l1);
  return state;
}

KrylovDecomposition arnoldi_init(const Vector& r0) {
  const double beta = norm2(r0);
  if (beta == 0.0) throw std::invalid_argument("arnoldi_init: r0 is zero");
  KrylovDecomposition state;
  state.kind = KrylovKind::arnoldi;
  state.beta = beta;
  state.pivot = identity_permutation(r0.size());
  Vector q1(r0);
  scale(1.0 / beta, q1);
  state.basis.append_column(q1);
  return state;
}

namespace {

// Shared body of the two Hessenberg variants. Entry selection differs only
// through the permutation (identity for the plain process).
void hessenberg_step(KrylovDecomposition& state, const LinearOperator& op, bool pivoted) {
  check_extendable(state, op);
  if (state.breakdown) return;
  const std::size_t n = state.dimension();
  const std::size_t k = state.steps();  // performing step k+1 (0-based count k)

  Vector u = op.apply(Vector(state.basis.col(k).begin(), state.basis.col(k).end()));
  Vector hcol(k + 2, 0.0);
  for (std::size_t j = 0; j <= k; ++j) {
    const double hjk = u[state.pivot[j]];
    hcol[j] = hjk;
    if (hjk != 0.0) axpy(-hjk, state.basis.col(j), u);
    u[state.pivot[j]] = 0.0;  // exact by construction; guard against rounding
  }

  if (pivoted) {
    // Select the remaining entry of largest magnitude as the continuation.
    std::size_t best = k + 1;
    double best_mag = -1.0;
    for (std::size_t i = k + 1; i < n; ++i) {
      const double mag = std::abs(u[state.pivot[i]]);
      if (mag > best_mag) {
        best_mag = mag;
        best = i;
      }
    }
    if (k + 1 >= n || best_mag == 0.0) {
      state.breakdown = true;
      append_hess_column(state, hcol);  // h_{k+1,k} = 0; iterates up to k stay valid
      return;
    }
    const double h_next = u[state.pivot[best]];
    hcol[k + 1] = h_next;
    std::swap(state.pivot[k + 1], state.pivot[best]);
    for (double& v : u) v /= h_next;  // pivot entry becomes exactly 1
    append_hess_column(state, hcol);
    state.basis.append_column(u);
    return;
  }

  const double h_next = (k + 1 < n) ? u[k + 1] : 0.0;
  if (h_next == 0.0) {
    state.breakdown = true;
    const bool u_zero = std::all_of(u.begin(), u.end(), [](double v) { return v == 0.0; });
    // Only a happy breakdown (u = 0) leaves the Hessenberg relation intact.
    if (u_zero) append_hess_column(state, hcol);
    return;
  }
  hcol[k + 1] = h_next;
  for (double& v : u) v /= h_next;
  append_hess_column(state, hcol);
  state.basis.append_column(u);
}

}  // namespace

void hessenberg_extend(KrylovDecomposition& state, const LinearOperator& op) {
  if (state.kind != KrylovKind::hessenberg)
    throw std::invalid_argument("hessenberg_extend: wrong decomposition kind");
  hessenberg_step(state, op, /*pivoted=*/false);
}

void hessenberg_pivoted_extend(KrylovDecomposition& state, const LinearOperator& op) {
  if (state.kind != KrylovKind::hessenberg_pivoted)
    throw std::invalid_argument("hessenberg_pivoted_extend: wrong decomposition kind");
  hessenberg_step(state, op, /*pivoted=*/true);
}

void arnoldi_extend(KrylovDecomposition& state, const LinearOperator& op) {
  if (state.kind != KrylovKind::arnoldi)
    throw std::invalid_argument("arnoldi_extend: wrong decomposition kind");
  check_extendable(state, op);
  if (state.breakdown) return;
  const std::size_t n = state.dimension();
  const std::size_t k = state.steps();

  Vector u = op.apply(Vector(state.basis.col(k).begin(), state.basis.col(k).end()));
  const double u_scale = norm2(u);
  Vector hcol(k + 2, 0.0);
  for (std::size_t j = 0; j <= k; ++j) {
    const double hjk = dot(state.basis.col(j), u);
    hcol[j] = hjk;
    axpy(-hjk, state.basis.col(j), u);
  }
  double h_next = (k + 1 < n) ? norm2(u) : 0.0;
  // Happy breakdown: the new direction lies in the current span to rounding.
  if (h_next <= 1e-14 * u_scale) h_next = 0.0;
  if (h_next == 0.0) {
    state.breakdown = true;
    append_hess_column(state, hcol);
    return;
  }
  hcol[k + 1] = h_next;
  for (double& v : u) v /= h_next;
  append_hess_column(state, hcol);
  state.basis.append_column(u);
}

void extend(KrylovDecomposition& state, const LinearOperator& op) {
  switch (state.kind) {
    case KrylovKind::hessenberg:
      hessenberg_extend(state, op);
      return;
    case KrylovKind::hessenberg_pivoted:
      hessenberg_pivoted_extend(state, op);
      return;
    case KrylovKind::arnoldi:
      arnoldi_extend(state, op);
      return;
  }
  throw std::logic_error("extend: unknown kind");
}

KrylovDecomposition build_decomposition(KrylovKind kind, const LinearOperator& op,
                                        const Vector& r0, std::size_t k_max) {
  KrylovDecomposition state;
  switch (kind) {
    case KrylovKind::hessenberg:
      state = hessenberg_init(r0);
      break;
    case KrylovKind::hessenberg_pivoted:
      state = hessenberg_pivoted_init(r0);
      break;
    case KrylovKind::arnoldi:
      state = arnoldi_init(r0);
      break;
  }
  while (state.steps() < k_max && !state.breakdown) extend(state, op);
  return state;
}

double relation_residual(const KrylovDecomposition& state, const LinearOperator& op) {
  const std::size_t k = state.steps();
  if (k == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    Vector lhs = op.apply(Vector(state.basis.col(j).begin(), state.basis.col(j).end()));
    for (std::size_t i = 0; i < state.basis.cols() && i < state.hess.rows(); ++i)
      axpy(-state.hess(i, j), state.basis.col(i), lhs);
    for (double v : lhs) acc += v * v;
  }
  return std::sqrt(acc);
}

BasisChangeReport verify_basis_change(const KrylovDecomposition& hessenberg_state,
                                      const KrylovDecomposition& arnoldi_state) {
  const std::size_t k = hessenberg_state.steps();
  if (k == 0 || k != arnoldi_state.steps())
    throw std::invalid_argument("verify_basis_change: step counts differ or are zero");
  if (hessenberg_state.dimension() != arnoldi_state.dimension())
    throw std::invalid_argument("verify_basis_change: dimension mismatch");
  if (hessenberg_state.breakdown || arnoldi_state.breakdown)
    throw std::invalid_argument("verify_basis_change: requires breakdown-free decompositions");

  QrResult qr = qr_factor(hessenberg_state.basis);  // L_{k+1} = Q R
  // qr_factor fixes signs by its own convention; align columns of Q with the
  // Arnoldi basis so R matches the R_k of the identity being checked.
  for (std::size_t j = 0; j < qr.Q.cols(); ++j) {
    if (dot(qr.Q.col(j), arnoldi_state.basis.col(j)) < 0.0)
      for (std::size_t c = j; c < qr.R.cols(); ++c) qr.R(j, c) = -qr.R(j, c);
  }

  // R_k^{-1} by back substitution on unit vectors.
  DenseMatrix rk_inv(k, k);
  DenseMatrix rk(k, k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i <= j; ++i) rk(i, j) = qr.R(i, j);
  for (std::size_t j = 0; j < k; ++j) {
    Vector e(k, 0.0);
    e[j] = 1.0;
    Vector x = solve_upper_triangular(rk, e);
    std::copy(x.begin(), x.end(), rk_inv.col(j).begin());
  }

  const DenseMatrix check = multiply(multiply(qr.R, hessenberg_state.hess), rk_inv);
  double diff = 0.0;
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < k + 1; ++i) {
      const double d = arnoldi_state.hess(i, j) - check(i, j);
      diff += d * d;
    }
  BasisChangeReport report;
  report.relative_residual = std::sqrt(diff) / frobenius_norm(arnoldi_state.hess);
  report.kappa_r = condition_number_2(qr.R);
  return report;
}

}  // namespace kreg
