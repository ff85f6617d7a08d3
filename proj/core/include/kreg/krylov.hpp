#pragma once

#include <cstddef>
#include <vector>

#include "kreg/linalg.hpp"
#include "kreg/operators.hpp"

namespace kreg {

enum class KrylovKind { hessenberg, hessenberg_pivoted, arnoldi };

/// State of a growing Krylov decomposition A * basis_k = basis_{k+1} * hess
/// with hess (k+1) x k upper Hessenberg. After k successful extensions the
/// basis holds k+1 columns; on breakdown the last hess column keeps its zero
/// continuation entry and no basis column is added.
struct KrylovDecomposition {
  KrylovKind kind = KrylovKind::hessenberg;
  DenseMatrix basis;               // n x (steps+1), or n x steps after breakdown
  DenseMatrix hess;                // (steps+1) x steps
  double beta = 0.0;               // scalar from the starting vector
  std::vector<std::size_t> pivot;  // 0-based permutation, identity unless pivoted
  bool breakdown = false;

  std::size_t steps() const { return hess.cols(); }
  std::size_t dimension() const { return pivot.size(); }
};

KrylovDecomposition hessenberg_init(const Vector& r0);
KrylovDecomposition hessenberg_pivoted_init(const Vector& r0);
KrylovDecomposition arnoldi_init(const Vector& r0);

// One step of the matching process. No-ops if breakdown was already reached.
void hessenberg_extend(KrylovDecomposition& state, const LinearOperator& op);
void hessenberg_pivoted_extend(KrylovDecomposition& state, const LinearOperator& op);
void arnoldi_extend(KrylovDecomposition& state, const LinearOperator& op);
void extend(KrylovDecomposition& state, const LinearOperator& op);

// Convenience: initialize and run up to k_max steps.
KrylovDecomposition build_decomposition(KrylovKind kind, const LinearOperator& op,
                                        const Vector& r0, std::size_t k_max);

// ||A * basis_k - basis_{k+1} * hess||_F for the current state.
double relation_residual(const KrylovDecomposition& state, const LinearOperator& op);

/// Check of the basis-change identity H^A = R_{k+1} H R_k^{-1}, with R from
/// the QR factorization of the Hessenberg basis, sign-aligned to the Arnoldi
/// basis so both sides refer to the same orthonormal factor.
struct BasisChangeReport {
  double relative_residual = 0.0;  // ||H^A - R_{k+1} H R_k^{-1}||_F / ||H^A||_F
  double kappa_r = 0.0;            // condition number of R_{k+1}
};

BasisChangeReport verify_basis_change(const KrylovDecomposition& hessenberg_state,
                                      const KrylovDecomposition& arnoldi_state);

}  // namespace kreg
