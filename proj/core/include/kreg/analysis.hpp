#pragma once

#include "kreg/hybrid.hpp"
#include "kreg/problems.hpp"

namespace kreg {

/// Empirical spectral filter factors of an approximate solution,
/// phi_i = sigma_i (v_i^T x) / (u_i^T b). Indices where |u_i^T b| falls below
/// 1e-14 ||b|| are masked (factor stored as NaN), never silently zeroed.
struct FilterFactorTable {
  std::size_t iteration = 0;
  Vector factors;
  std::vector<bool> masked;
};

FilterFactorTable filter_factors(const Vector& x_k, const SvdResult& svd_a, const Vector& b,
                                 std::size_t iteration = 0);

// Full SVD of the materialized operator; refuses n > 2048.
SvdResult full_svd(const LinearOperator& op);

// Singular values of the current projected Hessenberg matrix.
Vector projected_singular_values(const KrylovDecomposition& decomp);

struct BoundReportRow {
  std::size_t k = 0;
  double r_gmres = 0.0;
  double r_cmrh = 0.0;
  double kappa_r = 0.0;        // condition number of R_{k+1} from QR of L_{k+1}
  double margin_lower = 0.0;   // r_cmrh - r_gmres
  double margin_upper = 0.0;   // kappa_r * r_gmres - r_cmrh
};

// Runs CMRH and GMRES side by side from the same r0 = b and tabulates the
// residual sandwich per iteration.
std::vector<BoundReportRow> bound_report(const TestProblem& problem, std::size_t k_max);

struct HistoryMetrics {
  Vector relative_errors;
  std::size_t best_iteration = 0;  // 1-based argmin
  double min_error = 0.0;
  double final_error = 0.0;
  bool semiconvergent = false;     // final >= 1.1 * min with the min interior
};

HistoryMetrics history_metrics(const IterationHistory& history, const Vector& x_true);

}  // namespace kreg
