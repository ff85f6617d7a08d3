#pragma once

#include "kreg/solvers.hpp"

namespace kreg {

/// SVD-based view of the projected problem min ||beta e_1 - H y||^2 + lambda^2 ||y||^2
/// for H of size (k+1) x k. `u_t_e1` holds the first k entries of U^T e_1 and
/// `tail_sq` the squared (k+1)-th entry, recovered from orthogonality of U.
struct ProjectedTikhonovContext {
  SvdResult hess_svd;
  Vector u_t_e1;
  double tail_sq = 0.0;
  double beta = 0.0;
  std::size_t k = 0;
};

ProjectedTikhonovContext make_projected_context(const DenseMatrix& hess, double beta);

// y = V (S^T S + lambda^2 I)^{-1} S^T U^T beta e_1; minimum-norm convention
// for lambda = 0 with singular H.
Vector projected_tikhonov_solve(const ProjectedTikhonovContext& ctx, double lambda);

// GCV objective of the projected problem, SVD form.
double gcv_value(const ProjectedTikhonovContext& ctx, double lambda);

// arg min of gcv_value over a log grid (200 points plus lambda = 0) with
// golden-section refinement around the best grid point.
double gcv_minimize(const ProjectedTikhonovContext& ctx);

// arg min of || x0 + L_k y_lambda - x_true || over the same search strategy.
double optimal_lambda(const ProjectedTikhonovContext& ctx, const DenseMatrix& basis_k,
                      const Vector& x_true, const Vector& x0);

// Stopping functional G^(k) for ambient dimension n (requires k < n).
double gcv_stop_value(const ProjectedTikhonovContext& ctx, double lambda, std::size_t ambient_n);

struct StoppingState {
  Vector ghat_values;
  double tol = 1e-6;
  std::size_t window = 5;
};

enum class StopDecision { none, flat, window };

// Fires `flat` when |G^(k+1) - G^(k)| / G^(1) < tol for the latest pair, and
// `window` when the running minimum has not improved for `window` iterations.
StopDecision should_stop(const StoppingState& state);

struct ParamRule {
  enum class Kind { gcv, optimal, fixed };
  Kind kind = Kind::gcv;
  double fixed_lambda = 0.0;

  static ParamRule gcv() { return {Kind::gcv, 0.0}; }
  static ParamRule optimal() { return {Kind::optimal, 0.0}; }
  static ParamRule fixed(double lambda) { return {Kind::fixed, lambda}; }
};

struct GcvStopRule {
  double tol = 1e-6;
  std::size_t window = 5;
};

// Hybrid solvers: per-iteration projected Tikhonov with the chosen parameter
// rule. The GCV stopping criterion is evaluated only under the gcv rule; the
// optimal and fixed rules run to max_iters or breakdown.
IterationHistory hcmrh(const LinearOperator& op, const Vector& b, const SolveOptions& opts,
                       const ParamRule& rule, const GcvStopRule& stop = {});
IterationHistory hybrid_gmres(const LinearOperator& op, const Vector& b, const SolveOptions& opts,
                              const ParamRule& rule, const GcvStopRule& stop = {});

struct HybridBoundRow {
  std::size_t k = 0;
  double hr_gmres = 0.0;   // ||(b - A x; -lambda x)|| for the hybrid GMRES iterate
  double hr_cmrh = 0.0;    // same for the H-CMRH iterate
  double kappa_lbar = 0.0; // condition number of blkdiag(L_{k+1}, L_k)
};

// Fixed shared lambda comparison backing the hybrid residual sandwich.
std::vector<HybridBoundRow> hybrid_residual_bound_check(const LinearOperator& op,
                                                        const Vector& b, double lambda,
                                                        std::size_t k_max);

}  // namespace kreg
