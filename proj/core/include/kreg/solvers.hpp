#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "kreg/krylov.hpp"

namespace kreg {

enum class StopReason { max_iters, breakdown, gcv_flat, gcv_window };
std::string to_string(StopReason reason);

struct SolveOptions {
  std::size_t max_iters = 50;
  std::optional<Vector> x0;                     // default: zero vector
  std::optional<Vector> record_errors_against;  // x_true for relative errors
  bool store_solutions = true;                  // memory-lean mode when false
};

struct IterationHistory {
  std::vector<Vector> solutions;   // per-iteration x_k (empty in lean mode)
  Vector residual_norms;           // ||b - A x_k||
  Vector quasi_residual_norms;     // ||beta e_1 - H y_k||, Krylov solvers only
  Vector relative_errors;          // ||x_k - x_true|| / ||x_true||
  Vector lambdas;                  // hybrid solvers only
  Vector ghat_values;              // hybrid solvers only
  Vector final_solution;
  StopReason stop_reason = StopReason::max_iters;
  std::string diagnostic;          // set by pathological chop terminations
  std::shared_ptr<const KrylovDecomposition> decomposition;  // Krylov solvers

  std::size_t iterations() const { return residual_norms.size(); }
};

/// Incrementally updated Givens QR of the projected least-squares problem
/// min || beta e_1 - H_{k+1,k} y ||. One rotation per added column.
class HessenbergLeastSquares {
 public:
  explicit HessenbergLeastSquares(double beta) : g_{beta} {}

  void add_column(std::span<const double> column);  // length k+2 at size k
  double quasi_residual() const { return std::abs(g_.back()); }
  std::size_t size() const { return r_cols_.size(); }
  Vector solve() const;  // throws if the triangular factor is singular

 private:
  std::vector<Vector> r_cols_;
  Vector cos_, sin_, g_;
};

IterationHistory cmrh(const LinearOperator& op, const Vector& b, const SolveOptions& opts);
IterationHistory gmres(const LinearOperator& op, const Vector& b, const SolveOptions& opts);

struct SpectralBounds {
  double s_small = 0.0;
  double s_large = 0.0;
};

// sigma_min / sigma_max of the materialized operator.
SpectralBounds spectral_bounds(const LinearOperator& op);

// x_{k+1} = x_k + omega A^T (b - A x_k), omega = 0.99 / max(s_small^2, s_large^2).
IterationHistory landweber(const LinearOperator& op, const Vector& b, const SolveOptions& opts,
                           std::optional<SpectralBounds> bounds = {});

// x_{k+1} = x_k + omega (b - A x_k), omega = 0.99 / (s_small + s_large); the
// denominator can be overridden since the reference for it is ambiguous.
IterationHistory richardson(const LinearOperator& op, const Vector& b, const SolveOptions& opts,
                            std::optional<SpectralBounds> bounds = {},
                            std::optional<double> step_denominator = {});

// Two-term Chebyshev semi-iteration on A^T A x = A^T b with eigenvalue
// interval [interval.first, interval.second], 0 < lo < hi.
IterationHistory chebyshev_semi_iteration(const LinearOperator& op, const Vector& b,
                                          std::pair<double, double> interval,
                                          const SolveOptions& opts);

// Interval presets for the normal-equations spectrum.
std::pair<double, double> chebyshev_interval_paper(const SpectralBounds& bounds);
std::pair<double, double> chebyshev_interval_conventional(const SpectralBounds& bounds);

}  // namespace kreg
