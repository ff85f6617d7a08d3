#pragma once

#include "kreg/problems.hpp"
#include "kreg/solvers.hpp"

namespace kreg {

/// Binary floating-point format simulated on top of doubles: `significand_bits`
/// explicit fraction bits plus a hidden leading bit, round-to-nearest with
/// ties to even. Assumes the host rounding mode is the default FE_TONEAREST.
struct PrecisionFormat {
  int exponent_bits = 5;
  int significand_bits = 10;
  bool subnormals = true;

  int emax() const { return (1 << (exponent_bits - 1)) - 1; }
  int emin() const { return 1 - emax(); }
  double max_finite() const;
  double smallest_subnormal() const;
  double smallest_normal() const;
  double unit_roundoff() const;  // 2^-(significand_bits + 1)

  static PrecisionFormat half() { return {5, 10, true}; }
  static PrecisionFormat q52() { return {5, 2, true}; }
  static PrecisionFormat q43() { return {4, 3, true}; }
  static PrecisionFormat bfloat() { return {8, 7, true}; }
  static PrecisionFormat double_equivalent() { return {11, 52, true}; }
};

// Round x into the format. Zeros and non-finite values pass through; values
// beyond the overflow threshold become +-infinity.
double chop(double x, const PrecisionFormat& fmt);

struct KernelCounters {
  std::size_t norm_calls = 0;
  std::size_t dot_calls = 0;
  std::size_t matvec_calls = 0;
  std::size_t axpy_calls = 0;
  std::size_t divide_calls = 0;
};

/// The format plus call accounting. The format is immutable; counters are
/// shared so kernel usage can be audited after a run.
struct ChopContext {
  PrecisionFormat format;
  std::shared_ptr<KernelCounters> counters = std::make_shared<KernelCounters>();
};

// Kernels: every multiply and every add is individually chopped, with
// sequential left-to-right accumulation. Matrix entries enter through the
// product chop; vector inputs are taken as given.
double chopped_norm2(std::span<const double> v, const ChopContext& ctx);
double chopped_dot(std::span<const double> x, std::span<const double> y, const ChopContext& ctx);
Vector chopped_axpy(double alpha, std::span<const double> x, std::span<const double> y,
                    const ChopContext& ctx);
Vector chopped_matvec(const DenseMatrix& m, const Vector& x, const ChopContext& ctx);
Vector chopped_matvec(const RowSource& rows, const Vector& x, const ChopContext& ctx);
Vector chopped_divide(std::span<const double> v, double denom, const ChopContext& ctx);

enum class ChoppedSolver { cmrh, gmres };

// Run CMRH or GMRES with all vector kernels chopped. The small projected
// least-squares solve and the recorded diagnostics (residuals, errors) stay
// in working precision; pathological terminations land in stop_reason =
// breakdown with a human-readable diagnostic. CMRH performs no norms or dot
// products, which is what the kernel counters let tests assert.
IterationHistory run_under_precision(ChoppedSolver solver, const RowSource& rows,
                                     const Vector& b, const ChopContext& ctx,
                                     const SolveOptions& opts);
IterationHistory run_under_precision(ChoppedSolver solver, const TestProblem& problem,
                                     const ChopContext& ctx, const SolveOptions& opts);

struct ArnoldiDiagonalReport {
  Vector abs_diagonal;              // |H^A_{kk}|, k = 1..steps, exact arithmetic
  double half_unit_roundoff = 0.0;  // 2^-11 reference line
};

ArnoldiDiagonalReport arnoldi_diagonal_report(const TestProblem& problem, std::size_t k_max);

}  // namespace kreg
