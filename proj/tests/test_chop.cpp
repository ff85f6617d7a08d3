#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "kreg/chop.hpp"
#include "kreg/problems.hpp"
#include "test_util.hpp"

using namespace kreg;
using namespace kreg::testing;

TEST_CASE("format derived constants") {
  const PrecisionFormat half = PrecisionFormat::half();
  CHECK(half.emax() == 15);
  CHECK(half.emin() == -14);
  CHECK(half.max_finite() == 65504.0);
  CHECK(half.unit_roundoff() == std::ldexp(1.0, -11));
  const PrecisionFormat q52 = PrecisionFormat::q52();
  CHECK(q52.emax() == 15);
  CHECK(q52.smallest_subnormal() == std::ldexp(1.0, -16));
  const PrecisionFormat q43 = PrecisionFormat::q43();
  CHECK(q43.emax() == 7);
  CHECK(q43.max_finite() == 240.0);
}

TEST_CASE("chop rounds ties to even on the half-precision grid") {
  const PrecisionFormat half = PrecisionFormat::half();
  // 1 + 2^-11 sits exactly between 1 and 1 + 2^-10; the even mantissa wins.
  CHECK(chop(1.0 + std::ldexp(1.0, -11), half) == 1.0);
  // One ulp further rounds up.
  CHECK(chop(1.0 + 3.0 * std::ldexp(1.0, -12), half) == 1.0 + std::ldexp(1.0, -10));
}

TEST_CASE("chop overflow boundary in half precision") {
  const PrecisionFormat half = PrecisionFormat::half();
  // 65520 = midpoint between 65504 (max) and 65536; ties-to-even overflows.
  CHECK(std::isinf(chop(65520.0, half)));
  CHECK(chop(65519.0, half) == 65504.0);
  CHECK(chop(-65520.0, half) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("chop preserves zeros, infinities and nan") {
  const PrecisionFormat fmt = PrecisionFormat::q43();
  CHECK(chop(0.0, fmt) == 0.0);
  CHECK(std::signbit(chop(-0.0, fmt)));
  CHECK(std::isinf(chop(std::numeric_limits<double>::infinity(), fmt)));
  CHECK(std::isnan(chop(std::numeric_limits<double>::quiet_NaN(), fmt)));
}

TEST_CASE("chop subnormal underflow in q52") {
  const PrecisionFormat q52 = PrecisionFormat::q52();
  const double tiny = q52.smallest_subnormal();  // 2^-16
  CHECK(chop(0.49 * tiny, q52) == 0.0);
  CHECK(chop(0.5 * tiny, q52) == 0.0);  // tie: zero has the even significand
  CHECK(chop(0.51 * tiny, q52) == tiny);
  CHECK(chop(-0.51 * tiny, q52) == -tiny);
}

TEST_CASE("chop flush-to-zero without subnormals") {
  PrecisionFormat fmt = PrecisionFormat::q52();
  fmt.subnormals = false;
  const double normal = fmt.smallest_normal();
  CHECK(chop(0.49 * normal, fmt) == 0.0);
  CHECK(chop(0.51 * normal, fmt) == normal);
}

TEST_CASE("chop is idempotent and monotone") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-20, 18);
  const PrecisionFormat formats[] = {PrecisionFormat::half(), PrecisionFormat::q52(),
                                     PrecisionFormat::q43(), PrecisionFormat::bfloat()};
  for (int trial = 0; trial < 2000; ++trial) {
    const PrecisionFormat& fmt = formats[trial % 4];
    const double x = std::ldexp(mant(rng), expo(rng));
    const double y = std::ldexp(mant(rng), expo(rng));
    const double cx = chop(x, fmt);
    CHECK(chop(cx, fmt) == cx);
    if (x <= y) {
      CHECK(chop(x, fmt) <= chop(y, fmt));
    } else {
      CHECK(chop(x, fmt) >= chop(y, fmt));
    }
  }
}

TEST_CASE("a double-wide format is the identity") {
  const PrecisionFormat wide = PrecisionFormat::double_equivalent();
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-1060, 1020);
  for (int trial = 0; trial < 2000; ++trial) {
    const double x = std::ldexp(mant(rng), expo(rng));
    CHECK(chop(x, wide) == x);
  }
}

TEST_CASE("chopped_norm2 basics") {
  ChopContext ctx{PrecisionFormat::q52()};
  SUBCASE("unit vector") {
    CHECK(chopped_norm2(Vector{0.0, 1.0, 0.0}, ctx) == 1.0);
  }
  SUBCASE("underflow to zero when all squares are below the subnormal range") {
    const Vector v(1000, 1e-4);  // squares 1e-8 << 2^-17
    CHECK(chopped_norm2(v, ctx) == 0.0);
  }
  SUBCASE("overflow to infinity under accumulation in q43") {
    ChopContext narrow{PrecisionFormat::q43()};
    const Vector v(4096, 3.0);  // increments of 9 push the sum past 248
    CHECK(std::isinf(chopped_norm2(v, narrow)));
  }
}

TEST_CASE("two-term chopped dot matches a manual trace") {
  ChopContext ctx{PrecisionFormat::q43()};
  const Vector x{1.3, -2.7}, y{0.9, 1.1};
  const double p1 = chop(x[0] * y[0], ctx.format);
  const double p2 = chop(x[1] * y[1], ctx.format);
  const double expected = chop(chop(0.0 + p1, ctx.format) + p2, ctx.format);
  CHECK(chopped_dot(x, y, ctx) == expected);
}

TEST_CASE("identity chopped matvec chops the input") {
  ChopContext ctx{PrecisionFormat::q52()};
  const DenseMatrix id = DenseMatrix::identity(4);
  const Vector x{0.123, -3.77, 19.5, 1e-9};
  const Vector y = chopped_matvec(id, x, ctx);
  for (std::size_t i = 0; i < 4; ++i) CHECK(y[i] == chop(x[i], ctx.format));
}

TEST_CASE("kernels in the double-wide format equal exact arithmetic") {
  ChopContext ctx{PrecisionFormat::double_equivalent()};
  const DenseMatrix a = random_matrix(6, 6, 5);
  const Vector x = random_vector(6, 6);
  const Vector chopped = chopped_matvec(a, x, ctx);
  // Same row-major accumulation order as the reference loop below.
  for (std::size_t i = 0; i < 6; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < 6; ++j) acc += a(i, j) * x[j];
    CHECK(chopped[i] == acc);
  }
  const double d = chopped_dot(x, x, ctx);
  double acc = 0.0;
  for (double v : x) acc += v * v;
  CHECK(d == acc);
}

TEST_CASE("run_under_precision in the double-wide format tracks the exact solvers") {
  TestProblem p = with_noise(spectra(32), 1e-2, 21);
  SolveOptions opts;
  opts.max_iters = 10;
  opts.record_errors_against = p.x_true;
  opts.store_solutions = false;
  ChopContext ctx{PrecisionFormat::double_equivalent()};

  const IterationHistory exact_c = cmrh(p.op, p.b, opts);
  const IterationHistory chop_c = run_under_precision(ChoppedSolver::cmrh, p, ctx, opts);
  REQUIRE(chop_c.iterations() == exact_c.iterations());
  for (std::size_t k = 0; k < chop_c.iterations(); ++k)
    CHECK(std::abs(chop_c.relative_errors[k] - exact_c.relative_errors[k]) < 1e-12);

  const IterationHistory exact_g = gmres(p.op, p.b, opts);
  const IterationHistory chop_g = run_under_precision(ChoppedSolver::gmres, p, ctx, opts);
  REQUIRE(chop_g.iterations() == exact_g.iterations());
  for (std::size_t k = 0; k < chop_g.iterations(); ++k)
    CHECK(std::abs(chop_g.relative_errors[k] - exact_g.relative_errors[k]) < 1e-12);
}

TEST_CASE("chopped cmrh never computes norms or dot products") {
  TestProblem p = with_noise(spectra(32), 1e-2, 22);
  SolveOptions opts;
  opts.max_iters = 8;
  opts.store_solutions = false;
  ChopContext ctx{PrecisionFormat::half()};
  (void)run_under_precision(ChoppedSolver::cmrh, p, ctx, opts);
  CHECK(ctx.counters->norm_calls == 0);
  CHECK(ctx.counters->dot_calls == 0);
  CHECK(ctx.counters->matvec_calls > 0);

  ChopContext ctx2{PrecisionFormat::half()};
  (void)run_under_precision(ChoppedSolver::gmres, p, ctx2, opts);
  CHECK(ctx2.counters->norm_calls > 0);
  CHECK(ctx2.counters->dot_calls > 0);
}

TEST_CASE("arnoldi diagonal report") {
  SUBCASE("first entry equals the Rayleigh quotient of the normalized rhs") {
    TestProblem p = with_noise(deriv2(64), 1e-3, 23);
    const ArnoldiDiagonalReport report = arnoldi_diagonal_report(p, 1);
    Vector q(p.b);
    scale(1.0 / norm2(p.b), q);
    const double expected = std::abs(dot(q, p.op.apply(q)));
    CHECK(report.abs_diagonal[0] == doctest::Approx(expected).epsilon(1e-13));
    CHECK(report.half_unit_roundoff == std::ldexp(1.0, -11));
  }
  SUBCASE("deriv2 diagonals sink below half-precision roundoff") {
    const TestProblem p = deriv2(256);
    const ArnoldiDiagonalReport report = arnoldi_diagonal_report(p, 20);
    bool below = false;
    for (double v : report.abs_diagonal) below = below || v < std::ldexp(1.0, -11);
    CHECK(below);
  }
  SUBCASE("well-conditioned diagonals stay above half-precision roundoff") {
    TestProblem p;
    const DenseMatrix a = near_identity(64, 0.1, 24);
    p.op = from_dense(a);
    p.x_true = random_vector(64, 25);
    p.b_exact = p.op.apply(p.x_true);
    p.b = p.b_exact;
    p.e.assign(64, 0.0);
    const ArnoldiDiagonalReport report = arnoldi_diagonal_report(p, 20);
    for (double v : report.abs_diagonal) CHECK(v > std::ldexp(1.0, -11));
  }
}
