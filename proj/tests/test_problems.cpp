#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "kreg/problems.hpp"
#include "test_util.hpp"

using namespace kreg;
using namespace kreg::testing;

namespace {

void check_problem_invariants(const TestProblem& p) {
  REQUIRE(p.b.size() == p.b_exact.size());
  for (std::size_t i = 0; i < p.b.size(); ++i)
    CHECK(p.b[i] == p.b_exact[i] + p.e[i]);
  if (p.noise_level > 0.0)
    CHECK(norm2(p.e) / norm2(p.b_exact) ==
          doctest::Approx(p.noise_level).epsilon(1e-12));
  const Vector ax = p.op.apply(p.x_true);
  for (std::size_t i = 0; i < ax.size(); ++i)
    CHECK(std::abs(ax[i] - p.b_exact[i]) <= 1e-12 * norm2(p.b_exact));
}

bool bitwise_equal(const Vector& a, const Vector& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("add_noise basics") {
  const Vector b{1.0, -2.0, 0.5};
  SUBCASE("zero noise level") {
    auto [noisy, e] = add_noise(b, 0.0, 5);
    CHECK(noisy == b);
    for (double v : e) CHECK(v == 0.0);
  }
  SUBCASE("exact noise level by construction") {
    auto [noisy, e] = add_noise(b, 0.01, 5);
    CHECK(norm2(e) / norm2(b) == doctest::Approx(0.01).epsilon(1e-12));
  }
  SUBCASE("determinism") {
    auto [b1, e1] = add_noise(b, 0.01, 123);
    auto [b2, e2] = add_noise(b, 0.01, 123);
    CHECK(bitwise_equal(e1, e2));
    CHECK(bitwise_equal(b1, b2));
    auto [b3, e3] = add_noise(b, 0.01, 124);
    CHECK_FALSE(bitwise_equal(e1, e3));
  }
  SUBCASE("zero data with positive nl is rejected") {
    CHECK_THROWS_AS(add_noise(Vector(3, 0.0), 0.1, 1), std::invalid_argument);
  }
}

TEST_CASE("spectra matrix entries") {
  const TestProblem p = spectra(16);
  const DenseMatrix& a = *p.op.dense;
  // a_ii = 1/(2 sqrt(2 pi)) for sigma = 2.
  CHECK(a(0, 0) == doctest::Approx(0.19947114020071635).epsilon(1e-14));
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = 0; j < 16; ++j) {
      CHECK(a(i, j) == a(j, i));
      // Toeplitz: depends only on |i - j|.
      if (i + 1 < 16 && j + 1 < 16) CHECK(a(i, j) == a(i + 1, j + 1));
    }
  check_problem_invariants(p);
}

TEST_CASE("spectra is severely ill-conditioned at n=64") {
  const TestProblem p = spectra(64);
  const SvdResult svd = jacobi_svd(*p.op.dense);
  // sigma_min/sigma_max of this kernel at n=64 is 6.835e-9 (cross-checked
  // against an independent SVD); pin an order-of-magnitude envelope.
  const double ratio = svd.singular_values.back() / svd.singular_values.front();
  CHECK(ratio < 1e-8);
  CHECK(ratio == doctest::Approx(6.835023452886172e-09).epsilon(1e-4));
}

TEST_CASE("modified_spectra plants the singular spectrum exp(c k)") {
  const std::size_t n = 32;
  const double c = -0.5;
  const TestProblem p = modified_spectra(n, c);
  const SvdResult svd = jacobi_svd(*p.op.dense);
  for (std::size_t k = 0; k < n; ++k) {
    const double expected = std::exp(c * static_cast<double>(k + 1));
    CHECK(std::abs(svd.singular_values[k] - expected) <=
          1e-10 * std::exp(c) + 1e-300);
  }
  check_problem_invariants(p);
}

TEST_CASE("modified_spectra accepts the paper presets and stays monotone") {
  for (double c : {-2.0, -1.0, -0.5, -0.25}) {
    const TestProblem p = modified_spectra(16, c);
    CHECK(p.name == "modified_spectra");
  }
  const TestProblem steep = modified_spectra(64, -2.0);
  const SvdResult svd = jacobi_svd(*steep.op.dense);
  for (std::size_t k = 1; k < 64; ++k)
    CHECK(svd.singular_values[k - 1] >= svd.singular_values[k]);
  CHECK_THROWS_AS(modified_spectra(16, 0.5), std::invalid_argument);
}

TEST_CASE("shaw structure") {
  const TestProblem p = shaw(32);
  const DenseMatrix& a = *p.op.dense;
  for (std::size_t i = 0; i < 32; ++i)
    for (std::size_t j = 0; j < 32; ++j) CHECK(a(i, j) == a(j, i));
  CHECK_THROWS_AS(shaw(33), std::invalid_argument);
  CHECK_THROWS_AS(shaw(4), std::invalid_argument);
  check_problem_invariants(p);
}

TEST_CASE("deriv2 is a symmetric negative Green's matrix consistent with the kernel") {
  const TestProblem p = deriv2(64);
  const DenseMatrix& a = *p.op.dense;
  for (std::size_t i = 0; i < 64; ++i)
    for (std::size_t j = 0; j < 64; ++j) {
      CHECK(a(i, j) == doctest::Approx(a(j, i)).epsilon(1e-15));
      CHECK(a(i, j) < 0.0);
    }
  // Discretization consistency: A x_true approximates the continuous rhs.
  const Vector bc = deriv2_continuous_rhs(64);
  Vector diff = p.op.apply(p.x_true);
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= bc[i];
  const double rel64 = norm2(diff) / norm2(bc);
  CHECK(rel64 <= 5e-2);

  const TestProblem p2 = deriv2(128);
  const Vector bc2 = deriv2_continuous_rhs(128);
  Vector diff2 = p2.op.apply(p2.x_true);
  for (std::size_t i = 0; i < diff2.size(); ++i) diff2[i] -= bc2[i];
  CHECK(norm2(diff2) / norm2(bc2) < rel64);  // decreasing with n

  CHECK_THROWS_AS(deriv2(64, 1), std::invalid_argument);
}

TEST_CASE("heat matrix is lower triangular") {
  const TestProblem p = heat(32);
  const DenseMatrix& a = *p.op.dense;
  for (std::size_t i = 0; i < 32; ++i)
    for (std::size_t j = i + 1; j < 32; ++j) CHECK(a(i, j) == 0.0);
  check_problem_invariants(p);
}

TEST_CASE("dorr construction identities") {
  const std::size_t n = 16;
  const TestProblem p = dorr(n);
  const DenseMatrix& a = *p.op.dense;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (j + 1 < i || j > i + 1) CHECK(a(i, j) == 0.0);

  const TridiagonalBands bands = dorr_bands(n, 0.01);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(bands.diag[i] == -(bands.sub[i] + bands.super[i]));
}

TEST_CASE("dorr eigenvalues are real and positive (similarity + Sturm oracle)") {
  // A is tridiagonal with strictly negative off-diagonals, so it is
  // diagonally similar to a symmetric tridiagonal T with offdiag
  // -sqrt(sub_{i+1} * super_i); positive leading minors of T certify that
  // all eigenvalues of A are real and positive.
  const std::size_t n = 16;
  const TridiagonalBands bands = dorr_bands(n, 0.01);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    CHECK(bands.super[i] < 0.0);
    CHECK(bands.sub[i + 1] < 0.0);
  }
  Vector off(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    off[i] = -std::sqrt(bands.sub[i + 1] * bands.super[i]);
  Vector minors(n + 1, 0.0);
  minors[0] = 1.0;
  minors[1] = bands.diag[0];
  CHECK(minors[1] > 0.0);
  for (std::size_t k = 2; k <= n; ++k) {
    minors[k] = bands.diag[k - 1] * minors[k - 1] - off[k - 2] * off[k - 2] * minors[k - 2];
    CHECK(minors[k] > 0.0);
  }
}

TEST_CASE("dorr pairs the heat solution") {
  const TestProblem p = dorr(16);
  CHECK(bitwise_equal(p.x_true, heat_solution(16)));
  check_problem_invariants(p);
}

TEST_CASE("deblur_2d basics") {
  SUBCASE("tiny kernel width makes blur invertible by scaling") {
    const TestProblem p = deblur_2d(8, 1e-3, 0.0, 0);
    const double diag = gaussian_kernel_value(1e-3, 0.0);
    for (std::size_t i = 0; i < p.b.size(); ++i)
      CHECK(p.b[i] == doctest::Approx(diag * diag * p.x_true[i]).epsilon(1e-12));
  }
  SUBCASE("operator matches its dense materialization at side=16") {
    const TestProblem p = deblur_2d(16, 2.0, 0.0, 0);
    const DenseMatrix dense = to_dense(p.op);
    const Vector x = random_vector(256, 3);
    const Vector lhs = p.op.apply(x);
    const Vector rhs = multiply(dense, x);
    for (std::size_t i = 0; i < lhs.size(); ++i)
      CHECK(std::abs(lhs[i] - rhs[i]) < 1e-12);
  }
  SUBCASE("noise invariant") {
    const TestProblem p = deblur_2d(16, 2.0, 1e-2, 7);
    check_problem_invariants(p);
  }
}

TEST_CASE("generators are deterministic") {
  const TestProblem a = spectra(32);
  const TestProblem b = spectra(32);
  CHECK(bitwise_equal(a.b_exact, b.b_exact));
  const TestProblem d1 = deblur_2d(8, 2.0, 1e-2, 9);
  const TestProblem d2 = deblur_2d(8, 2.0, 1e-2, 9);
  CHECK(bitwise_equal(d1.b, d2.b));
  CHECK(bitwise_equal(d1.e, d2.e));
}

TEST_CASE("generator singular values are nonincreasing and positive until underflow") {
  for (const TestProblem& p :
       {spectra(32), modified_spectra(32, -1.0), shaw(32), deriv2(32)}) {
    const SvdResult svd = jacobi_svd(*p.op.dense);
    for (std::size_t k = 1; k < svd.singular_values.size(); ++k)
      CHECK(svd.singular_values[k - 1] >= svd.singular_values[k]);
    CHECK(svd.singular_values.front() > 0.0);
  }
}
