#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "kreg/operators.hpp"

namespace kreg {

/// A discrete ill-posed test problem: forward operator, exact solution,
/// exact data, and (optionally) a noisy copy with the realized noise vector.
struct TestProblem {
  std::string name;
  LinearOperator op;
  Vector x_true;
  Vector b_exact;
  Vector b;            // b_exact + e
  Vector e;            // zero when noise_level == 0
  double noise_level = 0.0;
  std::uint64_t seed = 0;
};

// e = nl * ||b_exact|| * g / ||g|| with g drawn from a seeded standard normal.
std::pair<Vector, Vector> add_noise(const Vector& b_exact, double noise_level,
                                    std::uint64_t seed);

// Returns a copy of the problem with noise of the given level injected.
TestProblem with_noise(TestProblem problem, double noise_level, std::uint64_t seed);

// 1-D Gaussian-blur signal restoration; symmetric Toeplitz matrix with
// kernel width sigma and a synthetic spiky-on-smooth spectrum as solution.
TestProblem spectra(std::size_t n, double sigma = 2.0);

// Same singular vectors as spectra(n) but singular values replaced by
// exp(c*k), k = 1..n, c < 0.
TestProblem modified_spectra(std::size_t n, double c);

TestProblem shaw(std::size_t n);                       // n even
TestProblem deriv2(std::size_t n, int example = 2);    // only example 2 is provided
TestProblem heat(std::size_t n, double kappa = 1.0);
TestProblem dorr(std::size_t n, double theta = 0.01);  // paired with heat's solution

TestProblem deblur_2d(std::size_t side, double sigma, double noise_level,
                      std::uint64_t seed, BlurBoundary boundary = BlurBoundary::zero);

// Exact solutions and closed forms, exposed for tests and large matrix-free runs.
Vector spectra_solution(std::size_t n);
Vector shaw_solution(std::size_t n);
Vector deriv2_solution(std::size_t n);
Vector deriv2_continuous_rhs(std::size_t n);  // sqrt(h)(exp(s)+(1-e)s-1) at midpoints
Vector heat_solution(std::size_t n);
Vector deblur_phantom(std::size_t side);      // column-major flattened image

// Entry generators matching the dense constructions; usable at sizes where
// the dense matrix would not fit in memory.
RowSource deriv2_rows(std::size_t n);
RowSource shaw_rows(std::size_t n);

struct TridiagonalBands {
  Vector sub;    // c_i, placed on A(i, i-1)
  Vector diag;   // d_i
  Vector super;  // e_i, placed on A(i, i+1)
};
// Dorr construction arrays; d_i = -(c_i + e_i) holds for every row including
// the boundary rows whose off-diagonal value has no matrix slot.
TridiagonalBands dorr_bands(std::size_t n, double theta);

}  // namespace kreg
