#include "kreg/problems.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace kreg {

namespace {

constexpr double kPi = std::numbers::pi;

void require_size(std::size_t n, const char* who) {
  if (n < 8) throw std::invalid_argument(std::string(who) + ": n must be >= 8");
}

// Assemble the noiseless problem around a dense matrix.
TestProblem make_dense_problem(std::string name, DenseMatrix a, Vector x_true) {
  TestProblem p;
  p.name = std::move(name);
  p.op = from_dense(std::move(a));
  p.x_true = std::move(x_true);
  p.b_exact = p.op.apply(p.x_true);
  p.b = p.b_exact;
  p.e.assign(p.b_exact.size(), 0.0);
  return p;
}

double sinc(double u) { return u == 0.0 ? 1.0 : std::sin(u) / u; }

}  // namespace

std::pair<Vector, Vector> add_noise(const Vector& b_exact, double noise_level,
                                    std::uint64_t seed) {
  if (noise_level < 0.0) throw std::invalid_argument("add_noise: negative noise level");
  Vector e(b_exact.size(), 0.0);
  if (noise_level == 0.0) return {b_exact, e};
  const double scale_b = norm2(b_exact);
  if (scale_b == 0.0) throw std::invalid_argument("add_noise: b_exact is zero");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (double& v : e) v = gauss(rng);
  const double factor = noise_level * scale_b / norm2(e);
  scale(factor, e);

  Vector b(b_exact);
  axpy(1.0, e, b);
  return {b, e};
}

TestProblem with_noise(TestProblem problem, double noise_level, std::uint64_t seed) {
  auto [b, e] = add_noise(problem.b_exact, noise_level, seed);
  problem.b = std::move(b);
  problem.e = std::move(e);
  problem.noise_level = noise_level;
  problem.seed = seed;
  return problem;
}

Vector spectra_solution(std::size_t n) {
  // Smooth baseline with three narrow peaks, standing in for a measured
  // x-ray spectrum: centers at 0.25, 0.5, 0.72 of the domain, widths of
  // 1.5, 1.0, 2.0 grid cells, heights 1.0, 0.6, 0.8.
  const double centers[] = {0.25, 0.5, 0.72};
  const double widths[] = {1.5, 1.0, 2.0};
  const double heights[] = {1.0, 0.6, 0.8};
  Vector x(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double pos = static_cast<double>(j) + 0.5;
    const double t = pos / static_cast<double>(n);
    double v = 0.2 * std::sin(kPi * t) * std::sin(kPi * t);
    for (int p = 0; p < 3; ++p) {
      const double d = pos - centers[p] * static_cast<double>(n);
      v += heights[p] * std::exp(-d * d / (2.0 * widths[p] * widths[p]));
    }
    x[j] = v;
  }
  return x;
}

TestProblem spectra(std::size_t n, double sigma) {
  require_size(n, "spectra");
  if (!(sigma > 0.0)) throw std::invalid_argument("spectra: sigma must be positive");
  DenseMatrix a(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      a(i, j) = gaussian_kernel_value(sigma, static_cast<double>(i) - static_cast<double>(j));
  return make_dense_problem("spectra", std::move(a), spectra_solution(n));
}

TestProblem modified_spectra(std::size_t n, double c) {
  require_size(n, "modified_spectra");
  if (!(c < 0.0)) throw std::invalid_argument("modified_spectra: c must be negative");
  TestProblem base = spectra(n);
  const SvdResult svd = jacobi_svd(*base.op.dense);
  // Replace the spectrum with exp(c*k), k = 1..n, keeping both singular bases.
  DenseMatrix us(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const double s = std::exp(c * static_cast<double>(j + 1));
    for (std::size_t i = 0; i < n; ++i) us(i, j) = svd.U(i, j) * s;
  }
  DenseMatrix a = multiply(us, transpose(svd.V));
  return make_dense_problem("modified_spectra", std::move(a), spectra_solution(n));
}

Vector shaw_solution(std::size_t n) {
  Vector x(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = (static_cast<double>(j) + 0.5) * kPi / static_cast<double>(n) - kPi / 2.0;
    x[j] = 2.0 * std::exp(-6.0 * (t - 0.8) * (t - 0.8)) +
           std::exp(-2.0 * (t + 0.5) * (t + 0.5));
  }
  return x;
}

RowSource shaw_rows(std::size_t n) {
  auto cosv = std::make_shared<Vector>(n);
  auto sinv = std::make_shared<Vector>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = (static_cast<double>(i) + 0.5) * kPi / static_cast<double>(n) - kPi / 2.0;
    (*cosv)[i] = std::cos(s);
    (*sinv)[i] = std::sin(s);
  }
  const double h = kPi / static_cast<double>(n);
  RowSource rows;
  rows.n_rows = n;
  rows.n_cols = n;
  rows.fill_row = [cosv, sinv, h, n](std::size_t i, std::span<double> out) {
    for (std::size_t j = 0; j < n; ++j) {
      const double cs = (*cosv)[i] + (*cosv)[j];
      const double u = kPi * ((*sinv)[i] + (*sinv)[j]);
      const double sc = sinc(u);
      out[j] = h * cs * cs * sc * sc;
    }
  };
  return rows;
}

TestProblem shaw(std::size_t n) {
  require_size(n, "shaw");
  if (n % 2 != 0) throw std::invalid_argument("shaw: n must be even");
  RowSource rows = shaw_rows(n);
  DenseMatrix a(n, n);
  Vector buf(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows.fill_row(i, buf);
    for (std::size_t j = 0; j < n; ++j) a(i, j) = buf[j];
  }
  return make_dense_problem("shaw", std::move(a), shaw_solution(n));
}

Vector deriv2_solution(std::size_t n) {
  const double h = 1.0 / static_cast<double>(n);
  const double sqh = std::sqrt(h);
  Vector x(n);
  for (std::size_t j = 0; j < n; ++j)
    x[j] = sqh * std::exp((static_cast<double>(j) + 0.5) * h);
  return x;
}

Vector deriv2_continuous_rhs(std::size_t n) {
  const double h = 1.0 / static_cast<double>(n);
  const double sqh = std::sqrt(h);
  Vector b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = (static_cast<double>(i) + 0.5) * h;
    b[i] = sqh * (std::exp(s) + (1.0 - std::numbers::e) * s - 1.0);
  }
  return b;
}

RowSource deriv2_rows(std::size_t n) {
  // Galerkin matrix of the Green's kernel K(s,t) = s(t-1) for s <= t,
  // t(s-1) otherwise, on n equal boxes.
  const double h = 1.0 / static_cast<double>(n);
  RowSource rows;
  rows.n_rows = n;
  rows.n_cols = n;
  rows.fill_row = [h, n](std::size_t i, std::span<double> out) {
    const double si = static_cast<double>(i) + 0.5;
    for (std::size_t j = 0; j < n; ++j) {
      const double sj = static_cast<double>(j) + 0.5;
      if (i == j) {
        out[j] = h * h * (si * si * h - (static_cast<double>(i) + 1.0 / 3.0));
      } else {
        const double lo = std::min(si, sj);
        const double hi = std::max(si, sj);
        out[j] = h * h * lo * (hi * h - 1.0);
      }
    }
  };
  return rows;
}

TestProblem deriv2(std::size_t n, int example) {
  require_size(n, "deriv2");
  if (example != 2) throw std::invalid_argument("deriv2: only example 2 is implemented");
  RowSource rows = deriv2_rows(n);
  DenseMatrix a(n, n);
  Vector buf(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows.fill_row(i, buf);
    for (std::size_t j = 0; j < n; ++j) a(i, j) = buf[j];
  }
  return make_dense_problem("deriv2", std::move(a), deriv2_solution(n));
}

Vector heat_solution(std::size_t n) {
  // Pulse rising quadratically on [0, 1/2] and decaying exponentially after,
  // continuous with maximum 1 at t = 1/2.
  Vector x(n);
  const double h = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = (static_cast<double>(j) + 0.5) * h;
    x[j] = t <= 0.5 ? 4.0 * t * t : std::exp(-4.0 * (t - 0.5));
  }
  return x;
}

TestProblem heat(std::size_t n, double kappa) {
  require_size(n, "heat");
  if (!(kappa > 0.0)) throw std::invalid_argument("heat: kappa must be positive");
  const double h = 1.0 / static_cast<double>(n);
  auto kernel = [kappa](double t) {
    return std::pow(t, -1.5) / (2.0 * kappa * std::sqrt(kPi)) *
           std::exp(-1.0 / (4.0 * kappa * kappa * t));
  };
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      a(i, j) = h * kernel((static_cast<double>(i) - static_cast<double>(j) + 0.5) * h);
  return make_dense_problem("heat", std::move(a), heat_solution(n));
}

TridiagonalBands dorr_bands(std::size_t n, double theta) {
  const double h = 1.0 / static_cast<double>(n + 1);
  const double term = theta / (h * h);
  TridiagonalBands bands;
  bands.sub.assign(n, 0.0);
  bands.diag.assign(n, 0.0);
  bands.super.assign(n, 0.0);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t idx = 0; idx < n; ++idx) {
    const double i = static_cast<double>(idx + 1);
    double c, e;
    if (idx + 1 <= half) {
      c = -term;
      e = c - (0.5 - i * h) / h;
    } else {
      e = -term;
      c = e + (0.5 - i * h) / h;
    }
    bands.sub[idx] = c;
    bands.super[idx] = e;
    bands.diag[idx] = -(c + e);
  }
  return bands;
}

TestProblem dorr(std::size_t n, double theta) {
  require_size(n, "dorr");
  if (!(theta > 0.0)) throw std::invalid_argument("dorr: theta must be positive");
  const TridiagonalBands bands = dorr_bands(n, theta);
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = bands.diag[i];
    if (i > 0) a(i, i - 1) = bands.sub[i];
    if (i + 1 < n) a(i, i + 1) = bands.super[i];
  }
  return make_dense_problem("dorr", std::move(a), heat_solution(n));
}

Vector deblur_phantom(std::size_t side) {
  // Geometric phantom: a disk and a rectangle on a dark background.
  Vector img(side * side, 0.0);
  const double s = static_cast<double>(side);
  for (std::size_t c = 0; c < side; ++c) {
    for (std::size_t r = 0; r < side; ++r) {
      const double tr = (static_cast<double>(r) + 0.5) / s;
      const double tc = (static_cast<double>(c) + 0.5) / s;
      double v = 0.0;
      const double dr = tr - 0.35, dc = tc - 0.35;
      if (dr * dr + dc * dc <= 0.18 * 0.18) v = 1.0;
      if (tr >= 0.55 && tr <= 0.85 && tc >= 0.5 && tc <= 0.8) v = std::max(v, 0.7);
      img[r + c * side] = v;
    }
  }
  return img;
}

TestProblem deblur_2d(std::size_t side, double sigma, double noise_level,
                      std::uint64_t seed, BlurBoundary boundary) {
  if (side < 8) throw std::invalid_argument("deblur_2d: side must be >= 8");
  TestProblem p;
  p.name = "deblur_2d";
  p.op = gaussian_blur_2d(side, sigma, boundary);
  p.x_true = deblur_phantom(side);
  p.b_exact = p.op.apply(p.x_true);
  p.b = p.b_exact;
  p.e.assign(p.b_exact.size(), 0.0);
  if (noise_level > 0.0) p = with_noise(std::move(p), noise_level, seed);
  return p;
}

}  // namespace kreg
