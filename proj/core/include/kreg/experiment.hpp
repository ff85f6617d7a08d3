#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "kreg/analysis.hpp"
#include "kreg/chop.hpp"

namespace kreg {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProblemSpec {
  std::string name;
  std::size_t n = 64;       // side length for deblur_2d
  double nl = 0.0;
  std::uint64_t seed = 0;
  double sigma = 2.0;       // spectra / deblur_2d kernel width
  double c = -2.0;          // modified_spectra decay exponent
  double kappa = 1.0;       // heat
  double theta = 0.01;      // dorr
  int example = 2;          // deriv2
  BlurBoundary boundary = BlurBoundary::zero;
};

TestProblem instantiate(const ProblemSpec& spec);

// "name:key=value,key=value" as accepted by the export subcommand.
ProblemSpec parse_problem_spec(const std::string& text);

struct ExperimentConfig {
  ProblemSpec problem;
  std::vector<std::string> solvers;
  std::string param_rule = "gcv";  // gcv | optimal | fixed
  double fixed_lambda = 0.0;
  std::size_t max_iters = 50;
  double tol = 1e-6;
  std::size_t window = 5;
  std::string precision;           // empty/none | half | q52 | q43 | bfloat | double
  std::string chebyshev_interval = "conventional";  // or "paper"
  std::string output_dir = ".";
  bool write_history = true;
  bool write_filters = false;
  bool write_singvals = false;
  bool write_bounds = false;
  std::size_t singvals_k = 10;
  std::size_t bounds_kmax = 10;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Runs every requested solver and writes the requested CSV artifacts into
// output_dir. Throws ConfigError for invalid configs; other exceptions
// indicate runtime failures.
void run_experiment(const ExperimentConfig& config);

// Plain-text listing of the available problem generators and parameters.
std::string list_problems();

// Writes A.txt (row per line), x_true.txt, b_exact.txt, b.txt, e.txt with 17
// significant digits. Dense export is limited to n <= 2048.
void export_problem(const ProblemSpec& spec, const std::string& directory);

// Shortest round-trip decimal text for a double ("inf"/"-inf"/"nan" literals).
std::string format_double(double v);

}  // namespace kreg
