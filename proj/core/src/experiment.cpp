#include "kreg/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace kreg {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& value, const std::string& field, int line) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0')
    throw ConfigError("line " + std::to_string(line) + ": field '" + field +
                      "': not a number: '" + value + "'");
  return v;
}

std::size_t parse_count(const std::string& value, const std::string& field, int line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError("line " + std::to_string(line) + ": field '" + field +
                      "': not a count: '" + value + "'");
  return v;
}

bool parse_bool(const std::string& value, const std::string& field, int line) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("line " + std::to_string(line) + ": field '" + field +
                    "': not a boolean: '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::string current;
  for (char ch : value) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!current.empty()) items.push_back(current);
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  if (!current.empty()) items.push_back(current);
  return items;
}

const std::vector<std::string> kKnownProblems = {
    "spectra", "modified_spectra", "shaw", "deriv2", "heat", "dorr", "deblur_2d"};
const std::vector<std::string> kKnownSolvers = {
    "cmrh", "gmres", "hcmrh", "hybrid_gmres", "landweber", "richardson", "chebyshev"};

void apply_problem_key(ProblemSpec& spec, const std::string& key, const std::string& value,
                       int line) {
  if (key == "name") {
    spec.name = value;
  } else if (key == "n" || key == "side") {
    spec.n = parse_count(value, key, line);
  } else if (key == "nl") {
    spec.nl = parse_double(value, key, line);
  } else if (key == "seed") {
    spec.seed = parse_count(value, key, line);
  } else if (key == "sigma") {
    spec.sigma = parse_double(value, key, line);
  } else if (key == "c") {
    spec.c = parse_double(value, key, line);
  } else if (key == "kappa") {
    spec.kappa = parse_double(value, key, line);
  } else if (key == "theta") {
    spec.theta = parse_double(value, key, line);
  } else if (key == "example") {
    spec.example = static_cast<int>(parse_count(value, key, line));
  } else if (key == "boundary") {
    if (value == "zero")
      spec.boundary = BlurBoundary::zero;
    else if (value == "reflexive")
      spec.boundary = BlurBoundary::reflexive;
    else
      throw ConfigError("line " + std::to_string(line) +
                        ": field 'boundary': expected zero|reflexive, got '" + value + "'");
  } else {
    throw ConfigError("line " + std::to_string(line) + ": unknown [problem] field '" + key +
                      "'");
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const auto hash = s.find('#');
    if (hash != std::string::npos) s.erase(hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError("line " + std::to_string(line) + ": malformed section header");
      section = s.substr(1, s.size() - 2);
      if (section != "problem" && section != "run" && section != "output")
        throw ConfigError("line " + std::to_string(line) + ": unknown section [" + section +
                          "]");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line) + ": expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (section.empty())
      throw ConfigError("line " + std::to_string(line) + ": key '" + key +
                        "' outside any section");

    if (section == "problem") {
      apply_problem_key(config.problem, key, value, line);
    } else if (section == "run") {
      if (key == "solvers")
        config.solvers = split_list(value);
      else if (key == "max_iters")
        config.max_iters = parse_count(value, key, line);
      else if (key == "param_rule")
        config.param_rule = value;
      else if (key == "fixed_lambda")
        config.fixed_lambda = parse_double(value, key, line);
      else if (key == "tol")
        config.tol = parse_double(value, key, line);
      else if (key == "window")
        config.window = parse_count(value, key, line);
      else if (key == "precision")
        config.precision = value;
      else if (key == "chebyshev_interval")
        config.chebyshev_interval = value;
      else
        throw ConfigError("line " + std::to_string(line) + ": unknown [run] field '" + key +
                          "'");
    } else {  // output
      if (key == "dir")
        config.output_dir = value;
      else if (key == "history")
        config.write_history = parse_bool(value, key, line);
      else if (key == "filters")
        config.write_filters = parse_bool(value, key, line);
      else if (key == "singvals")
        config.write_singvals = parse_bool(value, key, line);
      else if (key == "bounds")
        config.write_bounds = parse_bool(value, key, line);
      else if (key == "singvals_k")
        config.singvals_k = parse_count(value, key, line);
      else if (key == "bounds_kmax")
        config.bounds_kmax = parse_count(value, key, line);
      else
        throw ConfigError("line " + std::to_string(line) + ": unknown [output] field '" + key +
                          "'");
    }
  }
  return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

TestProblem instantiate(const ProblemSpec& spec) {
  if (std::find(kKnownProblems.begin(), kKnownProblems.end(), spec.name) ==
      kKnownProblems.end())
    throw ConfigError("field 'name': unknown problem '" + spec.name + "'");
  if (spec.nl < 0.0) throw ConfigError("field 'nl': noise level must be >= 0");

  TestProblem p;
  try {
    if (spec.name == "spectra")
      p = spectra(spec.n, spec.sigma);
    else if (spec.name == "modified_spectra")
      p = modified_spectra(spec.n, spec.c);
    else if (spec.name == "shaw")
      p = shaw(spec.n);
    else if (spec.name == "deriv2")
      p = deriv2(spec.n, spec.example);
    else if (spec.name == "heat")
      p = heat(spec.n, spec.kappa);
    else if (spec.name == "dorr")
      p = dorr(spec.n, spec.theta);
    else
      p = deblur_2d(spec.n, spec.sigma, 0.0, 0, spec.boundary);
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(std::string("problem parameters: ") + ex.what());
  }
  if (spec.nl > 0.0) p = with_noise(std::move(p), spec.nl, spec.seed);
  return p;
}

ProblemSpec parse_problem_spec(const std::string& text) {
  ProblemSpec spec;
  const auto colon = text.find(':');
  spec.name = trim(text.substr(0, colon));
  if (spec.name.empty()) throw ConfigError("problem spec: empty problem name");
  if (colon != std::string::npos) {
    for (const std::string& item : split_list(text.substr(colon + 1))) {
      const auto eq = item.find('=');
      if (eq == std::string::npos)
        throw ConfigError("problem spec: expected key=value, got '" + item + "'");
      apply_problem_key(spec, trim(item.substr(0, eq)), trim(item.substr(eq + 1)), 0);
    }
  }
  return spec;
}

namespace {

PrecisionFormat resolve_precision(const std::string& name) {
  if (name == "half") return PrecisionFormat::half();
  if (name == "q52") return PrecisionFormat::q52();
  if (name == "q43") return PrecisionFormat::q43();
  if (name == "bfloat") return PrecisionFormat::bfloat();
  if (name == "double") return PrecisionFormat::double_equivalent();
  throw ConfigError("field 'precision': unknown format '" + name + "'");
}

bool uses_precision(const ExperimentConfig& config) {
  return !config.precision.empty() && config.precision != "none";
}

IterationHistory run_one_solver(const ExperimentConfig& config, const TestProblem& problem,
                                const std::string& solver) {
  SolveOptions opts;
  opts.max_iters = config.max_iters;
  opts.record_errors_against = problem.x_true;
  opts.store_solutions = config.write_filters;

  ParamRule rule = ParamRule::gcv();
  if (config.param_rule == "gcv")
    rule = ParamRule::gcv();
  else if (config.param_rule == "optimal")
    rule = ParamRule::optimal();
  else if (config.param_rule == "fixed")
    rule = ParamRule::fixed(config.fixed_lambda);
  else
    throw ConfigError("field 'param_rule': expected gcv|optimal|fixed, got '" +
                      config.param_rule + "'");
  const GcvStopRule stop{config.tol, config.window};

  if (uses_precision(config)) {
    if (solver != "cmrh" && solver != "gmres")
      throw ConfigError("field 'precision': simulated precision supports only cmrh and gmres");
    ChopContext ctx{resolve_precision(config.precision)};
    return run_under_precision(
        solver == "cmrh" ? ChoppedSolver::cmrh : ChoppedSolver::gmres, problem, ctx, opts);
  }

  if (solver == "cmrh") return cmrh(problem.op, problem.b, opts);
  if (solver == "gmres") return gmres(problem.op, problem.b, opts);
  if (solver == "hcmrh") return hcmrh(problem.op, problem.b, opts, rule, stop);
  if (solver == "hybrid_gmres") return hybrid_gmres(problem.op, problem.b, opts, rule, stop);
  if (solver == "landweber") return landweber(problem.op, problem.b, opts);
  if (solver == "richardson") return richardson(problem.op, problem.b, opts);
  if (solver == "chebyshev") {
    const SpectralBounds bounds = spectral_bounds(problem.op);
    const auto interval = config.chebyshev_interval == "paper"
                              ? chebyshev_interval_paper(bounds)
                              : chebyshev_interval_conventional(bounds);
    return chebyshev_semi_iteration(problem.op, problem.b, interval, opts);
  }
  throw ConfigError("field 'solvers': unknown solver '" + solver + "'");
}

void write_history_csv(const std::filesystem::path& path, const IterationHistory& history) {
  std::ofstream out(path, std::ios::binary);
  out << "iter,residual_norm,quasi_residual_norm,rel_error,lambda,ghat,stop_reason\n";
  const auto field = [&](const Vector& v, std::size_t i) {
    return i < v.size() ? format_double(v[i]) : std::string("nan");
  };
  const std::string reason = to_string(history.stop_reason);
  for (std::size_t i = 0; i < history.iterations(); ++i) {
    out << (i + 1) << ',' << field(history.residual_norms, i) << ','
        << field(history.quasi_residual_norms, i) << ',' << field(history.relative_errors, i)
        << ',' << field(history.lambdas, i) << ',' << field(history.ghat_values, i) << ','
        << reason << '\n';
  }
  if (history.iterations() == 0)
    out << "0,nan,nan,nan,nan,nan," << reason << '\n';  // record how a run ended at once
}

void write_filters_csv(const std::filesystem::path& path, const IterationHistory& history,
                       const SvdResult& svd_a, const Vector& b) {
  std::ofstream out(path, std::ios::binary);
  out << "iter,index,phi,masked\n";
  for (std::size_t it = 0; it < history.solutions.size(); ++it) {
    const FilterFactorTable table = filter_factors(history.solutions[it], svd_a, b, it + 1);
    for (std::size_t i = 0; i < table.factors.size(); ++i)
      out << (it + 1) << ',' << (i + 1) << ',' << format_double(table.factors[i]) << ','
          << (table.masked[i] ? 1 : 0) << '\n';
  }
}

void write_singvals_csv(const std::filesystem::path& path, const TestProblem& problem,
                        std::size_t k_max) {
  const SvdResult svd_a = full_svd(problem.op);
  const KrylovDecomposition decomp = build_decomposition(
      KrylovKind::hessenberg_pivoted, problem.op, problem.b, k_max);
  std::ofstream out(path, std::ios::binary);
  out << "k,j,sigma_hess,sigma_a\n";
  for (std::size_t k = 1; k <= decomp.steps(); ++k) {
    const Vector sv = jacobi_svd(top_left(decomp.hess, k + 1, k)).singular_values;
    for (std::size_t j = 0; j < sv.size(); ++j)
      out << k << ',' << (j + 1) << ',' << format_double(sv[j]) << ','
          << format_double(svd_a.singular_values[j]) << '\n';
  }
}

void write_bounds_csv(const std::filesystem::path& path, const TestProblem& problem,
                      std::size_t k_max) {
  std::ofstream out(path, std::ios::binary);
  out << "k,r_gmres,r_cmrh,kappa_r,margin_lower,margin_upper\n";
  for (const BoundReportRow& row : bound_report(problem, k_max)) {
    out << row.k << ',' << format_double(row.r_gmres) << ',' << format_double(row.r_cmrh)
        << ',' << format_double(row.kappa_r) << ',' << format_double(row.margin_lower) << ','
        << format_double(row.margin_upper) << '\n';
  }
}

}  // namespace

void run_experiment(const ExperimentConfig& config) {
  if (config.solvers.empty()) throw ConfigError("field 'solvers': no solvers requested");
  for (const std::string& solver : config.solvers)
    if (std::find(kKnownSolvers.begin(), kKnownSolvers.end(), solver) == kKnownSolvers.end())
      throw ConfigError("field 'solvers': unknown solver '" + solver + "'");
  if (config.max_iters == 0) throw ConfigError("field 'max_iters': must be >= 1");
  if (uses_precision(config)) (void)resolve_precision(config.precision);

  const TestProblem problem = instantiate(config.problem);
  const std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);

  std::shared_ptr<SvdResult> svd_a;  // computed at most once
  for (const std::string& solver : config.solvers) {
    const IterationHistory history = run_one_solver(config, problem, solver);
    if (config.write_history)
      write_history_csv(dir / ("history_" + solver + ".csv"), history);
    if (config.write_filters) {
      if (!svd_a) svd_a = std::make_shared<SvdResult>(full_svd(problem.op));
      write_filters_csv(dir / ("filters_" + solver + ".csv"), history, *svd_a, problem.b);
    }
  }
  if (config.write_singvals)
    write_singvals_csv(dir / "singvals.csv", problem, config.singvals_k);
  if (config.write_bounds) write_bounds_csv(dir / "bounds.csv", problem, config.bounds_kmax);
}

std::string list_problems() {
  std::ostringstream out;
  out << "problem           parameters\n"
      << "spectra           n, sigma (kernel width, default 2), nl, seed\n"
      << "modified_spectra  n, c (negative decay exponent, default -2), nl, seed\n"
      << "shaw              n (even), nl, seed\n"
      << "deriv2            n, example (only 2), nl, seed\n"
      << "heat              n, kappa (default 1), nl, seed\n"
      << "dorr              n, theta (default 0.01), nl, seed\n"
      << "deblur_2d         side, sigma (default 2), boundary (zero|reflexive), nl, seed\n";
  return out.str();
}

void export_problem(const ProblemSpec& spec, const std::string& directory) {
  if (spec.name == "deblur_2d") {
    if (spec.n > 45)  // 45^2 = 2025 unknowns, dense limit below
      throw ConfigError("export: deblur_2d side too large for dense export (limit 45)");
  } else if (spec.n > 2048) {
    throw ConfigError("export: dense export is limited to n <= 2048");
  }
  const TestProblem problem = instantiate(spec);
  const DenseMatrix a = to_dense(problem.op);

  const std::filesystem::path dir(directory);
  std::filesystem::create_directories(dir);

  auto write_vector = [&](const char* name, const Vector& v) {
    std::ofstream out(dir / name, std::ios::binary);
    char buf[64];
    for (double x : v) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out << buf << '\n';
    }
  };
  {
    std::ofstream out(dir / "A.txt", std::ios::binary);
    char buf[64];
    for (std::size_t i = 0; i < a.rows(); ++i) {
      for (std::size_t j = 0; j < a.cols(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", a(i, j));
        out << buf << (j + 1 == a.cols() ? '\n' : ' ');
      }
    }
  }
  write_vector("x_true.txt", problem.x_true);
  write_vector("b_exact.txt", problem.b_exact);
  write_vector("b.txt", problem.b);
  write_vector("e.txt", problem.e);
}

}  // namespace kreg
