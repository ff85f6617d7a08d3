// Experiment runner CLI: declarative configs select a problem, solvers,
// parameter rule, and simulated precision, and emit CSV histories plus
// diagnostic tables. Exit codes: 0 success, 2 config error, 3 runtime failure.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>

#include "kreg/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"kreg: inner-product-free Krylov regularization experiments"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", config_path, "Path to a key=value config file")->required();

  CLI::App* list = app.add_subcommand("list-problems", "List available test problems");

  std::string problem_spec;
  std::string export_dir;
  CLI::App* exp = app.add_subcommand("export", "Export a problem as plain-text matrices");
  exp->add_option("problem", problem_spec, "Problem spec, e.g. spectra:n=64,nl=0.01,seed=3")
      ->required();
  exp->add_option("dir", export_dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      kreg::run_experiment(kreg::parse_config_file(config_path));
    } else if (list->parsed()) {
      std::cout << kreg::list_problems();
    } else if (exp->parsed()) {
      kreg::export_problem(kreg::parse_problem_spec(problem_spec), export_dir);
    }
  } catch (const kreg::ConfigError& ex) {
    std::cerr << "config error: " << ex.what() << '\n';
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 3;
  }
  return 0;
}
