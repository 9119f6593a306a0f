// vanish-games: command-line front end for the solvers and sweep harness.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "vanish/errors.hpp"
#include "vanish/harness.hpp"
#include "vanish/matgame.hpp"
#include "vanish/spec_io.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitConvergence = 3;

struct SweepArgs {
  std::string spec;
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  bool gnuplot = false;
};

void add_sweep_options(CLI::App* cmd, SweepArgs& args, bool config_required) {
  cmd->add_option("--spec", args.spec, "game or differential-game problem file")->required();
  auto* config = cmd->add_option("--config", args.config, "sweep configuration file");
  if (config_required) config->required();
  cmd->add_option("--out", args.out, "output directory");
  cmd->add_option("--seed", args.seed, "override the configured seed");
  cmd->add_flag("--gnuplot", args.gnuplot, "also write plot.gp");
}

vanish::harness::ExperimentConfig make_config(const SweepArgs& args, const std::string& solver) {
  vanish::harness::ExperimentConfig config;
  if (!args.config.empty()) config = vanish::harness::load_config(args.config);
  if (!solver.empty()) config.solver = solver;
  if (config.deltas.empty()) config.deltas = {0.2, 0.1, 0.05};
  config.spec_path = args.spec;
  config.output_dir = args.out;
  config.gnuplot = args.gnuplot;
  if (args.seed) config.seed = *args.seed;
  return config;
}

void print_report(const vanish::harness::ConvergenceReport& report) {
  std::printf("%-12s %-10s %-8s %-14s %s\n", "delta", "resolution", "rho", "error", "value_norm");
  for (const auto& r : report.rows) {
    std::printf("%-12.6g %-10zu %-8.4g %-14.6e %.6g\n", r.delta, r.resolution, r.rho, r.error, r.value_norm);
  }
  if (report.slope) std::printf("log-log slope (finest half): %.4f\n", *report.slope);
}

void print_vector(const char* name, const vanish::Vector& v) {
  std::printf("%s:", name);
  for (double x : v) std::printf(" %.12g", x);
  std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-sum games with vanishing stage duration"};
  app.require_subcommand(1);

  std::string matrix_file;
  auto* matgame_cmd = app.add_subcommand("matgame", "value and optimal strategies of a matrix game");
  matgame_cmd->add_option("file", matrix_file, "matrix file (nested list)")->required();

  SweepArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "sweep with the solver named in the config");
  add_sweep_options(run_cmd, run_args, true);

  std::string compare_a;
  std::string compare_b;
  auto* compare_cmd = app.add_subcommand("compare", "sup differences between two values.csv files");
  compare_cmd->add_option("a", compare_a)->required();
  compare_cmd->add_option("b", compare_b)->required();

  std::vector<std::pair<CLI::App*, std::string>> solver_cmds;
  std::vector<SweepArgs> solver_args(vanish::harness::solvers().size());
  for (std::size_t k = 0; k < vanish::harness::solvers().size(); ++k) {
    const std::string& name = vanish::harness::solvers()[k];
    auto* cmd = app.add_subcommand(name, "sweep with the " + name + " solver");
    add_sweep_options(cmd, solver_args[k], false);
    solver_cmds.emplace_back(cmd, name);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*matgame_cmd) {
      const vanish::Matrix m = vanish::load_matrix(matrix_file);
      const auto sol = vanish::matgame::solve(m);
      std::printf("value: %.12g\n", sol.value);
      print_vector("x", sol.x);
      print_vector("y", sol.y);
      return 0;
    }
    if (*compare_cmd) {
      std::printf("group,sup_difference\n");
      for (const auto& row : vanish::harness::compare(compare_a, compare_b)) {
        std::printf("%s,%s\n", vanish::harness::csv_field(row.key).c_str(),
                    vanish::harness::csv_number(row.sup_difference).c_str());
      }
      return 0;
    }
    if (*run_cmd) {
      print_report(vanish::harness::run(make_config(run_args, "")));
      return 0;
    }
    for (std::size_t k = 0; k < solver_cmds.size(); ++k) {
      if (*solver_cmds[k].first) {
        print_report(vanish::harness::run(make_config(solver_args[k], solver_cmds[k].second)));
        return 0;
      }
    }
  } catch (const vanish::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const vanish::ConvergenceError& e) {
    std::cerr << "solver did not converge: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
