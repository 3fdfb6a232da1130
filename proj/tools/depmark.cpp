// depmark: command-line front end for the dependability toolkit.
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

void add_model_flags(CLI::App* cmd, depmark::cli::Options& opt) {
  cmd->add_option("file", opt.file, "Model file")->required();
  cmd->add_option("--set", opt.sets, "Override a parameter, NAME=VALUE (repeatable)")
      ->allow_extra_args(false);
  cmd->add_option("--output", opt.output, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
}

void add_solver_flags(CLI::App* cmd, depmark::cli::Options& opt) {
  cmd->add_option("--method", opt.method, "Solver")
      ->check(CLI::IsMember({"uniformization", "expm", "euler", "paper-literal"}));
  cmd->add_option("--eps", opt.eps, "Poisson tail truncation tolerance");
  cmd->add_option("--dt", opt.dt, "Step in hours for euler and paper-literal");
}

}  // namespace

int main(int argc, char** argv) {
  namespace dc = depmark::cli;
  CLI::App app{"Transient reliability and safety analysis of Markov models"};
  app.set_version_flag("--version", depmark::kVersion);
  app.require_subcommand(1);
  dc::Options opt;

  auto* validate = app.add_subcommand("validate", "Check a model file");
  add_model_flags(validate, opt);

  auto* solve = app.add_subcommand("solve", "State probabilities and metrics over time");
  add_model_flags(solve, opt);
  add_solver_flags(solve, opt);
  auto* at = solve->add_option("--at", opt.at, "Single time point in hours");
  solve->add_option("--grid", opt.grid, "Time grid start:stop:step in hours")->excludes(at);

  auto* sweep = app.add_subcommand("sweep", "Metrics as a function of one parameter");
  add_model_flags(sweep, opt);
  add_solver_flags(sweep, opt);
  sweep->add_option("--param", opt.param, "Parameter to vary")->required();
  sweep->add_option("--values", opt.values, "Comma-separated values")->required();
  sweep->add_option("--at", opt.at, "Time in hours (default: model horizon)");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of state occupancy");
  add_model_flags(simulate, opt);
  simulate->add_option("--at", opt.at, "Time in hours (default: model horizon)");
  simulate->add_option("--trials", opt.trials, "Number of trajectories")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--seed", opt.seed, "Random seed");
  simulate->add_option("--threads", opt.threads, "Worker threads (0 = all cores)");

  auto* audit = app.add_subcommand("audit", "Check S = R + Pfs and R + Pfs + Pfu = 1 per row");
  audit->add_option("--table", opt.table, "CSV with columns param,R,S,Pfs,Pfu")->required();
  audit->add_option("--output", opt.output, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return dc::kUsage;
  }

  if (validate->parsed()) return dc::run_validate(opt, std::cout, std::cerr);
  if (solve->parsed()) return dc::run_solve(opt, std::cout, std::cerr);
  if (sweep->parsed()) return dc::run_sweep(opt, std::cout, std::cerr);
  if (simulate->parsed()) return dc::run_simulate(opt, std::cout, std::cerr);
  if (audit->parsed()) return dc::run_audit(opt, std::cout, std::cerr);
  return dc::kUsage;
}
