#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sepfp/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"shrinking projection solver for split equilibrium and fixed point problems"};
  app.require_subcommand(1);

  std::string solve_file, trace_path, summary_path;
  std::optional<std::uint64_t> solve_seed;
  auto* solve = app.add_subcommand("solve", "run the solver on a problem file");
  solve->add_option("file", solve_file, "problem file (JSON)")->required();
  solve->add_option("--trace", trace_path, "write per-iteration CSV trace here");
  solve->add_option("--summary", summary_path, "also write the summary block here");
  solve->add_option("--seed", solve_seed, "override the file's seed");

  std::string verify_file;
  std::optional<std::uint64_t> verify_seed;
  auto* verify = app.add_subcommand("verify", "audit bifunction and mapping class claims");
  verify->add_option("file", verify_file, "problem file (JSON)")->required();
  verify->add_option("--seed", verify_seed, "override the file's seed");

  std::string validate_file;
  auto* validate = app.add_subcommand("validate", "check the admissibility conditions");
  validate->add_option("file", validate_file, "problem file (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  if (solve->parsed()) {
    return sepfp::cli::solve_command(solve_file, trace_path, summary_path, solve_seed);
  }
  if (verify->parsed()) {
    return sepfp::cli::verify_command(verify_file, verify_seed);
  }
  return sepfp::cli::validate_command(validate_file);
}
