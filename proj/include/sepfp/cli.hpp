#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "sepfp/io.hpp"
#include "sepfp/oracle.hpp"
#include "sepfp/solver.hpp"

namespace sepfp {
namespace cli {

// exit codes shared by the subcommands
inline constexpr int kExitConverged = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitMaxIter = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitDiverged = 4;

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string fmt(const Vector& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ", ";
    out += fmt(v[i]);
  }
  return out + "]";
}

inline std::optional<Vector> oracle_target(const ProblemInstance& problem, const Vector& x1) {
  try {
    const auto set = oracle::solve_F(problem);
    if (set.empty()) return std::nullopt;
    return oracle::project_F(set, x1);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace detail

// solve <file>: run the scheme, stream one fixed-format CSV row per
// iteration, and finish with a key-value summary block.
inline int solve_command(const std::string& path, const std::string& trace_path,
                         const std::string& summary_path, std::optional<std::uint64_t> seed,
                         std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  io::LoadedProblem loaded;
  try {
    loaded = io::load(path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  if (seed) loaded.config.seed = *seed;

  const ProblemInstance effective = loaded.config.mode == SolverMode::full
                                        ? loaded.problem
                                        : mode_reduce(loaded.problem, loaded.config.mode);
  const std::optional<Vector> target = detail::oracle_target(effective, loaded.x1);

  std::ofstream trace_file;
  std::ostream* trace = nullptr;
  if (!trace_path.empty()) {
    trace_file.open(trace_path);
    if (!trace_file) {
      err << "error: cannot open trace file " << trace_path << "\n";
      return kExitInputError;
    }
    trace = &trace_file;
  }
  if (trace) {
    *trace << "n,step_norm,y_res,u_res,g_res,s_res,theta";
    if (target) *trace << ",oracle_dist";
    *trace << "\n";
  }

  RunResult result;
  try {
    result = run(loaded.problem, loaded.config, loaded.x1, [&](const SolverState& state) {
      if (!trace) return;
      const StepRecord& rec = state.history.back();
      *trace << rec.n << "," << detail::fmt(rec.step_norm) << "," << detail::fmt(rec.y_res) << ","
             << detail::fmt(rec.u_res) << "," << detail::fmt(rec.g_res) << ","
             << detail::fmt(rec.s_res) << "," << detail::fmt(rec.theta);
      if (target) *trace << "," << detail::fmt((state.x - *target).norm());
      *trace << "\n";
    });
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  std::ostringstream summary;
  summary << "status: " << to_string(result.status) << "\n";
  summary << "iterations: " << result.iterations << "\n";
  summary << "final: " << detail::fmt(result.final) << "\n";
  if (!result.trace.empty()) {
    const StepRecord& rec = result.trace.back();
    summary << "residual_step: " << detail::fmt(rec.step_norm) << "\n";
    summary << "residual_y: " << detail::fmt(rec.y_res) << "\n";
    summary << "residual_u: " << detail::fmt(rec.u_res) << "\n";
    summary << "residual_g: " << detail::fmt(rec.g_res) << "\n";
    summary << "residual_s: " << detail::fmt(rec.s_res) << "\n";
    summary << "theta_last: " << detail::fmt(rec.theta) << "\n";
  }
  if (target) {
    summary << "oracle_distance: " << detail::fmt((result.final - *target).norm()) << "\n";
  }
  out << summary.str();
  if (!summary_path.empty()) {
    std::ofstream sf(summary_path);
    if (!sf) {
      err << "error: cannot open summary file " << summary_path << "\n";
      return kExitInputError;
    }
    sf << summary.str();
  }

  switch (result.status) {
    case RunStatus::converged:
      return kExitConverged;
    case RunStatus::max_iter:
      return kExitMaxIter;
    case RunStatus::infeasible:
      return kExitInfeasible;
    case RunStatus::diverged:
      return kExitDiverged;
  }
  return kExitInputError;
}

// verify <file>: sampled audits of Condition 2.4 for every bifunction and of
// the total asymptotically strict pseudo-contraction inequality for every
// mapping; prints per-axiom worst slacks. Exit 0 iff everything passes.
inline int verify_command(const std::string& path, std::optional<std::uint64_t> seed,
                          std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  io::LoadedProblem loaded;
  try {
    loaded = io::load(path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  const std::uint64_t base_seed = seed ? *seed : loaded.config.seed;
  constexpr int kNMax = 16;
  constexpr int kSamples = 200;

  bool all_pass = true;
  const auto report_bifunction = [&](const Bifunction& f, const std::string& name) {
    const ConditionReport report = verify_bifunction_axioms(f, kSamples, base_seed);
    for (const auto& check : report.checks) {
      out << name << " " << check.axiom << ": " << (check.pass ? "pass" : "FAIL")
          << " (worst " << detail::fmt(check.worst_violation) << ")\n";
      all_pass = all_pass && check.pass;
    }
  };
  for (size_t i = 0; i < loaded.problem.f.size(); ++i) {
    report_bifunction(loaded.problem.f[i], "f[" + std::to_string(i) + "]");
  }
  for (size_t i = 0; i < loaded.problem.g.size(); ++i) {
    report_bifunction(loaded.problem.g[i], "g[" + std::to_string(i) + "]");
  }

  for (size_t i = 0; i < loaded.problem.s.size(); ++i) {
    const ClassReport report = verify_class(loaded.problem.s[i], MappingClass::taspc,
                                            loaded.problem.c, kNMax, kSamples, base_seed);
    double worst = std::numeric_limits<double>::infinity();
    for (double w : report.worst_slack_per_n) worst = std::min(worst, w);
    out << "S[" << i << "] taspc: " << (report.pass ? "pass" : "FAIL") << " (worst slack "
        << detail::fmt(worst) << ")\n";
    all_pass = all_pass && report.pass;
  }
  out << (all_pass ? "verify: all checks passed\n" : "verify: violations found\n");
  return all_pass ? 0 : 1;
}

// validate <file>: load (which enforces conditions) and report.
inline int validate_command(const std::string& path, std::ostream& out = std::cout,
                            std::ostream& err = std::cerr) {
  io::LoadedProblem loaded;
  try {
    loaded = io::load(path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  const ConfigReport report = validate_config(loaded.problem, loaded.config);
  for (const auto& check : report.checks) {
    out << check.condition << ": " << (check.pass ? "pass" : "FAIL") << " (" << check.detail
        << ")\n";
  }
  out << "validate: ok\n";
  return 0;
}

}  // namespace cli
}  // namespace sepfp
