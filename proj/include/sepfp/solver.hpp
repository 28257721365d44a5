#pragma once

#include <algorithm>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sepfp/convex.hpp"
#include "sepfp/equilibrium.hpp"
#include "sepfp/errors.hpp"
#include "sepfp/mapping.hpp"
#include "sepfp/schedule.hpp"
#include "sepfp/space.hpp"

namespace sepfp {

enum class SolverMode { full, nonexpansive, identity_operator };

inline const char* to_string(SolverMode m) {
  switch (m) {
    case SolverMode::full: return "full";
    case SolverMode::nonexpansive: return "nonexpansive";
    case SolverMode::identity_operator: return "identity_operator";
  }
  return "?";
}

// Split equilibrium + fixed point problem data: N bifunction pairs (f_i on C,
// g_i on Q), N operators A_i : H1 -> H2, and N candidate mappings S_i on C.
struct ProblemInstance {
  Eigen::Index dim_h1 = 1;
  Eigen::Index dim_h2 = 1;
  ConvexSet c = WholeSpace{1};
  ConvexSet q = WholeSpace{1};
  std::vector<Bifunction> f;
  std::vector<Bifunction> g;
  std::vector<LinearOperator> a;
  std::vector<MappingSpec> s;

  long families() const { return static_cast<long>(f.size()); }

  friend bool operator==(const ProblemInstance&, const ProblemInstance&) = default;
};

inline void validate_instance(const ProblemInstance& p) {
  if (p.dim_h1 < 1 || p.dim_h2 < 1) throw ArgumentError("instance: dims must be >= 1");
  const size_t n = p.f.size();
  if (n < 1) throw ArgumentError("instance: at least one family required");
  if (p.g.size() != n || p.a.size() != n || p.s.size() != n) {
    throw ArgumentError("instance: f, g, A, S must have equal lengths");
  }
  validate_set(p.c);
  validate_set(p.q);
  if (dim_of(p.c) != p.dim_h1) throw ArgumentError("instance: C dimension differs from dim_h1");
  if (dim_of(p.q) != p.dim_h2) throw ArgumentError("instance: Q dimension differs from dim_h2");
  for (const auto& fi : p.f) {
    validate_bifunction(fi);
    if (!(fi.domain == p.c)) throw ArgumentError("instance: every f_i domain must equal C");
  }
  for (const auto& gi : p.g) {
    validate_bifunction(gi);
    if (!(gi.domain == p.q)) throw ArgumentError("instance: every g_i domain must equal Q");
  }
  for (const auto& ai : p.a) {
    if (ai.rows() != p.dim_h2 || ai.cols() != p.dim_h1) {
      throw ArgumentError("instance: operator shape must be dim_h2 x dim_h1");
    }
    if (!ai.allFinite()) throw ArgumentError("instance: operator entries must be finite");
  }
  for (const auto& si : p.s) validate_mapping(si);
}

struct SolverConfig {
  double gamma = 0.5;
  Schedule r_schedule = Schedule::constant(1.0);
  Schedule s_schedule = Schedule::constant(1.0);
  Schedule alpha_schedule = Schedule::constant(0.5);
  double d_bound = 0.0;       // squared-distance bound used inside theta_n
  bool d_bound_auto = true;   // derive and refresh d_bound from the run
  double tol_residual = 1e-6;
  long max_iter = 5000;
  SolverMode mode = SolverMode::full;
  std::uint64_t seed = 0;
  double projection_tol = 1e-8;
  long dykstra_max_iter = 100000;

  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

// 1-based cyclic family index: n = N maps to N, n = N+1 maps back to 1
// (the subsequence convention S_{Nj+i} = S_i).
inline long cyclic_index(long n, long n_families) {
  if (n < 1 || n_families < 1) throw ArgumentError("cyclic_index: n and N must be >= 1");
  return ((n - 1) % n_families) + 1;
}

// theta_n = (1 - alpha_n) * (lambda_n xi(M) + lambda_n M* D + mu_n); D enters
// squared, matching the growth estimate the half-space slack compensates.
inline double theta(double alpha_n, double lambda_n, double mu_n, const XiFunction& xi,
                    double m, double m_star, double d_bound) {
  if (alpha_n <= 0.0 || alpha_n >= 1.0) throw ArgumentError("theta: alpha must be in (0,1)");
  if (lambda_n < 0.0 || mu_n < 0.0 || m < 0.0 || m_star < 0.0 || d_bound < 0.0) {
    throw ArgumentError("theta: inputs must be nonnegative");
  }
  return (1.0 - alpha_n) * (lambda_n * xi(m) + lambda_n * m_star * d_bound + mu_n);
}

// Residuals of one completed step: ||x_{n+1}-x_n||, ||y_n-x_n||, ||u_n-x_n||,
// ||A_n x_n - T^g A_n x_n||, ||S_n^n u_n - u_n||, and the slack theta_n.
struct StepRecord {
  long n = 0;
  double step_norm = 0.0;
  double y_res = 0.0;
  double u_res = 0.0;
  double g_res = 0.0;
  double s_res = 0.0;
  double theta = 0.0;
};

struct SolverState {
  long n = 1;     // index of the next step
  Vector x1;      // anchor x_1
  Vector x;       // current iterate x_n
  Vector x_prev;  // x_{n-1} (valid once history is nonempty)
  Vector u;       // u_{n-1}
  Vector y;       // y_{n-1}
  std::vector<HalfSpace> halves;  // accumulated C_n constraints beyond C
  std::vector<StepRecord> history;
  double d_bound = 0.0;
};

namespace detail {

inline double diameter_proxy(const ConvexSet& s, const Vector& x1) {
  if (std::holds_alternative<Box>(s)) {
    const auto& b = std::get<Box>(s);
    return (b.upper - b.lower).norm();
  }
  if (std::holds_alternative<Ball>(s)) return 2.0 * std::get<Ball>(s).radius;
  return 1.0 + x1.norm();  // unbounded variants have no diameter
}

}  // namespace detail

inline SolverState init_state(const ProblemInstance& problem, const SolverConfig& config,
                              const Vector& x1) {
  validate_instance(problem);
  require_finite(x1, "x1");
  if (x1.size() != problem.dim_h1) throw ArgumentError("x1 dimension differs from dim_h1");
  if (!contains(problem.c, x1, 1e-7)) throw ArgumentError("x1 must lie in C");
  SolverState state;
  state.x1 = x1;
  state.x = x1;
  if (config.d_bound_auto) {
    const double reach = 2.0 * x1.norm() + detail::diameter_proxy(problem.c, x1);
    state.d_bound = reach * reach;
  } else {
    if (config.d_bound <= 0.0) throw ArgumentError("d_bound must be positive");
    state.d_bound = config.d_bound;
  }
  return state;
}

// One pass of the shrinking projection scheme: resolvent of g_i at A_i x_n,
// the gamma-damped pullback, the resolvent of f_i, the Mann-type blend with
// S_i^n, the new half-space, and the projection of the anchor onto the
// accumulated set.
inline void step(SolverState& state, const ProblemInstance& problem, const SolverConfig& config) {
  const long n = state.n;
  const long n_fam = problem.families();
  const long i = cyclic_index(n, n_fam) - 1;

  const double r_n = config.r_schedule.eval(n);
  const double s_n = config.s_schedule.eval(n);
  const double alpha_n = config.alpha_schedule.eval(n);
  if (r_n <= 0.0 || s_n <= 0.0) throw ArgumentError("step: r_n and s_n must be positive");

  const Vector& x = state.x;
  const LinearOperator& a_i = problem.a[static_cast<size_t>(i)];
  const MappingSpec& s_i = problem.s[static_cast<size_t>(i)];

  const Vector ax = a_i * x;
  const Vector tg_ax = resolvent(problem.g[static_cast<size_t>(i)], ResolventQuery{s_n, ax});
  const Vector residual_g = ax - tg_ax;
  const Vector w = x - config.gamma * (a_i.transpose() * residual_g);
  const Vector u = resolvent(problem.f[static_cast<size_t>(i)], ResolventQuery{r_n, w});
  const Vector su = apply_power(s_i, n, u);
  const Vector y = alpha_n * u + (1.0 - alpha_n) * su;

  if (config.d_bound_auto) {
    // ||x_n - x_1|| never exceeds ||p - x_1||, so 2||x_n - x_1|| trails the
    // worst-case reach sup_p ||x_n - p||; doubling the squared witness keeps
    // the bound above it. Grow-only, so earlier half-spaces stay valid.
    const double witness = 4.0 * (x - state.x1).squaredNorm();
    if (witness > state.d_bound) state.d_bound = 2.0 * witness;
  }
  const double theta_n =
      theta(alpha_n, s_i.lambda.eval(n), s_i.mu.eval(n), s_i.xi, s_i.xi.growth_threshold(),
            s_i.xi.growth_slope(), state.d_bound);

  accumulate_halfspace(state.halves, halfspace_from_iterates(x, y, theta_n));
  const Vector x_next = project_intersection(problem.c, state.halves, state.x1,
                                             config.projection_tol, config.dykstra_max_iter);

  StepRecord rec;
  rec.n = n;
  rec.step_norm = (x_next - x).norm();
  rec.y_res = (y - x).norm();
  rec.u_res = (u - x).norm();
  rec.g_res = residual_g.norm();
  rec.s_res = (su - u).norm();
  rec.theta = theta_n;

  state.x_prev = x;
  state.x = x_next;
  state.u = u;
  state.y = y;
  state.history.push_back(rec);
  state.n = n + 1;
}

enum class RunStatus { converged, max_iter, infeasible, diverged };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::converged: return "converged";
    case RunStatus::max_iter: return "max_iter";
    case RunStatus::infeasible: return "infeasible";
    case RunStatus::diverged: return "diverged";
  }
  return "?";
}

struct RunResult {
  Vector final;
  long iterations = 0;
  RunStatus status = RunStatus::max_iter;
  std::vector<StepRecord> trace;
};

struct ConditionCheck {
  std::string condition;
  bool pass = true;
  std::string detail;
};

struct ConfigReport {
  std::vector<ConditionCheck> checks;
  bool pass() const {
    for (const auto& c : checks) {
      if (!c.pass) return false;
    }
    return true;
  }
};

// Structural audit of the admissibility conditions for the instance/config
// pair: blend bounds, step interval, resolvent lim inf, summability, gauge
// growth constants.
inline ConfigReport validate_config(const ProblemInstance& problem, const SolverConfig& config) {
  ConfigReport report;
  std::ostringstream os;

  double k_max = 0.0;
  for (const auto& si : problem.s) k_max = std::max(k_max, si.k);
  const double a_lo = config.alpha_schedule.inf_value();
  const double b_hi = config.alpha_schedule.sup_value();
  os << "k_max=" << k_max << ", alpha in [" << a_lo << ", " << b_hi << "]";
  report.checks.push_back(
      {"blend_bounds", k_max < a_lo && a_lo <= b_hi && b_hi < 1.0 && a_lo > 0.0, os.str()});

  const SpectralBound bound = spectral_bound(problem.a);
  os.str("");
  os << "gamma=" << config.gamma << ", 1/L=" << bound.gamma_upper();
  report.checks.push_back({"step_interval", gamma_valid(config.gamma, bound), os.str()});

  report.checks.push_back({"r_liminf", config.r_schedule.positive_liminf(),
                           "r_n = " + config.r_schedule.describe()});
  report.checks.push_back({"s_liminf", config.s_schedule.positive_liminf(),
                           "s_n = " + config.s_schedule.describe()});

  bool lambda_ok = true, mu_ok = true;
  for (const auto& si : problem.s) {
    lambda_ok = lambda_ok && si.lambda.summable();
    mu_ok = mu_ok && si.mu.summable();
  }
  report.checks.push_back({"lambda_summable", lambda_ok, "sum lambda_n must be finite"});
  report.checks.push_back({"mu_summable", mu_ok, "sum mu_n must be finite"});

  os.str("");
  bool xi_ok = true;
  for (const auto& si : problem.s) {
    const double m_star = si.xi.growth_slope();
    xi_ok = xi_ok && m_star > 0.0;
    os << "(M=" << si.xi.growth_threshold() << ", M*=" << m_star << ") ";
  }
  report.checks.push_back({"xi_growth", xi_ok, os.str()});
  return report;
}

// Specialize the instance for a reduced setting: identity_operator swaps in
// A_i = I (requires H1 = H2 and C = Q); nonexpansive requires each S_i to
// pass the sampled nonexpansiveness check and zeroes the asymptotic
// schedules so theta_n vanishes.
inline ProblemInstance mode_reduce(const ProblemInstance& problem, SolverMode mode) {
  ProblemInstance out = problem;
  switch (mode) {
    case SolverMode::full:
      break;
    case SolverMode::identity_operator: {
      if (problem.dim_h1 != problem.dim_h2) {
        throw ArgumentError("identity_operator mode requires dim_h1 == dim_h2");
      }
      if (!(problem.c == problem.q)) {
        throw ArgumentError("identity_operator mode requires C == Q");
      }
      for (auto& ai : out.a) ai = Matrix::Identity(problem.dim_h1, problem.dim_h1);
      break;
    }
    case SolverMode::nonexpansive: {
      for (auto& si : out.s) {
        const ClassReport check =
            verify_class(si, MappingClass::nonexpansive, problem.c, 8, 100, 0);
        if (!check.pass) {
          throw ArgumentError("nonexpansive mode: a mapping failed the nonexpansiveness check");
        }
        si.lambda = Schedule::zero();
        si.mu = Schedule::zero();
      }
      break;
    }
  }
  return out;
}

using StepObserver = std::function<void(const SolverState&)>;

// Drive the scheme until every tracked residual stays below tol_residual
// for one full cycle of N steps, or the iteration cap / an infeasibility
// certificate / the divergence guard ends the run.
inline RunResult run(const ProblemInstance& problem, const SolverConfig& config, const Vector& x1,
                     const StepObserver& observer = {}) {
  const ProblemInstance reduced =
      config.mode == SolverMode::full ? problem : mode_reduce(problem, config.mode);
  const ConfigReport report = validate_config(reduced, config);
  if (!report.pass()) {
    std::string what = "run: config failed conditions:";
    for (const auto& c : report.checks) {
      if (!c.pass) what += " " + c.condition;
    }
    throw ArgumentError(what);
  }

  SolverState state = init_state(reduced, config, x1);
  RunResult result;
  result.status = RunStatus::max_iter;
  const long n_fam = reduced.families();
  long streak = 0;
  for (long it = 0; it < config.max_iter; ++it) {
    try {
      step(state, reduced, config);
    } catch (const InfeasibleSetError&) {
      result.status = RunStatus::infeasible;
      break;
    } catch (const DivergenceError&) {
      result.status = RunStatus::diverged;
      break;
    }
    if (observer) observer(state);
    const StepRecord& rec = state.history.back();
    const double worst = std::max({rec.step_norm, rec.y_res, rec.u_res, rec.g_res, rec.s_res});
    streak = worst < config.tol_residual ? streak + 1 : 0;
    if (streak >= n_fam) {
      result.status = RunStatus::converged;
      break;
    }
  }
  result.final = state.x;
  result.iterations = static_cast<long>(state.history.size());
  result.trace = std::move(state.history);
  return result;
}

}  // namespace sepfp
