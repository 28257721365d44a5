#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sepfp/convex.hpp"
#include "sepfp/errors.hpp"
#include "sepfp/rng.hpp"
#include "sepfp/sampling.hpp"
#include "sepfp/space.hpp"

namespace sepfp {

enum class BifunctionFamily { monotone_affine, convex_difference, zero };

// Bifunction over its domain, restricted to families whose monotone
// structure is checkable:
//   monotone_affine   f(x,y) = <Mx + q, y - x>      (monotone iff M + M^T PSD)
//   convex_difference f(x,y) = phi(y) - phi(x),  phi(z) = 1/2 <Pz,z> + <c,z>
//   zero              f = 0
struct Bifunction {
  BifunctionFamily family = BifunctionFamily::zero;
  Matrix w;  // M or P; empty for the zero family
  Vector v;  // q or c; empty for the zero family
  ConvexSet domain = WholeSpace{1};

  double eval(const Vector& x, const Vector& y) const {
    switch (family) {
      case BifunctionFamily::monotone_affine:
        return (w * x + v).dot(y - x);
      case BifunctionFamily::convex_difference: {
        const auto phi = [&](const Vector& z) { return 0.5 * z.dot(w * z) + v.dot(z); };
        return phi(y) - phi(x);
      }
      case BifunctionFamily::zero:
        return 0.0;
    }
    return 0.0;
  }

  static Bifunction zero(ConvexSet domain) {
    return Bifunction{BifunctionFamily::zero, Matrix(), Vector(), std::move(domain)};
  }
  static Bifunction monotone_affine(Matrix m, Vector q, ConvexSet domain) {
    return Bifunction{BifunctionFamily::monotone_affine, std::move(m), std::move(q),
                      std::move(domain)};
  }
  static Bifunction convex_difference(Matrix p, Vector c, ConvexSet domain) {
    return Bifunction{BifunctionFamily::convex_difference, std::move(p), std::move(c),
                      std::move(domain)};
  }

  friend bool operator==(const Bifunction& a, const Bifunction& b) {
    return a.family == b.family && a.w == b.w && a.v == b.v && a.domain == b.domain;
  }
};

inline void validate_bifunction(const Bifunction& f) {
  validate_set(f.domain);
  const Eigen::Index d = dim_of(f.domain);
  if (f.family == BifunctionFamily::zero) return;
  if (f.w.rows() != d || f.w.cols() != d || f.v.size() != d) {
    throw ArgumentError("Bifunction: matrix/vector dims must match the domain");
  }
}

struct ResolventQuery {
  double r = 1.0;
  Vector x;
};

struct ResolventOptions {
  double inner_tol = 1e-10;
  long max_inner = 200000;
  double solve_residual_tol = 1e-8;
};

// Projected-gradient route for the resolvent: the defining inequality is the
// variational inequality of G(z) = Wz + v + (z - x)/r over the domain, which
// is (1/r)-strongly monotone, so the optimal fixed-point step
// beta = r/(1 + r*||W||_2)^2 contracts.
inline Vector resolvent_iterative(const Bifunction& f, const ResolventQuery& query,
                                  std::optional<Vector> start = std::nullopt,
                                  const ResolventOptions& opt = {}) {
  if (query.r <= 0.0) throw ArgumentError("resolvent: r must be positive");
  require_finite(query.x, "resolvent query point");
  const Eigen::Index d = dim_of(f.domain);
  if (query.x.size() != d) throw ArgumentError("resolvent: query dim mismatch");

  const bool trivial = f.family == BifunctionFamily::zero;
  const double wnorm = trivial ? 0.0 : detail::operator_two_norm(f.w);
  const double beta = query.r / ((1.0 + query.r * wnorm) * (1.0 + query.r * wnorm));

  Vector z = start ? *start : project(f.domain, query.x);
  double step_norm = 0.0;
  for (long it = 0; it < opt.max_inner; ++it) {
    Vector grad = (z - query.x) / query.r;
    if (!trivial) grad += f.w * z + f.v;
    const Vector z_next = project(f.domain, z - beta * grad);
    step_norm = (z_next - z).norm();
    z = z_next;
    if (step_norm <= opt.inner_tol) return z;
  }
  throw NonConvergenceError("resolvent: projected-gradient cap exceeded", step_norm);
}

// T_r^f(x): the unique z in the domain with f(z,y) + (1/r)<y-z, z-x> >= 0 for
// every y there. Whole-space domains solve (I + rW) z = x - r v directly; the
// zero family reduces to the metric projection; everything else goes through
// the projected-gradient inner solver.
inline Vector resolvent(const Bifunction& f, const ResolventQuery& query,
                        const ResolventOptions& opt = {}) {
  if (query.r <= 0.0) throw ArgumentError("resolvent: r must be positive");
  require_finite(query.x, "resolvent query point");
  const Eigen::Index d = dim_of(f.domain);
  if (query.x.size() != d) throw ArgumentError("resolvent: query dim mismatch");

  if (f.family == BifunctionFamily::zero) return project(f.domain, query.x);

  if (std::holds_alternative<WholeSpace>(f.domain)) {
    const Matrix lhs = Matrix::Identity(d, d) + query.r * f.w;
    const Vector rhs = query.x - query.r * f.v;
    const Vector z = lhs.partialPivLu().solve(rhs);
    // (I + rW) is nonsingular by strong monotonicity; the guard catches
    // conditioning loss rather than true singularity.
    if ((lhs * z - rhs).norm() > opt.solve_residual_tol * (1.0 + rhs.norm())) {
      throw NumericalError("resolvent: linear solve residual above the conditioning guard");
    }
    return z;
  }
  return resolvent_iterative(f, query, std::nullopt, opt);
}

// ||x - T_r^f x||; vanishes exactly on the solution set of the equilibrium
// problem for f.
inline double ep_residual(const Bifunction& f, const Vector& x, double r,
                          const ResolventOptions& opt = {}) {
  return (x - resolvent(f, ResolventQuery{r, x}, opt)).norm();
}

struct AxiomCheck {
  std::string axiom;
  bool pass = true;
  double worst_violation = 0.0;
};

struct ConditionReport {
  std::vector<AxiomCheck> checks;
  bool pass() const {
    for (const auto& c : checks) {
      if (!c.pass) return false;
    }
    return true;
  }
};

// Sampled audit of the bifunction axioms: f(x,x) = 0, monotonicity,
// convexity of f(x, .) along random segments, and upper hemicontinuity
// along t -> 0. A report never throws; failures carry the worst violation.
inline ConditionReport verify_bifunction_axioms(const Bifunction& f, int samples,
                                            std::uint64_t seed) {
  if (samples < 1) throw ArgumentError("verify_bifunction_axioms: samples must be >= 1");
  Rng rng(seed);
  ConditionReport report;
  double worst_identity = 0.0;
  double worst_monotone = 0.0;
  double worst_convex = 0.0;
  double worst_hemi = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Vector x = sample_point(f.domain, rng);
    const Vector y = sample_point(f.domain, rng);
    const Vector z = sample_point(f.domain, rng);

    worst_identity = std::max(worst_identity, std::abs(f.eval(x, x)));
    worst_monotone = std::max(worst_monotone, f.eval(x, y) + f.eval(y, x));

    const Vector mid = 0.5 * (y + z);
    worst_convex =
        std::max(worst_convex, f.eval(x, mid) - 0.5 * (f.eval(x, y) + f.eval(x, z)));

    // limsup_{t->0} f(tz + (1-t)x, y) <= f(x,y), probed at vanishing t
    const double fxy = f.eval(x, y);
    const double t = 1e-9;
    const Vector xt = t * z + (1.0 - t) * x;
    worst_hemi = std::max(worst_hemi, f.eval(xt, y) - fxy);
  }
  const double scale_tol = 1e-10;
  report.checks.push_back({"identity f(x,x)=0", worst_identity <= 1e-12, worst_identity});
  report.checks.push_back({"monotonicity", worst_monotone <= scale_tol, worst_monotone});
  report.checks.push_back({"convexity in y", worst_convex <= scale_tol, worst_convex});
  report.checks.push_back({"upper hemicontinuity", worst_hemi <= 1e-6, worst_hemi});
  return report;
}

}  // namespace sepfp
