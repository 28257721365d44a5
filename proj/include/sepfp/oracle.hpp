#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sepfp/convex.hpp"
#include "sepfp/equilibrium.hpp"
#include "sepfp/errors.hpp"
#include "sepfp/mapping.hpp"
#include "sepfp/solver.hpp"

namespace sepfp {
namespace oracle {

// Analytic description of F = [intersection of F(S_i)] ∩ Omega, assembled
// from stacked linear systems. Restricted to affine/quadratic instances at
// desk scale so every member is auditable by hand.
struct AnalyticSolutionSet {
  enum class Kind { point, affine_set, empty };

  Kind kind = Kind::empty;
  Vector point;
  Matrix basis;   // affine_set: kernel directions (columns)
  Vector offset;  // affine_set: particular solution
  std::string provenance;

  bool empty() const { return kind == Kind::empty; }
};

namespace detail {

struct RowSystem {
  Matrix e;  // stacked rows
  Vector rhs;

  void append(const Matrix& rows, const Vector& values) {
    const Eigen::Index m0 = e.rows();
    e.conservativeResize(m0 + rows.rows(), rows.cols());
    rhs.conservativeResize(m0 + values.size());
    e.bottomRows(rows.rows()) = rows;
    rhs.tail(values.size()) = values;
  }
};

// z ∈ K as membership of a linear image: kept for final point filtering when
// K has no affine description.
struct MembershipFilter {
  Matrix map;  // identity for plain z ∈ K
  ConvexSet set;
};

// rows enforcing z ∈ offset + range(basis):  (I - U U^T) z = (I - U U^T) o
inline std::pair<Matrix, Vector> affine_membership_rows(const AffineSubspace& aff) {
  const Eigen::Index d = aff.offset.size();
  Matrix projector = Matrix::Identity(d, d);
  if (aff.basis.cols() > 0) {
    Eigen::ColPivHouseholderQR<Matrix> qr(aff.basis);
    const Eigen::Index rank = qr.rank();
    if (rank > 0) {
      const Matrix u = qr.householderQ() * Matrix::Identity(d, rank);
      projector -= u * u.transpose();
    }
  }
  return {projector, Vector(projector * aff.offset)};
}

// All KKT-candidate solutions of the affine VI <Wz + v, y - z> >= 0 over the
// polyhedron G z <= h, by enumerating active subsets. Throws when the
// instance is outside the auditable range.
inline std::vector<Vector> vi_kkt_solutions(const Matrix& w, const Vector& v, const Matrix& g,
                                            const Vector& h) {
  const Eigen::Index d = w.rows();
  const Eigen::Index m = g.rows();
  if (m > 16) throw UnsupportedInstanceError("oracle: too many constraint rows to enumerate");
  std::vector<Vector> found;
  const double tol = 1e-9;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (mask & (1u << j)) active.push_back(j);
    }
    if (static_cast<Eigen::Index>(active.size()) > d) continue;
    const Eigen::Index na = static_cast<Eigen::Index>(active.size());
    Matrix kkt = Matrix::Zero(d + na, d + na);
    Vector rhs(d + na);
    kkt.topLeftCorner(d, d) = w;
    rhs.head(d) = -v;
    for (Eigen::Index j = 0; j < na; ++j) {
      kkt.block(0, d + j, d, 1) = g.row(active[static_cast<size_t>(j)]).transpose();
      kkt.block(d + j, 0, 1, d) = g.row(active[static_cast<size_t>(j)]);
      rhs[d + j] = h[active[static_cast<size_t>(j)]];
    }
    const Eigen::FullPivLU<Matrix> lu(kkt);
    if (lu.rank() < d + na) continue;
    const Vector sol = lu.solve(rhs);
    const Vector z = sol.head(d);
    const Vector lambda = sol.tail(na);
    if (na > 0 && lambda.minCoeff() < -tol) continue;
    if (m > 0 && (g * z - h).maxCoeff() > tol) continue;
    bool duplicate = false;
    for (const auto& other : found) {
      if ((other - z).norm() <= 1e-8) duplicate = true;
    }
    if (!duplicate) found.push_back(z);
  }
  return found;
}

inline std::pair<Matrix, Vector> polyhedron_rows(const ConvexSet& s) {
  const Eigen::Index d = dim_of(s);
  if (std::holds_alternative<Box>(s)) {
    Matrix g(0, d);
    Vector h(0);
    sepfp::detail::append_box_rows(std::get<Box>(s), g, h);
    return {std::move(g), std::move(h)};
  }
  return sepfp::detail::stack_halfspaces(std::get<HalfSpaceIntersection>(s).halfspaces, d);
}

// EP(f) over its domain as affine rows, or a report that the set is the
// domain itself (zero family), or unsupported.
struct EpRows {
  std::optional<std::pair<Matrix, Vector>> rows;  // nullopt: EP = whole domain
};

inline EpRows ep_affine_rows(const Bifunction& f) {
  const Eigen::Index d = dim_of(f.domain);
  if (f.family == BifunctionFamily::zero) {
    if (std::holds_alternative<WholeSpace>(f.domain)) return {std::nullopt};
    if (std::holds_alternative<AffineSubspace>(f.domain)) {
      return {affine_membership_rows(std::get<AffineSubspace>(f.domain))};
    }
    return {std::nullopt};  // caller keeps the domain as a membership filter
  }
  if (std::holds_alternative<WholeSpace>(f.domain)) {
    return {std::make_pair(f.w, Vector(-f.v))};
  }
  if (std::holds_alternative<AffineSubspace>(f.domain)) {
    // reduced VI on the subspace: V^T (W z + v) = 0 plus membership
    const auto& aff = std::get<AffineSubspace>(f.domain);
    auto [pm, pv] = affine_membership_rows(aff);
    Matrix rows(pm.rows() + aff.basis.cols(), d);
    Vector vals(pv.size() + aff.basis.cols());
    rows.topRows(pm.rows()) = pm;
    vals.head(pv.size()) = pv;
    rows.bottomRows(aff.basis.cols()) = aff.basis.transpose() * f.w;
    vals.tail(aff.basis.cols()) = -aff.basis.transpose() * f.v;
    return {std::make_pair(rows, vals)};
  }
  if (std::holds_alternative<Box>(f.domain) ||
      std::holds_alternative<HalfSpaceIntersection>(f.domain)) {
    auto [g, h] = polyhedron_rows(f.domain);
    const std::vector<Vector> sols = vi_kkt_solutions(f.w, f.v, g, h);
    if (sols.size() == 1) {
      return {std::make_pair(Matrix::Identity(d, d), sols.front())};
    }
    throw UnsupportedInstanceError(
        "oracle: constrained equilibrium set is not a single point");
  }
  throw UnsupportedInstanceError("oracle: unsupported bifunction domain");
}

// F(S) as affine rows where the structure allows it; projections onto
// non-affine sets become membership filters.
inline std::optional<std::pair<Matrix, Vector>> fixed_point_rows(
    const MapOp& op, Eigen::Index d, std::vector<MembershipFilter>& filters) {
  switch (op.kind) {
    case MapOp::Kind::affine:
      return std::make_pair(Matrix(Matrix::Identity(d, d) - op.a), op.b);
    case MapOp::Kind::negation:
      return std::make_pair(Matrix(2.0 * Matrix::Identity(d, d)), Vector(Vector::Zero(d)));
    case MapOp::Kind::projection: {
      if (std::holds_alternative<WholeSpace>(op.set)) return std::nullopt;
      if (std::holds_alternative<AffineSubspace>(op.set)) {
        return affine_membership_rows(std::get<AffineSubspace>(op.set));
      }
      filters.push_back({Matrix::Identity(d, d), op.set});
      return std::nullopt;
    }
    case MapOp::Kind::composite: {
      // affine children collapse into one affine map
      Matrix b = Matrix::Identity(d, d);
      Vector c = Vector::Zero(d);
      for (const auto& child : op.children) {
        if (child.kind == MapOp::Kind::affine) {
          b = child.a * b;
          c = child.a * c + child.b;
        } else if (child.kind == MapOp::Kind::negation) {
          b = -b;
          c = -c;
        } else {
          throw UnsupportedInstanceError("oracle: non-affine composite mapping");
        }
      }
      return std::make_pair(Matrix(Matrix::Identity(d, d) - b), c);
    }
  }
  return std::nullopt;
}

}  // namespace detail

// Assemble F analytically: equilibrium sets and fixed-point sets as stacked
// linear systems, preimage constraints through the operators, and the final
// consistency/kernel analysis. Non-affine content the stack cannot express
// raises UnsupportedInstanceError rather than guessing.
inline AnalyticSolutionSet solve_F(const ProblemInstance& problem) {
  validate_instance(problem);
  const Eigen::Index d = problem.dim_h1;
  detail::RowSystem sys;
  sys.e = Matrix(0, d);
  sys.rhs = Vector(0);
  std::vector<detail::MembershipFilter> filters;

  // z ∈ C
  if (std::holds_alternative<AffineSubspace>(problem.c)) {
    auto [rows, vals] = detail::affine_membership_rows(std::get<AffineSubspace>(problem.c));
    sys.append(rows, vals);
  } else if (!std::holds_alternative<WholeSpace>(problem.c)) {
    filters.push_back({Matrix::Identity(d, d), problem.c});
  }

  for (const auto& fi : problem.f) {
    const auto ep = detail::ep_affine_rows(fi);
    if (ep.rows) {
      sys.append(ep.rows->first, ep.rows->second);
    } else if (fi.family == BifunctionFamily::zero &&
               !std::holds_alternative<WholeSpace>(fi.domain)) {
      filters.push_back({Matrix::Identity(d, d), fi.domain});
    }
  }

  for (size_t idx = 0; idx < problem.g.size(); ++idx) {
    const auto& gi = problem.g[idx];
    const auto& ai = problem.a[idx];
    const auto ep = detail::ep_affine_rows(gi);
    if (ep.rows) {
      sys.append(Matrix(ep.rows->first * ai), ep.rows->second);
    } else if (gi.family == BifunctionFamily::zero &&
               !std::holds_alternative<WholeSpace>(gi.domain)) {
      filters.push_back({ai, gi.domain});
    }
  }

  for (const auto& si : problem.s) {
    const auto rows = detail::fixed_point_rows(si.map, d, filters);
    if (rows) sys.append(rows->first, rows->second);
  }

  AnalyticSolutionSet out;
  out.provenance = "stacked linear system, " + std::to_string(sys.e.rows()) + " rows";

  Vector z0;
  Matrix kernel;
  if (sys.e.rows() == 0) {
    z0 = Vector::Zero(d);
    kernel = Matrix::Identity(d, d);
  } else {
    const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(sys.e);
    z0 = cod.solve(sys.rhs);
    if ((sys.e * z0 - sys.rhs).norm() > 1e-8 * (1.0 + sys.rhs.norm())) {
      out.kind = AnalyticSolutionSet::Kind::empty;
      out.provenance += "; inconsistent rows";
      return out;
    }
    const Eigen::FullPivLU<Matrix> lu(sys.e);
    kernel = lu.kernel();
    if (lu.dimensionOfKernel() == 0) kernel = Matrix(d, 0);
  }

  if (kernel.cols() == 0) {
    for (const auto& filt : filters) {
      if (!contains(filt.set, Vector(filt.map * z0), 1e-9)) {
        out.kind = AnalyticSolutionSet::Kind::empty;
        out.provenance += "; point excluded by a set membership constraint";
        return out;
      }
    }
    out.kind = AnalyticSolutionSet::Kind::point;
    out.point = z0;
    return out;
  }

  if (!filters.empty()) {
    throw UnsupportedInstanceError(
        "oracle: affine solution set with non-affine membership constraints");
  }
  out.kind = AnalyticSolutionSet::Kind::affine_set;
  out.basis = kernel;
  out.offset = z0;
  return out;
}

// P_F x1 by normal equations on the affine description.
inline Vector project_F(const AnalyticSolutionSet& set, const Vector& x1) {
  switch (set.kind) {
    case AnalyticSolutionSet::Kind::empty:
      throw NoSolutionError("project_F: solution set is empty");
    case AnalyticSolutionSet::Kind::point:
      return set.point;
    case AnalyticSolutionSet::Kind::affine_set: {
      const Matrix gram = set.basis.transpose() * set.basis;
      const Vector s = gram.ldlt().solve(set.basis.transpose() * (x1 - set.offset));
      return set.offset + set.basis * s;
    }
  }
  throw NoSolutionError("project_F: invalid set");
}

// Deterministic members for containment checks: the particular solution and
// unit moves along each kernel direction.
inline std::vector<Vector> sample_members(const AnalyticSolutionSet& set) {
  std::vector<Vector> out;
  if (set.kind == AnalyticSolutionSet::Kind::point) {
    out.push_back(set.point);
  } else if (set.kind == AnalyticSolutionSet::Kind::affine_set) {
    out.push_back(set.offset);
    for (Eigen::Index j = 0; j < set.basis.cols(); ++j) {
      out.push_back(set.offset + set.basis.col(j));
      out.push_back(set.offset - set.basis.col(j));
    }
  }
  return out;
}

// Exhaustive grid minimizer of ||z - x|| over the feasible points of S
// inside [lo, hi], refined once at step/100 around the best cell.
inline Vector grid_project(const ConvexSet& s, const Vector& x, double step, const Vector& lo,
                           const Vector& hi) {
  const Eigen::Index d = x.size();
  if (d > 3) throw ArgumentError("grid_project: supported only for dim <= 3");
  if (step <= 0.0) throw ArgumentError("grid_project: step must be positive");
  if (lo.size() != d || hi.size() != d || (lo.array() > hi.array()).any()) {
    throw ArgumentError("grid_project: invalid search box");
  }

  const double membership_tol = 1e-9;
  auto sweep = [&](const Vector& lo_box, const Vector& hi_box, double spacing,
                   std::optional<Vector>& best, double& best_dist) {
    std::array<Eigen::Index, 3> counts{1, 1, 1};
    for (Eigen::Index i = 0; i < d; ++i) {
      counts[static_cast<size_t>(i)] =
          static_cast<Eigen::Index>(std::floor((hi_box[i] - lo_box[i]) / spacing)) + 1;
    }
    Vector z(d);
    for (Eigen::Index i0 = 0; i0 < counts[0]; ++i0) {
      z[0] = lo_box[0] + spacing * static_cast<double>(i0);
      for (Eigen::Index i1 = 0; i1 < (d > 1 ? counts[1] : 1); ++i1) {
        if (d > 1) z[1] = lo_box[1] + spacing * static_cast<double>(i1);
        for (Eigen::Index i2 = 0; i2 < (d > 2 ? counts[2] : 1); ++i2) {
          if (d > 2) z[2] = lo_box[2] + spacing * static_cast<double>(i2);
          if (!contains(s, z, membership_tol)) continue;
          const double dist = (z - x).norm();
          if (!best || dist < best_dist ||
              (dist == best_dist && std::lexicographical_compare(
                                        z.data(), z.data() + d, best->data(), best->data() + d))) {
            best = z;
            best_dist = dist;
          }
        }
      }
    }
  };

  std::optional<Vector> best;
  double best_dist = std::numeric_limits<double>::infinity();
  sweep(lo, hi, step, best, best_dist);
  if (!best) throw InfeasibleSetError("grid_project: no feasible grid point");

  // The coarse minimizer can drift tangentially by about
  // sqrt(2 * dist * step * sqrt(d)) along a flat boundary, so the refinement
  // window must cover that reach; a point budget caps the fine pass.
  const double fine = step / 100.0;
  double window = std::max(
      step, std::sqrt(2.0 * (best_dist + step) * step * std::sqrt(static_cast<double>(d))));
  const double cap = 0.5 * fine * std::pow(3e8, 1.0 / static_cast<double>(d));
  window = std::min(window, cap);
  const Vector lo2 = (best->array() - window).cwiseMax(lo.array());
  const Vector hi2 = (best->array() + window).cwiseMin(hi.array());
  std::optional<Vector> refined = best;
  sweep(lo2, hi2, fine, refined, best_dist);
  return *refined;
}

// Brute-force least-distance reference: enumerate KKT active subsets of the
// half-space rows and keep the best primal/dual-feasible candidate. Fully
// independent of the NNLS route it audits.
inline Vector qp_project(const std::vector<HalfSpace>& halves, const Vector& x) {
  const Eigen::Index d = x.size();
  const Eigen::Index m = static_cast<Eigen::Index>(halves.size());
  if (m > 20) throw ArgumentError("qp_project: too many half-spaces to enumerate");
  Matrix g(m, d);
  Vector h(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    g.row(i) = halves[static_cast<size_t>(i)].normal.transpose();
    h[i] = halves[static_cast<size_t>(i)].offset;
  }
  const double tol = 1e-9;
  std::optional<Vector> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (mask & (1u << j)) active.push_back(j);
    }
    if (static_cast<Eigen::Index>(active.size()) > d) continue;
    const Eigen::Index na = static_cast<Eigen::Index>(active.size());
    Vector z;
    if (na == 0) {
      z = x;
    } else {
      Matrix ga(na, d);
      Vector ha(na);
      for (Eigen::Index j = 0; j < na; ++j) {
        ga.row(j) = g.row(active[static_cast<size_t>(j)]);
        ha[j] = h[active[static_cast<size_t>(j)]];
      }
      const Eigen::FullPivLU<Matrix> lu(ga * ga.transpose());
      if (lu.rank() < na) continue;
      const Vector lambda = lu.solve(ga * x - ha);
      if (lambda.minCoeff() < -tol) continue;
      z = x - ga.transpose() * lambda;
    }
    if (m > 0 && (g * z - h).maxCoeff() > tol) continue;
    const double dist = (z - x).norm();
    if (dist < best_dist) {
      best = z;
      best_dist = dist;
    }
  }
  if (!best) throw InfeasibleSetError("qp_project: no KKT-feasible candidate");
  return *best;
}

}  // namespace oracle
}  // namespace sepfp
