#pragma once

#include <cmath>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "sepfp/errors.hpp"
#include "sepfp/nnls.hpp"
#include "sepfp/space.hpp"

namespace sepfp {

// Affine inequality {z : <normal, z> <= offset}. A zero normal is legal only
// with offset >= 0, in which case the set is the whole space.
struct HalfSpace {
  Vector normal;
  double offset = 0.0;

  friend bool operator==(const HalfSpace& a, const HalfSpace& b) {
    return a.normal == b.normal && a.offset == b.offset;
  }
};

inline double violation(const HalfSpace& h, const Vector& z) { return h.normal.dot(z) - h.offset; }

inline bool is_whole_space(const HalfSpace& h) {
  return h.normal.squaredNorm() == 0.0 && h.offset >= 0.0;
}

inline void require_valid(const HalfSpace& h) {
  if (h.normal.squaredNorm() == 0.0 && h.offset < 0.0) {
    throw ArgumentError("half-space with zero normal and negative offset is empty");
  }
}

struct WholeSpace {
  Eigen::Index dim = 0;
  friend bool operator==(const WholeSpace&, const WholeSpace&) = default;
};

struct Box {
  Vector lower, upper;
  friend bool operator==(const Box& a, const Box& b) {
    return a.lower == b.lower && a.upper == b.upper;
  }
};

struct Ball {
  Vector center;
  double radius = 1.0;
  friend bool operator==(const Ball& a, const Ball& b) {
    return a.center == b.center && a.radius == b.radius;
  }
};

struct HalfSpaceIntersection {
  std::vector<HalfSpace> halfspaces;
  friend bool operator==(const HalfSpaceIntersection&, const HalfSpaceIntersection&) = default;
};

// offset + span(columns of basis); an empty basis is the single point {offset}
struct AffineSubspace {
  Matrix basis;
  Vector offset;
  friend bool operator==(const AffineSubspace& a, const AffineSubspace& b) {
    return a.basis == b.basis && a.offset == b.offset;
  }
};

using ConvexSet = std::variant<WholeSpace, Box, Ball, HalfSpaceIntersection, AffineSubspace>;

inline Eigen::Index dim_of(const ConvexSet& s) {
  return std::visit(
      [](const auto& v) -> Eigen::Index {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, WholeSpace>) return v.dim;
        if constexpr (std::is_same_v<T, Box>) return v.lower.size();
        if constexpr (std::is_same_v<T, Ball>) return v.center.size();
        if constexpr (std::is_same_v<T, HalfSpaceIntersection>) {
          return v.halfspaces.empty() ? 0 : v.halfspaces.front().normal.size();
        }
        if constexpr (std::is_same_v<T, AffineSubspace>) return v.offset.size();
      },
      s);
}

inline void validate_set(const ConvexSet& s) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, WholeSpace>) {
          if (v.dim < 1) throw ArgumentError("WholeSpace: dimension must be >= 1");
        } else if constexpr (std::is_same_v<T, Box>) {
          if (v.lower.size() != v.upper.size()) throw ArgumentError("Box: bound dims differ");
          if ((v.lower.array() > v.upper.array()).any()) {
            throw ArgumentError("Box: lower must be <= upper componentwise");
          }
        } else if constexpr (std::is_same_v<T, Ball>) {
          if (v.radius <= 0.0) throw ArgumentError("Ball: radius must be positive");
        } else if constexpr (std::is_same_v<T, HalfSpaceIntersection>) {
          for (const auto& h : v.halfspaces) require_valid(h);
        } else if constexpr (std::is_same_v<T, AffineSubspace>) {
          if (v.basis.cols() > 0 && v.basis.rows() != v.offset.size()) {
            throw ArgumentError("AffineSubspace: basis/offset dims differ");
          }
        }
      },
      s);
}

inline bool contains(const ConvexSet& s, const Vector& z, double tol) {
  return std::visit(
      [&](const auto& v) -> bool {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, WholeSpace>) {
          return z.size() == v.dim;
        } else if constexpr (std::is_same_v<T, Box>) {
          return (z.array() >= v.lower.array() - tol).all() &&
                 (z.array() <= v.upper.array() + tol).all();
        } else if constexpr (std::is_same_v<T, Ball>) {
          return (z - v.center).norm() <= v.radius + tol;
        } else if constexpr (std::is_same_v<T, HalfSpaceIntersection>) {
          for (const auto& h : v.halfspaces) {
            if (violation(h, z) > tol * (1.0 + h.normal.norm())) return false;
          }
          return true;
        } else if constexpr (std::is_same_v<T, AffineSubspace>) {
          if (v.basis.cols() == 0) return (z - v.offset).norm() <= tol;
          const Vector s_ = v.basis.colPivHouseholderQr().solve(z - v.offset);
          return (v.offset + v.basis * s_ - z).norm() <= tol * (1.0 + z.norm());
        }
      },
      s);
}

// closed form for a single affine inequality
inline Vector project_halfspace(const HalfSpace& h, const Vector& x) {
  require_valid(h);
  const double n2 = h.normal.squaredNorm();
  if (n2 == 0.0) return x;
  const double excess = h.normal.dot(x) - h.offset;
  if (excess <= 0.0) return x;
  return x - (excess / n2) * h.normal;
}

namespace detail {

inline std::pair<Matrix, Vector> stack_halfspaces(const std::vector<HalfSpace>& halves,
                                                  Eigen::Index dim) {
  Matrix g(static_cast<Eigen::Index>(halves.size()), dim);
  Vector h(static_cast<Eigen::Index>(halves.size()));
  for (size_t i = 0; i < halves.size(); ++i) {
    g.row(static_cast<Eigen::Index>(i)) = halves[i].normal.transpose();
    h[static_cast<Eigen::Index>(i)] = halves[i].offset;
  }
  return {std::move(g), std::move(h)};
}

// box bounds as 2*dim inequality rows
inline void append_box_rows(const Box& box, Matrix& g, Vector& h) {
  const Eigen::Index d = box.lower.size();
  const Eigen::Index m0 = g.rows();
  g.conservativeResize(m0 + 2 * d, d);
  h.conservativeResize(m0 + 2 * d);
  g.bottomRows(2 * d).setZero();
  for (Eigen::Index i = 0; i < d; ++i) {
    g(m0 + i, i) = 1.0;
    h[m0 + i] = box.upper[i];
    g(m0 + d + i, i) = -1.0;
    h[m0 + d + i] = -box.lower[i];
  }
}

}  // namespace detail

// Metric projection onto a single set. Exact for every variant: the
// half-space-intersection case runs the dual active-set program.
inline Vector project(const ConvexSet& s, const Vector& x) {
  if (x.size() != dim_of(s)) throw ArgumentError("project: point/set dimension mismatch");
  return std::visit(
      [&](const auto& v) -> Vector {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, WholeSpace>) {
          return x;
        } else if constexpr (std::is_same_v<T, Box>) {
          return x.cwiseMax(v.lower).cwiseMin(v.upper);
        } else if constexpr (std::is_same_v<T, Ball>) {
          const Vector d = x - v.center;
          const double n = d.norm();
          if (n <= v.radius) return x;
          return v.center + (v.radius / n) * d;
        } else if constexpr (std::is_same_v<T, HalfSpaceIntersection>) {
          auto [g, h] = detail::stack_halfspaces(v.halfspaces, x.size());
          return ldp_project(g, h, x);
        } else if constexpr (std::is_same_v<T, AffineSubspace>) {
          if (v.basis.cols() == 0) return v.offset;
          const Vector s_ = v.basis.colPivHouseholderQr().solve(x - v.offset);
          return v.offset + v.basis * s_;
        }
      },
      s);
}

// Linearized shrinking constraint: membership in the returned half-space is
// equivalent to ||y_n - z||^2 <= ||x_n - z||^2 + theta_n. The offset
// ||x_n||^2 - ||y_n||^2 is evaluated as <x_n - y_n, x_n + y_n>: the direct
// difference of squared norms cancels catastrophically once y_n approaches
// x_n and would freeze the late iterations.
inline HalfSpace halfspace_from_iterates(const Vector& x_n, const Vector& y_n, double theta_n) {
  if (x_n.size() != y_n.size()) throw ArgumentError("halfspace_from_iterates: dim mismatch");
  if (theta_n < 0.0) throw ArgumentError("halfspace_from_iterates: theta must be >= 0");
  HalfSpace h;
  h.normal = 2.0 * (x_n - y_n);
  h.offset = (x_n - y_n).dot(x_n + y_n) + theta_n;
  return h;
}

// Append h, dropping whichever of {h, an existing constraint} is implied by
// the other through an identical normalized normal. Degenerate (whole-space)
// half-spaces are skipped outright. The represented set never changes.
inline void accumulate_halfspace(std::vector<HalfSpace>& halves, const HalfSpace& h) {
  require_valid(h);
  if (is_whole_space(h)) return;
  const double hn = h.normal.norm();
  const Vector unit = h.normal / hn;
  const double scaled = h.offset / hn;
  for (auto& e : halves) {
    const double en = e.normal.norm();
    if (((e.normal / en) - unit).cwiseAbs().maxCoeff() > 1e-12) continue;
    if (e.offset / en <= scaled) return;  // existing is tighter: h adds nothing
    e = h;                                // h is tighter: replace the looser copy
    return;
  }
  halves.push_back(h);
}

struct ProjectionOptions {
  double tol = 1e-8;
  long dykstra_max_iter = 100000;
};

namespace detail {

// Dykstra's alternating projections with per-set correction vectors, for a
// base set without a polyhedral description intersected with a polyhedron.
inline Vector dykstra_two_set(const ConvexSet& base, const Matrix& g, const Vector& h,
                              const Vector& x, const ProjectionOptions& opt) {
  Vector z = x;
  Vector p = Vector::Zero(x.size());  // correction for base
  Vector q = Vector::Zero(x.size());  // correction for polyhedron
  double residual = std::numeric_limits<double>::infinity();
  for (long it = 0; it < opt.dykstra_max_iter; ++it) {
    const Vector y1 = project(base, z + p);
    const Vector p_new = z + p - y1;
    const Vector y2 = ldp_project(g, h, y1 + q);
    const Vector q_new = y1 + q - y2;
    // Birgin-Raydan robust stopping: change in the correction vectors
    residual = std::sqrt((p_new - p).squaredNorm() + (q_new - q).squaredNorm());
    p = p_new;
    q = q_new;
    z = y2;
    if (residual <= opt.tol) return z;
  }
  throw NonConvergenceError("project_intersection: Dykstra iteration cap exceeded", residual);
}

}  // namespace detail

// Nearest point of base ∩ (∩ halves) to x. Polyhedral bases fold into one
// dual active-set program; Ball and AffineSubspace bases alternate with the
// accumulated polyhedron via Dykstra.
inline Vector project_intersection(const ConvexSet& base, const std::vector<HalfSpace>& halves,
                                   const Vector& x, double tol,
                                   long dykstra_max_iter = 100000) {
  if (tol <= 0.0) throw ArgumentError("project_intersection: tol must be positive");
  if (x.size() != dim_of(base)) throw ArgumentError("project_intersection: dim mismatch");
  std::vector<HalfSpace> live;
  live.reserve(halves.size());
  for (const auto& h : halves) {
    require_valid(h);
    if (!is_whole_space(h)) live.push_back(h);
  }
  if (live.empty()) return project(base, x);

  auto [g, h] = detail::stack_halfspaces(live, x.size());
  if (std::holds_alternative<WholeSpace>(base)) {
    return ldp_project(g, h, x, tol);
  }
  if (std::holds_alternative<Box>(base)) {
    detail::append_box_rows(std::get<Box>(base), g, h);
    return ldp_project(g, h, x, tol);
  }
  if (std::holds_alternative<HalfSpaceIntersection>(base)) {
    Matrix g2 = g;
    Vector h2 = h;
    const auto& extra = std::get<HalfSpaceIntersection>(base).halfspaces;
    auto [gb, hb] = detail::stack_halfspaces(extra, x.size());
    g2.conservativeResize(g.rows() + gb.rows(), Eigen::NoChange);
    h2.conservativeResize(h.size() + hb.size());
    g2.bottomRows(gb.rows()) = gb;
    h2.tail(hb.size()) = hb;
    return ldp_project(g2, h2, x, tol);
  }
  ProjectionOptions opt;
  opt.tol = tol;
  opt.dykstra_max_iter = dykstra_max_iter;
  return detail::dykstra_two_set(base, g, h, x, opt);
}

}  // namespace sepfp
