#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sepfp/convex.hpp"
#include "sepfp/errors.hpp"
#include "sepfp/rng.hpp"
#include "sepfp/sampling.hpp"
#include "sepfp/schedule.hpp"
#include "sepfp/space.hpp"

namespace sepfp {

// Strictly increasing continuous gauge with xi(0) = 0, together with its
// linear-growth constants (M, M*): xi(t) <= M* t for all t >= M.
struct XiFunction {
  enum class Kind { linear, piecewise_quad };

  Kind kind = Kind::linear;
  double param = 1.0;  // slope c for linear, knee M for piecewise_quad

  double operator()(double t) const {
    if (t < 0.0) throw ArgumentError("XiFunction: argument must be >= 0");
    switch (kind) {
      case Kind::linear:
        return param * t;
      case Kind::piecewise_quad:
        return t <= param ? t * t : param * t;
    }
    return 0.0;
  }

  double growth_threshold() const {  // M
    return kind == Kind::linear ? 0.0 : param;
  }
  double growth_slope() const {  // M*
    return param;
  }

  static XiFunction linear(double c) {
    if (c <= 0.0) throw ArgumentError("XiFunction::linear: slope must be positive");
    return {Kind::linear, c};
  }
  static XiFunction piecewise_quad(double m) {
    if (m <= 0.0) throw ArgumentError("XiFunction::piecewise_quad: knee must be positive");
    return {Kind::piecewise_quad, m};
  }

  friend bool operator==(const XiFunction&, const XiFunction&) = default;
};

// One evaluation step of a self-mapping of C.
struct MapOp {
  enum class Kind { affine, projection, negation, composite };

  Kind kind = Kind::negation;
  Matrix a;       // affine: x -> a x + b
  Vector b;
  ConvexSet set = WholeSpace{1};   // projection target
  std::vector<MapOp> children;     // composite, applied in listed order

  static MapOp affine(Matrix m, Vector v) {
    MapOp op;
    op.kind = Kind::affine;
    op.a = std::move(m);
    op.b = std::move(v);
    return op;
  }
  static MapOp projection(ConvexSet s) {
    MapOp op;
    op.kind = Kind::projection;
    op.set = std::move(s);
    return op;
  }
  static MapOp negation() { return MapOp{}; }
  static MapOp composite(std::vector<MapOp> list) {
    MapOp op;
    op.kind = Kind::composite;
    op.children = std::move(list);
    return op;
  }

  friend bool operator==(const MapOp& x, const MapOp& y) {
    return x.kind == y.kind && x.a == y.a && x.b == y.b && x.set == y.set &&
           x.children == y.children;
  }
};

// Candidate (k, {lambda_n}, {mu_n}, xi)-total asymptotically strict pseudo
// contraction: the map plus its claimed class parameters. The claim is
// checked by verify_class, never assumed.
struct MappingSpec {
  MapOp map;
  double k = 0.0;
  Schedule lambda = Schedule::zero();
  Schedule mu = Schedule::zero();
  XiFunction xi = XiFunction::linear(1.0);
  double lipschitz_theta = 1.0;

  friend bool operator==(const MappingSpec&, const MappingSpec&) = default;
};

inline void validate_mapping(const MappingSpec& s) {
  if (s.k < 0.0 || s.k >= 1.0) throw ArgumentError("MappingSpec: k must lie in [0,1)");
  if (!s.lambda.nonnegative() || !s.mu.nonnegative()) {
    throw ArgumentError("MappingSpec: schedules must be nonnegative");
  }
  if (s.lipschitz_theta <= 0.0) throw ArgumentError("MappingSpec: theta must be positive");
}

inline Vector apply(const MapOp& op, const Vector& x) {
  switch (op.kind) {
    case MapOp::Kind::affine:
      if (op.a.cols() != x.size()) throw ArgumentError("apply: affine dim mismatch");
      return op.a * x + op.b;
    case MapOp::Kind::projection:
      return project(op.set, x);
    case MapOp::Kind::negation:
      return -x;
    case MapOp::Kind::composite: {
      Vector z = x;
      for (const auto& child : op.children) z = apply(child, z);
      return z;
    }
  }
  return x;
}

inline Vector apply(const MappingSpec& s, const Vector& x) { return apply(s.map, x); }

inline constexpr double kDivergenceGuard = 1e12;

namespace detail {

// (d+1)x(d+1) homogeneous form of x -> a x + b, so affine powers reduce to
// matrix powers computed by binary squaring.
inline Matrix homogeneous(const Matrix& a, const Vector& b) {
  const Eigen::Index d = a.rows();
  Matrix t = Matrix::Zero(d + 1, d + 1);
  t.topLeftCorner(d, d) = a;
  t.topRightCorner(d, 1) = b;
  t(d, d) = 1.0;
  return t;
}

}  // namespace detail

// Repeated-squaring table for the homogeneous form of an affine map; lookup
// of S^n costs O(log n) matrix products.
class PowerCache {
 public:
  PowerCache(const Matrix& a, const Vector& b) { squares_.push_back(detail::homogeneous(a, b)); }

  Vector apply_power(long n, const Vector& x) const {
    const Eigen::Index d = x.size();
    Vector hom(d + 1);
    hom.head(d) = x;
    hom[d] = 1.0;
    long bit = 0;
    for (long rest = n; rest > 0; rest >>= 1, ++bit) {
      if (rest & 1) hom = square(bit) * hom;
    }
    return hom.head(d);
  }

 private:
  // the table grows on demand; share a cache across threads only after
  // warming it with the largest exponent
  const Matrix& square(long j) const {
    while (static_cast<long>(squares_.size()) <= j) {
      squares_.push_back(squares_.back() * squares_.back());
    }
    return squares_[static_cast<size_t>(j)];
  }

  mutable std::vector<Matrix> squares_;
};

// S^n x. Affine maps go through the squaring cache; projections use their
// idempotence (P^n = P exactly); everything else is n-fold application. A
// result past the overflow guard signals a non-admissible mapping.
inline Vector apply_power(const MapOp& op, long n, const Vector& x) {
  if (n < 1) throw ArgumentError("apply_power: exponent must be >= 1");
  Vector out;
  switch (op.kind) {
    case MapOp::Kind::affine: {
      PowerCache cache(op.a, op.b);
      out = cache.apply_power(n, x);
      break;
    }
    case MapOp::Kind::projection:
      out = project(op.set, x);
      break;
    case MapOp::Kind::negation:
      out = (n % 2 == 0) ? x : Vector(-x);
      break;
    case MapOp::Kind::composite: {
      out = x;
      for (long i = 0; i < n; ++i) {
        out = apply(op, out);
        if (out.norm() > kDivergenceGuard) {
          throw DivergenceError("apply_power: iterate magnitude exceeded the overflow guard");
        }
      }
      break;
    }
  }
  if (!out.allFinite() || out.norm() > kDivergenceGuard) {
    throw DivergenceError("apply_power: iterate magnitude exceeded the overflow guard");
  }
  return out;
}

inline Vector apply_power(const MappingSpec& s, long n, const Vector& x) {
  return apply_power(s.map, n, x);
}

inline double fixed_point_residual(const MappingSpec& s, const Vector& x) {
  return (x - apply(s, x)).norm();
}

enum class MappingClass {
  nonexpansive,
  firmly_nonexpansive,
  pseudo_contraction,
  k_strict,
  asymptotically_strict,
  total_asymptotically_nonexpansive,
  taspc,
};

inline const char* to_string(MappingClass c) {
  switch (c) {
    case MappingClass::nonexpansive: return "nonexpansive";
    case MappingClass::firmly_nonexpansive: return "firmly_nonexpansive";
    case MappingClass::pseudo_contraction: return "pseudo_contraction";
    case MappingClass::k_strict: return "k_strict";
    case MappingClass::asymptotically_strict: return "asymptotically_strict";
    case MappingClass::total_asymptotically_nonexpansive:
      return "total_asymptotically_nonexpansive";
    case MappingClass::taspc: return "taspc";
  }
  return "?";
}

struct ClassReport {
  MappingClass cls = MappingClass::taspc;
  std::vector<double> worst_slack_per_n;  // index 0 is n = 1
  bool pass = false;
};

namespace detail {

// Signed slack (RHS - LHS) of the class inequality at exponent n. The
// asymptotically_strict check reads the multiplicative sequence as
// 1 + lambda_n, so the stored summable schedule maps onto a multiplicative
// sequence that decreases to 1.
inline double class_slack(const MappingSpec& s, MappingClass cls, long n, const Vector& x,
                          const Vector& y, const Vector& tx, const Vector& ty) {
  const double d2 = (x - y).squaredNorm();
  const double t2 = (tx - ty).squaredNorm();
  const double r2 = ((x - tx) - (y - ty)).squaredNorm();
  const double lam = s.lambda.eval(n);
  const double mu = s.mu.eval(n);
  switch (cls) {
    case MappingClass::nonexpansive:
      return d2 - t2;
    case MappingClass::firmly_nonexpansive:
      return d2 - t2 - r2;
    case MappingClass::pseudo_contraction:
      return d2 + r2 - t2;
    case MappingClass::k_strict:
      return d2 + s.k * r2 - t2;
    case MappingClass::asymptotically_strict:
      return (1.0 + lam) * d2 + s.k * r2 - t2;
    case MappingClass::total_asymptotically_nonexpansive:
      return std::sqrt(d2) + lam * s.xi(std::sqrt(d2)) + mu - std::sqrt(t2);
    case MappingClass::taspc:
      return d2 + s.k * r2 + lam * s.xi(std::sqrt(d2)) + mu - t2;
  }
  return 0.0;
}

}  // namespace detail

// Sampled membership check of the map in one of the classes (i)-(ix): pairs
// are drawn from the domain and the class inequality is evaluated for each
// n = 1..n_max; the report keeps the worst signed slack per n.
inline ClassReport verify_class(const MappingSpec& s, MappingClass cls, const ConvexSet& domain,
                                int n_max, int samples, std::uint64_t seed) {
  if (n_max < 1 || samples < 1) throw ArgumentError("verify_class: n_max and samples >= 1");
  Rng rng(seed);
  ClassReport report;
  report.cls = cls;
  report.worst_slack_per_n.assign(static_cast<size_t>(n_max),
                                  std::numeric_limits<double>::infinity());
  for (int i = 0; i < samples; ++i) {
    const Vector x = sample_point(domain, rng);
    const Vector y = sample_point(domain, rng);
    Vector tx = x, ty = y;
    for (long n = 1; n <= n_max; ++n) {
      tx = apply(s, tx);
      ty = apply(s, ty);
      const double slack = detail::class_slack(s, cls, n, x, y, tx, ty);
      auto& worst = report.worst_slack_per_n[static_cast<size_t>(n - 1)];
      worst = std::min(worst, slack);
    }
  }
  report.pass = true;
  for (double w : report.worst_slack_per_n) {
    if (w < -1e-8) report.pass = false;
  }
  return report;
}

// Signed slacks of the three equivalent fixed-point inequalities (p must be
// a fixed point of the map); nonnegative for every admissible parameter set.
inline std::array<double, 3> fixed_point_inequality_slacks(const MappingSpec& s, const Vector& p,
                                              const Vector& x, long n) {
  if ((p - apply(s, p)).norm() > 1e-9) {
    throw ArgumentError("fixed_point_inequality_slacks: p is not a fixed point");
  }
  const Vector tnx = apply_power(s, n, x);
  const double dist = (x - p).norm();
  const double res2 = (x - tnx).squaredNorm();
  const double lam = s.lambda.eval(n);
  const double mu = s.mu.eval(n);
  const double gauge = lam * s.xi(dist);

  const double s1 = dist * dist + s.k * res2 + gauge + mu - (tnx - p).squaredNorm();
  const double s2 =
      (x - tnx).dot(x - p) - 0.5 * (1.0 - s.k) * res2 + 0.5 * gauge + 0.5 * mu;
  const double s3 =
      0.5 * (1.0 + s.k) * res2 + 0.5 * gauge + 0.5 * mu - (x - tnx).dot(p - tnx);
  return {s1, s2, s3};
}

// Default uniform Lipschitz constant: measured operator-norm bound over the
// first 64 powers for affine maps, 1 for projections and negation.
// Composites have no structural bound and must carry a user value.
inline std::optional<double> default_lipschitz_theta(const MapOp& op) {
  switch (op.kind) {
    case MapOp::Kind::affine: {
      double worst = 0.0;
      Matrix p = Matrix::Identity(op.a.rows(), op.a.cols());
      for (int n = 1; n <= 64; ++n) {
        p = op.a * p;
        worst = std::max(worst, detail::operator_two_norm(p));
      }
      return std::max(worst, 1e-12);
    }
    case MapOp::Kind::projection:
    case MapOp::Kind::negation:
      return 1.0;
    case MapOp::Kind::composite:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace sepfp
