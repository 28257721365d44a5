#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "sepfp/errors.hpp"

namespace sepfp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Bounded linear operator between the two spaces; application is exactly
// the matrix-vector product, rows = dim of the codomain.
using LinearOperator = Eigen::MatrixXd;

inline bool all_finite(const Vector& v) { return v.allFinite(); }
inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require_finite(const Vector& v, const char* what) {
  if (v.size() < 1) throw ArgumentError(std::string(what) + ": dimension must be >= 1");
  if (!v.allFinite()) throw ArgumentError(std::string(what) + ": entries must be finite");
}

inline double inner(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw ArgumentError("inner: dimension mismatch");
  return x.dot(y);
}

inline double norm_sq(const Vector& x) { return x.squaredNorm(); }

inline LinearOperator adjoint(const LinearOperator& a) { return a.transpose(); }

namespace detail {

// Largest eigenvalue of a symmetric PSD matrix. Power iteration from the
// deterministic start (1,...,1)/sqrt(dim) until successive Rayleigh
// quotients agree to 1e-12, falling back to a full symmetric
// eigendecomposition for dim <= 64 when the iteration stalls or the start
// vector is deficient.
inline double largest_eigenvalue_sym(const Matrix& s) {
  const Eigen::Index d = s.rows();
  Vector v = Vector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  double rayleigh = v.dot(s * v);
  bool converged = false;
  for (int it = 0; it < 10000; ++it) {
    Vector w = s * v;
    const double wn = w.norm();
    if (wn == 0.0) break;  // start hit the kernel exactly
    v = w / wn;
    const double next = v.dot(s * v);
    if (std::abs(next - rayleigh) < 1e-12 * std::max(1.0, std::abs(next))) {
      rayleigh = next;
      converged = true;
      break;
    }
    rayleigh = next;
  }
  if (d <= 64) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
    const double exact = es.eigenvalues().maxCoeff();
    if (!converged || exact > rayleigh) return exact;
  }
  return rayleigh;
}

inline double operator_two_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return std::sqrt(std::max(0.0, largest_eigenvalue_sym(m.transpose() * m)));
}

}  // namespace detail

// gamma admissibility data: L_i bounds the squared operator norm of A_i,
// L = max L_i, and the admissible step interval is the open (0, 1/L).
struct SpectralBound {
  std::vector<double> per_operator;
  double max_bound = 0.0;  // L

  double gamma_upper() const {
    return max_bound > 0.0 ? 1.0 / max_bound : std::numeric_limits<double>::infinity();
  }
};

inline SpectralBound spectral_bound(const std::vector<LinearOperator>& ops) {
  if (ops.empty()) throw ArgumentError("spectral_bound: operator list must be nonempty");
  SpectralBound out;
  out.per_operator.reserve(ops.size());
  for (const auto& a : ops) {
    if (!a.allFinite()) throw ArgumentError("spectral_bound: operator entries must be finite");
    const double li = a.size() == 0 ? 0.0 : detail::largest_eigenvalue_sym(a.transpose() * a);
    out.per_operator.push_back(std::max(0.0, li));
    out.max_bound = std::max(out.max_bound, out.per_operator.back());
  }
  return out;
}

// true iff 0 < gamma < 1/L; when L = 0 every positive gamma is admissible
inline bool gamma_valid(double gamma, const SpectralBound& bound) {
  return gamma > 0.0 && gamma < bound.gamma_upper();
}

}  // namespace sepfp
