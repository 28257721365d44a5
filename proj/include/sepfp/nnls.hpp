#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "sepfp/errors.hpp"
#include "sepfp/space.hpp"

namespace sepfp {

struct NnlsResult {
  Vector u;         // nonnegative solution
  Vector residual;  // E u - f
  int iterations = 0;
};

// Lawson-Hanson active-set solver for  min ||E u - f||  s.t.  u >= 0.
// Terminates finitely; the passive-set least squares uses column-pivoted QR.
inline NnlsResult nnls(const Matrix& e, const Vector& f, double tol = 1e-12) {
  const Eigen::Index m = e.cols();
  NnlsResult out;
  out.u = Vector::Zero(m);
  std::vector<bool> passive(static_cast<size_t>(m), false);
  Eigen::Index n_passive = 0;

  const double wtol = tol * std::max(1.0, e.cwiseAbs().maxCoeff() * f.cwiseAbs().maxCoeff());
  const int max_outer = 3 * static_cast<int>(m) + 30;

  Vector w = e.transpose() * (f - e * out.u);
  for (int outer = 0; outer < max_outer; ++outer) {
    // pick the most violated dual coordinate among the active (zero) set
    Eigen::Index best = -1;
    double best_w = wtol;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!passive[static_cast<size_t>(i)] && w[i] > best_w) {
        best_w = w[i];
        best = i;
      }
    }
    if (best < 0) break;  // KKT satisfied
    passive[static_cast<size_t>(best)] = true;
    ++n_passive;

    for (int inner = 0; inner < max_outer; ++inner) {
      // least squares on the passive columns
      Matrix ep(e.rows(), n_passive);
      std::vector<Eigen::Index> idx;
      idx.reserve(static_cast<size_t>(n_passive));
      for (Eigen::Index i = 0; i < m; ++i) {
        if (passive[static_cast<size_t>(i)]) {
          ep.col(static_cast<Eigen::Index>(idx.size())) = e.col(i);
          idx.push_back(i);
        }
      }
      Vector z = ep.colPivHouseholderQr().solve(f);

      double alpha = 1.0;
      bool interior = true;
      for (size_t j = 0; j < idx.size(); ++j) {
        if (z[static_cast<Eigen::Index>(j)] <= 0.0) {
          interior = false;
          const double uj = out.u[idx[j]];
          const double denom = uj - z[static_cast<Eigen::Index>(j)];
          if (denom > 0.0) alpha = std::min(alpha, uj / denom);
        }
      }
      if (interior) {
        out.u.setZero();
        for (size_t j = 0; j < idx.size(); ++j) out.u[idx[j]] = z[static_cast<Eigen::Index>(j)];
        break;
      }
      // step to the boundary and drop coordinates that hit zero
      for (size_t j = 0; j < idx.size(); ++j) {
        const Eigen::Index i = idx[j];
        out.u[i] += alpha * (z[static_cast<Eigen::Index>(j)] - out.u[i]);
        if (z[static_cast<Eigen::Index>(j)] <= 0.0 && out.u[i] <= tol) {
          out.u[i] = 0.0;
          passive[static_cast<size_t>(i)] = false;
          --n_passive;
        }
      }
    }
    w = e.transpose() * (f - e * out.u);
    out.iterations = outer + 1;
  }
  out.residual = e * out.u - f;
  return out;
}

namespace detail {

// Refine an LDP solution by projecting exactly onto the affine hull of the
// active constraints (Schur-complement KKT solve). Returns true when the
// refined point is primal feasible with acceptable duals.
inline bool kkt_polish(const Matrix& g, const Vector& h, const Vector& x,
                       const std::vector<Eigen::Index>& active, double tol, Vector& z) {
  if (active.empty()) {
    z = x;
  } else {
    Matrix ga(static_cast<Eigen::Index>(active.size()), g.cols());
    Vector ha(static_cast<Eigen::Index>(active.size()));
    for (size_t j = 0; j < active.size(); ++j) {
      ga.row(static_cast<Eigen::Index>(j)) = g.row(active[j]);
      ha[static_cast<Eigen::Index>(j)] = h[active[j]];
    }
    const Matrix gram = ga * ga.transpose();
    Eigen::LDLT<Matrix> ldlt(gram);
    if (ldlt.info() != Eigen::Success) return false;
    const Vector lambda = ldlt.solve(ga * x - ha);
    if ((gram * lambda - (ga * x - ha)).cwiseAbs().maxCoeff() > tol * 10.0) return false;
    if (lambda.minCoeff() < -tol) return false;
    z = x - ga.transpose() * lambda;
  }
  const Vector viol = g * z - h;
  return viol.size() == 0 || viol.maxCoeff() <= tol;
}

}  // namespace detail

// Nearest point to x under the constraints G z <= h (least-distance program,
// solved through the Lawson-Hanson NNLS dual). Throws InfeasibleSetError when
// the dual certifies an empty constraint set. Rows are normalized internally;
// a successful NNLS solve is polished with an exact active-set KKT step.
inline Vector ldp_project(const Matrix& g_in, const Vector& h_in, const Vector& x,
                          double tol = 1e-10) {
  const Eigen::Index d = x.size();
  if (g_in.rows() == 0) return x;
  if (g_in.cols() != d) throw ArgumentError("ldp_project: constraint/point dimension mismatch");

  // drop zero rows, normalize the rest
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < g_in.rows(); ++i) {
    const double nrm = g_in.row(i).norm();
    if (nrm == 0.0) {
      if (h_in[i] < 0.0) throw InfeasibleSetError("ldp_project: zero normal with negative offset");
      continue;
    }
    keep.push_back(i);
  }
  if (keep.empty()) return x;
  Matrix g(static_cast<Eigen::Index>(keep.size()), d);
  Vector h(static_cast<Eigen::Index>(keep.size()));
  for (size_t j = 0; j < keep.size(); ++j) {
    const double nrm = g_in.row(keep[j]).norm();
    g.row(static_cast<Eigen::Index>(j)) = g_in.row(keep[j]) / nrm;
    h[static_cast<Eigen::Index>(j)] = h_in[keep[j]] / nrm;
  }
  const Eigen::Index m = g.rows();

  const Vector slack = h - g * x;
  if (slack.minCoeff() >= 0.0) return x;  // already feasible

  // LDP via NNLS:  min ||w|| s.t. -G w >= G x - h,  E = [(-G)^T; (Gx-h)^T]
  Matrix e(d + 1, m);
  e.topRows(d) = -g.transpose();
  e.row(d) = -slack.transpose();
  Vector f = Vector::Zero(d + 1);
  f[d] = 1.0;

  const NnlsResult sol = nnls(e, f);
  const double rn = sol.residual[d];
  if (std::abs(rn) <= 1e-11) {
    throw InfeasibleSetError("ldp_project: dual certificate of empty intersection");
  }
  Vector z = x - sol.residual.head(d) / rn;

  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (sol.u[i] > 0.0) active.push_back(i);
  }
  Vector polished;
  if (detail::kkt_polish(g, h, x, active, tol, polished)) return polished;

  const double worst = (g * z - h).maxCoeff();
  if (worst > std::max(tol, 1e-8)) {
    throw NumericalError("ldp_project: solution failed the feasibility check");
  }
  return z;
}

}  // namespace sepfp
