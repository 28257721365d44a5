#pragma once

#include <cstdint>
#include <vector>

#include "sepfp/sepfp.hpp"

namespace sepfp::testing {

// Options for the seeded affine instance generator. Every generated instance
// has an oracle-computable solution set containing the planted target.
struct InstanceOptions {
  int dim_h1 = 2;
  int dim_h2 = 2;
  int n_families = 1;
  bool convex_difference_f = false;  // use the quadratic family for f
  bool taspc_terms = false;          // nonzero k and lambda schedule
  bool singular_f = false;           // rank-deficient M so F is an affine set
  bool negation_mapping = false;     // include S = -I (forces target 0)
  double x1_scale = 2.0;
};

struct GeneratedInstance {
  ProblemInstance problem;
  SolverConfig config;
  Vector x1;
  Vector target;  // planted common solution
};

inline Matrix random_psd(Rng& rng, int dim, double ridge) {
  Matrix r(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) r(i, j) = rng.gaussian() / std::sqrt(static_cast<double>(dim));
  }
  return r.transpose() * r + ridge * Matrix::Identity(dim, dim);
}

inline Matrix random_rotation(Rng& rng, int dim) {
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) g(i, j) = rng.gaussian();
  }
  const Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

inline GeneratedInstance make_affine_instance(std::uint64_t seed, const InstanceOptions& opt) {
  Rng rng(seed);
  GeneratedInstance out;
  const int d1 = opt.dim_h1;
  const int d2 = opt.dim_h2;

  Vector target = opt.negation_mapping ? Vector(Vector::Zero(d1)) : rng.gaussian_vector(d1);
  out.target = target;

  out.problem.dim_h1 = d1;
  out.problem.dim_h2 = d2;
  out.problem.c = WholeSpace{d1};
  out.problem.q = WholeSpace{d2};

  double k_max = 0.0;
  for (int fam = 0; fam < opt.n_families; ++fam) {
    // f_i: equilibrium set contains the target by construction
    Matrix m;
    if (opt.singular_f && d1 > 1) {
      Matrix v(d1 - 1, d1);
      for (int i = 0; i < d1 - 1; ++i) {
        for (int j = 0; j < d1; ++j) v(i, j) = rng.gaussian();
      }
      m = v.transpose() * v;  // PSD with nontrivial kernel
    } else {
      m = random_psd(rng, d1, 0.5);
      if (!opt.convex_difference_f) {
        // add a skew part: still monotone, no longer symmetric
        Matrix skew(d1, d1);
        for (int i = 0; i < d1; ++i) {
          for (int j = 0; j < d1; ++j) skew(i, j) = rng.gaussian();
        }
        m += 0.3 * (skew - skew.transpose());
      }
    }
    const Vector q_vec = -m * target;
    out.problem.f.push_back(opt.convex_difference_f
                                ? Bifunction::convex_difference(m, q_vec, out.problem.c)
                                : Bifunction::monotone_affine(m, q_vec, out.problem.c));

    // A_i and g_i: the image of the target solves g_i
    Matrix a(d2, d1);
    for (int i = 0; i < d2; ++i) {
      for (int j = 0; j < d1; ++j) a(i, j) = rng.gaussian() / std::sqrt(static_cast<double>(d1));
    }
    out.problem.a.push_back(a);
    if (opt.singular_f) {
      // keep the solution set affine: the only constraint comes from f
      out.problem.g.push_back(Bifunction::zero(out.problem.q));
    } else {
      const Matrix g_mat = random_psd(rng, d2, 0.5);
      const Vector s_vec = -g_mat * (a * target);
      out.problem.g.push_back(Bifunction::monotone_affine(g_mat, s_vec, out.problem.q));
    }

    // S_i: contraction (or negation) fixing the target; the identity when
    // the solution set must stay an affine set
    MappingSpec spec;
    if (opt.singular_f) {
      spec.map = MapOp::affine(Matrix::Identity(d1, d1), Vector::Zero(d1));
    } else if (opt.negation_mapping && fam == 0) {
      spec.map = MapOp::negation();
    } else {
      const double c = 0.3 + 0.5 * rng.uniform();
      const Matrix b = c * random_rotation(rng, d1);
      spec.map = MapOp::affine(b, target - b * target);
    }
    if (opt.taspc_terms) {
      // geometric decay keeps theta_n from throttling late convergence at
      // desk-scale iteration budgets; both rules are summable
      spec.k = 0.2;
      spec.lambda = Schedule::geometric(0.5, 0.5);
      spec.mu = Schedule::geometric(0.1, 0.5);
      spec.xi = XiFunction::piecewise_quad(2.0);
      k_max = std::max(k_max, spec.k);
    }
    spec.lipschitz_theta = *default_lipschitz_theta(spec.map);
    out.problem.s.push_back(spec);
  }

  out.config.alpha_schedule = Schedule::constant(std::max(0.5, k_max + 0.2));
  out.config.r_schedule = Schedule::constant(1.5);
  out.config.s_schedule = Schedule::constant(1.5);
  const SpectralBound bound = spectral_bound(out.problem.a);
  out.config.gamma = bound.max_bound > 0.0 ? 0.9 / bound.max_bound : 1.0;
  out.config.tol_residual = 1e-6;
  out.config.max_iter = 5000;

  out.x1 = target + rng.gaussian_vector(d1, opt.x1_scale);
  return out;
}

// 1-D instance with EP(f) = {0}: f = <z, y-z> on the line, everything else
// trivial; the scheme contracts to 0 = P_F x1.
inline GeneratedInstance make_line_instance(double x1_value) {
  GeneratedInstance out;
  out.problem.dim_h1 = 1;
  out.problem.dim_h2 = 1;
  out.problem.c = WholeSpace{1};
  out.problem.q = WholeSpace{1};
  out.problem.f.push_back(Bifunction::monotone_affine(Matrix::Identity(1, 1),
                                                      Vector::Zero(1), out.problem.c));
  out.problem.g.push_back(Bifunction::zero(out.problem.q));
  out.problem.a.push_back(Matrix::Identity(1, 1));
  MappingSpec ident;
  ident.map = MapOp::affine(Matrix::Identity(1, 1), Vector::Zero(1));
  out.problem.s.push_back(ident);
  out.config.gamma = 0.5;
  out.config.r_schedule = Schedule::constant(1.0);
  out.config.s_schedule = Schedule::constant(1.0);
  out.config.alpha_schedule = Schedule::constant(0.5);
  out.x1 = Vector::Constant(1, x1_value);
  out.target = Vector::Zero(1);
  return out;
}

// Fully stationary instance: every component is the identity, so x_1 is
// already the answer.
inline GeneratedInstance make_stationary_instance(int dim) {
  GeneratedInstance out;
  out.problem.dim_h1 = dim;
  out.problem.dim_h2 = dim;
  out.problem.c = WholeSpace{dim};
  out.problem.q = WholeSpace{dim};
  out.problem.f.push_back(Bifunction::zero(out.problem.c));
  out.problem.g.push_back(Bifunction::zero(out.problem.q));
  out.problem.a.push_back(Matrix::Identity(dim, dim));
  MappingSpec ident;
  ident.map = MapOp::affine(Matrix::Identity(dim, dim), Vector::Zero(dim));
  out.problem.s.push_back(ident);
  out.config.gamma = 0.5;
  out.x1 = Vector::LinSpaced(dim, 1.0, static_cast<double>(dim));
  out.target = out.x1;
  return out;
}

// EP(f) = {2} while F(S) = {0}: the common solution set is empty and the
// oracle certifies it.
inline GeneratedInstance make_empty_f_instance() {
  GeneratedInstance out;
  out.problem.dim_h1 = 1;
  out.problem.dim_h2 = 1;
  out.problem.c = WholeSpace{1};
  out.problem.q = WholeSpace{1};
  out.problem.f.push_back(Bifunction::monotone_affine(
      Matrix::Identity(1, 1), Vector::Constant(1, -2.0), out.problem.c));
  out.problem.g.push_back(Bifunction::zero(out.problem.q));
  out.problem.a.push_back(Matrix::Identity(1, 1));
  MappingSpec neg;
  neg.map = MapOp::negation();
  out.problem.s.push_back(neg);
  out.config.gamma = 0.5;
  out.config.max_iter = 400;
  out.x1 = Vector::Constant(1, 1.0);
  return out;
}

}  // namespace sepfp::testing
