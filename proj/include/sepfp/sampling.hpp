#pragma once

#include <cmath>

#include "sepfp/convex.hpp"
#include "sepfp/rng.hpp"

namespace sepfp {

// Draw a point of the set for sampled verification. Unconstrained variants
// use a gaussian cloud; sets without a direct sampler take the projection of
// a gaussian draw, which lands in the set by construction.
inline Vector sample_point(const ConvexSet& s, Rng& rng, double scale = 2.0) {
  const Eigen::Index d = dim_of(s);
  return std::visit(
      [&](const auto& v) -> Vector {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, WholeSpace>) {
          return rng.gaussian_vector(d, scale);
        } else if constexpr (std::is_same_v<T, Box>) {
          Vector z(d);
          for (Eigen::Index i = 0; i < d; ++i) z[i] = rng.uniform(v.lower[i], v.upper[i]);
          return z;
        } else if constexpr (std::is_same_v<T, Ball>) {
          Vector dir = rng.gaussian_vector(d);
          const double n = dir.norm();
          if (n == 0.0) return v.center;
          const double rad =
              v.radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
          return v.center + (rad / n) * dir;
        } else {
          return project(s, rng.gaussian_vector(d, scale));
        }
      },
      s);
}

}  // namespace sepfp
