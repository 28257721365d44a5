#include <catch2/catch_amalgamated.hpp>

#include "sepfp/equilibrium.hpp"
#include "sepfp/oracle.hpp"

using namespace sepfp;

namespace {

Vector vec1(double x) { return Vector::Constant(1, x); }

ConvexSet ray_le(double bound) {
  return HalfSpaceIntersection{{HalfSpace{Vector::Constant(1, 1.0), bound}}};
}

Matrix psd2(Rng& rng, double ridge = 0.5) {
  Matrix r(2, 2);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) r(i, j) = rng.gaussian();
  }
  return r.transpose() * r + ridge * Matrix::Identity(2, 2);
}

std::vector<Bifunction> family_zoo(Rng& rng, const ConvexSet& domain) {
  std::vector<Bifunction> out;
  out.push_back(Bifunction::zero(domain));
  Matrix m = psd2(rng);
  Matrix skew(2, 2);
  skew << 0, 1.3, -1.3, 0;
  out.push_back(Bifunction::monotone_affine(m + skew, rng.gaussian_vector(2), domain));
  out.push_back(Bifunction::convex_difference(psd2(rng), rng.gaussian_vector(2), domain));
  return out;
}

}  // namespace

TEST_CASE("resolvent of the zero bifunction is the metric projection") {
  Rng rng(3);
  const std::vector<ConvexSet> domains = {
      WholeSpace{2}, Box{Vector::Constant(2, -1.0), Vector::Constant(2, 1.0)},
      Ball{Vector::Zero(2), 1.0},
      HalfSpaceIntersection{{HalfSpace{(Vector(2) << 1, 0).finished(), 0.0}}}};
  for (const auto& domain : domains) {
    const Bifunction f = Bifunction::zero(domain);
    for (int i = 0; i < 20; ++i) {
      const Vector x = rng.gaussian_vector(dim_of(domain), 2.0);
      const Vector z = resolvent(f, ResolventQuery{0.7, x});
      CHECK((z - project(domain, x)).norm() <= 1e-9);
      const Vector zi = resolvent_iterative(f, ResolventQuery{0.7, x});
      CHECK((zi - z).norm() <= 1e-9);
    }
  }
}

TEST_CASE("closed-form resolvent on the line") {
  const Bifunction f =
      Bifunction::monotone_affine(Matrix::Identity(1, 1), Vector::Zero(1), WholeSpace{1});
  const Vector z = resolvent(f, ResolventQuery{1.0, vec1(1.0)});
  CHECK(z[0] == Catch::Approx(0.5).margin(1e-12));

  const Vector zi = resolvent_iterative(f, ResolventQuery{1.0, vec1(1.0)});
  CHECK((zi - z).norm() <= 1e-7);

  CHECK(ep_residual(f, vec1(1.0), 1.0) == Catch::Approx(0.5).margin(1e-10));
  CHECK(ep_residual(f, vec1(0.0), 1.0) <= 1e-10);
}

TEST_CASE("equilibrium residual of the zero family vanishes everywhere") {
  const Bifunction f = Bifunction::zero(WholeSpace{3});
  Rng rng(9);
  for (int i = 0; i < 10; ++i) {
    CHECK(ep_residual(f, rng.gaussian_vector(3, 3.0), 0.5) == 0.0);
  }
}

TEST_CASE("the residual separates solutions from non-solutions") {
  // EP = {0} for f(x,y) = <x, y-x> on the line: points away from it keep a
  // residual proportional to their distance
  const Bifunction f =
      Bifunction::monotone_affine(Matrix::Identity(1, 1), Vector::Zero(1), WholeSpace{1});
  CHECK(ep_residual(f, vec1(0.0), 1.0) <= 1e-12);
  for (double x : {0.01, -0.05, 0.5, 3.0}) {
    CHECK(ep_residual(f, vec1(x), 1.0) > 1e-7);
    CHECK(ep_residual(f, vec1(x), 1.0) == Catch::Approx(std::abs(x) / 2.0).margin(1e-12));
  }
}

TEST_CASE("constrained resolvent lands on the active boundary") {
  // domain {z <= -1}: the unconstrained solution 0 is cut off, KKT gives -1
  const Bifunction f =
      Bifunction::monotone_affine(Matrix::Identity(1, 1), Vector::Zero(1), ray_le(-1.0));
  const Vector z = resolvent(f, ResolventQuery{1.0, vec1(0.0)});
  CHECK(z[0] == Catch::Approx(-1.0).margin(1e-8));

  // defining inequality on a grid of feasible y
  for (double y = -1.0; y >= -6.0; y -= 0.25) {
    const double value = f.eval(z, vec1(y)) + (vec1(y) - z).dot(z - vec1(0.0));
    CHECK(value >= -1e-7);
  }
}

TEST_CASE("resolvent defining inequality on samples") {
  Rng rng(17);
  const std::vector<ConvexSet> domains = {
      WholeSpace{2}, Box{Vector::Constant(2, -2.0), Vector::Constant(2, 2.0)}};
  for (const auto& domain : domains) {
    for (const auto& f : family_zoo(rng, domain)) {
      for (double r : {0.5, 2.0}) {
        const Vector x = rng.gaussian_vector(2, 2.0);
        const Vector z = resolvent(f, ResolventQuery{r, x});
        for (int i = 0; i < 100; ++i) {
          const Vector y = sample_point(domain, rng);
          CHECK(f.eval(z, y) + (y - z).dot(z - x) / r >= -1e-7);
        }
      }
    }
  }
}

TEST_CASE("resolvents are firmly nonexpansive on samples") {
  Rng rng(29);
  const std::vector<ConvexSet> domains = {
      WholeSpace{2}, Box{Vector::Constant(2, -1.5), Vector::Constant(2, 1.5)},
      Ball{Vector::Zero(2), 2.0}};
  for (const auto& domain : domains) {
    for (const auto& f : family_zoo(rng, domain)) {
      for (double r : {0.1, 1.0, 10.0}) {
        for (int i = 0; i < 40; ++i) {
          const Vector x = rng.gaussian_vector(2, 2.0);
          const Vector y = rng.gaussian_vector(2, 2.0);
          const Vector tx = resolvent(f, ResolventQuery{r, x});
          const Vector ty = resolvent(f, ResolventQuery{r, y});
          CHECK((tx - ty).squaredNorm() <= (tx - ty).dot(x - y) + 1e-8);
        }
      }
    }
  }
}

TEST_CASE("inner solver is single-valued across starts") {
  Rng rng(37);
  const ConvexSet domain = Box{Vector::Constant(2, -1.0), Vector::Constant(2, 1.0)};
  const Bifunction f = Bifunction::monotone_affine(psd2(rng), rng.gaussian_vector(2), domain);
  const ResolventQuery query{1.3, rng.gaussian_vector(2, 3.0)};
  const Vector z1 = resolvent_iterative(f, query, Vector(Vector::Constant(2, -1.0)));
  const Vector z2 = resolvent_iterative(f, query, Vector(Vector::Constant(2, 1.0)));
  CHECK((z1 - z2).norm() <= 1e-7);
}

TEST_CASE("closed form agrees with the inner solver on the whole space") {
  Rng rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    const Bifunction f =
        Bifunction::monotone_affine(psd2(rng), rng.gaussian_vector(2), WholeSpace{2});
    const ResolventQuery query{0.8, rng.gaussian_vector(2, 2.0)};
    const Vector closed = resolvent(f, query);
    const Vector iterative = resolvent_iterative(f, query);
    CHECK((closed - iterative).norm() <= 1e-7);
  }
}

TEST_CASE("condition 2.4 report on the families") {
  Rng rng(53);
  SECTION("monotone affine with PSD symmetric part passes") {
    const Bifunction f =
        Bifunction::monotone_affine(psd2(rng), rng.gaussian_vector(2), WholeSpace{2});
    CHECK(verify_bifunction_axioms(f, 200, 0).pass());
  }
  SECTION("zero bifunction passes") {
    CHECK(verify_bifunction_axioms(Bifunction::zero(WholeSpace{2}), 200, 0).pass());
  }
  SECTION("M = -I fails monotonicity with a positive violation") {
    const Bifunction bad = Bifunction::monotone_affine(-Matrix::Identity(2, 2),
                                                       Vector::Zero(2), WholeSpace{2});
    const ConditionReport report = verify_bifunction_axioms(bad, 200, 0);
    CHECK_FALSE(report.pass());
    bool found = false;
    for (const auto& check : report.checks) {
      if (check.axiom == "monotonicity") {
        found = true;
        CHECK_FALSE(check.pass);
        CHECK(check.worst_violation > 0.1);  // = max ||x-y||^2 over samples
      }
    }
    CHECK(found);
  }
}

TEST_CASE("resolvent argument validation") {
  const Bifunction f = Bifunction::zero(WholeSpace{2});
  CHECK_THROWS_AS(resolvent(f, ResolventQuery{0.0, Vector::Zero(2)}), ArgumentError);
  CHECK_THROWS_AS(resolvent(f, ResolventQuery{-1.0, Vector::Zero(2)}), ArgumentError);
  CHECK_THROWS_AS(resolvent(f, ResolventQuery{1.0, Vector::Zero(3)}), ArgumentError);
}
