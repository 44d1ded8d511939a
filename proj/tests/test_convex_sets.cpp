#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "optflow/convex_sets.hpp"

using namespace optflow;

namespace {

Vector v2(double a, double b) { return Eigen::Vector2d(a, b); }

Vector random_point(Eigen::Index m, double w, std::mt19937_64& rng) {
  Vector v(m);
  for (Eigen::Index c = 0; c < m; ++c) v(c) = uniform(rng, -w, w);
  return v;
}

// Grid search for the nearest point of {x in [0,1]^2 : x1 + x2 <= 1}: a coarse
// sweep, then a fine sweep around the coarse winner.
Vector grid_nearest_in_triangle(const Vector& x) {
  auto feasible = [](double a, double b) { return a >= 0 && a <= 1 && b >= 0 && b <= 1 && a + b <= 1 + 1e-12; };
  Vector best = v2(0, 0);
  double best_d = std::numeric_limits<double>::infinity();
  auto sweep = [&](double a0, double a1, double b0, double b1, double step) {
    for (double a = a0; a <= a1 + 1e-12; a += step) {
      for (double b = b0; b <= b1 + 1e-12; b += step) {
        if (!feasible(a, b)) continue;
        const double d = (v2(a, b) - x).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = v2(a, b);
        }
      }
    }
  };
  sweep(0, 1, 0, 1, 1e-2);
  const Vector c = best;
  sweep(c(0) - 2e-2, c(0) + 2e-2, c(1) - 2e-2, c(1) + 2e-2, 5e-5);
  return best;
}

}  // namespace

TEST_CASE("closed-form projections") {
  CHECK((project(Halfspace{v2(1, 0), 1.0}, v2(3, 0)) - v2(1, 0)).norm() < 1e-15);
  CHECK((project(Ball{v2(0, 0), 1.0}, v2(0.5, 0)) - v2(0.5, 0)).norm() == 0.0);
  CHECK((project(Box{v2(0, 0), v2(1, 1)}, v2(2, -1)) - v2(1, 0)).norm() == 0.0);

  Eigen::MatrixXd basis(3, 1);
  basis << 0, 0, 1;
  const Vector p = project(Affine{Eigen::Vector3d(1, 2, 0), basis}, Eigen::Vector3d(5, 5, 5));
  CHECK((p - Eigen::Vector3d(1, 2, 5)).norm() < 1e-15);
  CHECK((project(Affine{v2(4, 4), Eigen::MatrixXd(2, 0)}, v2(0, 0)) - v2(4, 4)).norm() == 0.0);
}

TEST_CASE("distance and gradient examples") {
  CHECK(distance(Ball{v2(0, 0), 1.0}, v2(2, 0)) == doctest::Approx(1.0));
  CHECK(distance(Ball{v2(0, 0), 1.0}, v2(0.3, -0.2)) == 0.0);
  CHECK(distance(Halfspace{v2(0, 1), 0.0}, v2(5, 3)) == doctest::Approx(3.0));
  CHECK((sqdist_gradient(Ball{v2(0, 0), 1.0}, v2(2, 0)) - v2(2, 0)).norm() < 1e-15);
  CHECK(sqdist_gradient(Ball{v2(0, 0), 1.0}, v2(0.1, 0.1)).norm() == 0.0);
  CHECK((sqdist_gradient(Box{v2(0, 0), v2(1, 1)}, v2(2, -1)) - v2(2, -2)).norm() == 0.0);
  CHECK(contains(Box{v2(0, 0), v2(1, 1)}, v2(1 + 1e-10, 0.5)));
  CHECK_FALSE(contains(Box{v2(0, 0), v2(1, 1)}, v2(1 + 1e-8, 0.5)));
}

TEST_CASE("set validation") {
  CHECK_THROWS_AS(validate_set(Halfspace{v2(0, 0), 1.0}), InputError);
  CHECK_THROWS_AS(validate_set(Ball{v2(0, 0), 0.0}), InputError);
  CHECK_THROWS_AS(validate_set(Box{v2(1, 0), v2(0, 1)}), InputError);
  Eigen::MatrixXd skew(2, 1);
  skew << 1, 1;
  CHECK_THROWS_AS(validate_set(Affine{v2(0, 0), skew}), InputError);
  CHECK_NOTHROW(validate_set(Affine{v2(0, 0), skew / std::sqrt(2.0)}));
  CHECK_THROWS_AS(project(Ball{v2(0, 0), 1.0}, Eigen::Vector3d(1, 2, 3)), InputError);
  CHECK_THROWS_AS(dimension(Box{v2(0, 0), Eigen::Vector3d(1, 1, 1)}), InputError);
  CHECK(kind_name(Intersection{{Ball{v2(0, 0), 1.0}}}) == "intersection");
}

TEST_CASE("dykstra examples") {
  const IntersectionOracle orthant{{Halfspace{v2(-1, 0), 0.0}, Halfspace{v2(0, -1), 0.0}}};
  CHECK((dykstra_project(orthant, v2(-1, -1)) - v2(0, 0)).norm() < 1e-8);

  const IntersectionOracle tangent{{Ball{v2(0, 0), 1.0}, Ball{v2(2, 0), 1.0}}};
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) {
    CHECK((dykstra_project(tangent, random_point(2, 5, rng)) - v2(1, 0)).norm() < 1e-6);
  }

  // singleton from a ball touching a halfspace
  const IntersectionOracle touching{{Ball{v2(0, 0), 1.0}, Halfspace{v2(-1, 0), -1.0}}};
  CHECK((dykstra_project(touching, v2(3, 4)) - v2(1, 0)).norm() < 1e-6);
}

TEST_CASE("dykstra box and halfspace against grid search") {
  const IntersectionOracle tri{{Box{v2(0, 0), v2(1, 1)}, Halfspace{v2(1, 1), 1.0}}};
  const Vector y = dykstra_project(tri, v2(1, 1));
  CHECK((y - v2(0.5, 0.5)).norm() < 1e-6);
  CHECK((y - grid_nearest_in_triangle(v2(1, 1))).norm() < 1e-4);

  std::mt19937_64 rng(11);
  for (int k = 0; k < 20; ++k) {
    const Vector x = random_point(2, 3, rng);
    CHECK((dykstra_project(tri, x) - grid_nearest_in_triangle(x)).norm() < 1e-4);
  }
}

TEST_CASE("dykstra on disjoint balls reports the gap") {
  const IntersectionOracle apart{{Ball{v2(0, 0), 1.0}, Ball{v2(3, 0), 1.0}}};
  const DykstraResult r = dykstra_solve(apart, v2(0.5, 2.0));
  CHECK(r.residual == doctest::Approx(0.5).epsilon(1e-3));
  try {
    dykstra_project(apart, v2(0.5, 2.0));
    FAIL("expected OracleFailure");
  } catch (const OracleFailure& e) {
    CHECK(e.residual() == doctest::Approx(0.5).epsilon(1e-3));
  }
}

TEST_CASE("two-face polyhedron closed form matches the iterative path") {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 300; ++k) {
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(uniform_index(3, rng));
    const Vector p = random_point(m, 2, rng);
    std::vector<Halfspace> faces;
    for (int f = 0; f < 2; ++f) {
      Vector a(m);
      for (Eigen::Index c = 0; c < m; ++c) a(c) = standard_normal(rng);
      faces.push_back(Halfspace{a, a.dot(p) + uniform(rng, 0.1, 1.0)});
    }
    const Vector x = random_point(m, 6, rng);
    const Vector closed = project(Polyhedron{faces}, x);
    const Vector iterative = dykstra_project(IntersectionOracle{{faces[0], faces[1]}, 1e-13}, x);
    CHECK((closed - iterative).norm() < 1e-8);
  }
}

TEST_CASE("projector jacobian matches finite differences") {
  std::mt19937_64 rng(5);
  Eigen::MatrixXd basis(3, 2);
  basis << 1, 0, 0, 1, 0, 0;
  const std::vector<ConvexSet> sets = {Halfspace{Eigen::Vector3d(1, 2, -1), 0.5}, Ball{Eigen::Vector3d(1, 0, 0), 1.5},
                                       Box{Eigen::Vector3d(-1, -1, -1), Eigen::Vector3d(1, 2, 3)},
                                       Affine{Eigen::Vector3d(0, 0, 1), basis}};
  for (const auto& set : sets) {
    for (int k = 0; k < 50; ++k) {
      const Vector x = random_point(3, 5, rng);
      const Eigen::MatrixXd jac = projector_jacobian(set, x);
      const double h = 1e-6;
      for (Eigen::Index j = 0; j < 3; ++j) {
        Vector up = x;
        Vector down = x;
        up(j) += h;
        down(j) -= h;
        const Vector fd = (project(set, up) - project(set, down)) / (2 * h);
        CHECK((fd - jac.col(j)).norm() < 1e-5);
      }
    }
  }
}

TEST_CASE("multi-projection words") {
  const std::vector<ConvexSet> one = {Ball{v2(0, 0), 1.0}};
  CHECK((apply_word({}, one, v2(3, 4)) - v2(3, 4)).norm() == 0.0);
  CHECK((apply_word({{0}}, one, v2(2, 0)) - v2(1, 0)).norm() < 1e-15);
  const std::vector<ConvexSet> halves = {Halfspace{v2(1, 0), 0.0}, Halfspace{v2(0, 1), 0.0}};
  // word (2, 1): second set first
  CHECK((apply_word({{1, 0}}, halves, v2(1, 1)) - v2(0, 0)).norm() < 1e-15);
  CHECK_THROWS_AS(apply_word({{2}}, halves, v2(1, 1)), InputError);
}

TEST_CASE("flat simplex weights") {
  std::mt19937_64 rng(9);
  for (std::size_t k = 1; k < 8; ++k) {
    const auto w = flat_simplex_weights(k, rng);
    REQUIRE(w.size() == k);
    CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    for (double x : w) CHECK(x >= 0.0);
  }
  CHECK_THROWS_AS(flat_simplex_weights(0, rng), InputError);
}

TEST_CASE("delta points") {
  const std::vector<ConvexSet> sets = {Ball{v2(1, 0), 2.0}, Ball{v2(-1, 0), 2.0}};
  const std::vector<Vector> one = {v2(4, 1)};
  std::mt19937_64 rng(1);
  CHECK((sample_delta_point(one, sets, 0, rng) - v2(4, 1)).norm() < 1e-15);

  const std::vector<Vector> gens = {v2(4, 1), v2(-3, 2), v2(0, -5)};
  const std::vector<DeltaTerm> terms = {{{}, {0.2, 0.3, 0.5}}, {{{0, 1}}, {1.0, 0.0, 0.0}}, {{{1}}, {0.0, 1.0, 0.0}}};
  const std::vector<double> weights = {1.0, 0.0, 0.0};
  const Vector hull_point = 0.2 * gens[0] + 0.3 * gens[1] + 0.5 * gens[2];
  CHECK((delta_point(gens, sets, terms, weights) - hull_point).norm() < 1e-14);

  // every sample stays within the hull allowance of the generators
  const IntersectionOracle x0{sets};
  for (int k = 0; k < 200; ++k) {
    std::vector<Vector> g;
    for (int j = 0; j < 3; ++j) g.push_back(random_point(2, 6, rng));
    const Vector y = sample_delta_point(g, sets, 5, rng);
    double reach = 0.0;
    for (const auto& p : g) reach = std::max(reach, distance(x0, p));
    CHECK(hull_distance(g, y) <= 2 * reach + 1e-6);
  }
}

TEST_CASE("projector axioms on random balls and boxes") {
  std::mt19937_64 rng(77);
  for (int k = 0; k < 500; ++k) {
    const Vector c = random_point(3, 2, rng);
    const ConvexSet ball = Ball{c, uniform(rng, 0.2, 3.0)};
    const Vector lo = random_point(3, 2, rng);
    const ConvexSet box = Box{lo, lo + Eigen::Vector3d(1, 2, 0.5)};
    for (const auto& set : {ball, box}) {
      const Vector x = random_point(3, 6, rng);
      const Vector y = random_point(3, 6, rng);
      const Vector px = project(set, x);
      const Vector py = project(set, y);
      CHECK((px - py).norm() <= (x - y).norm() + 1e-9);
      CHECK((px - x).dot(px - py) <= 1e-9);
      const double da = (x - px).norm();
      const double db = (y - py).norm();
      CHECK((x - px).dot(y - x) <= da * std::abs(da - db) + 1e-9);
      CHECK((project(set, px) - px).norm() <= 1e-12);  // idempotent
    }
  }
}
