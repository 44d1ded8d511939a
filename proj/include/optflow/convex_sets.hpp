#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "optflow/errors.hpp"
#include "optflow/random.hpp"

namespace optflow {

using Vector = Eigen::VectorXd;

/// Points closer than this to a set count as members.
inline constexpr double kMembershipTolerance = 1e-9;
/// Largest centroid residual an intersection projection may leave behind.
inline constexpr double kFeasibilityResidual = 1e-6;
inline constexpr double kDefaultOracleTolerance = 1e-8;
inline constexpr std::size_t kDefaultOracleIterations = 100000;
/// Member distance, relative to 1 + |y|, a refined Dykstra point must reach.
inline constexpr double kRefinedResidual = 1e-14;

/// {x : <normal, x> <= offset}
struct Halfspace {
  Vector normal;
  double offset = 0.0;
};

struct Ball {
  Vector center;
  double radius = 1.0;
};

struct Box {
  Vector lo;
  Vector hi;
};

/// anchor + span(basis columns); the columns must be orthonormal.
/// A basis with zero columns describes the single point {anchor}.
struct Affine {
  Vector anchor;
  Eigen::MatrixXd basis;
};

struct Polyhedron {
  std::vector<Halfspace> faces;
};

struct ConvexSet;

/// Intersection of member sets, projected with Dykstra's algorithm.
struct Intersection {
  std::vector<ConvexSet> members;
  double tolerance = kDefaultOracleTolerance;
  std::size_t max_iterations = kDefaultOracleIterations;
};

struct ConvexSet {
  using Shape = std::variant<Halfspace, Ball, Box, Affine, Polyhedron, Intersection>;
  Shape shape;

  ConvexSet() = default;
  template <typename T>
    requires std::is_constructible_v<Shape, T&&> &&
             (!std::is_same_v<std::remove_cvref_t<T>, ConvexSet>)
  ConvexSet(T&& s) : shape(std::forward<T>(s)) {}
};

/// X0 = intersection of the members.
struct IntersectionOracle {
  std::vector<ConvexSet> members;
  double tolerance = kDefaultOracleTolerance;
  std::size_t max_iterations = kDefaultOracleIterations;
};

struct DykstraResult {
  Vector point;
  /// Max distance from the centroid of the final cycle's stage points to any member.
  double residual = 0.0;
  /// Largest change of any stage point or increment over the final cycle.
  double displacement = 0.0;
  std::size_t cycles = 0;
  bool converged = false;
  /// The cycle budget ran out and the refinement produced the point.
  bool refined = false;
};

/// Empty word is the identity. Indices are zero-based into the set list and
/// applied front to back: indices[0] first.
struct MultiProjectionWord {
  std::vector<std::size_t> indices;
};

/// Ambient dimension of a set, or throws if the set is internally inconsistent.
std::size_t dimension(const ConvexSet& set);

/// Throws InputError if the set violates its structural invariants
/// (zero normal, nonpositive radius, lo > hi, non-orthonormal basis, ...).
void validate_set(const ConvexSet& set);

std::string kind_name(const ConvexSet& set);

Vector project(const ConvexSet& set, const Vector& x);
double distance(const ConvexSet& set, const Vector& x);
/// Gradient of the squared distance: 2 (x - P(x)).
Vector sqdist_gradient(const ConvexSet& set, const Vector& x);
bool contains(const ConvexSet& set, const Vector& x, double tol = kMembershipTolerance);

/// Jacobian of the projector at x (exact for the closed forms, central
/// differences for polyhedra and intersections).
Eigen::MatrixXd projector_jacobian(const ConvexSet& set, const Vector& x);

/// Non-throwing Dykstra run; inspect `converged` and `residual`. When the
/// final iterate misses some member by more than kRefinedResidual, a
/// Gauss-Newton pass on the member residuals (signed for members Dykstra found
/// active) starts from it, and its point replaces the iterate if it gets every
/// member within kRefinedResidual. This rescues intersections that are a
/// single tangency point, where the cycles converge only sublinearly.
DykstraResult dykstra_solve(const IntersectionOracle& oracle, const Vector& x);
/// Projection onto the intersection; throws OracleFailure on budget exhaustion
/// or when the members do not appear to intersect.
Vector dykstra_project(const IntersectionOracle& oracle, const Vector& x);
double distance(const IntersectionOracle& oracle, const Vector& x);

Vector apply_word(const MultiProjectionWord& word, std::span<const ConvexSet> sets,
                  const Vector& x);

/// Flat Dirichlet weights from sorted-uniform spacings; size k >= 1.
std::vector<double> flat_simplex_weights(std::size_t k, std::mt19937_64& rng);

/// One Caratheodory term: a hull point of the generators pushed through a word.
struct DeltaTerm {
  MultiProjectionWord word;
  std::vector<double> hull_weights;
};

/// Sum_k weights[k] * word_k(sum_j hull_weights_kj * generators_j).
Vector delta_point(std::span<const Vector> generators, std::span<const ConvexSet> sets,
                   std::span<const DeltaTerm> terms, std::span<const double> weights);

/// Random element of Delta_K for K = co{generators}: m + 1 random terms with
/// word depth in [0, max_depth], combined with flat simplex weights.
Vector sample_delta_point(std::span<const Vector> generators, std::span<const ConvexSet> sets,
                          std::size_t max_depth, std::mt19937_64& rng);

/// Euclidean distance from x to co{generators} (Wolfe's min-norm-point method).
double hull_distance(std::span<const Vector> generators, const Vector& x);

}  // namespace optflow
