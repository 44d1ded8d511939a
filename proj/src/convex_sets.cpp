#include "optflow/convex_sets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "projector_detail.hpp"

namespace optflow {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& v) { return v.allFinite(); }

void project_halfspace(const Halfspace& h, const Vector& x, Vector& out) {
  const double excess = h.normal.dot(x) - h.offset;
  if (excess <= 0.0) {
    out = x;
    return;
  }
  out = x - (excess / h.normal.squaredNorm()) * h.normal;
}

void project_ball(const Ball& b, const Vector& x, Vector& out) {
  const double r = (x - b.center).norm();
  if (r <= b.radius) {
    out = x;
    return;
  }
  out = b.center + (b.radius / r) * (x - b.center);
}

void project_box(const Box& b, const Vector& x, Vector& out) {
  out = x.cwiseMax(b.lo).cwiseMin(b.hi);
}

void project_affine(const Affine& a, const Vector& x, Vector& out) {
  if (a.basis.cols() == 0) {
    out = a.anchor;
    return;
  }
  out = a.anchor + a.basis * (a.basis.transpose() * (x - a.anchor));
}

bool satisfies(const Halfspace& h, const Vector& p) {
  const double scale = 1.0 + h.normal.norm() * p.norm() + std::abs(h.offset);
  return h.normal.dot(p) - h.offset <= 1e-12 * scale;
}

// Two faces: the projection is the nearest feasible point among the
// equality-constrained projections for every active set.
void project_two_faces(const Halfspace& f1, const Halfspace& f2, const Vector& x, Vector& out) {
  Vector best;
  double best_dist = std::numeric_limits<double>::infinity();
  auto consider = [&](const Vector& candidate) {
    if (!satisfies(f1, candidate) || !satisfies(f2, candidate)) return;
    const double d = (candidate - x).squaredNorm();
    if (d < best_dist) {
      best_dist = d;
      best = candidate;
    }
  };

  consider(x);
  consider(x - ((f1.normal.dot(x) - f1.offset) / f1.normal.squaredNorm()) * f1.normal);
  consider(x - ((f2.normal.dot(x) - f2.offset) / f2.normal.squaredNorm()) * f2.normal);

  Eigen::Matrix2d gram;
  gram << f1.normal.squaredNorm(), f1.normal.dot(f2.normal), f1.normal.dot(f2.normal),
      f2.normal.squaredNorm();
  const double det = gram.determinant();
  if (std::abs(det) > 1e-12 * gram(0, 0) * gram(1, 1)) {
    const Eigen::Vector2d rhs(f1.normal.dot(x) - f1.offset, f2.normal.dot(x) - f2.offset);
    const Eigen::Vector2d lambda = gram.inverse() * rhs;
    consider(x - lambda(0) * f1.normal - lambda(1) * f2.normal);
  }

  if (!std::isfinite(best_dist)) {
    throw OracleFailure("polyhedron: no feasible candidate (empty set?)",
                        std::numeric_limits<double>::infinity());
  }
  out = best;
}

IntersectionOracle faces_oracle(const Polyhedron& p) {
  IntersectionOracle oracle;
  // faces are advertised as an exact projector, so iterate well past the default
  oracle.tolerance = 1e-12;
  oracle.members.reserve(p.faces.size());
  for (const auto& f : p.faces) oracle.members.emplace_back(f);
  return oracle;
}

void check_point(const ConvexSet& set, const Vector& x) {
  const std::size_t dim = dimension(set);
  if (static_cast<std::size_t>(x.size()) != dim) {
    throw InputError("point of dimension " + std::to_string(x.size()) + " given to a " +
                     kind_name(set) + " of dimension " + std::to_string(dim));
  }
  if (!all_finite(x)) throw InputError("point has non-finite coordinates");
}

void jacobian_into(const ConvexSet& set, const Vector& x, Eigen::MatrixXd& jac) {
  const Eigen::Index m = x.size();
  std::visit(overloaded{
                 [&](const Halfspace& h) {
                   jac.setIdentity(m, m);
                   if (h.normal.dot(x) > h.offset) jac -= h.normal * h.normal.transpose() / h.normal.squaredNorm();
                 },
                 [&](const Ball& b) {
                   const Vector d = x - b.center;
                   const double r = d.norm();
                   jac.setIdentity(m, m);
                   if (r > b.radius) {
                     const Vector u = d / r;
                     jac = (b.radius / r) * (Eigen::MatrixXd::Identity(m, m) - u * u.transpose());
                   }
                 },
                 [&](const Box& b) {
                   jac.setZero(m, m);
                   for (Eigen::Index i = 0; i < m; ++i) jac(i, i) = (x(i) >= b.lo(i) && x(i) <= b.hi(i)) ? 1.0 : 0.0;
                 },
                 [&](const Affine& a) { jac = a.basis * a.basis.transpose(); },
                 [&](const auto&) {
                   const double step = 1e-7 * std::max(1.0, x.norm());
                   jac.resize(m, m);
                   Vector probe = x;
                   Vector hi(m);
                   Vector lo(m);
                   for (Eigen::Index j = 0; j < m; ++j) {
                     probe(j) = x(j) + step;
                     detail::project_to(set, probe, hi);
                     probe(j) = x(j) - step;
                     detail::project_to(set, probe, lo);
                     probe(j) = x(j);
                     jac.col(j) = (hi - lo) / (2.0 * step);
                   }
                 },
             },
             set.shape);
}

double member_residual(const IntersectionOracle& oracle, const Vector& y) {
  Vector p(y.size());
  double worst = 0.0;
  for (const auto& m : oracle.members) {
    detail::project_to(m, y, p);
    worst = std::max(worst, (y - p).norm());
  }
  return worst;
}

// Residual of one member for the refinement and its Jacobian. Members with a
// nonzero Dykstra increment are treated as active: balls and halfspaces then
// use the signed residual to their boundary, which stays smooth across it.
void member_residual_into(const ConvexSet& set, const Vector& y, const Vector& increment, Vector& r,
                          Eigen::MatrixXd& jac) {
  const Eigen::Index m = y.size();
  const bool active = increment.squaredNorm() > 0.0;
  if (active) {
    if (const auto* b = std::get_if<Ball>(&set.shape)) {
      const Vector d = y - b->center;
      const double rho = d.norm();
      if (rho > 0.0) {
        const Vector u = d / rho;
        r = (rho - b->radius) * u;
        jac = Eigen::MatrixXd::Identity(m, m) - (b->radius / rho) * (Eigen::MatrixXd::Identity(m, m) - u * u.transpose());
        return;
      }
    }
    if (const auto* h = std::get_if<Halfspace>(&set.shape)) {
      const double nn = h->normal.squaredNorm();
      r = ((h->normal.dot(y) - h->offset) / nn) * h->normal;
      jac = h->normal * h->normal.transpose() / nn;
      return;
    }
    if (const auto* bx = std::get_if<Box>(&set.shape)) {
      r.setZero(m);
      jac.setZero(m, m);
      for (Eigen::Index j = 0; j < m; ++j) {
        if (increment(j) > 0.0) {
          r(j) = y(j) - bx->hi(j);
        } else if (increment(j) < 0.0) {
          r(j) = y(j) - bx->lo(j);
        } else {
          r(j) = y(j) - std::clamp(y(j), bx->lo(j), bx->hi(j));
          if (r(j) == 0.0) continue;
        }
        jac(j, j) = 1.0;
      }
      return;
    }
  }
  Vector p(m);
  detail::project_to(set, y, p);
  r = y - p;
  jacobian_into(set, y, jac);
  jac = Eigen::MatrixXd::Identity(m, m) - jac;
}

double refined_limit(const Vector& y) { return kRefinedResidual * (1.0 + y.norm()); }

double refinement_objective(const IntersectionOracle& oracle, const std::vector<Vector>& increments,
                            const Vector& y) {
  Vector r;
  Eigen::MatrixXd jac;
  double total = 0.0;
  for (std::size_t i = 0; i < oracle.members.size(); ++i) {
    member_residual_into(oracle.members[i], y, increments[i], r, jac);
    total += r.squaredNorm();
  }
  return total;
}

// Gauss-Newton with backtracking on the summed squared member residuals.
bool refine_feasible(const IntersectionOracle& oracle, const std::vector<Vector>& increments, Vector& y) {
  const Eigen::Index m = y.size();
  Eigen::MatrixXd normal(m, m);
  Eigen::MatrixXd jac(m, m);
  Vector grad(m);
  Vector r(m);
  double f = refinement_objective(oracle, increments, y);
  for (int iter = 0; iter < 200; ++iter) {
    if (member_residual(oracle, y) <= refined_limit(y)) return true;
    normal.setZero();
    grad.setZero();
    for (std::size_t i = 0; i < oracle.members.size(); ++i) {
      member_residual_into(oracle.members[i], y, increments[i], r, jac);
      normal.noalias() += jac.transpose() * jac;
      grad.noalias() += jac.transpose() * r;
    }
    const Vector step = normal.completeOrthogonalDecomposition().solve(grad);
    if (!step.allFinite()) return false;
    double scale = 1.0;
    bool improved = false;
    for (int k = 0; k < 40; ++k, scale *= 0.5) {
      const Vector trial = y - scale * step;
      const double ft = refinement_objective(oracle, increments, trial);
      if (ft < f) {
        y = trial;
        f = ft;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return member_residual(oracle, y) <= refined_limit(y);
}

}  // namespace

Eigen::MatrixXd projector_jacobian(const ConvexSet& set, const Vector& x) {
  check_point(set, x);
  Eigen::MatrixXd jac;
  jacobian_into(set, x, jac);
  return jac;
}

namespace detail {

void project_to(const ConvexSet& set, const Vector& x, Vector& out) {
  std::visit(overloaded{
                 [&](const Halfspace& h) { project_halfspace(h, x, out); },
                 [&](const Ball& b) { project_ball(b, x, out); },
                 [&](const Box& b) { project_box(b, x, out); },
                 [&](const Affine& a) { project_affine(a, x, out); },
                 [&](const Polyhedron& p) {
                   if (p.faces.size() == 1) {
                     project_halfspace(p.faces[0], x, out);
                   } else if (p.faces.size() == 2) {
                     project_two_faces(p.faces[0], p.faces[1], x, out);
                   } else {
                     out = dykstra_project(faces_oracle(p), x);
                   }
                 },
                 [&](const Intersection& s) {
                   out = dykstra_project(IntersectionOracle{s.members, s.tolerance, s.max_iterations}, x);
                 },
             },
             set.shape);
}

}  // namespace detail

std::size_t dimension(const ConvexSet& set) {
  return std::visit(
      overloaded{
          [](const Halfspace& h) -> std::size_t { return h.normal.size(); },
          [](const Ball& b) -> std::size_t { return b.center.size(); },
          [](const Box& b) -> std::size_t {
            if (b.lo.size() != b.hi.size()) throw InputError("box: lo and hi differ in length");
            return b.lo.size();
          },
          [](const Affine& a) -> std::size_t { return a.anchor.size(); },
          [](const Polyhedron& p) -> std::size_t {
            if (p.faces.empty()) throw InputError("polyhedron: no faces");
            return p.faces.front().normal.size();
          },
          [](const Intersection& s) -> std::size_t {
            if (s.members.empty()) throw InputError("intersection: no members");
            return dimension(s.members.front());
          },
      },
      set.shape);
}

std::string kind_name(const ConvexSet& set) {
  return std::visit(overloaded{
                        [](const Halfspace&) { return std::string("halfspace"); },
                        [](const Ball&) { return std::string("ball"); },
                        [](const Box&) { return std::string("box"); },
                        [](const Affine&) { return std::string("affine"); },
                        [](const Polyhedron&) { return std::string("polyhedron"); },
                        [](const Intersection&) { return std::string("intersection"); },
                    },
                    set.shape);
}

void validate_set(const ConvexSet& set) {
  std::visit(
      overloaded{
          [](const Halfspace& h) {
            if (h.normal.size() == 0) throw InputError("halfspace: empty normal");
            if (!all_finite(h.normal) || !std::isfinite(h.offset))
              throw InputError("halfspace: non-finite data");
            if (h.normal.norm() == 0.0) throw InputError("halfspace: zero normal");
          },
          [](const Ball& b) {
            if (b.center.size() == 0) throw InputError("ball: empty center");
            if (!all_finite(b.center) || !std::isfinite(b.radius))
              throw InputError("ball: non-finite data");
            if (!(b.radius > 0.0)) throw InputError("ball: radius must be positive");
          },
          [](const Box& b) {
            if (b.lo.size() == 0 || b.lo.size() != b.hi.size())
              throw InputError("box: lo and hi must be nonempty and equal length");
            if (!all_finite(b.lo) || !all_finite(b.hi)) throw InputError("box: non-finite data");
            if ((b.lo.array() > b.hi.array()).any()) throw InputError("box: lo > hi");
          },
          [](const Affine& a) {
            if (a.anchor.size() == 0) throw InputError("affine: empty anchor");
            if (a.basis.cols() > 0 && a.basis.rows() != a.anchor.size())
              throw InputError("affine: basis rows must match anchor length");
            if (a.basis.cols() > a.anchor.size()) throw InputError("affine: too many basis vectors");
            if (!all_finite(a.anchor) || !all_finite(a.basis)) throw InputError("affine: non-finite data");
            if (a.basis.cols() > 0) {
              const Eigen::MatrixXd gram = a.basis.transpose() * a.basis;
              const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(gram.rows(), gram.cols());
              if ((gram - eye).cwiseAbs().maxCoeff() > 1e-12)
                throw InputError("affine: basis is not orthonormal");
            }
          },
          [](const Polyhedron& p) {
            if (p.faces.empty()) throw InputError("polyhedron: no faces");
            for (const auto& f : p.faces) {
              validate_set(ConvexSet(f));
              if (f.normal.size() != p.faces.front().normal.size())
                throw InputError("polyhedron: faces differ in dimension");
            }
          },
          [](const Intersection& s) {
            if (s.members.empty()) throw InputError("intersection: no members");
            if (!(s.tolerance > 0.0)) throw InputError("intersection: tolerance must be positive");
            if (s.max_iterations == 0) throw InputError("intersection: zero iteration budget");
            const std::size_t dim = dimension(s.members.front());
            for (const auto& m : s.members) {
              validate_set(m);
              if (dimension(m) != dim) throw InputError("intersection: members differ in dimension");
            }
          },
      },
      set.shape);
}

Vector project(const ConvexSet& set, const Vector& x) {
  check_point(set, x);
  Vector out(x.size());
  detail::project_to(set, x, out);
  return out;
}

double distance(const ConvexSet& set, const Vector& x) { return (x - project(set, x)).norm(); }

Vector sqdist_gradient(const ConvexSet& set, const Vector& x) { return 2.0 * (x - project(set, x)); }

bool contains(const ConvexSet& set, const Vector& x, double tol) { return distance(set, x) <= tol; }

DykstraResult dykstra_solve(const IntersectionOracle& oracle, const Vector& x) {
  if (oracle.members.empty()) throw InputError("intersection oracle has no members");
  const std::size_t dim = dimension(oracle.members.front());
  if (static_cast<std::size_t>(x.size()) != dim) throw InputError("dykstra: dimension mismatch");
  if (!all_finite(x)) throw InputError("dykstra: non-finite start point");

  const std::size_t n = oracle.members.size();
  std::vector<Vector> increments(n, Vector::Zero(x.size()));
  std::vector<Vector> stages(n, x);
  Vector y = x;
  Vector shifted(x.size());
  Vector next(x.size());

  DykstraResult result;
  result.displacement = std::numeric_limits<double>::infinity();
  for (std::size_t cycle = 1; cycle <= oracle.max_iterations; ++cycle) {
    double moved = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      shifted = y + increments[i];
      detail::project_to(oracle.members[i], shifted, next);
      // stage points can sit still for a cycle while the increments are
      // still moving, so both have to settle
      const double correction = (shifted - next - increments[i]).norm();
      increments[i] = shifted - next;
      moved = std::max({moved, (next - stages[i]).norm(), correction});
      stages[i] = next;
      y = next;
    }
    result.cycles = cycle;
    // the first cycle compares against the start point, which says nothing
    // about convergence of the stage points
    if (cycle > 1 || n == 1) result.displacement = moved;
    if (result.displacement < oracle.tolerance) {
      result.converged = true;
      break;
    }
  }

  // Stopping on displacement can leave a tangency point far from the answer
  // while every member is still only approximately satisfied.
  if (n > 1 && member_residual(oracle, y) > refined_limit(y)) {
    Vector refined = y;
    if (refine_feasible(oracle, increments, refined)) {
      result.point = std::move(refined);
      result.residual = member_residual(oracle, result.point);
      result.refined = !result.converged;
      result.converged = true;
      return result;
    }
  }

  Vector centroid = Vector::Zero(x.size());
  for (const auto& s : stages) centroid += s;
  centroid /= static_cast<double>(n);
  double residual = 0.0;
  for (const auto& m : oracle.members) {
    detail::project_to(m, centroid, next);
    residual = std::max(residual, (centroid - next).norm());
  }
  result.residual = residual;
  result.point = std::move(y);
  return result;
}

Vector dykstra_project(const IntersectionOracle& oracle, const Vector& x) {
  DykstraResult r = dykstra_solve(oracle, x);
  if (!r.converged) {
    throw OracleFailure("dykstra: iteration budget of " + std::to_string(oracle.max_iterations) +
                            " cycles exhausted (residual " + std::to_string(r.residual) + ")",
                        r.residual);
  }
  if (r.residual > kFeasibilityResidual) {
    throw OracleFailure("dykstra: members do not intersect (residual " + std::to_string(r.residual) + ")",
                        r.residual);
  }
  return std::move(r.point);
}

double distance(const IntersectionOracle& oracle, const Vector& x) {
  return (x - dykstra_project(oracle, x)).norm();
}

Vector apply_word(const MultiProjectionWord& word, std::span<const ConvexSet> sets, const Vector& x) {
  Vector y = x;
  for (std::size_t idx : word.indices) {
    if (idx >= sets.size()) {
      throw InputError("word index " + std::to_string(idx) + " out of range for " +
                       std::to_string(sets.size()) + " sets");
    }
    y = project(sets[idx], y);
  }
  return y;
}

std::vector<double> flat_simplex_weights(std::size_t k, std::mt19937_64& rng) {
  if (k == 0) throw InputError("simplex weights need at least one component");
  std::vector<double> cuts(k - 1);
  for (auto& c : cuts) c = uniform01(rng);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> w(k);
  double prev = 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    w[i] = cuts[i] - prev;
    prev = cuts[i];
  }
  w[k - 1] = 1.0 - prev;
  return w;
}

Vector delta_point(std::span<const Vector> generators, std::span<const ConvexSet> sets,
                   std::span<const DeltaTerm> terms, std::span<const double> weights) {
  if (generators.empty()) throw InputError("delta_point: no generators");
  if (terms.size() != weights.size() || terms.empty())
    throw InputError("delta_point: need one weight per term");
  const Eigen::Index dim = generators.front().size();
  Vector result = Vector::Zero(dim);
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const auto& hw = terms[k].hull_weights;
    if (hw.size() != generators.size()) throw InputError("delta_point: hull weight count mismatch");
    Vector hull_point = Vector::Zero(dim);
    for (std::size_t j = 0; j < generators.size(); ++j) {
      if (generators[j].size() != dim) throw InputError("delta_point: generator dimension mismatch");
      hull_point += hw[j] * generators[j];
    }
    result += weights[k] * apply_word(terms[k].word, sets, hull_point);
  }
  return result;
}

Vector sample_delta_point(std::span<const Vector> generators, std::span<const ConvexSet> sets,
                          std::size_t max_depth, std::mt19937_64& rng) {
  if (generators.empty()) throw InputError("sample_delta_point: no generators");
  const std::size_t dim = generators.front().size();
  const std::size_t depth_cap = sets.empty() ? 0 : max_depth;

  std::vector<DeltaTerm> terms(dim + 1);
  for (auto& term : terms) {
    term.word.indices.resize(uniform_index(depth_cap + 1, rng));
    for (auto& idx : term.word.indices) idx = uniform_index(sets.size(), rng);
    term.hull_weights = flat_simplex_weights(generators.size(), rng);
  }
  const std::vector<double> weights = flat_simplex_weights(dim + 1, rng);
  return delta_point(generators, sets, terms, weights);
}

double standard_normal(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

}  // namespace optflow
