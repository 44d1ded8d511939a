// Minimum-norm point of a polytope given by its vertices (Wolfe, 1976),
// applied to the generators shifted by -x.

#include <algorithm>
#include <cmath>
#include <vector>

#include "optflow/convex_sets.hpp"

namespace optflow {

namespace {

constexpr double kWeightFloor = 1e-14;
constexpr int kMaxMajorCycles = 10000;

// Minimizes |Q_S v| subject to sum(v) = 1 over the affine hull of the
// columns in `active`. Uses (Q^T Q + 1 1^T) u = 1, v = u / sum(u).
Eigen::VectorXd affine_min_norm(const Eigen::MatrixXd& q, const std::vector<int>& active) {
  const auto k = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd sub(q.rows(), k);
  for (Eigen::Index c = 0; c < k; ++c) sub.col(c) = q.col(active[c]);
  Eigen::MatrixXd gram = sub.transpose() * sub;
  gram.array() += 1.0;
  const Eigen::VectorXd u = gram.completeOrthogonalDecomposition().solve(Eigen::VectorXd::Ones(k));
  return u / u.sum();
}

}  // namespace

double hull_distance(std::span<const Vector> generators, const Vector& x) {
  if (generators.empty()) throw InputError("hull_distance: no generators");
  const Eigen::Index dim = x.size();
  const auto count = static_cast<Eigen::Index>(generators.size());
  Eigen::MatrixXd q(dim, count);
  for (Eigen::Index j = 0; j < count; ++j) {
    if (generators[j].size() != dim) throw InputError("hull_distance: dimension mismatch");
    q.col(j) = generators[j] - x;
  }
  if (!q.allFinite()) throw InputError("hull_distance: non-finite input");

  const Eigen::VectorXd sq = q.colwise().squaredNorm();
  const double scale = sq.maxCoeff();
  if (scale == 0.0) return 0.0;

  Eigen::Index start = 0;
  sq.minCoeff(&start);
  std::vector<int> active{static_cast<int>(start)};
  std::vector<double> weights{1.0};

  auto current_point = [&]() {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(dim);
    for (std::size_t s = 0; s < active.size(); ++s) y += weights[s] * q.col(active[s]);
    return y;
  };

  Eigen::VectorXd y = current_point();
  for (int major = 0; major < kMaxMajorCycles; ++major) {
    const double yy = y.squaredNorm();
    if (yy <= 1e-30 * scale) return 0.0;

    Eigen::Index entering = 0;
    const double best = (q.transpose() * y).minCoeff(&entering);
    // Duality gap: every hull point z has <z, y> >= best.
    if (yy - best <= 1e-15 * scale) break;
    if (std::find(active.begin(), active.end(), static_cast<int>(entering)) != active.end()) break;
    active.push_back(static_cast<int>(entering));
    weights.push_back(0.0);

    for (;;) {
      const Eigen::VectorXd v = affine_min_norm(q, active);
      if (v.minCoeff() > kWeightFloor) {
        for (std::size_t s = 0; s < active.size(); ++s) weights[s] = v(static_cast<Eigen::Index>(s));
        break;
      }
      double theta = 1.0;
      for (std::size_t s = 0; s < active.size(); ++s) {
        const double vs = v(static_cast<Eigen::Index>(s));
        if (vs <= kWeightFloor && weights[s] - vs > 0.0) {
          theta = std::min(theta, weights[s] / (weights[s] - vs));
        }
      }
      for (std::size_t s = 0; s < active.size(); ++s) {
        weights[s] = (1.0 - theta) * weights[s] + theta * v(static_cast<Eigen::Index>(s));
      }
      std::vector<int> kept_idx;
      std::vector<double> kept_w;
      for (std::size_t s = 0; s < active.size(); ++s) {
        if (weights[s] > kWeightFloor) {
          kept_idx.push_back(active[s]);
          kept_w.push_back(weights[s]);
        }
      }
      if (kept_idx.empty()) {
        // numerically degenerate; fall back to the entering vertex alone
        kept_idx = {static_cast<int>(entering)};
        kept_w = {1.0};
      }
      double total = 0.0;
      for (double w : kept_w) total += w;
      for (double& w : kept_w) w /= total;
      active = std::move(kept_idx);
      weights = std::move(kept_w);
      if (active.size() == 1) break;
    }
    const Eigen::VectorXd next = current_point();
    if (next.squaredNorm() >= yy && major > 0) {
      y = next;
      break;
    }
    y = next;
  }
  return y.norm();
}

}  // namespace optflow
