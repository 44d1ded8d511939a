#pragma once

#include <random>

#include "optflow/convex_sets.hpp"

namespace optflow::detail {

inline Vector random_direction(Eigen::Index dimension, std::mt19937_64& rng) {
  Vector v(dimension);
  do {
    for (Eigen::Index c = 0; c < v.size(); ++c) v(c) = standard_normal(rng);
  } while (v.norm() < 1e-6);
  return v.normalized();
}

enum class SimpleKind { Halfspace, Ball, Box };

// A random halfspace, ball or box containing Ball(p, 0.5).
inline ConvexSet random_set_around(const Vector& p, SimpleKind kind, std::mt19937_64& rng) {
  switch (kind) {
    case SimpleKind::Halfspace: {
      Vector normal = random_direction(p.size(), rng);
      const double offset = normal.dot(p) + 0.5 + uniform(rng, 0.0, 1.5);
      return Halfspace{std::move(normal), offset};
    }
    case SimpleKind::Ball: {
      Vector center = p + uniform(rng, 0.0, 1.5) * random_direction(p.size(), rng);
      const double radius = (center - p).norm() + 0.5 + uniform(rng, 0.0, 1.0);
      return Ball{std::move(center), radius};
    }
    case SimpleKind::Box:
      break;
  }
  Vector lo(p.size());
  Vector hi(p.size());
  for (Eigen::Index c = 0; c < p.size(); ++c) {
    lo(c) = p(c) - 0.5 - uniform(rng, 0.0, 1.5);
    hi(c) = p(c) + 0.5 + uniform(rng, 0.0, 1.5);
  }
  return Box{std::move(lo), std::move(hi)};
}

}  // namespace optflow::detail
