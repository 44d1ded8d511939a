#pragma once

#include "optflow/convex_sets.hpp"

namespace optflow::detail {

// Unchecked projection into a presized output; x and out must not alias.
void project_to(const ConvexSet& set, const Vector& x, Vector& out);

}  // namespace optflow::detail
