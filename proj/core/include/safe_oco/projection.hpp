#pragma once

// Euclidean projection onto intersections of convex sets (Dykstra's
// alternating projection).

#include <functional>
#include <span>
#include <vector>

#include "safe_oco/action_set.hpp"
#include "safe_oco/linalg.hpp"

namespace safe_oco {

/// {x : normal^T x <= offset}
struct Halfspace {
  Vec normal;
  double offset = 0.0;

  double violation(const Vec& x) const { return normal.dot(x) - offset; }
  Vec project(const Vec& z) const;
};

/// One member of an intersection: a projector plus a signed violation
/// measure (<= 0 inside).
struct ConvexSetOp {
  std::function<Vec(const Vec&)> project;
  std::function<double(const Vec&)> violation;
};

ConvexSetOp as_set_op(const ActionSet& set);
ConvexSetOp as_set_op(const Halfspace& h);

struct DykstraOptions {
  double tol = 1e-9;
  int max_sweeps = 10000;
};

struct DykstraResult {
  Vec x;
  int sweeps = 0;
  double last_change = 0.0;
  double max_violation = 0.0;
};

/// Projects z onto the intersection of `sets`. Throws NumericalError with
/// iteration diagnostics when the sweep budget runs out.
DykstraResult dykstra_project(const Vec& z, std::span<const ConvexSetOp> sets,
                              const DykstraOptions& opts = {});

}  // namespace safe_oco
