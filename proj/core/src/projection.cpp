#include "safe_oco/projection.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "safe_oco/errors.hpp"

namespace safe_oco {

Vec Halfspace::project(const Vec& z) const {
  const double nn = normal.squaredNorm();
  if (nn == 0.0) {
    if (offset >= 0.0) return z;
    throw NumericalError("Halfspace::project: empty halfspace (zero normal, negative offset)");
  }
  const double excess = normal.dot(z) - offset;
  if (excess <= 0.0) return z;
  return z - (excess / nn) * normal;
}

ConvexSetOp as_set_op(const ActionSet& set) {
  ConvexSetOp op;
  op.project = [set](const Vec& z) { return set.project(z); };
  if (set.kind() == ActionSet::Kind::Ball) {
    op.violation = [r = set.radius()](const Vec& x) { return x.norm() - r; };
  } else {
    op.violation = [lo = set.lower(), hi = set.upper()](const Vec& x) {
      return std::max((lo - x).maxCoeff(), (x - hi).maxCoeff());
    };
  }
  return op;
}

ConvexSetOp as_set_op(const Halfspace& h) {
  ConvexSetOp op;
  op.project = [h](const Vec& z) { return h.project(z); };
  const double scale = h.normal.norm();
  op.violation = [h, scale](const Vec& x) {
    const double v = h.violation(x);
    return scale > 0.0 ? v / scale : v;
  };
  return op;
}

namespace {

double max_violation(const Vec& x, std::span<const ConvexSetOp> sets) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& s : sets) worst = std::max(worst, s.violation(x));
  return worst;
}

}  // namespace

DykstraResult dykstra_project(const Vec& z, std::span<const ConvexSetOp> sets,
                              const DykstraOptions& opts) {
  DykstraResult res;
  if (sets.empty()) {
    res.x = z;
    return res;
  }
  // Already feasible: z is its own projection.
  if (max_violation(z, sets) <= 0.0) {
    res.x = z;
    res.max_violation = max_violation(z, sets);
    return res;
  }
  if (sets.size() == 1) {
    res.x = sets[0].project(z);
    res.sweeps = 1;
    res.last_change = (res.x - z).norm();
    res.max_violation = sets[0].violation(res.x);
    return res;
  }

  const std::size_t k = sets.size();
  std::vector<Vec> increments(k, Vec::Zero(z.size()));
  Vec x = z;
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    const Vec before = x;
    for (std::size_t i = 0; i < k; ++i) {
      const Vec shifted = x + increments[i];
      const Vec next = sets[i].project(shifted);
      increments[i] = shifted - next;
      x = next;
    }
    res.last_change = (x - before).norm();
    if (res.last_change <= opts.tol) {
      res.max_violation = max_violation(x, sets);
      if (res.max_violation <= opts.tol) {
        res.x = std::move(x);
        res.sweeps = sweep;
        return res;
      }
    }
  }
  std::ostringstream os;
  os << "dykstra_project: no convergence after " << opts.max_sweeps
     << " sweeps (last change " << res.last_change << ", max violation "
     << max_violation(x, sets) << ", tol " << opts.tol << ")";
  throw NumericalError(os.str());
}

}  // namespace safe_oco
