#pragma once

#include "safe_oco/linalg.hpp"

namespace safe_oco {

/// f(x) = scale * ||x - center||^2, the cost family the harness streams.
struct QuadraticCost {
  double scale = 1.0;
  Vec center;

  double value(const Vec& x) const { return scale * (x - center).squaredNorm(); }
  Vec grad(const Vec& x) const { return 2.0 * scale * (x - center); }
};

}  // namespace safe_oco
