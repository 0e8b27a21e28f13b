#pragma once

#include "safe_oco/linalg.hpp"

namespace safe_oco {

/// Convex, closed action set containing the origin: a centred ball or a box.
class ActionSet {
 public:
  enum class Kind { Ball, Box };

  static ActionSet ball(int d, double radius);
  static ActionSet box(Vec lower, Vec upper);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  double radius() const { return radius_; }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }

  bool contains(const Vec& x, double tol = 0.0) const;
  Vec project(const Vec& z) const;
  /// max over members of ||x||; the diameter bound D is twice this.
  double max_norm() const;
  /// Axis-aligned bounding box of the set.
  Vec bbox_lower() const;
  Vec bbox_upper() const;
  /// Largest s >= 0 with s*u in the set, for a direction u != 0.
  double max_step(const Vec& u) const;

 private:
  Kind kind_ = Kind::Ball;
  int dim_ = 0;
  double radius_ = 0.0;
  Vec lower_;
  Vec upper_;
};

}  // namespace safe_oco
