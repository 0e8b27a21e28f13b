#include "safe_oco/action_set.hpp"

#include <cmath>
#include <limits>

#include "safe_oco/errors.hpp"

namespace safe_oco {

ActionSet ActionSet::ball(int d, double radius) {
  if (d < 1) throw InvalidArgument("ActionSet::ball: d must be >= 1");
  if (!(radius > 0.0)) throw InvalidArgument("ActionSet::ball: radius must be > 0");
  ActionSet s;
  s.kind_ = Kind::Ball;
  s.dim_ = d;
  s.radius_ = radius;
  return s;
}

ActionSet ActionSet::box(Vec lower, Vec upper) {
  if (lower.size() == 0 || lower.size() != upper.size())
    throw InvalidArgument("ActionSet::box: bounds must be nonempty and equal length");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!(lower(i) <= 0.0 && upper(i) >= 0.0))
      throw InvalidArgument("ActionSet::box: the origin must be a member");
  }
  ActionSet s;
  s.kind_ = Kind::Box;
  s.dim_ = static_cast<int>(lower.size());
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  return s;
}

bool ActionSet::contains(const Vec& x, double tol) const {
  if (x.size() != dim_) throw InvalidArgument("ActionSet::contains: dimension mismatch");
  if (kind_ == Kind::Ball) return x.norm() <= radius_ + tol;
  for (int i = 0; i < dim_; ++i)
    if (x(i) < lower_(i) - tol || x(i) > upper_(i) + tol) return false;
  return true;
}

Vec ActionSet::project(const Vec& z) const {
  if (z.size() != dim_) throw InvalidArgument("ActionSet::project: dimension mismatch");
  if (kind_ == Kind::Ball) {
    const double nz = z.norm();
    return nz <= radius_ ? z : Vec(z * (radius_ / nz));
  }
  return z.cwiseMax(lower_).cwiseMin(upper_);
}

double ActionSet::max_norm() const {
  if (kind_ == Kind::Ball) return radius_;
  return lower_.cwiseAbs().cwiseMax(upper_.cwiseAbs()).norm();
}

Vec ActionSet::bbox_lower() const {
  return kind_ == Kind::Ball ? Vec(Vec::Constant(dim_, -radius_)) : lower_;
}

Vec ActionSet::bbox_upper() const {
  return kind_ == Kind::Ball ? Vec(Vec::Constant(dim_, radius_)) : upper_;
}

double ActionSet::max_step(const Vec& u) const {
  if (kind_ == Kind::Ball) {
    const double nu = u.norm();
    return nu > 0.0 ? radius_ / nu : std::numeric_limits<double>::infinity();
  }
  double s = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim_; ++i) {
    if (u(i) > 0.0) s = std::min(s, upper_(i) / u(i));
    if (u(i) < 0.0) s = std::min(s, lower_(i) / u(i));
  }
  return s;
}

}  // namespace safe_oco
