#include "safe_oco/safe_sets.hpp"

#include <cmath>
#include <sstream>

#include "safe_oco/errors.hpp"
#include "safe_oco/numerics.hpp"

namespace safe_oco {

SafeSetSpec SafeSetSpec::from_gram(Mat A_hat, double beta_bar, const Mat& V_bar,
                                   Vec b, double kappa, ActionSet action_set) {
  SafeSetSpec spec;
  const SpdInverse inv = spd_inverse_and_sqrt(V_bar);
  spec.A_hat = std::move(A_hat);
  spec.beta_bar = beta_bar;
  spec.V_bar_inv = inv.inv;
  spec.V_bar_inv_sqrt = inv.inv_sqrt;
  spec.b = std::move(b);
  spec.kappa = kappa;
  spec.action_set = std::move(action_set);
  spec.validate();
  return spec;
}

void SafeSetSpec::validate() const {
  const int d = dim();
  const int n = rows();
  if (d < 1 || n < 1) throw InvalidArgument("SafeSetSpec: empty constraint estimate");
  if (b.size() != n) throw InvalidArgument("SafeSetSpec: b has wrong length");
  if (V_bar_inv.rows() != d || V_bar_inv.cols() != d || V_bar_inv_sqrt.rows() != d ||
      V_bar_inv_sqrt.cols() != d)
    throw InvalidArgument("SafeSetSpec: V_bar inverse has wrong shape");
  if (action_set.dim() != d) throw InvalidArgument("SafeSetSpec: action set dimension mismatch");
  if (!(beta_bar >= 0.0)) throw InvalidArgument("SafeSetSpec: beta_bar must be >= 0");
  if (!(kappa >= 0.0 && kappa < b_min()))
    throw InvalidArgument("SafeSetSpec: kappa must lie in [0, b_min)");
  const double mismatch = (V_bar_inv_sqrt * V_bar_inv_sqrt - V_bar_inv).norm();
  if (mismatch > 1e-8 * std::max(1.0, V_bar_inv.norm()))
    throw InvalidArgument("SafeSetSpec: V_bar^{-1/2} squared does not match V_bar^{-1}");
}

namespace {

void check_dim(const SafeSetSpec& spec, const Vec& x, const char* who) {
  if (x.size() != spec.dim()) {
    std::ostringstream os;
    os << who << ": expected a vector in R^" << spec.dim() << ", got R^" << x.size();
    throw InvalidArgument(os.str());
  }
}

// Membership of an action-set member is checked at a 1e-12 relative slack so
// points produced by projection onto the boundary are accepted.
constexpr double kSetTol = 1e-12;

}  // namespace

bool pessimistic_contains(const SafeSetSpec& spec, const Vec& x) {
  check_dim(spec, x, "pessimistic_contains");
  if (!spec.action_set.contains(x, kSetTol)) return false;
  const double width = spec.beta_bar * weighted_norm(x, spec.V_bar_inv);
  const Vec lhs = spec.A_hat * x;
  for (int i = 0; i < spec.rows(); ++i)
    if (lhs(i) + width > spec.b(i) - spec.kappa) return false;
  return true;
}

bool optimistic_contains(const SafeSetSpec& spec, const Vec& x) {
  check_dim(spec, x, "optimistic_contains");
  if (!spec.action_set.contains(x, kSetTol)) return false;
  const double width = spec.beta_bar * weighted_norm(x, spec.V_bar_inv);
  const Vec lhs = spec.A_hat * x;
  for (int i = 0; i < spec.rows(); ++i)
    if (lhs(i) - width > spec.b(i) - spec.kappa) return false;
  return true;
}

bool relaxed_optimistic_contains(const SafeSetSpec& spec, const Vec& x) {
  check_dim(spec, x, "relaxed_optimistic_contains");
  if (!spec.action_set.contains(x, kSetTol)) return false;
  const double width = std::sqrt(static_cast<double>(spec.dim())) * spec.beta_bar *
                       (spec.V_bar_inv_sqrt * x).cwiseAbs().maxCoeff();
  const Vec lhs = spec.A_hat * x;
  for (int i = 0; i < spec.rows(); ++i)
    if (lhs(i) - width > spec.b(i) - spec.kappa) return false;
  return true;
}

double safe_scaling(const SafeSetSpec& spec, const Vec& x_tilde) {
  check_dim(spec, x_tilde, "safe_scaling");
  if (!spec.action_set.contains(x_tilde, 1e-9))
    throw PreconditionError("safe_scaling: x_tilde is not in the action set");
  if (x_tilde.isZero(0.0)) return 1.0;
  const double width = spec.beta_bar * weighted_norm(x_tilde, spec.V_bar_inv);
  const Vec c = (spec.A_hat * x_tilde).array() + width;
  double gamma = 1.0;
  for (int i = 0; i < spec.rows(); ++i) {
    if (c(i) > 0.0) gamma = std::min(gamma, (spec.b(i) - spec.kappa) / c(i));
  }
  // The closed form puts gamma * x_tilde on the boundary; back off by a few
  // ulps so the rounded point passes the membership test itself.
  for (int step = 0; step < 64; ++step) {
    if (pessimistic_contains(spec, gamma * x_tilde)) return gamma;
    gamma *= 1.0 - 0x1.0p-50;
  }
  return pessimistic_contains(spec, gamma * x_tilde) ? gamma : 0.0;
}

bool ConvexPiece::contains(const Vec& x, double tol) const {
  return max_violation(x) <= tol;
}

double ConvexPiece::max_violation(const Vec& x) const {
  double worst;
  if (action_set.kind() == ActionSet::Kind::Ball) {
    worst = x.norm() - action_set.radius();
  } else {
    worst = std::max((action_set.lower() - x).maxCoeff(),
                     (x - action_set.upper()).maxCoeff());
  }
  for (const auto& h : halfspaces) worst = std::max(worst, h.violation(x));
  return worst;
}

std::vector<ConvexPiece> relaxed_pieces(const SafeSetSpec& spec) {
  const int d = spec.dim();
  const double scale = std::sqrt(static_cast<double>(d)) * spec.beta_bar;
  std::vector<ConvexPiece> pieces;
  pieces.reserve(2 * d);
  for (int k = 0; k < d; ++k) {
    for (int xi : {1, -1}) {
      ConvexPiece piece;
      piece.action_set = spec.action_set;
      piece.k = k;
      piece.xi = xi;
      const Vec shift = scale * xi * spec.V_bar_inv_sqrt.row(k).transpose();
      for (int i = 0; i < spec.rows(); ++i) {
        piece.halfspaces.push_back(
            Halfspace{spec.A_hat.row(i).transpose() - shift, spec.b(i) - spec.kappa});
      }
      pieces.push_back(std::move(piece));
    }
  }
  return pieces;
}

bool piece_is_nonempty(const ConvexPiece& piece) {
  bool origin_ok = true;
  for (const auto& h : piece.halfspaces) origin_ok = origin_ok && h.offset >= 0.0;
  if (origin_ok) return true;
  try {
    const Vec x = project_piece(piece, Vec::Zero(piece.action_set.dim()), 1e-9, 2000);
    return piece.contains(x, 1e-7);
  } catch (const NumericalError&) {
    return false;
  }
}

std::vector<ConvexPiece> drop_empty_pieces(std::vector<ConvexPiece> pieces) {
  std::vector<ConvexPiece> kept;
  kept.reserve(pieces.size());
  for (auto& p : pieces)
    if (piece_is_nonempty(p)) kept.push_back(std::move(p));
  return kept;
}

Vec project_piece(const ConvexPiece& piece, const Vec& z, double tol, int max_sweeps) {
  if (z.size() != piece.action_set.dim())
    throw InvalidArgument("project_piece: dimension mismatch");
  if (piece.max_violation(z) <= 0.0) return z;

  std::vector<ConvexSetOp> ops;
  ops.reserve(piece.halfspaces.size() + 1);
  ops.push_back(as_set_op(piece.action_set));
  for (const auto& h : piece.halfspaces) ops.push_back(as_set_op(h));
  Vec x = dykstra_project(z, ops, DykstraOptions{tol, max_sweeps}).x;

  // With every offset strictly positive the origin is interior to the
  // halfspaces, so a radial shrink removes the O(tol) residual exactly.
  bool interior_origin = true;
  for (const auto& h : piece.halfspaces) interior_origin = interior_origin && h.offset > 0.0;
  if (interior_origin) {
    double mu = 1.0;
    for (const auto& h : piece.halfspaces) {
      const double ax = h.normal.dot(x);
      if (ax > h.offset) mu = std::min(mu, h.offset / ax);
    }
    if (piece.action_set.kind() == ActionSet::Kind::Ball) {
      const double nx = x.norm();
      if (nx > piece.action_set.radius()) mu = std::min(mu, piece.action_set.radius() / nx);
    } else {
      x = piece.action_set.project(x);
    }
    x *= mu;
  }
  return x;
}

}  // namespace safe_oco
