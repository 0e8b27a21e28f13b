#include "safe_oco/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "safe_oco/errors.hpp"
#include "safe_oco/projection.hpp"

namespace safe_oco {

// ------------------------------------------------------------------------- DPP

DppState dpp_init(int d, int n, std::int64_t T, bool conservative) {
  if (d < 1 || n < 1) throw InvalidArgument("dpp_init: d and n must be >= 1");
  if (T < 1) throw InvalidArgument("dpp_init: T must be >= 1");
  DppState s;
  s.Q = Vec::Zero(n);
  s.x = Vec::Zero(d);
  s.alpha = static_cast<double>(T);
  s.V_penalty = std::sqrt(static_cast<double>(T)) * (conservative ? 0.01 : 1.0);
  return s;
}

DppState dpp_round(const DppState& state, const Vec& grad_f, const Vec& g_value,
                   const Mat& g_grads, const ActionSet& action_set) {
  const auto d = state.x.size();
  const auto n = state.Q.size();
  if (grad_f.size() != d || g_value.size() != n || g_grads.rows() != n || g_grads.cols() != d)
    throw InvalidArgument("dpp_round: dimension mismatch");
  if (!(state.alpha > 0.0)) throw InvalidArgument("dpp_round: alpha must be > 0");

  DppState next = state;
  const Vec direction = state.V_penalty * grad_f + g_grads.transpose() * state.Q;
  next.x = action_set.project(state.x - direction / (2.0 * state.alpha));
  const Vec g_hat = g_value + g_grads * (next.x - state.x);
  for (Eigen::Index i = 0; i < n; ++i) {
    next.Q(i) = std::max(-g_hat(i), state.Q(i) + g_hat(i));
    if (next.Q(i) < state.Q(i) + g_hat(i) || next.Q(i) < -g_hat(i))
      throw InvariantViolation("dpp_round: queue recursion violated");
  }
  return next;
}

// ---------------------------------------------------------------- NormHalfspace

NormHalfspace::NormHalfspace(Vec a, double beta, const Mat& W, double offset)
    : a_(std::move(a)), beta_(beta), offset_(offset), W_(W) {
  if (W.rows() != W.cols() || W.rows() != a_.size())
    throw InvalidArgument("NormHalfspace: W must be square and match a");
  if (!(beta >= 0.0)) throw InvalidArgument("NormHalfspace: beta must be >= 0");
  if (!(offset > 0.0)) throw InvalidArgument("NormHalfspace: offset must be > 0");
  Eigen::SelfAdjointEigenSolver<Mat> es(W);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
    throw NumericalError("NormHalfspace: W is not positive definite");
  w_ = es.eigenvalues();
  Q_ = es.eigenvectors();
}

double NormHalfspace::violation(const Vec& x) const {
  return a_.dot(x) + beta_ * weighted_norm(x, W_) - offset_;
}

Vec NormHalfspace::prox(const Vec& u, double t) const {
  if (t <= 0.0) return u;
  const Vec ut = Q_.transpose() * u;
  const double dual = std::sqrt((ut.array().square() / w_.array()).sum());
  if (dual <= t) return Vec::Zero(u.size());
  // theta * ||(I + theta W)^{-1} u||_W is increasing from 0 to ||u||_{W^{-1}}.
  auto phi = [&](double theta) {
    const Eigen::ArrayXd denom = 1.0 + theta * w_.array();
    return theta * std::sqrt((w_.array() * ut.array().square() / denom.square()).sum());
  };
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; phi(hi) < t; ++i) {
    if (i > 200) throw NumericalError("NormHalfspace::prox: cannot bracket the scaling");
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) < t ? lo : hi) = mid;
  }
  const double theta = 0.5 * (lo + hi);
  const Vec xt = (ut.array() / (1.0 + theta * w_.array())).matrix();
  return Q_ * xt;
}

Vec NormHalfspace::project(const Vec& z) const {
  if (violation(z) <= 0.0) return z;
  auto point = [&](double mu) { return prox(z - mu * a_, mu * beta_); };
  // The constraint value at the Lagrangian minimizer is nonincreasing in mu.
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; violation(point(hi)) > 0.0; ++i) {
    if (i > 200) throw NumericalError("NormHalfspace::project: cannot bracket the multiplier");
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (violation(point(mid)) > 0.0 ? lo : hi) = mid;
  }
  return point(hi);
}

Vec project_pessimistic(const SafeSetSpec& spec, const Vec& z, double tol) {
  std::vector<ConvexSetOp> sets;
  sets.push_back(as_set_op(spec.action_set));
  for (int i = 0; i < spec.rows(); ++i) {
    auto h = std::make_shared<NormHalfspace>(spec.A_hat.row(i).transpose(), spec.beta_bar,
                                             spec.V_bar_inv, spec.b(i) - spec.kappa);
    sets.push_back({[h](const Vec& x) { return h->project(x); },
                    [h](const Vec& x) { return h->violation(x); }});
  }
  DykstraOptions opts;
  opts.tol = tol;
  return dykstra_project(z, sets, opts).x;
}

// ---------------------------------------------------------------------- SO-PGD

std::int64_t exploration_length(std::int64_t T) {
  if (T < 1 || T > 1'000'000'000) throw InvalidArgument("exploration_length: T out of range");
  const std::int64_t target = T * T;
  auto k = static_cast<std::int64_t>(std::cbrt(static_cast<double>(target)));
  while (k * k * k < target) ++k;
  while (k > 1 && (k - 1) * (k - 1) * (k - 1) >= target) --k;
  return k;
}

SoPgdState sopgd_init(const SoPgdConstants& c, std::int64_t T) {
  if (c.b.size() != c.n) throw InvalidArgument("sopgd_init: b must have n entries");
  if (!(c.b.minCoeff() > 0.0)) throw InvalidArgument("sopgd_init: b_min must be > 0");
  if (c.action_set.dim() != c.d) throw InvalidArgument("sopgd_init: action set dimension mismatch");
  SoPgdState s;
  s.T = T;
  s.T0 = std::min(exploration_length(T), T);
  s.eta = c.D / (c.G * std::sqrt(static_cast<double>(T)));
  s.xi = c.b.minCoeff() / c.S_bound;
  for (int k = 0; k < c.d; ++k) {
    const Vec e = Vec::Unit(c.d, k);
    s.xi = std::min({s.xi, c.action_set.max_step(e), c.action_set.max_step(-e)});
  }
  s.gram = init_gram(c.d, c.n, c.lambda);
  s.x = Vec::Zero(c.d);
  return s;
}

Vec sopgd_action(SoPgdState& state, Rng& rng) {
  if (state.phase == SoPgdState::Phase::Explore) {
    const int d = static_cast<int>(state.x.size());
    const int k = static_cast<int>((state.t - 1) % d);
    const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
    state.x.setZero();
    state.x(k) = sign * state.xi;
  }
  return state.x;
}

void sopgd_round(SoPgdState& state, const SoPgdConstants& c, const Vec& grad_f, const Vec& y) {
  if (state.phase == SoPgdState::Phase::Explore) {
    rank1_update_inplace(state.gram, state.x, y);
    if (state.t == state.T0) {
      ConfidenceParams p;
      p.rho = c.rho;
      p.d = c.d;
      p.n = c.n;
      p.delta = c.delta;
      p.S_bound = c.S_bound;
      p.D = c.D;
      p.lambda = c.lambda;
      p.validate();
      const double beta = compute_beta(p, state.gram.t);
      state.safe_set = SafeSetSpec::from_gram(rls_estimate(state.gram), beta, state.gram.V, c.b,
                                              0.0, c.action_set);
      state.phase = SoPgdState::Phase::Exploit;
      state.x = project_pessimistic(*state.safe_set, state.x - state.eta * grad_f);
    }
  } else {
    state.x = project_pessimistic(*state.safe_set, state.x - state.eta * grad_f);
  }
  ++state.t;
}

}  // namespace safe_oco
