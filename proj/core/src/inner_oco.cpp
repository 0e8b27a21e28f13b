#include "safe_oco/inner_oco.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "safe_oco/errors.hpp"

namespace safe_oco {

Vec hedge_update(const Vec& p, const Vec& losses, double zeta) {
  if (p.size() != losses.size() || p.size() == 0)
    throw InvalidArgument("hedge_update: weights and losses must have equal, nonzero length");
  if (!(zeta >= 0.0)) throw InvalidArgument("hedge_update: zeta must be >= 0");
  if (losses.hasNaN()) throw InvalidArgument("hedge_update: NaN loss");
  // Shift by the smallest loss; the normalized update is shift invariant.
  const double shift = losses.minCoeff();
  Vec next(p.size());
  for (Eigen::Index m = 0; m < p.size(); ++m)
    next(m) = p(m) * std::exp(-zeta * (losses(m) - shift));
  const double total = next.sum();
  if (!(total > 0.0) || !std::isfinite(total))
    throw NumericalError("hedge_update: weight mass vanished");
  return next / total;
}

int sample_index(const Vec& p, double u) {
  if (p.size() == 0) throw InvalidArgument("sample_index: empty distribution");
  double acc = 0.0;
  int last_positive = 0;
  for (Eigen::Index m = 0; m < p.size(); ++m) {
    if (p(m) > 0.0) last_positive = static_cast<int>(m);
    acc += p(m);
    if (u < acc) return static_cast<int>(m);
  }
  return last_positive;
}

Vec ogd_step(const Vec& x, const Vec& grad, double eta, const ConvexPiece& piece) {
  if (!(eta > 0.0)) throw InvalidArgument("ogd_step: eta must be > 0");
  return project_piece(piece, x - eta * grad);
}

std::int64_t doubling_schedule(int j) {
  if (j < 0 || j > 62) throw InvalidArgument("doubling_schedule: j out of range");
  return std::int64_t{1} << j;
}

std::vector<Vec> build_epsilon_net(const ActionSet& set, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("build_epsilon_net: delta must be > 0");
  const int d = set.dim();
  if (delta >= set.max_norm()) return {Vec::Zero(d)};

  const double spacing = 2.0 * delta / std::sqrt(static_cast<double>(d));
  const Vec lo = set.bbox_lower();
  const Vec hi = set.bbox_upper();
  std::vector<std::int64_t> counts(d);
  double total = 1.0;
  for (int i = 0; i < d; ++i) {
    const double width = hi(i) - lo(i);
    counts[i] = width > 0.0 ? static_cast<std::int64_t>(std::ceil(width / spacing)) + 1 : 1;
    total *= static_cast<double>(counts[i]);
  }
  if (total > static_cast<double>(kMaxNetPoints)) {
    std::ostringstream os;
    os << "build_epsilon_net: grid of " << total << " points exceeds the cap of "
       << kMaxNetPoints << " (delta " << delta << ", d " << d << ")";
    throw ResourceError(os.str());
  }

  std::vector<Vec> net;
  net.reserve(static_cast<std::size_t>(total));
  std::vector<std::int64_t> idx(d, 0);
  Vec point(d);
  while (true) {
    for (int i = 0; i < d; ++i) {
      point(i) = counts[i] == 1 ? 0.5 * (lo(i) + hi(i))
                                : lo(i) + (hi(i) - lo(i)) * static_cast<double>(idx[i]) /
                                              static_cast<double>(counts[i] - 1);
    }
    net.push_back(set.contains(point) ? point : set.project(point));
    int i = 0;
    while (i < d && ++idx[i] == counts[i]) idx[i++] = 0;
    if (i == d) break;
  }
  return net;
}

// ---------------------------------------------------------------- HedgeDescent

HedgeDescent::HedgeDescent(std::vector<ConvexPiece> pieces, double D, double G)
    : pieces_(std::move(pieces)), D_(D), G_(G) {
  if (pieces_.empty()) throw InvalidArgument("HedgeDescent: empty piece family");
  if (!(D > 0.0 && G > 0.0)) throw InvalidArgument("HedgeDescent: D and G must be > 0");
  const auto M = static_cast<Eigen::Index>(pieces_.size());
  hedge_.weights = Vec::Constant(M, 1.0 / static_cast<double>(M));
  hedge_.round = 1;
  const int d = pieces_.front().action_set.dim();
  // Experts start at the origin, projected in case a piece excludes it.
  experts_.points.reserve(pieces_.size());
  for (const auto& piece : pieces_) experts_.points.push_back(project_piece(piece, Vec::Zero(d)));
}

double HedgeDescent::eta(std::int64_t t) const {
  return D_ / (G_ * std::sqrt(static_cast<double>(t)));
}

double HedgeDescent::zeta(std::int64_t t) const {
  const double M = static_cast<double>(pieces_.size());
  return std::sqrt(4.0 * std::log(M)) / (G_ * D_ * std::sqrt(static_cast<double>(t)));
}

Vec HedgeDescent::propose(Rng& rng) {
  last_choice_ = sample_index(hedge_.weights, uniform01(rng));
  return experts_.points[last_choice_];
}

void HedgeDescent::observe(const QuadraticCost& cost) {
  const std::int64_t t = hedge_.round;
  const auto M = static_cast<Eigen::Index>(pieces_.size());
  Vec losses(M);
  for (Eigen::Index m = 0; m < M; ++m) losses(m) = cost.value(experts_.points[m]);
  const double step = eta(t);
  for (Eigen::Index m = 0; m < M; ++m) {
    const Vec& x = experts_.points[m];
    experts_.points[m] = ogd_step(x, cost.grad(x), step, pieces_[m]);
  }
  hedge_.weights = hedge_update(hedge_.weights, losses, zeta(t));
  ++hedge_.round;
}

// ------------------------------------------------------------------ CoverHedge

CoverHedge::CoverHedge(ActionSet set, Membership member, double D, double G)
    : set_(std::move(set)), member_(std::move(member)), D_(D), G_(G) {
  if (!(D > 0.0 && G > 0.0)) throw InvalidArgument("CoverHedge: D and G must be > 0");
  start_epoch(0);
}

void CoverHedge::start_epoch(int j) {
  state_.epoch = j;
  state_.tau = doubling_schedule(j);
  state_.delta = 1.0 / (G_ * std::sqrt(static_cast<double>(state_.tau)));
  std::vector<Vec> net = build_epsilon_net(set_, state_.delta);
  state_.net_points.clear();
  const Vec origin = Vec::Zero(set_.dim());
  bool has_origin = false;
  for (auto& z : net) {
    if (member_ && !member_(z)) continue;
    has_origin = has_origin || z.isZero(0.0);
    state_.net_points.push_back(std::move(z));
  }
  if (!has_origin) state_.net_points.insert(state_.net_points.begin(), origin);
  const auto M = static_cast<Eigen::Index>(state_.net_points.size());
  state_.weights = Vec::Constant(M, 1.0 / static_cast<double>(M));
  state_.eta = std::sqrt(2.0 * std::log(static_cast<double>(M)) /
                         static_cast<double>(state_.tau)) /
               (G_ * D_);
}

Vec CoverHedge::propose(Rng& rng) {
  // Epoch j covers rounds [2^j, 2^{j+1} - 1].
  if (t_ >= 2 * state_.tau) start_epoch(state_.epoch + 1);
  return state_.net_points[sample_index(state_.weights, uniform01(rng))];
}

void CoverHedge::observe(const QuadraticCost& cost) {
  const auto M = static_cast<Eigen::Index>(state_.net_points.size());
  Vec losses(M);
  for (Eigen::Index m = 0; m < M; ++m) losses(m) = cost.value(state_.net_points[m]);
  state_.weights = hedge_update(state_.weights, losses, state_.eta);
  ++t_;
}

// ------------------------------------------------------------------------ Ftpl

Ftpl::Ftpl(std::vector<ConvexPiece> pieces, double D, double G)
    : pieces_(std::move(pieces)), D_(D), G_(G) {
  if (pieces_.empty()) throw InvalidArgument("Ftpl: empty piece family");
  if (!(D > 0.0 && G > 0.0)) throw InvalidArgument("Ftpl: D and G must be > 0");
  d_ = pieces_.front().action_set.dim();
  state_.weighted_centers = Vec::Zero(d_);
}

double Ftpl::objective(const Vec& x, const Vec& sigma) const {
  return state_.scale_sum * x.squaredNorm() -
         (2.0 * state_.weighted_centers + sigma).dot(x);
}

Vec Ftpl::piece_minimizer(const ConvexPiece& piece, const Vec& sigma) const {
  const Vec w = 2.0 * state_.weighted_centers + sigma;
  if (state_.scale_sum > 0.0) {
    // a||x||^2 - w^T x is minimized over a convex set at the projection of w/(2a).
    return project_piece(piece, w / (2.0 * state_.scale_sum), 1e-10);
  }
  Vec x = project_piece(piece, Vec::Zero(d_));
  const double wn = w.norm();
  if (wn == 0.0) return x;
  // Linear objective: projected gradient ascent on w^T x to a fixed point.
  const double step = D_ / wn;
  for (int it = 0; it < 10000; ++it) {
    Vec next = project_piece(piece, x + step * w, 1e-10);
    const double change = (next - x).norm();
    x = std::move(next);
    if (change <= 1e-8) return x;
  }
  throw NumericalError("Ftpl: projected gradient on a linear objective did not converge");
}

Vec Ftpl::leader(const Vec& sigma) const {
  if (sigma.size() != d_) throw InvalidArgument("Ftpl::leader: sigma has wrong length");
  Vec best;
  double best_val = std::numeric_limits<double>::infinity();
  for (const auto& piece : pieces_) {
    Vec x = piece_minimizer(piece, sigma);
    const double val = objective(x, sigma);
    // Strict improvement beyond rounding; lowest piece index wins ties.
    if (best.size() == 0 || val < best_val - 1e-12 * std::max(1.0, std::abs(best_val))) {
      best_val = val;
      best = std::move(x);
    }
  }
  return best;
}

Vec Ftpl::propose(Rng& rng) {
  int j = 0;
  while (doubling_schedule(j + 1) <= t_) ++j;
  if (j != state_.epoch) {
    state_.epoch = j;
    state_.eta = 1.0 / std::sqrt(2.0 * d_ * G_ * G_ * static_cast<double>(doubling_schedule(j)));
  }
  std::exponential_distribution<double> exp_dist(state_.eta);
  Vec sigma(d_);
  for (int i = 0; i < d_; ++i) sigma(i) = exp_dist(rng);
  return leader(sigma);
}

void Ftpl::observe(const QuadraticCost& cost) {
  state_.scale_sum += cost.scale;
  state_.weighted_centers += cost.scale * cost.center;
  ++state_.count;
  ++t_;
}

}  // namespace safe_oco
