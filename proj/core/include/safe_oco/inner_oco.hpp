#pragma once

// Phase-local online algorithms for (possibly nonconvex) action sets:
// HedgeDescent over a union of convex pieces, anytime Hedge over an
// epsilon-net, and anytime follow-the-perturbed-leader.

#include <cstdint>
#include <functional>
#include <memory>
#include <string_view>
#include <vector>

#include "safe_oco/action_set.hpp"
#include "safe_oco/cost.hpp"
#include "safe_oco/linalg.hpp"
#include "safe_oco/rng.hpp"
#include "safe_oco/safe_sets.hpp"

namespace safe_oco {

/// p'(m) proportional to p(m) exp(-zeta * losses[m]).
Vec hedge_update(const Vec& p, const Vec& losses, double zeta);

/// Inverse-CDF draw from a distribution with a single uniform u in [0, 1).
/// Lowest index wins on ties.
int sample_index(const Vec& p, double u);

/// Projected gradient step onto one convex piece.
Vec ogd_step(const Vec& x, const Vec& grad, double eta, const ConvexPiece& piece);

/// tau_j = 2^j
std::int64_t doubling_schedule(int j);

/// Axis grid over the bounding box with spacing <= 2 delta / sqrt(d); points
/// outside the set are projected onto it. Throws ResourceError past 1e7 points.
std::vector<Vec> build_epsilon_net(const ActionSet& set, double delta);

inline constexpr std::int64_t kMaxNetPoints = 10'000'000;

/// Interface OSOCO drives once per round: propose, then observe the cost.
class InnerAlgorithm {
 public:
  virtual ~InnerAlgorithm() = default;
  virtual Vec propose(Rng& rng) = 0;
  virtual void observe(const QuadraticCost& cost) = 0;
  virtual std::string_view name() const = 0;
};

struct HedgeState {
  Vec weights;
  std::int64_t round = 1;
};

struct ExpertState {
  std::vector<Vec> points;
};

/// One online-gradient-descent expert per convex piece, Hedge on top.
/// eta_t = D / (G sqrt t), zeta_t = sqrt(4 ln M) / (G D sqrt t).
class HedgeDescent final : public InnerAlgorithm {
 public:
  HedgeDescent(std::vector<ConvexPiece> pieces, double D, double G);

  Vec propose(Rng& rng) override;
  void observe(const QuadraticCost& cost) override;
  std::string_view name() const override { return "hedgedescent"; }

  const HedgeState& hedge() const { return hedge_; }
  const ExpertState& experts() const { return experts_; }
  const std::vector<ConvexPiece>& pieces() const { return pieces_; }
  int last_choice() const { return last_choice_; }
  double eta(std::int64_t t) const;
  double zeta(std::int64_t t) const;

 private:
  std::vector<ConvexPiece> pieces_;
  double D_;
  double G_;
  HedgeState hedge_;
  ExpertState experts_;
  int last_choice_ = -1;
};

struct CoverState {
  std::vector<Vec> net_points;
  Vec weights;
  int epoch = -1;
  std::int64_t tau = 0;
  double delta = 0.0;
  double eta = 0.0;
};

/// Hedge over a Delta_j-net rebuilt on every doubling epoch:
/// Delta_j = 1/(G sqrt tau_j), eta_j = sqrt(2 ln M_j / tau_j) / (G D).
/// Net points are filtered through `member` (origin always kept).
class CoverHedge final : public InnerAlgorithm {
 public:
  using Membership = std::function<bool(const Vec&)>;

  CoverHedge(ActionSet set, Membership member, double D, double G);

  Vec propose(Rng& rng) override;
  void observe(const QuadraticCost& cost) override;
  std::string_view name() const override { return "cover_hedge"; }

  const CoverState& state() const { return state_; }
  std::int64_t round() const { return t_; }

 private:
  void start_epoch(int j);

  ActionSet set_;
  Membership member_;
  double D_;
  double G_;
  CoverState state_;
  std::int64_t t_ = 1;
};

struct FtplState {
  double scale_sum = 0.0;  // sum of cost scales
  Vec weighted_centers;    // sum scale_s * v_s
  std::int64_t count = 0;
  int epoch = -1;
  double eta = 0.0;        // exponential rate of the perturbation
};

/// Follow the perturbed leader with sigma_i ~ Exp(eta_j),
/// eta_j = 1 / sqrt(2 d G^2 tau_j), exact per-piece argmin over the union.
class Ftpl final : public InnerAlgorithm {
 public:
  Ftpl(std::vector<ConvexPiece> pieces, double D, double G);

  Vec propose(Rng& rng) override;
  void observe(const QuadraticCost& cost) override;
  std::string_view name() const override { return "ftpl"; }

  /// argmin over the union of pieces of (history cost - sigma^T x).
  Vec leader(const Vec& sigma) const;
  /// history cost - sigma^T x, up to an additive constant.
  double objective(const Vec& x, const Vec& sigma) const;

  const FtplState& state() const { return state_; }
  const std::vector<ConvexPiece>& pieces() const { return pieces_; }

 private:
  Vec piece_minimizer(const ConvexPiece& piece, const Vec& sigma) const;

  std::vector<ConvexPiece> pieces_;
  double D_;
  double G_;
  int d_;
  FtplState state_;
  std::int64_t t_ = 1;
};

}  // namespace safe_oco
