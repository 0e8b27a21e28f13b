#pragma once

// Comparison algorithms: drift-plus-penalty with virtual queues, and safe
// OGD after a pure-exploration phase.

#include <cstdint>
#include <optional>

#include "safe_oco/action_set.hpp"
#include "safe_oco/linalg.hpp"
#include "safe_oco/numerics.hpp"
#include "safe_oco/rng.hpp"
#include "safe_oco/safe_sets.hpp"

namespace safe_oco {

struct DppState {
  Vec Q;  // virtual queues, one per constraint row
  Vec x;
  double alpha = 1.0;
  double V_penalty = 1.0;
};

/// Nominal parameters alpha = T, V = sqrt(T); the conservative variant
/// scales V by 0.01.
DppState dpp_init(int d, int n, std::int64_t T, bool conservative);

/// Proximal linearized step
///   x+ = Proj_X(x - (V grad_f + g_grads^T Q) / (2 alpha)),
/// then Q_i <- max(-g_hat_i, Q_i + g_hat_i) with g_hat the linearization of
/// g at x evaluated at x+.
DppState dpp_round(const DppState& state, const Vec& grad_f, const Vec& g_value,
                   const Mat& g_grads, const ActionSet& action_set);

/// {x : a^T x + beta ||x||_W <= offset} for SPD W and offset > 0.
class NormHalfspace {
 public:
  NormHalfspace(Vec a, double beta, const Mat& W, double offset);

  double violation(const Vec& x) const;
  /// Exact Euclidean projection: bisection on the multiplier, with the
  /// weighted-norm prox solved by bisection in the eigenbasis of W.
  Vec project(const Vec& z) const;
  /// Prox of t ||.||_W at u: argmin 0.5||x - u||^2 + t ||x||_W.
  Vec prox(const Vec& u, double t) const;

 private:
  Vec a_;
  double beta_;
  double offset_;
  Mat W_;
  Vec w_;  // eigenvalues of W
  Mat Q_;  // eigenvectors of W
};

/// Projection onto the pessimistic set {x in X : A_hat x + beta ||x||_{V^{-1}} <= b}.
Vec project_pessimistic(const SafeSetSpec& spec, const Vec& z, double tol = 1e-9);

struct SoPgdConstants {
  int d = 2;
  int n = 1;
  double rho = 0.01;
  double S_bound = 1.0;
  double D = 2.0;
  double G = 1.0;
  Vec b;
  ActionSet action_set = ActionSet::ball(2, 1.0);
  double delta = 0.01;
  double lambda = 1.0;
};

struct SoPgdState {
  enum class Phase { Explore, Exploit };
  Phase phase = Phase::Explore;
  std::int64_t T = 0;
  std::int64_t T0 = 0;
  std::int64_t t = 1;  // round about to be played
  double eta = 0.0;
  double xi = 0.0;  // exploration radius b_min / S
  GramState gram;
  std::optional<SafeSetSpec> safe_set;
  Vec x;  // action for round t
};

/// ceil(T^{2/3}) in exact integer arithmetic.
std::int64_t exploration_length(std::int64_t T);

SoPgdState sopgd_init(const SoPgdConstants& c, std::int64_t T);

/// The action for the current round. Exploration rounds draw the sign from rng.
Vec sopgd_action(SoPgdState& state, Rng& rng);

/// Absorbs the round's gradient and feedback and prepares the next action.
void sopgd_round(SoPgdState& state, const SoPgdConstants& c, const Vec& grad_f, const Vec& y);

}  // namespace safe_oco
