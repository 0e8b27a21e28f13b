#pragma once

// Optimistically safe OCO: phased constraint estimation, an inner online
// algorithm run on the optimistic set, and safe scaling into the
// pessimistic set.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "safe_oco/action_set.hpp"
#include "safe_oco/cost.hpp"
#include "safe_oco/inner_oco.hpp"
#include "safe_oco/numerics.hpp"
#include "safe_oco/rng.hpp"
#include "safe_oco/safe_sets.hpp"

namespace safe_oco {

enum class OsocoMode { H, E };
enum class InnerKind { HedgeDescent, CoverHedge, Ftpl };

std::string to_string(OsocoMode mode);
std::string to_string(InnerKind kind);
InnerKind inner_kind_from_string(const std::string& s);

/// Problem constants known to the learner.
struct ProblemConstants {
  int d = 2;
  int n = 1;
  double rho = 0.01;
  double S_bound = 1.0;
  double D = 2.0;
  double G = 1.0;
  Vec b;
  ActionSet action_set = ActionSet::ball(2, 1.0);
};

struct OsocoConfig {
  OsocoMode mode = OsocoMode::H;
  std::int64_t T = 0;
  double delta = 0.01;
  double kappa = 0.0;
  double lambda = 1.0;
  double rho = 0.0;
  double S_bound = 1.0;
  double D = 1.0;
  double G = 1.0;
  Vec b;
  double b_min = 0.0;
  int d = 1;
  int n = 1;
  InnerKind inner = InnerKind::HedgeDescent;
  bool relaxed = true;
  ActionSet action_set = ActionSet::ball(1, 1.0);

  ConfidenceParams confidence() const;
  /// Mode / tightening / regularization consistency checks.
  void validate() const;
};

/// Mode H: kappa = 0 and the given delta. Mode E: delta = min(1/2,
/// b_min/(2 S D T)), kappa = b_min / T. Both: lambda = max(1, D^2).
OsocoConfig configure(OsocoMode mode, const ProblemConstants& constants, std::int64_t T,
                      double delta_h = 0.01, InnerKind inner = InnerKind::HedgeDescent,
                      bool relaxed = true);

struct PhaseRecord {
  int j = 1;
  std::int64_t t_start = 1;
  SafeSetSpec spec;
  Mat V_bar;
  double logdet_start = 0.0;
  std::vector<ConvexPiece> pieces;
  std::unique_ptr<InnerAlgorithm> inner;
};

/// Freezes beta, A_hat and V_bar at round t and starts a fresh inner algorithm.
PhaseRecord begin_phase(const GramState& gram, const OsocoConfig& config, std::int64_t t,
                        int j = 1);

struct ActionChoice {
  Vec x;
  Vec x_tilde;
  double gamma = 1.0;
};

ActionChoice select_action(PhaseRecord& phase, Rng& rng);

/// Sends the cost to the inner algorithm, applies the rank-1 update and
/// returns whether the phase continues: det(V_{t+1}) <= 2 det(V_bar) and t < T.
bool observe(PhaseRecord& phase, GramState& gram, const OsocoConfig& config,
             const QuadraticCost& cost, const Vec& y, const Vec& x);

/// Running invariant audit for a single run.
struct OsocoAudit {
  int phases = 0;
  double elliptic_sum = 0.0;      // sum ||x_t||^2_{V_t^{-1}}
  double min_gamma_margin = 0.0;  // min over rounds of gamma_t - bound_t
  std::int64_t rounds = 0;
};

/// Bound on the phase count, 4 d ln T.
double phase_count_bound(int d, std::int64_t T);
/// Elliptic potential bound 2 d ln(1 + m / (lambda d)).
double elliptic_bound(int d, double lambda, std::int64_t m);
/// Lower bound on the safe scaling at the played action. For the relaxed
/// family: 1 - beta (sqrt(d)||V^{-1/2}x||_inf + ||x||_{V^{-1}}) / (b_min - kappa);
/// otherwise 1 - 2 beta ||x||_{V^{-1}} / (b_min - kappa).
double gamma_lower_bound(const SafeSetSpec& spec, const Vec& x, bool relaxed);

/// Full OSOCO driver: owns the Gram state and the current phase.
class Osoco {
 public:
  explicit Osoco(OsocoConfig config, bool audit = false);

  ActionChoice act(Rng& rng);
  void feedback(const QuadraticCost& cost, const Vec& y);

  const OsocoConfig& config() const { return config_; }
  const GramState& gram() const { return gram_; }
  const PhaseRecord& phase() const { return *phase_; }
  int phase_index() const { return phase_ ? phase_->j : 0; }
  const OsocoAudit& audit() const { return audit_; }
  /// Called with each phase's (V_bar, A_hat, beta) as it is frozen.
  void set_phase_hook(std::function<void(const PhaseRecord&)> hook) { hook_ = std::move(hook); }
  /// Phase-count check; throws InvariantViolation when audit is on.
  void finish();

 private:
  void audit_round(const ActionChoice& choice);

  OsocoConfig config_;
  bool audit_on_;
  GramState gram_;
  std::unique_ptr<PhaseRecord> phase_;
  bool need_new_phase_ = true;
  int next_j_ = 1;
  ActionChoice last_;
  OsocoAudit audit_;
  std::function<void(const PhaseRecord&)> hook_;
};

}  // namespace safe_oco
