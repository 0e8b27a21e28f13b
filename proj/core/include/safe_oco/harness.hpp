#pragma once

// Trial runner, regret and violation metrics, optimum oracle and
// multi-trial aggregation.

#include <cstdint>
#include <string>
#include <vector>

#include "safe_oco/environments.hpp"
#include "safe_oco/linalg.hpp"
#include "safe_oco/osoco.hpp"

namespace safe_oco {

enum class AlgoKind { OsocoH, OsocoE, Dpp, DppCons, SoPgd, Oracle, Zero };

/// CLI names: osoco-h, osoco-e, dpp, dpp-cons, sopgd; oracle and zero are
/// reference players.
std::string to_string(AlgoKind kind);
AlgoKind algo_from_string(const std::string& name);
bool is_osoco(AlgoKind kind);

struct AlgoSpec {
  AlgoKind kind = AlgoKind::OsocoH;
  InnerKind inner = InnerKind::HedgeDescent;
  bool relaxed = true;
  double delta_h = 0.01;
  bool audit = true;
};

struct RoundRecord {
  std::int64_t t = 0;
  Vec x;
  double cost = 0.0;
  double opt_cost = 0.0;  // f_t(x*)
  double gamma = 1.0;
  int phase = 0;
  Vec static_viol;  // A x_t - b with the true A
  Vec stoch_viol;   // g_t(x_t)
};

struct TrialResult {
  std::string algo;
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  std::int64_t T = 0;
  Vec x_star;
  std::vector<RoundRecord> rounds;
  std::vector<double> regret;  // cumulative, index t-1
  bool covered = true;         // every phase's confidence set held the true A
  OsocoAudit audit;

  double final_regret() const { return regret.empty() ? 0.0 : regret.back(); }
  double max_static_violation() const;
};

/// Projection of the mean center onto {x in X : A x <= b}, tol 1e-10.
Vec compute_optimum(const std::vector<Vec>& centers, const Mat& A, const Vec& b,
                    const ActionSet& action_set);

TrialResult run_trial(const AlgoSpec& algo, const EnvConfig& env, std::int64_t T,
                      std::uint64_t seed, std::uint64_t trial);

/// Trials 0..trials-1 on a worker pool; threads = 0 reads SAFE_OCO_THREADS
/// and falls back to the hardware concurrency.
std::vector<TrialResult> run_trials(const AlgoSpec& algo, const EnvConfig& env, std::int64_t T,
                                    std::uint64_t seed, int trials, int threads = 0);

int default_thread_count();

/// Cumulative metric series of one trial, indexed by t-1.
struct TrialSeries {
  std::string algo;
  std::uint64_t trial = 0;
  std::int64_t T = 0;
  std::vector<double> regret;
  std::vector<double> static_viol_cum;  // sum_t max_i (A x_t - b)_i
  std::vector<double> static_viol_pos;  // sum_t max(0, max_i (A x_t - b)_i)
  std::vector<double> stoch_viol_cum;   // sum_t max_i g_t(x_t)_i
  std::vector<double> stoch_viol_pos;   // sum_t max(0, max_i g_t(x_t)_i)

  const std::vector<double>& metric(const std::string& name) const;
};

TrialSeries to_series(const TrialResult& trial);

const std::vector<std::string>& metric_names();

struct AggregateRow {
  std::string algo;
  std::int64_t t = 0;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;
};

struct AggregateResult {
  std::vector<AggregateRow> rows;
  int trials = 0;
};

/// Mean and sample standard deviation (n-1) per metric at each checkpoint
/// that does not exceed T. Requires at least two trials of equal length.
AggregateResult aggregate(const std::vector<TrialSeries>& trials,
                          const std::vector<std::int64_t>& checkpoints);
AggregateResult aggregate(const std::vector<TrialResult>& trials,
                          const std::vector<std::int64_t>& checkpoints);

/// Horizon ladder used for the regret and violation curves.
const std::vector<std::int64_t>& default_checkpoints();

struct RegretBoundConstants {
  double C_A = 0.0;
};

/// C_A = D G sqrt(ln 2d) + 3 D G for HedgeDescent over the relaxed family.
RegretBoundConstants hedge_descent_constants(double D, double G, int d);

/// High-probability regret bound of OSOCO with HedgeDescent at horizon T:
/// 4DG/b_min beta_T sqrt(3dT ln T) + C_A sqrt(4dT ln T) + 2DG sqrt(2T ln(1/delta)).
double osoco_regret_bound(const OsocoConfig& config);

/// HedgeDescent regret bound over M convex pieces: DG sqrt(T ln M) + 3DG sqrt(T).
double hedge_descent_regret_bound(double D, double G, std::int64_t T, std::size_t M);

}  // namespace safe_oco
