#include "safe_oco/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "safe_oco/baselines.hpp"
#include "safe_oco/errors.hpp"
#include "safe_oco/projection.hpp"

namespace safe_oco {

std::string to_string(AlgoKind kind) {
  switch (kind) {
    case AlgoKind::OsocoH: return "osoco-h";
    case AlgoKind::OsocoE: return "osoco-e";
    case AlgoKind::Dpp: return "dpp";
    case AlgoKind::DppCons: return "dpp-cons";
    case AlgoKind::SoPgd: return "sopgd";
    case AlgoKind::Oracle: return "oracle";
    case AlgoKind::Zero: return "zero";
  }
  return "unknown";
}

AlgoKind algo_from_string(const std::string& name) {
  for (AlgoKind k : {AlgoKind::OsocoH, AlgoKind::OsocoE, AlgoKind::Dpp, AlgoKind::DppCons,
                     AlgoKind::SoPgd, AlgoKind::Oracle, AlgoKind::Zero})
    if (to_string(k) == name) return k;
  throw InvalidArgument("unknown algorithm '" + name + "'");
}

bool is_osoco(AlgoKind kind) { return kind == AlgoKind::OsocoH || kind == AlgoKind::OsocoE; }

double TrialResult::max_static_violation() const {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& r : rounds) worst = std::max(worst, r.static_viol.maxCoeff());
  return worst;
}

Vec compute_optimum(const std::vector<Vec>& centers, const Mat& A, const Vec& b,
                    const ActionSet& action_set) {
  if (centers.empty()) throw InvalidArgument("compute_optimum: no cost centers");
  Vec mean = Vec::Zero(centers.front().size());
  for (const auto& v : centers) mean += v;
  mean /= static_cast<double>(centers.size());

  std::vector<ConvexSetOp> sets{as_set_op(action_set)};
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    sets.push_back(as_set_op(Halfspace{A.row(i).transpose(), b(i)}));
  DykstraOptions opts;
  opts.tol = 1e-10;
  return dykstra_project(mean, sets, opts).x;
}

namespace {

RoundRecord make_record(const EnvConfig& env, const QuadraticCost& cost, const Vec& x_star,
                        std::int64_t t, const Vec& x, const RoundFeedback& fb, double gamma,
                        int phase) {
  RoundRecord r;
  r.t = t;
  r.x = x;
  r.cost = cost.value(x);
  r.opt_cost = cost.value(x_star);
  r.gamma = gamma;
  r.phase = phase;
  r.static_viol = env.A * x - env.b;
  r.stoch_viol = fb.g;
  return r;
}

}  // namespace

TrialResult run_trial(const AlgoSpec& algo, const EnvConfig& env, std::int64_t T,
                      std::uint64_t seed, std::uint64_t trial) {
  if (T < 1) throw InvalidArgument("run_trial: T must be >= 1");
  env.validate();
  const EnvTrace trace = make_trace(env, T, seed, trial);

  TrialResult out;
  out.algo = to_string(algo.kind);
  out.seed = seed;
  out.trial = trial;
  out.T = T;
  out.x_star = compute_optimum(trace.centers, env.A, env.b, env.action_set);
  out.rounds.reserve(static_cast<std::size_t>(T));
  Rng rng = make_stream(seed, trial, StreamPurpose::Algorithm);

  switch (algo.kind) {
    case AlgoKind::OsocoH:
    case AlgoKind::OsocoE: {
      const OsocoMode mode = algo.kind == AlgoKind::OsocoH ? OsocoMode::H : OsocoMode::E;
      Osoco learner(configure(mode, env.constants(), T, algo.delta_h, algo.inner, algo.relaxed),
                    algo.audit);
      learner.set_phase_hook([&](const PhaseRecord& ph) {
        out.covered = out.covered &&
                      confidence_contains(ph.V_bar, ph.spec.A_hat, ph.spec.beta_bar, env.A);
      });
      for (std::int64_t t = 1; t <= T; ++t) {
        const ActionChoice choice = learner.act(rng);
        const QuadraticCost cost = round_cost(env, trace, t);
        const RoundFeedback fb = round_feedback(env, trace, t, choice.x);
        out.rounds.push_back(
            make_record(env, cost, out.x_star, t, choice.x, fb, choice.gamma, learner.phase_index()));
        learner.feedback(cost, fb.y);
      }
      learner.finish();
      out.audit = learner.audit();
      break;
    }
    case AlgoKind::Dpp:
    case AlgoKind::DppCons: {
      DppState state = dpp_init(env.d, env.n, T, algo.kind == AlgoKind::DppCons);
      for (std::int64_t t = 1; t <= T; ++t) {
        const Vec x = state.x;
        const QuadraticCost cost = round_cost(env, trace, t);
        const RoundFeedback fb = round_feedback(env, trace, t, x);
        out.rounds.push_back(make_record(env, cost, out.x_star, t, x, fb, 1.0, 0));
        state = dpp_round(state, cost.grad(x), fb.g, env.A, env.action_set);
      }
      break;
    }
    case AlgoKind::SoPgd: {
      SoPgdConstants c;
      c.d = env.d;
      c.n = env.n;
      c.rho = env.noise_std;
      c.S_bound = env.S_bound;
      c.D = env.D;
      c.G = env.G;
      c.b = env.b;
      c.action_set = env.action_set;
      SoPgdState state = sopgd_init(c, T);
      for (std::int64_t t = 1; t <= T; ++t) {
        const bool exploring = state.phase == SoPgdState::Phase::Explore;
        const Vec x = sopgd_action(state, rng);
        if (exploring && algo.audit && (env.A * x - env.b).maxCoeff() > 0.0) {
          std::ostringstream os;
          os << "round " << t << ": exploration action violates the true constraints";
          throw InvariantViolation(os.str());
        }
        const QuadraticCost cost = round_cost(env, trace, t);
        const RoundFeedback fb = round_feedback(env, trace, t, x);
        out.rounds.push_back(make_record(env, cost, out.x_star, t, x, fb, 1.0, exploring ? 0 : 1));
        sopgd_round(state, c, cost.grad(x), fb.y);
      }
      break;
    }
    case AlgoKind::Oracle:
    case AlgoKind::Zero: {
      const Vec x = algo.kind == AlgoKind::Oracle ? out.x_star : Vec::Zero(env.d);
      for (std::int64_t t = 1; t <= T; ++t) {
        const QuadraticCost cost = round_cost(env, trace, t);
        out.rounds.push_back(
            make_record(env, cost, out.x_star, t, x, round_feedback(env, trace, t, x), 1.0, 0));
      }
      break;
    }
  }

  out.regret.reserve(out.rounds.size());
  double acc = 0.0;
  for (const auto& r : out.rounds) {
    acc += r.cost - r.opt_cost;
    if (!std::isfinite(acc)) throw NumericalError("run_trial: non-finite regret");
    out.regret.push_back(acc);
  }
  return out;
}

int default_thread_count() {
  if (const char* env = std::getenv("SAFE_OCO_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw InvalidArgument("SAFE_OCO_THREADS must be a positive integer");
    return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<TrialResult> run_trials(const AlgoSpec& algo, const EnvConfig& env, std::int64_t T,
                                    std::uint64_t seed, int trials, int threads) {
  if (trials < 1) throw InvalidArgument("run_trials: trials must be >= 1");
  if (threads <= 0) threads = default_thread_count();
  threads = std::min(threads, trials);

  std::vector<TrialResult> results(static_cast<std::size_t>(trials));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(trials));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < trials; i = next++) {
      try {
        results[static_cast<std::size_t>(i)] =
            run_trial(algo, env, T, seed, static_cast<std::uint64_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

// ----------------------------------------------------------------- aggregation

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{"regret", "static_viol_cum", "static_viol_pos",
                                              "stoch_viol_cum", "stoch_viol_pos"};
  return names;
}

const std::vector<double>& TrialSeries::metric(const std::string& name) const {
  if (name == "regret") return regret;
  if (name == "static_viol_cum") return static_viol_cum;
  if (name == "static_viol_pos") return static_viol_pos;
  if (name == "stoch_viol_cum") return stoch_viol_cum;
  if (name == "stoch_viol_pos") return stoch_viol_pos;
  throw InvalidArgument("unknown metric '" + name + "'");
}

TrialSeries to_series(const TrialResult& trial) {
  TrialSeries s;
  s.algo = trial.algo;
  s.trial = trial.trial;
  s.T = trial.T;
  s.regret = trial.regret;
  double sc = 0.0, sp = 0.0, gc = 0.0, gp = 0.0;
  for (const auto& r : trial.rounds) {
    const double sv = r.static_viol.maxCoeff();
    const double gv = r.stoch_viol.maxCoeff();
    sc += sv;
    sp += std::max(0.0, sv);
    gc += gv;
    gp += std::max(0.0, gv);
    s.static_viol_cum.push_back(sc);
    s.static_viol_pos.push_back(sp);
    s.stoch_viol_cum.push_back(gc);
    s.stoch_viol_pos.push_back(gp);
  }
  return s;
}

AggregateResult aggregate(const std::vector<TrialSeries>& trials,
                          const std::vector<std::int64_t>& checkpoints) {
  if (trials.size() < 2) throw InvalidArgument("aggregate: needs at least two trials");
  const std::int64_t T = trials.front().T;
  for (const auto& tr : trials)
    if (tr.T != T || static_cast<std::int64_t>(tr.regret.size()) != T)
      throw InvalidArgument("aggregate: trials have mismatched horizons");

  std::vector<std::string> algos;
  for (const auto& tr : trials)
    if (std::find(algos.begin(), algos.end(), tr.algo) == algos.end()) algos.push_back(tr.algo);

  AggregateResult out;
  out.trials = static_cast<int>(trials.size());
  for (const auto& algo : algos) {
    std::vector<const TrialSeries*> group;
    for (const auto& tr : trials)
      if (tr.algo == algo) group.push_back(&tr);
    if (group.size() < 2) throw InvalidArgument("aggregate: needs at least two trials of " + algo);
    for (std::int64_t t : checkpoints) {
      if (t < 1 || t > T) continue;
      for (const auto& metric : metric_names()) {
        double mean = 0.0;
        for (const auto* tr : group) mean += tr->metric(metric)[static_cast<std::size_t>(t - 1)];
        mean /= static_cast<double>(group.size());
        double ss = 0.0;
        for (const auto* tr : group) {
          const double dv = tr->metric(metric)[static_cast<std::size_t>(t - 1)] - mean;
          ss += dv * dv;
        }
        out.rows.push_back(
            {algo, t, metric, mean, std::sqrt(ss / static_cast<double>(group.size() - 1))});
      }
    }
  }
  return out;
}

AggregateResult aggregate(const std::vector<TrialResult>& trials,
                          const std::vector<std::int64_t>& checkpoints) {
  std::vector<TrialSeries> series;
  series.reserve(trials.size());
  for (const auto& tr : trials) series.push_back(to_series(tr));
  return aggregate(series, checkpoints);
}

const std::vector<std::int64_t>& default_checkpoints() {
  static const std::vector<std::int64_t> ladder{250, 500, 1000, 2000, 4000};
  return ladder;
}

// ---------------------------------------------------------------------- bounds

RegretBoundConstants hedge_descent_constants(double D, double G, int d) {
  if (!(D > 0.0 && G > 0.0) || d < 1)
    throw InvalidArgument("hedge_descent_constants: D, G > 0 and d >= 1 required");
  return {D * G * std::sqrt(std::log(2.0 * d)) + 3.0 * D * G};
}

double osoco_regret_bound(const OsocoConfig& config) {
  const double T = static_cast<double>(config.T);
  const double d = config.d;
  const double lnT = std::log(T);
  const double DG = config.D * config.G;
  const double beta_T = compute_beta(config.confidence(), config.T);
  const double C_A = hedge_descent_constants(config.D, config.G, config.d).C_A;
  return 4.0 * DG / config.b_min * beta_T * std::sqrt(3.0 * d * T * lnT) +
         C_A * std::sqrt(4.0 * d * T * lnT) + 2.0 * DG * std::sqrt(2.0 * T * std::log(1.0 / config.delta));
}

double hedge_descent_regret_bound(double D, double G, std::int64_t T, std::size_t M) {
  if (M < 1 || T < 1) throw InvalidArgument("hedge_descent_regret_bound: T, M >= 1 required");
  const double Tf = static_cast<double>(T);
  return D * G * std::sqrt(Tf * std::log(static_cast<double>(M))) + 3.0 * D * G * std::sqrt(Tf);
}

}  // namespace safe_oco
