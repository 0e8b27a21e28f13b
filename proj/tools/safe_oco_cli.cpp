// safe_oco: run, sweep, audit and aggregate safe-OCO experiments.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "safe_oco/emit.hpp"
#include "safe_oco/environments.hpp"
#include "safe_oco/errors.hpp"
#include "safe_oco/harness.hpp"

namespace fs = std::filesystem;
using namespace safe_oco;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kInvariant = 3, kNumerical = 4 };

struct RunOptions {
  std::string config;
  std::string algo;
  std::string algos;
  std::string inner = "hedgedescent";
  std::string format = "csv";
  std::string out;
  std::string in;
  std::int64_t T = 0;
  std::vector<std::int64_t> T_list;
  int trials = 1;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool no_audit = false;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void run_and_write(const EnvConfig& env, AlgoKind kind, const RunOptions& o, std::int64_t T,
                   std::uint64_t seed) {
  AlgoSpec spec;
  spec.kind = kind;
  spec.inner = inner_kind_from_string(o.inner);
  spec.relaxed = spec.inner != InnerKind::CoverHedge;
  spec.audit = !o.no_audit;
  const auto trials = run_trials(spec, env, T, seed, o.trials);

  const std::string stem = to_string(kind) + "_T" + std::to_string(T);
  const std::string run_id = stem + "_s" + std::to_string(seed);
  std::vector<CsvRound> rows;
  for (const auto& tr : trials) {
    auto r = to_csv_rounds(run_id, tr);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  fs::create_directories(o.out);
  const fs::path base = fs::path(o.out) / stem;
  if (o.format == "json") {
    write_text_file(base.string() + ".json", rounds_to_json(rows));
  } else {
    write_text_file(base.string() + ".csv", rounds_to_csv(rows));
  }
  if (trials.size() >= 2) {
    std::vector<std::int64_t> cps;
    for (std::int64_t t : default_checkpoints())
      if (t < T) cps.push_back(t);
    cps.push_back(T);
    write_text_file(base.string() + "_aggregate.csv", aggregate_to_csv(aggregate(trials, cps)));
  }

  double mean_regret = 0.0, worst_static = -1e300;
  int covered = 0;
  for (const auto& tr : trials) {
    mean_regret += tr.final_regret();
    worst_static = std::max(worst_static, tr.max_static_violation());
    covered += tr.covered ? 1 : 0;
  }
  mean_regret /= static_cast<double>(trials.size());
  std::printf("%s T=%lld trials=%zu mean_regret=%.6g max_static_viol=%.3g", to_string(kind).c_str(),
              static_cast<long long>(T), trials.size(), mean_regret, worst_static);
  if (is_osoco(kind)) std::printf(" covered=%d/%zu", covered, trials.size());
  std::printf("\n");
}

int cmd_run(const RunOptions& o) {
  EnvConfig env = load_env_config(o.config);
  run_and_write(env, algo_from_string(o.algo), o, o.T, o.seed_given ? o.seed : env.seed);
  return kOk;
}

int cmd_sweep(const RunOptions& o) {
  EnvConfig env = load_env_config(o.config);
  const auto algos = split_list(o.algos);
  if (algos.empty()) throw InvalidArgument("sweep: --algos is empty");
  for (const auto& a : algos) algo_from_string(a);
  for (const auto& a : algos)
    for (std::int64_t T : o.T_list) run_and_write(env, algo_from_string(a), o, T, env.seed);
  return kOk;
}

int cmd_audit(const RunOptions& o) {
  EnvConfig env = load_env_config(o.config);
  int failures = 0;
  for (AlgoKind kind : {AlgoKind::OsocoH, AlgoKind::OsocoE, AlgoKind::SoPgd, AlgoKind::Dpp}) {
    AlgoSpec spec;
    spec.kind = kind;
    spec.audit = true;
    try {
      const TrialResult tr = run_trial(spec, env, o.T, env.seed, 0);
      if (is_osoco(kind)) {
        const OsocoConfig cfg = configure(kind == AlgoKind::OsocoH ? OsocoMode::H : OsocoMode::E,
                                          env.constants(), o.T);
        std::printf(
            "%-8s ok  phases=%d (bound %.3f) elliptic=%.6g (bound %.6g) min_gamma_margin=%.3g "
            "max_static_viol=%.3g\n",
            to_string(kind).c_str(), tr.audit.phases, phase_count_bound(env.d, o.T),
            tr.audit.elliptic_sum, elliptic_bound(env.d, cfg.lambda, o.T),
            tr.audit.min_gamma_margin, tr.max_static_violation());
      } else {
        std::printf("%-8s ok  max_static_viol=%.3g\n", to_string(kind).c_str(),
                    tr.max_static_violation());
      }
    } catch (const InvariantViolation& e) {
      std::printf("%-8s FAIL %s\n", to_string(kind).c_str(), e.what());
      ++failures;
    }
  }
  return failures == 0 ? kOk : kInvariant;
}

int cmd_figure_data(const RunOptions& o) {
  const FigureDataSummary s = figure_data(o.in, o.out);
  std::printf("read %d run files, wrote %d aggregate rows to %s\n", s.files, s.rows,
              (fs::path(o.out) / "aggregate.csv").string().c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safe online convex optimization under unknown linear constraints"};
  app.require_subcommand(1);
  RunOptions o;

  auto* run = app.add_subcommand("run", "Run trials of one algorithm");
  run->add_option("--config", o.config, "Environment JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--algo", o.algo, "osoco-h | osoco-e | dpp | dpp-cons | sopgd")->required();
  run->add_option("--T", o.T, "Horizon")->required()->check(CLI::PositiveNumber);
  run->add_option("--trials", o.trials, "Number of trials")->check(CLI::PositiveNumber);
  auto* seed_opt = run->add_option("--seed", o.seed, "Seed (defaults to the config seed)");
  run->add_option("--out", o.out, "Output directory")->required();
  run->add_option("--inner", o.inner, "hedgedescent | cover_hedge | ftpl");
  run->add_option("--format", o.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  run->add_flag("--no-audit", o.no_audit, "Skip the per-round invariant checks");

  auto* sweep = app.add_subcommand("sweep", "Run several algorithms over several horizons");
  sweep->add_option("--config", o.config, "Environment JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--algos", o.algos, "Comma-separated algorithm list")->required();
  sweep->add_option("--T-list", o.T_list, "Horizons")->required()->delimiter(',');
  sweep->add_option("--trials", o.trials, "Trials per run")->check(CLI::PositiveNumber);
  sweep->add_option("--out", o.out, "Output directory")->required();
  sweep->add_option("--inner", o.inner, "hedgedescent | cover_hedge | ftpl");
  sweep->add_option("--format", o.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  sweep->add_flag("--no-audit", o.no_audit, "Skip the per-round invariant checks");

  auto* audit = app.add_subcommand("audit", "Run the invariant bundle on one trial per algorithm");
  audit->add_option("--config", o.config, "Environment JSON")->required()->check(CLI::ExistingFile);
  audit->add_option("--T", o.T, "Horizon")->required()->check(CLI::PositiveNumber);

  auto* fig = app.add_subcommand("figure-data", "Aggregate per-round CSVs for plotting");
  fig->add_option("--in", o.in, "Directory of per-round CSVs")->required();
  fig->add_option("--out", o.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }
  o.seed_given = seed_opt->count() > 0;

  try {
    if (*run) return cmd_run(o);
    if (*sweep) return cmd_sweep(o);
    if (*audit) return cmd_audit(o);
    if (*fig) return cmd_figure_data(o);
  } catch (const InvariantViolation& e) {
    std::fprintf(stderr, "invariant failure: %s\n", e.what());
    return kInvariant;
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kNumerical;
  } catch (const ResourceError& e) {
    std::fprintf(stderr, "resource error: %s\n", e.what());
    return kNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return kFailure;
}
