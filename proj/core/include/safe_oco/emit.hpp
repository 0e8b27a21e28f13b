#pragma once

// CSV / JSON result files. Floats are written with 17 significant digits so
// parsing recovers the exact double.

#include <cstdint>
#include <string>
#include <vector>

#include "safe_oco/harness.hpp"

namespace safe_oco {

/// One line of the per-round CSV.
struct CsvRound {
  std::string run_id;
  std::string algo;
  std::uint64_t trial = 0;
  std::int64_t t = 0;
  double cost = 0.0;
  double regret = 0.0;
  double static_viol_max = 0.0;  // max_i (A x_t - b)_i
  double stoch_viol_sum = 0.0;   // running sum of max_i g_t(x_t)_i
  double gamma = 1.0;
  int phase = 0;

  bool operator==(const CsvRound&) const = default;
};

inline constexpr const char* kRoundsHeader =
    "run_id,algo,trial,t,cost,regret,static_viol_max,stoch_viol_sum,gamma,phase";
inline constexpr const char* kAggregateHeader = "algo,t,metric,mean,std";

std::string format_double(double v);

std::vector<CsvRound> to_csv_rounds(const std::string& run_id, const TrialResult& trial);

std::string rounds_to_csv(const std::vector<CsvRound>& rows);
std::vector<CsvRound> parse_rounds_csv(const std::string& text);
std::string rounds_to_json(const std::vector<CsvRound>& rows);
std::vector<CsvRound> parse_rounds_json(const std::string& text);

std::string aggregate_to_csv(const AggregateResult& agg);
std::vector<AggregateRow> parse_aggregate_csv(const std::string& text);

/// Rebuilds cumulative metric series from per-round rows, one per
/// (run_id, trial), in first-appearance order.
std::vector<TrialSeries> series_from_rounds(const std::vector<CsvRound>& rows);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

struct FigureDataSummary {
  int files = 0;
  int rows = 0;
};

/// Reads every per-round CSV under in_dir and writes aggregate.csv and
/// aggregate_meta.json to out_dir. Each (algo, horizon) group contributes its
/// final-round statistics; ladder checkpoints without a dedicated run are
/// read off the algorithm's longest run.
FigureDataSummary figure_data(const std::string& in_dir, const std::string& out_dir);

}  // namespace safe_oco
