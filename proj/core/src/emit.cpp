#include "safe_oco/emit.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "safe_oco/errors.hpp"

namespace safe_oco {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<CsvRound> to_csv_rounds(const std::string& run_id, const TrialResult& trial) {
  std::vector<CsvRound> rows;
  rows.reserve(trial.rounds.size());
  double stoch = 0.0;
  for (std::size_t k = 0; k < trial.rounds.size(); ++k) {
    const RoundRecord& r = trial.rounds[k];
    stoch += r.stoch_viol.maxCoeff();
    rows.push_back({run_id, trial.algo, trial.trial, r.t, r.cost, trial.regret[k],
                    r.static_viol.maxCoeff(), stoch, r.gamma, r.phase});
  }
  return rows;
}

std::string rounds_to_csv(const std::vector<CsvRound>& rows) {
  std::string out = kRoundsHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += r.run_id + ',' + r.algo + ',' + std::to_string(r.trial) + ',' + std::to_string(r.t) +
           ',' + format_double(r.cost) + ',' + format_double(r.regret) + ',' +
           format_double(r.static_viol_max) + ',' + format_double(r.stoch_viol_sum) + ',' +
           format_double(r.gamma) + ',' + std::to_string(r.phase) + '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

void check_header(const std::string& line, const char* expected) {
  const auto got = split_csv_line(line);
  const auto want = split_csv_line(expected);
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (i >= got.size())
      throw InvalidArgument("CSV header: missing column '" + want[i] + "'");
    if (got[i] != want[i])
      throw InvalidArgument("CSV header: column " + std::to_string(i + 1) + " is '" + got[i] +
                            "', expected '" + want[i] + "'");
  }
  if (got.size() > want.size())
    throw InvalidArgument("CSV header: unexpected column '" + got[want.size()] + "'");
}

double parse_double(const std::string& s, const char* column, std::size_t line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0')
    throw InvalidArgument("CSV line " + std::to_string(line) + ": bad value '" + s +
                          "' in column " + column);
  return v;
}

long long parse_int(const std::string& s, const char* column, std::size_t line) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0')
    throw InvalidArgument("CSV line " + std::to_string(line) + ": bad integer '" + s +
                          "' in column " + column);
  return v;
}

std::vector<std::string> nonempty_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

}  // namespace

std::vector<CsvRound> parse_rounds_csv(const std::string& text) {
  const auto lines = nonempty_lines(text);
  if (lines.empty()) throw InvalidArgument("rounds CSV: empty input");
  check_header(lines[0], kRoundsHeader);
  std::vector<CsvRound> rows;
  rows.reserve(lines.size() - 1);
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto c = split_csv_line(lines[k]);
    if (c.size() != 10)
      throw InvalidArgument("rounds CSV line " + std::to_string(k + 1) + ": expected 10 fields");
    CsvRound r;
    r.run_id = c[0];
    r.algo = c[1];
    r.trial = static_cast<std::uint64_t>(parse_int(c[2], "trial", k + 1));
    r.t = parse_int(c[3], "t", k + 1);
    r.cost = parse_double(c[4], "cost", k + 1);
    r.regret = parse_double(c[5], "regret", k + 1);
    r.static_viol_max = parse_double(c[6], "static_viol_max", k + 1);
    r.stoch_viol_sum = parse_double(c[7], "stoch_viol_sum", k + 1);
    r.gamma = parse_double(c[8], "gamma", k + 1);
    r.phase = static_cast<int>(parse_int(c[9], "phase", k + 1));
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

// nlohmann serializes doubles with the shortest exact representation, so the
// JSON round-trip is exact as well.
json row_to_json(const CsvRound& r) {
  return {{"run_id", r.run_id},
          {"algo", r.algo},
          {"trial", r.trial},
          {"t", r.t},
          {"cost", r.cost},
          {"regret", r.regret},
          {"static_viol_max", r.static_viol_max},
          {"stoch_viol_sum", r.stoch_viol_sum},
          {"gamma", r.gamma},
          {"phase", r.phase}};
}

}  // namespace

std::string rounds_to_json(const std::vector<CsvRound>& rows) {
  json arr = json::array();
  for (const auto& r : rows) arr.push_back(row_to_json(r));
  return json{{"rounds", arr}}.dump(1) + "\n";
}

std::vector<CsvRound> parse_rounds_json(const std::string& text) {
  std::vector<CsvRound> rows;
  try {
    const json j = json::parse(text);
    for (const auto& e : j.at("rounds")) {
      CsvRound r;
      r.run_id = e.at("run_id").get<std::string>();
      r.algo = e.at("algo").get<std::string>();
      r.trial = e.at("trial").get<std::uint64_t>();
      r.t = e.at("t").get<std::int64_t>();
      r.cost = e.at("cost").get<double>();
      r.regret = e.at("regret").get<double>();
      r.static_viol_max = e.at("static_viol_max").get<double>();
      r.stoch_viol_sum = e.at("stoch_viol_sum").get<double>();
      r.gamma = e.at("gamma").get<double>();
      r.phase = e.at("phase").get<int>();
      rows.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("rounds JSON: ") + e.what());
  }
  return rows;
}

std::string aggregate_to_csv(const AggregateResult& agg) {
  std::string out = kAggregateHeader;
  out += '\n';
  for (const auto& r : agg.rows)
    out += r.algo + ',' + std::to_string(r.t) + ',' + r.metric + ',' + format_double(r.mean) +
           ',' + format_double(r.std) + '\n';
  return out;
}

std::vector<AggregateRow> parse_aggregate_csv(const std::string& text) {
  const auto lines = nonempty_lines(text);
  if (lines.empty()) throw InvalidArgument("aggregate CSV: empty input");
  check_header(lines[0], kAggregateHeader);
  std::vector<AggregateRow> rows;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto c = split_csv_line(lines[k]);
    if (c.size() != 5)
      throw InvalidArgument("aggregate CSV line " + std::to_string(k + 1) + ": expected 5 fields");
    rows.push_back({c[0], parse_int(c[1], "t", k + 1), c[2], parse_double(c[3], "mean", k + 1),
                    parse_double(c[4], "std", k + 1)});
  }
  return rows;
}

std::vector<TrialSeries> series_from_rounds(const std::vector<CsvRound>& rows) {
  std::vector<TrialSeries> out;
  std::map<std::pair<std::string, std::uint64_t>, std::size_t> index;
  std::vector<double> last_stoch;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.run_id, r.trial);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      TrialSeries s;
      s.algo = r.algo;
      s.trial = r.trial;
      out.push_back(std::move(s));
      last_stoch.push_back(0.0);
    }
    TrialSeries& s = out[it->second];
    if (r.t != static_cast<std::int64_t>(s.regret.size()) + 1)
      throw InvalidArgument("rounds: run " + r.run_id + " trial " + std::to_string(r.trial) +
                            " is not in round order at t = " + std::to_string(r.t));
    const double g = r.stoch_viol_sum - last_stoch[it->second];
    last_stoch[it->second] = r.stoch_viol_sum;
    auto prev = [](const std::vector<double>& v) { return v.empty() ? 0.0 : v.back(); };
    s.regret.push_back(r.regret);
    s.static_viol_cum.push_back(prev(s.static_viol_cum) + r.static_viol_max);
    s.static_viol_pos.push_back(prev(s.static_viol_pos) + std::max(0.0, r.static_viol_max));
    s.stoch_viol_cum.push_back(r.stoch_viol_sum);
    s.stoch_viol_pos.push_back(prev(s.stoch_viol_pos) + std::max(0.0, g));
    s.T = r.t;
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ResourceError("cannot open " + path + " for writing: " + std::strerror(errno));
  out << content;
  if (!out) throw ResourceError("write to " + path + " failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

FigureDataSummary figure_data(const std::string& in_dir, const std::string& out_dir) {
  if (!fs::is_directory(in_dir)) throw InvalidArgument("figure-data: no such directory " + in_dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(in_dir))
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  // algo -> horizon -> trials
  std::map<std::string, std::map<std::int64_t, std::vector<TrialSeries>>> groups;
  FigureDataSummary summary;
  for (const auto& f : files) {
    const std::string text = read_text_file(f.string());
    const std::string first = text.substr(0, text.find('\n'));
    if (first.rfind(kAggregateHeader, 0) == 0) continue;
    std::vector<CsvRound> rows;
    try {
      rows = parse_rounds_csv(text);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(f.string() + ": " + e.what());
    }
    for (auto& s : series_from_rounds(rows)) groups[s.algo][s.T].push_back(std::move(s));
    ++summary.files;
  }
  if (groups.empty()) throw InvalidArgument("figure-data: no per-round CSV files in " + in_dir);

  AggregateResult all;
  for (auto& [algo, by_T] : groups) {
    std::set<std::int64_t> dedicated;
    for (const auto& [T, trials] : by_T)
      if (trials.size() >= 2) dedicated.insert(T);
    std::vector<AggregateRow> rows;
    for (const auto& T : dedicated) {
      auto agg = aggregate(by_T.at(T), {T});
      rows.insert(rows.end(), agg.rows.begin(), agg.rows.end());
    }
    if (!dedicated.empty()) {
      const std::int64_t longest = *dedicated.rbegin();
      std::vector<std::int64_t> extra;
      for (std::int64_t t : default_checkpoints())
        if (t < longest && !dedicated.count(t)) extra.push_back(t);
      auto agg = aggregate(by_T.at(longest), extra);
      rows.insert(rows.end(), agg.rows.begin(), agg.rows.end());
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const AggregateRow& a, const AggregateRow& b) { return a.t < b.t; });
    all.rows.insert(all.rows.end(), rows.begin(), rows.end());
  }

  fs::create_directories(out_dir);
  write_text_file((fs::path(out_dir) / "aggregate.csv").string(), aggregate_to_csv(all));
  json meta;
  meta["checkpoints"] = default_checkpoints();
  meta["checkpoint_note"] =
      "geometric stand-in ladder; the original horizon grid is not recoverable";
  meta["metrics"] = metric_names();
  meta["std"] = "sample standard deviation, n-1 denominator";
  write_text_file((fs::path(out_dir) / "aggregate_meta.json").string(), meta.dump(2) + "\n");
  summary.rows = static_cast<int>(all.rows.size());
  return summary;
}

}  // namespace safe_oco
