#include "safe_oco/environments.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "safe_oco/errors.hpp"

namespace safe_oco {

using nlohmann::json;

std::string to_string(ConstraintMode mode) {
  return mode == ConstraintMode::Static ? "static" : "stochastic";
}

double EnvConfig::max_center_norm() const {
  const double m = std::max(std::abs(v_low), std::abs(v_high));
  return std::sqrt(static_cast<double>(d)) * m;
}

double EnvConfig::gradient_bound() const {
  return 2.0 * cost_scale * (action_set.max_norm() + max_center_norm());
}

void EnvConfig::finalize() {
  if (D <= 0.0) D = 2.0 * action_set.max_norm();
  if (S_bound <= 0.0 && A.size() > 0) S_bound = A.rowwise().norm().maxCoeff();
  if (G <= 0.0) G = gradient_bound();
  validate();
}

void EnvConfig::validate() const {
  std::ostringstream os;
  if (d < 1 || n < 1) os << "d and n must be >= 1; ";
  else if (A.rows() != n || A.cols() != d) os << "A must be " << n << "x" << d << "; ";
  else if (b.size() != n) os << "b must have " << n << " entries; ";
  else if (action_set.dim() != d) os << "action set dimension must be " << d << "; ";
  if (!os.str().empty()) throw InvalidArgument("env config: " + os.str());

  if (!A.allFinite() || !b.allFinite()) os << "A and b must be finite; ";
  if (!(b.minCoeff() > 0.0)) os << "b_min must be > 0; ";
  if (!(noise_std >= 0.0)) os << "noise_std must be >= 0; ";
  if (!(a_noise_std >= 0.0)) os << "a_noise_std must be >= 0; ";
  if (a_noise_std > 0.0 && mode != ConstraintMode::Stochastic)
    os << "a_noise_std requires stochastic mode; ";
  if (!(cost_scale > 0.0)) os << "cost_scale must be > 0; ";
  if (!(v_low <= v_high)) os << "v_low must not exceed v_high; ";
  const double slack = 1.0 + 1e-12;
  const double row_max = A.rowwise().norm().maxCoeff();
  if (!(S_bound > 0.0) || row_max > S_bound * slack)
    os << "row norm " << row_max << " exceeds S = " << S_bound << "; ";
  if (D * slack < 2.0 * action_set.max_norm())
    os << "D = " << D << " is below the diameter " << 2.0 * action_set.max_norm() << "; ";
  if (G * slack < gradient_bound())
    os << "G = " << G << " is below the gradient bound " << gradient_bound() << "; ";
  if (!os.str().empty()) throw InvalidArgument("env config: " + os.str());
}

ProblemConstants EnvConfig::constants() const {
  ProblemConstants c;
  c.d = d;
  c.n = n;
  c.rho = noise_std;
  c.S_bound = S_bound;
  c.D = D;
  c.G = G;
  c.b = b;
  c.action_set = action_set;
  return c;
}

EnvConfig reference_env() {
  EnvConfig c;
  c.d = 2;
  c.n = 1;
  c.A = Mat::Constant(1, 2, -1.0);
  c.b = Vec::Constant(1, 0.8);
  c.noise_std = 0.01;
  c.cost_scale = 3.0;
  c.v_low = -1.0;
  c.v_high = 0.0;
  c.action_set = ActionSet::ball(2, 1.0);
  c.D = 2.0;
  c.S_bound = std::sqrt(2.0);
  c.G = 6.0 * std::sqrt(2.0) + 6.0;
  c.validate();
  return c;
}

namespace {

Vec vec_from_json(const json& j, const char* field) {
  if (!j.is_array()) throw InvalidArgument(std::string("env config: ") + field + " must be an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

json vec_to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Mat mat_from_json(const json& j, int n, int d) {
  // Accepts a list of rows, or a flat list when n == 1.
  if (!j.is_array()) throw InvalidArgument("env config: A must be an array");
  Mat A(n, d);
  if (n == 1 && !j.empty() && j[0].is_number()) {
    if (static_cast<int>(j.size()) != d) throw InvalidArgument("env config: A must have d entries");
    for (int k = 0; k < d; ++k) A(0, k) = j[k].get<double>();
    return A;
  }
  if (static_cast<int>(j.size()) != n) throw InvalidArgument("env config: A must have n rows");
  for (int i = 0; i < n; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != d)
      throw InvalidArgument("env config: every row of A must have d entries");
    for (int k = 0; k < d; ++k) A(i, k) = j[i][k].get<double>();
  }
  return A;
}

}  // namespace

EnvConfig parse_env_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("env config: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("env config: top level must be an object");
  EnvConfig c;
  try {
    for (const char* key : {"d", "n", "A", "b"})
      if (!j.contains(key)) throw InvalidArgument(std::string("env config: missing field ") + key);
    c.d = j.at("d").get<int>();
    c.n = j.at("n").get<int>();
    if (c.d < 1 || c.n < 1) throw InvalidArgument("env config: d and n must be >= 1");
    c.A = mat_from_json(j.at("A"), c.n, c.d);
    const json& jb = j.at("b");
    c.b = jb.is_number() ? Vec::Constant(c.n, jb.get<double>()) : vec_from_json(jb, "b");
    c.noise_std = j.value("noise_std", c.noise_std);
    c.cost_scale = j.value("cost_scale", c.cost_scale);
    c.v_low = j.value("v_low", c.v_low);
    c.v_high = j.value("v_high", c.v_high);
    const std::string mode = j.value("mode", std::string("static"));
    if (mode == "static") c.mode = ConstraintMode::Static;
    else if (mode == "stochastic") c.mode = ConstraintMode::Stochastic;
    else throw InvalidArgument("env config: mode must be 'static' or 'stochastic'");
    c.seed = j.value("seed", std::uint64_t{0});
    c.action_set = ActionSet::ball(c.d, 1.0);
    if (j.contains("action_set")) {
      const json& s = j.at("action_set");
      const std::string kind = s.value("kind", std::string("ball"));
      if (kind == "ball") {
        c.action_set = ActionSet::ball(c.d, s.value("radius", 1.0));
      } else if (kind == "box") {
        c.action_set = ActionSet::box(vec_from_json(s.at("lower"), "action_set.lower"),
                                      vec_from_json(s.at("upper"), "action_set.upper"));
      } else {
        throw InvalidArgument("env config: action_set.kind must be 'ball' or 'box'");
      }
    }
    c.D = j.value("D", 0.0);
    c.S_bound = j.value("S_bound", 0.0);
    c.G = j.value("G", 0.0);
    c.a_noise_std = j.value("a_noise_std", 0.0);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("env config: ") + e.what());
  }
  c.finalize();
  return c;
}

EnvConfig load_env_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("env config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_env_config(ss.str());
}

std::string env_config_to_json(const EnvConfig& c) {
  json j;
  j["d"] = c.d;
  j["n"] = c.n;
  json rows = json::array();
  for (int i = 0; i < c.A.rows(); ++i) rows.push_back(vec_to_json(c.A.row(i).transpose()));
  j["A"] = rows;
  j["b"] = vec_to_json(c.b);
  j["noise_std"] = c.noise_std;
  j["cost_scale"] = c.cost_scale;
  j["v_low"] = c.v_low;
  j["v_high"] = c.v_high;
  j["mode"] = to_string(c.mode);
  j["seed"] = c.seed;
  if (c.action_set.kind() == ActionSet::Kind::Ball) {
    j["action_set"] = {{"kind", "ball"}, {"radius", c.action_set.radius()}};
  } else {
    j["action_set"] = {{"kind", "box"},
                       {"lower", vec_to_json(c.action_set.lower())},
                       {"upper", vec_to_json(c.action_set.upper())}};
  }
  j["D"] = c.D;
  j["S_bound"] = c.S_bound;
  j["G"] = c.G;
  if (c.a_noise_std > 0.0) j["a_noise_std"] = c.a_noise_std;
  return j.dump(2);
}

Vec sample_cost_center(const EnvConfig& config, Rng& rng) {
  Vec v(config.d);
  for (int k = 0; k < config.d; ++k)
    v(k) = config.v_low + (config.v_high - config.v_low) * uniform01(rng);
  return v;
}

std::pair<double, Vec> cost_value_and_grad(const EnvConfig& config, const Vec& v, const Vec& x) {
  const Vec diff = x - v;
  return {config.cost_scale * diff.squaredNorm(), 2.0 * config.cost_scale * diff};
}

Vec draw_noise(const EnvConfig& config, Rng& rng) {
  Vec eps = Vec::Zero(config.n);
  if (config.noise_std == 0.0) return eps;
  std::normal_distribution<double> normal(0.0, config.noise_std);
  for (int i = 0; i < config.n; ++i) eps(i) = normal(rng);
  return eps;
}

Vec static_feedback(const EnvConfig& config, const Vec& x, Rng& rng) {
  return config.A * x + draw_noise(config, rng);
}

Vec stochastic_feedback(const EnvConfig& config, const Vec& x, Rng& rng) {
  return config.A * x - (config.b + draw_noise(config, rng));
}

EnvTrace make_trace(const EnvConfig& config, std::int64_t T, std::uint64_t seed,
                    std::uint64_t trial) {
  if (T < 1) throw InvalidArgument("make_trace: T must be >= 1");
  Rng cost_rng = make_stream(seed, trial, StreamPurpose::Cost);
  Rng noise_rng = make_stream(seed, trial, StreamPurpose::Noise);
  EnvTrace trace;
  trace.centers.reserve(static_cast<std::size_t>(T));
  trace.noise.reserve(static_cast<std::size_t>(T));
  std::normal_distribution<double> a_normal(0.0, config.a_noise_std > 0.0 ? config.a_noise_std : 1.0);
  for (std::int64_t t = 0; t < T; ++t) {
    trace.centers.push_back(sample_cost_center(config, cost_rng));
    trace.noise.push_back(draw_noise(config, noise_rng));
    if (config.a_noise_std > 0.0) {
      Mat dA(config.n, config.d);
      for (Eigen::Index i = 0; i < dA.size(); ++i) dA.data()[i] = a_normal(noise_rng);
      trace.a_noise.push_back(std::move(dA));
    }
  }
  return trace;
}

RoundFeedback round_feedback(const EnvConfig& config, const EnvTrace& trace, std::int64_t t,
                             const Vec& x) {
  if (t < 1 || t > trace.length()) throw InvalidArgument("round_feedback: round out of range");
  const auto idx = static_cast<std::size_t>(t - 1);
  const Vec& eps = trace.noise[idx];
  RoundFeedback out;
  if (config.mode == ConstraintMode::Static) {
    out.y = config.A * x + eps;
    out.g = out.y - config.b;
  } else {
    // b_t = b + eps; the learner gets g_t(x) + b, which is A x plus zero-mean noise.
    Vec Ax = config.A * x;
    if (!trace.a_noise.empty()) Ax += trace.a_noise[idx] * x;
    out.g = Ax - (config.b + eps);
    out.y = out.g + config.b;
  }
  return out;
}

QuadraticCost round_cost(const EnvConfig& config, const EnvTrace& trace, std::int64_t t) {
  if (t < 1 || t > trace.length()) throw InvalidArgument("round_cost: round out of range");
  return QuadraticCost{config.cost_scale, trace.centers[static_cast<std::size_t>(t - 1)]};
}

}  // namespace safe_oco
