#pragma once

// Seeded simulation environments: quadratic cost streams with uniform
// centers, and noisy static or stochastic linear constraints.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "safe_oco/action_set.hpp"
#include "safe_oco/cost.hpp"
#include "safe_oco/linalg.hpp"
#include "safe_oco/osoco.hpp"
#include "safe_oco/rng.hpp"

namespace safe_oco {

enum class ConstraintMode { Static, Stochastic };

std::string to_string(ConstraintMode mode);

struct EnvConfig {
  int d = 2;
  int n = 1;
  Mat A;
  Vec b;
  double noise_std = 0.01;
  double cost_scale = 3.0;
  double v_low = -1.0;
  double v_high = 0.0;
  ConstraintMode mode = ConstraintMode::Static;
  std::uint64_t seed = 0;
  ActionSet action_set = ActionSet::ball(2, 1.0);
  // Declared learner constants; zero means "derive from the instance".
  double D = 0.0;
  double S_bound = 0.0;
  double G = 0.0;
  // Optional i.i.d. Gaussian perturbation of A in stochastic mode.
  double a_noise_std = 0.0;

  /// Fills derived constants and runs the assumption audit.
  void finalize();
  /// Rejects ||a_i|| > S, b_min <= 0, D below the diameter, or G below the
  /// cost gradient bound 2 c (R + max ||v||).
  void validate() const;

  double b_min() const { return b.minCoeff(); }
  double max_center_norm() const;
  double gradient_bound() const;
  ProblemConstants constants() const;
};

/// The two-dimensional unit-ball instance with a single constraint
/// -x1 - x2 <= 0.8 and f_t(x) = 3 ||x - v_t||^2, v_t ~ U[-1,0]^2.
EnvConfig reference_env();

EnvConfig parse_env_config(const std::string& json_text);
EnvConfig load_env_config(const std::string& path);
std::string env_config_to_json(const EnvConfig& config);

Vec sample_cost_center(const EnvConfig& config, Rng& rng);
std::pair<double, Vec> cost_value_and_grad(const EnvConfig& config, const Vec& v, const Vec& x);
Vec draw_noise(const EnvConfig& config, Rng& rng);
/// y = A x + eps.
Vec static_feedback(const EnvConfig& config, const Vec& x, Rng& rng);
/// g = A x - (b + eps).
Vec stochastic_feedback(const EnvConfig& config, const Vec& x, Rng& rng);

/// Pre-drawn per-round randomness for one trial.
struct EnvTrace {
  std::vector<Vec> centers;  // v_t, t = 1..T at index t-1
  std::vector<Vec> noise;    // eps_t
  std::vector<Mat> a_noise;  // empty unless the perturbation hook is on

  std::int64_t length() const { return static_cast<std::int64_t>(centers.size()); }
};

EnvTrace make_trace(const EnvConfig& config, std::int64_t T, std::uint64_t seed, std::uint64_t trial);

/// What round t reveals for action x.
struct RoundFeedback {
  Vec y;  // linear feedback handed to the learner, y ~ A x + noise
  Vec g;  // realized constraint value g_t(x)
};

RoundFeedback round_feedback(const EnvConfig& config, const EnvTrace& trace, std::int64_t t,
                             const Vec& x);

QuadraticCost round_cost(const EnvConfig& config, const EnvTrace& trace, std::int64_t t);

}  // namespace safe_oco
