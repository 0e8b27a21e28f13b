#include "safe_oco/osoco.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>

#include "safe_oco/errors.hpp"

namespace safe_oco {

std::string to_string(OsocoMode mode) { return mode == OsocoMode::H ? "H" : "E"; }

std::string to_string(InnerKind kind) {
  switch (kind) {
    case InnerKind::HedgeDescent: return "hedgedescent";
    case InnerKind::CoverHedge: return "cover_hedge";
    case InnerKind::Ftpl: return "ftpl";
  }
  return "unknown";
}

InnerKind inner_kind_from_string(const std::string& s) {
  if (s == "hedgedescent") return InnerKind::HedgeDescent;
  if (s == "cover_hedge") return InnerKind::CoverHedge;
  if (s == "ftpl") return InnerKind::Ftpl;
  throw InvalidArgument("unknown inner algorithm '" + s + "'");
}

ConfidenceParams OsocoConfig::confidence() const {
  ConfidenceParams p;
  p.rho = rho;
  p.d = d;
  p.n = n;
  p.delta = delta;
  p.S_bound = S_bound;
  p.D = D;
  p.lambda = lambda;
  return p;
}

void OsocoConfig::validate() const {
  if (T < 3) throw InvalidArgument("OsocoConfig: T must be >= 3");
  if (b.size() != n) throw InvalidArgument("OsocoConfig: b must have n entries");
  if (!(b_min > 0.0)) throw InvalidArgument("OsocoConfig: b_min must be > 0 (origin strictly safe)");
  if (action_set.dim() != d) throw InvalidArgument("OsocoConfig: action set dimension mismatch");
  if (!(kappa >= 0.0 && kappa < b_min)) throw InvalidArgument("OsocoConfig: kappa must lie in [0, b_min)");
  if (std::abs(lambda - std::max(1.0, D * D)) > 1e-12)
    throw InvalidArgument("OsocoConfig: lambda must equal max(1, D^2)");
  if (mode == OsocoMode::H) {
    if (kappa != 0.0) throw InvalidArgument("OsocoConfig: mode H requires kappa = 0");
    if (!(delta > 0.0 && delta < 0.5)) throw InvalidArgument("OsocoConfig: mode H requires delta in (0, 1/2)");
  } else {
    const double want_delta = std::min(0.5, b_min / (2.0 * S_bound * D * static_cast<double>(T)));
    const double want_kappa = b_min / static_cast<double>(T);
    if (std::abs(delta - want_delta) > 1e-15 * std::max(1.0, want_delta) ||
        std::abs(kappa - want_kappa) > 1e-15 * std::max(1.0, want_kappa))
      throw InvalidArgument("OsocoConfig: mode E requires delta = min(1/2, b_min/(2SDT)), kappa = b_min/T");
  }
  if ((inner == InnerKind::HedgeDescent || inner == InnerKind::Ftpl) && !relaxed)
    throw InvalidArgument("OsocoConfig: " + to_string(inner) + " requires the relaxed piecewise family");
  confidence().validate();
}

OsocoConfig configure(OsocoMode mode, const ProblemConstants& c, std::int64_t T, double delta_h,
                      InnerKind inner, bool relaxed) {
  if (T < 3) throw InvalidArgument("configure: T must be >= 3");
  if (c.b.size() != c.n) throw InvalidArgument("configure: b must have n entries");
  if (!(c.b.minCoeff() > 0.0)) throw InvalidArgument("configure: b_min must be > 0");
  OsocoConfig cfg;
  cfg.mode = mode;
  cfg.T = T;
  cfg.rho = c.rho;
  cfg.S_bound = c.S_bound;
  cfg.D = c.D;
  cfg.G = c.G;
  cfg.b = c.b;
  cfg.b_min = c.b.minCoeff();
  cfg.d = c.d;
  cfg.n = c.n;
  cfg.action_set = c.action_set;
  cfg.inner = inner;
  cfg.relaxed = relaxed;
  cfg.lambda = std::max(1.0, c.D * c.D);
  if (mode == OsocoMode::H) {
    cfg.delta = delta_h;
    cfg.kappa = 0.0;
  } else {
    cfg.delta = std::min(0.5, cfg.b_min / (2.0 * c.S_bound * c.D * static_cast<double>(T)));
    cfg.kappa = cfg.b_min / static_cast<double>(T);
  }
  cfg.validate();
  return cfg;
}

PhaseRecord begin_phase(const GramState& gram, const OsocoConfig& config, std::int64_t t, int j) {
  PhaseRecord phase;
  phase.j = j;
  phase.t_start = t;
  phase.V_bar = gram.V;
  phase.logdet_start = gram.logdet_V;
  const double beta = compute_beta(config.confidence(), t);
  phase.spec = SafeSetSpec::from_gram(rls_estimate(gram), beta, gram.V, config.b, config.kappa,
                                      config.action_set);
  if (config.relaxed) phase.pieces = drop_empty_pieces(relaxed_pieces(phase.spec));

  switch (config.inner) {
    case InnerKind::HedgeDescent:
      phase.inner = std::make_unique<HedgeDescent>(phase.pieces, config.D, config.G);
      break;
    case InnerKind::Ftpl:
      phase.inner = std::make_unique<Ftpl>(phase.pieces, config.D, config.G);
      break;
    case InnerKind::CoverHedge: {
      CoverHedge::Membership member;
      if (config.relaxed) {
        member = [spec = phase.spec](const Vec& x) { return relaxed_optimistic_contains(spec, x); };
      } else {
        member = [spec = phase.spec](const Vec& x) { return optimistic_contains(spec, x); };
      }
      phase.inner = std::make_unique<CoverHedge>(config.action_set, std::move(member), config.D,
                                                 config.G);
      break;
    }
  }
  return phase;
}

ActionChoice select_action(PhaseRecord& phase, Rng& rng) {
  ActionChoice out;
  out.x_tilde = phase.inner->propose(rng);
  out.gamma = safe_scaling(phase.spec, out.x_tilde);
  out.x = out.gamma * out.x_tilde;
  return out;
}

bool observe(PhaseRecord& phase, GramState& gram, const OsocoConfig& config,
             const QuadraticCost& cost, const Vec& y, const Vec& x) {
  if (x.size() != config.d || y.size() != config.n)
    throw InvalidArgument("observe: action or feedback dimension mismatch");
  phase.inner->observe(cost);
  const std::int64_t t = gram.t;
  rank1_update_inplace(gram, x, y);
  // Equality continues; a log-domain slack absorbs rounding at the boundary.
  const bool det_ok = gram.logdet_V <= std::log(2.0) + phase.logdet_start + 1e-12;
  return det_ok && t < config.T;
}

double phase_count_bound(int d, std::int64_t T) {
  return 4.0 * d * std::log(static_cast<double>(T));
}

double elliptic_bound(int d, double lambda, std::int64_t m) {
  return 2.0 * d * std::log(1.0 + static_cast<double>(m) / (lambda * d));
}

double gamma_lower_bound(const SafeSetSpec& spec, const Vec& x, bool relaxed) {
  const double limit = spec.b_min() - spec.kappa;
  const double wnorm = weighted_norm(x, spec.V_bar_inv);
  if (!relaxed) return 1.0 - 2.0 * spec.beta_bar * wnorm / limit;
  const double inf_norm = (spec.V_bar_inv_sqrt * x).cwiseAbs().maxCoeff();
  const double root_d = std::sqrt(static_cast<double>(spec.dim()));
  return 1.0 - spec.beta_bar * (root_d * inf_norm + wnorm) / limit;
}

// ----------------------------------------------------------------------- Osoco

Osoco::Osoco(OsocoConfig config, bool audit)
    : config_(std::move(config)), audit_on_(audit) {
  config_.validate();
  gram_ = init_gram(config_.d, config_.n, config_.lambda);
  audit_.min_gamma_margin = std::numeric_limits<double>::infinity();
}

ActionChoice Osoco::act(Rng& rng) {
  if (gram_.t > config_.T) throw PreconditionError("Osoco::act: horizon exhausted");
  if (need_new_phase_) {
    phase_ = std::make_unique<PhaseRecord>(begin_phase(gram_, config_, gram_.t, next_j_++));
    need_new_phase_ = false;
    audit_.phases = phase_->j;
    if (hook_) hook_(*phase_);
    if (audit_on_ && audit_.phases > phase_count_bound(config_.d, config_.T) + 1e-9) {
      std::ostringstream os;
      os << "phase count " << audit_.phases << " exceeds 4 d ln T = "
         << phase_count_bound(config_.d, config_.T);
      throw InvariantViolation(os.str());
    }
  }
  last_ = select_action(*phase_, rng);
  if (audit_on_) audit_round(last_);
  return last_;
}

void Osoco::audit_round(const ActionChoice& choice) {
  const SafeSetSpec& spec = phase_->spec;
  const std::int64_t t = gram_.t;
  if (!pessimistic_contains(spec, choice.x)) {
    std::ostringstream os;
    os << "round " << t << ": played action left the pessimistic set";
    throw InvariantViolation(os.str());
  }
  const double bound = gamma_lower_bound(spec, choice.x, config_.relaxed);
  const double margin = choice.gamma - bound;
  audit_.min_gamma_margin = std::min(audit_.min_gamma_margin, margin);
  if (margin < -1e-9) {
    std::ostringstream os;
    os << "round " << t << ": gamma " << choice.gamma << " below its lower bound " << bound;
    throw InvariantViolation(os.str());
  }
  if (const auto* hd = dynamic_cast<const HedgeDescent*>(phase_->inner.get())) {
    const auto& pts = hd->experts().points;
    for (std::size_t m = 0; m < pts.size(); ++m) {
      if (hd->pieces()[m].max_violation(pts[m]) > 1e-9) {
        std::ostringstream os;
        os << "round " << t << ": expert " << m << " left its piece";
        throw InvariantViolation(os.str());
      }
    }
  }
}

void Osoco::feedback(const QuadraticCost& cost, const Vec& y) {
  if (!phase_ || need_new_phase_) throw PreconditionError("Osoco::feedback: no action pending");
  {
    Eigen::LLT<Mat> llt(gram_.V);
    const Vec& x = last_.x;
    audit_.elliptic_sum += x.dot(llt.solve(x));
  }
  ++audit_.rounds;
  if (audit_on_) {
    const double bound = elliptic_bound(config_.d, config_.lambda, audit_.rounds);
    if (audit_.elliptic_sum > bound + 1e-9) {
      std::ostringstream os;
      os << "round " << gram_.t << ": elliptic potential " << audit_.elliptic_sum
         << " exceeds " << bound;
      throw InvariantViolation(os.str());
    }
  }
  const bool cont = observe(*phase_, gram_, config_, cost, y, last_.x);
  if (!cont) need_new_phase_ = true;
}

void Osoco::finish() {
  if (audit_on_ && audit_.phases > phase_count_bound(config_.d, config_.T) + 1e-9) {
    std::ostringstream os;
    os << "phase count " << audit_.phases << " exceeds 4 d ln T";
    throw InvariantViolation(os.str());
  }
}

}  // namespace safe_oco
