#include <gtest/gtest.h>

#include <cmath>

#include "safe_oco/environments.hpp"
#include "safe_oco/errors.hpp"
#include "safe_oco/osoco.hpp"

using namespace safe_oco;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

// Inner algorithm that always proposes a fixed point.
class FixedProposal final : public InnerAlgorithm {
 public:
  explicit FixedProposal(Vec x) : x_(std::move(x)) {}
  Vec propose(Rng&) override { return x_; }
  void observe(const QuadraticCost&) override {}
  std::string_view name() const override { return "fixed"; }

 private:
  Vec x_;
};

ProblemConstants reference_constants() { return reference_env().constants(); }

}  // namespace

TEST(Configure, ModeH) {
  const OsocoConfig c = configure(OsocoMode::H, reference_constants(), 1000);
  EXPECT_DOUBLE_EQ(c.kappa, 0.0);
  EXPECT_DOUBLE_EQ(c.delta, 0.01);
  EXPECT_DOUBLE_EQ(c.lambda, 4.0);
}

TEST(Configure, ModeEReferenceConstants) {
  const OsocoConfig c = configure(OsocoMode::E, reference_constants(), 1000);
  EXPECT_NEAR(c.kappa, 8e-4, 1e-15);
  EXPECT_NEAR(c.delta, 0.8 / (2.0 * std::sqrt(2.0) * 2.0 * 1000.0), 1e-15);
  EXPECT_NEAR(c.delta, 1.41421e-4, 1e-9);
  EXPECT_DOUBLE_EQ(c.lambda, 4.0);
}

TEST(Configure, ModeEDeltaClampedAtOneHalf) {
  ProblemConstants p = reference_constants();
  p.b = Vec::Constant(1, 100.0);
  p.S_bound = 1.0;
  p.D = 2.0;
  const OsocoConfig c = configure(OsocoMode::E, p, 3);
  EXPECT_DOUBLE_EQ(c.delta, 0.5);
}

TEST(Configure, RejectsBadInputs) {
  EXPECT_THROW(configure(OsocoMode::H, reference_constants(), 0), InvalidArgument);
  EXPECT_THROW(configure(OsocoMode::H, reference_constants(), 100, 0.7), InvalidArgument);
  EXPECT_THROW(configure(OsocoMode::H, reference_constants(), 100, 0.01, InnerKind::HedgeDescent,
                         false),
               InvalidArgument);
}

TEST(BeginPhase, FirstPhaseFromEmptyGram) {
  const OsocoConfig c = configure(OsocoMode::H, reference_constants(), 1000);
  const PhaseRecord p = begin_phase(init_gram(2, 1, c.lambda), c, 1);
  EXPECT_TRUE(p.spec.A_hat.isZero());
  EXPECT_TRUE(p.V_bar.isApprox(4.0 * Mat::Identity(2, 2)));
  EXPECT_DOUBLE_EQ(p.spec.beta_bar, compute_beta(c.confidence(), 1));
  EXPECT_NEAR(p.spec.beta_bar, 2.85878, 1e-5);
  EXPECT_EQ(p.pieces.size(), 4u);
  EXPECT_NEAR(safe_scaling(p.spec, v2(1, 0)), 0.55968, 1e-5);
}

TEST(BeginPhase, SnapshotIsFrozen) {
  const OsocoConfig c = configure(OsocoMode::H, reference_constants(), 1000);
  GramState g = init_gram(2, 1, c.lambda);
  PhaseRecord p = begin_phase(g, c, 1);
  const Mat A_hat = p.spec.A_hat;
  const Mat V_bar = p.V_bar;
  for (int i = 0; i < 3; ++i) observe(p, g, c, QuadraticCost{3.0, v2(-0.5, -0.5)},
                                      Vec::Constant(1, -0.3), v2(0.3, 0.0));
  EXPECT_EQ(p.spec.A_hat, A_hat);
  EXPECT_EQ(p.V_bar, V_bar);
  EXPECT_FALSE(g.V.isApprox(V_bar));
}

TEST(SelectAction, OracleSpecKeepsFeasiblePoint) {
  const OsocoConfig c = configure(OsocoMode::H, reference_constants(), 1000);
  PhaseRecord p = begin_phase(init_gram(2, 1, c.lambda), c, 1);
  p.spec = SafeSetSpec::from_gram((Mat(1, 2) << -1, -1).finished(), 0.0, Mat::Identity(2, 2),
                                  Vec::Constant(1, 0.8), 0.0, ActionSet::ball(2, 1.0));
  p.inner = std::make_unique<FixedProposal>(v2(-0.3, -0.4));
  Rng rng = make_stream(0, 0, StreamPurpose::Test);
  const ActionChoice a = select_action(p, rng);
  EXPECT_DOUBLE_EQ(a.gamma, 1.0);
  EXPECT_EQ(a.x, a.x_tilde);
}

TEST(SelectAction, ZeroProposal) {
  const OsocoConfig c = configure(OsocoMode::H, reference_constants(), 1000);
  PhaseRecord p = begin_phase(init_gram(2, 1, c.lambda), c, 1);
  p.inner = std::make_unique<FixedProposal>(Vec::Zero(2));
  Rng rng = make_stream(0, 0, StreamPurpose::Test);
  const ActionChoice a = select_action(p, rng);
  EXPECT_DOUBLE_EQ(a.gamma, 1.0);
  EXPECT_TRUE(a.x.isZero(0.0));
}

TEST(SelectAction, PhaseOneScaling) {
  const OsocoConfig c = configure(OsocoMode::H, reference_constants(), 1000);
  PhaseRecord p = begin_phase(init_gram(2, 1, c.lambda), c, 1);
  p.inner = std::make_unique<FixedProposal>(v2(1, 0));
  Rng rng = make_stream(0, 0, StreamPurpose::Test);
  const ActionChoice a = select_action(p, rng);
  EXPECT_NEAR(a.gamma, 0.55968, 1e-5);
  EXPECT_NEAR(a.x(0), 0.55968, 1e-5);
  EXPECT_DOUBLE_EQ(a.x(1), 0.0);
  EXPECT_TRUE(pessimistic_contains(p.spec, a.x));
}

TEST(Observe, ZeroActionContinues) {
  const OsocoConfig c = configure(OsocoMode::H, reference_constants(), 1000);
  GramState g = init_gram(2, 1, c.lambda);
  PhaseRecord p = begin_phase(g, c, 1);
  EXPECT_TRUE(observe(p, g, c, QuadraticCost{3.0, v2(0, 0)}, Vec::Constant(1, 0.0), Vec::Zero(2)));
  EXPECT_DOUBLE_EQ(g.logdet_V, p.logdet_start);
}

TEST(Observe, DeterminantSequence) {
  const OsocoConfig c = configure(OsocoMode::H, reference_constants(), 1000);
  GramState g = init_gram(2, 1, c.lambda);
  PhaseRecord p = begin_phase(g, c, 1);
  const QuadraticCost cost{3.0, v2(-0.5, -0.5)};
  const Vec y = Vec::Constant(1, 0.0);
  // Independent oracle: 2x2 determinant of the accumulated diagonal.
  double d0 = 4.0, d1 = 4.0;
  const struct {
    Vec x;
    bool cont;
  } steps[] = {{v2(1, 0), true}, {v2(0, 1), true}, {v2(1, 0), true}, {v2(1, 0), false}};
  for (const auto& s : steps) {
    d0 += s.x(0) * s.x(0);
    d1 += s.x(1) * s.x(1);
    EXPECT_EQ(observe(p, g, c, cost, y, s.x), d0 * d1 <= 32.0);
    EXPECT_EQ(d0 * d1 <= 32.0, s.cont);
    EXPECT_NEAR(std::exp(g.logdet_V), d0 * d1, 1e-9);
  }
}

TEST(Observe, ExactDoublingContinues) {
  ProblemConstants pc = reference_constants();
  const OsocoConfig c = configure(OsocoMode::H, pc, 1000);
  GramState g = init_gram(2, 1, c.lambda);
  PhaseRecord p = begin_phase(g, c, 1);
  // det(4I + x x^T) = 4 (4 + 4) = 32 = 2 det(4I).
  EXPECT_TRUE(observe(p, g, c, QuadraticCost{3.0, v2(0, 0)}, Vec::Constant(1, 0.0), v2(2, 0)));
}

TEST(Observe, HorizonEndsPhase) {
  const OsocoConfig c = configure(OsocoMode::H, reference_constants(), 3);
  GramState g = init_gram(2, 1, c.lambda);
  PhaseRecord p = begin_phase(g, c, 1);
  const QuadraticCost cost{3.0, v2(0, 0)};
  EXPECT_TRUE(observe(p, g, c, cost, Vec::Constant(1, 0.0), Vec::Zero(2)));
  EXPECT_TRUE(observe(p, g, c, cost, Vec::Constant(1, 0.0), Vec::Zero(2)));
  EXPECT_FALSE(observe(p, g, c, cost, Vec::Constant(1, 0.0), Vec::Zero(2)));
}

TEST(Osoco, ModeETighteningHolds) {
  const EnvConfig env = reference_env();
  const std::int64_t T = 500;
  const OsocoConfig c = configure(OsocoMode::E, env.constants(), T);
  Osoco algo(c, true);
  const EnvTrace trace = make_trace(env, T, 0, 0);
  Rng rng = make_stream(0, 0, StreamPurpose::Algorithm);
  for (std::int64_t t = 1; t <= T; ++t) {
    const ActionChoice a = algo.act(rng);
    const SafeSetSpec& s = algo.phase().spec;
    const Vec lhs = s.A_hat * a.x +
                    Vec::Constant(1, s.beta_bar * weighted_norm(a.x, s.V_bar_inv));
    ASSERT_LE((lhs - (s.b - Vec::Constant(1, c.kappa))).maxCoeff(), 1e-12) << "round " << t;
    algo.feedback(round_cost(env, trace, t), round_feedback(env, trace, t, a.x).y);
  }
  algo.finish();
  EXPECT_LE(algo.audit().phases, phase_count_bound(2, T));
  EXPECT_LE(algo.audit().elliptic_sum, elliptic_bound(2, c.lambda, T));
}

TEST(Bounds, PhaseAndEllipticFormulas) {
  EXPECT_NEAR(phase_count_bound(2, 1000), 8.0 * std::log(1000.0), 1e-12);
  EXPECT_NEAR(elliptic_bound(2, 4.0, 1000), 4.0 * std::log(1.0 + 1000.0 / 8.0), 1e-12);
}

TEST(Bounds, GammaLowerBoundHoldsAtPhaseOne) {
  const OsocoConfig c = configure(OsocoMode::H, reference_constants(), 1000);
  const PhaseRecord p = begin_phase(init_gram(2, 1, c.lambda), c, 1);
  for (double r : {0.1, 0.3, 0.5}) {
    const Vec x_tilde = v2(r, 0);
    const double gamma = safe_scaling(p.spec, x_tilde);
    EXPECT_GE(gamma, gamma_lower_bound(p.spec, gamma * x_tilde, true) - 1e-12);
    EXPECT_GE(gamma, gamma_lower_bound(p.spec, gamma * x_tilde, false) - 1e-12);
  }
}

TEST(InnerKindNames, RoundTrip) {
  for (InnerKind k : {InnerKind::HedgeDescent, InnerKind::CoverHedge, InnerKind::Ftpl})
    EXPECT_EQ(inner_kind_from_string(to_string(k)), k);
  EXPECT_THROW(inner_kind_from_string("nope"), InvalidArgument);
}
