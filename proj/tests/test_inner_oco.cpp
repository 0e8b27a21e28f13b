#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "safe_oco/errors.hpp"
#include "safe_oco/inner_oco.hpp"
#include "safe_oco/rng.hpp"

using namespace safe_oco;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

ConvexPiece ball_piece(int d, double r = 1.0) {
  ConvexPiece p;
  p.action_set = ActionSet::ball(d, r);
  return p;
}

}  // namespace

TEST(OgdStep, ZeroGradientKeepsPoint) {
  const Vec x = v2(0.3, -0.2);
  EXPECT_TRUE(ogd_step(x, Vec::Zero(2), 0.7, ball_piece(2)).isApprox(x));
}

TEST(OgdStep, InteriorAndProjectedSteps) {
  const Vec a = ogd_step(v2(1, 0), v2(1, 0), 0.5, ball_piece(2));
  EXPECT_NEAR(a(0), 0.5, 1e-12);
  EXPECT_NEAR(a(1), 0.0, 1e-12);
  const Vec b = ogd_step(v2(1, 0), v2(-2, 0), 1.0, ball_piece(2));
  EXPECT_NEAR(b(0), 1.0, 1e-12);
  EXPECT_NEAR(b(1), 0.0, 1e-12);
}

TEST(HedgeUpdate, InvariantCases) {
  const Vec p = (Vec(3) << 0.2, 0.5, 0.3).finished();
  EXPECT_TRUE(hedge_update(p, Vec::Constant(3, 4.2), 1.3).isApprox(p, 1e-14));
  EXPECT_TRUE(hedge_update(p, (Vec(3) << 1, 2, 3).finished(), 0.0).isApprox(p, 1e-14));
}

TEST(HedgeUpdate, TwoThirdsOneThird) {
  const Vec q = hedge_update(v2(0.5, 0.5), v2(0, 1), std::log(2.0));
  EXPECT_NEAR(q(0), 2.0 / 3.0, 1e-14);
  EXPECT_NEAR(q(1), 1.0 / 3.0, 1e-14);
}

TEST(HedgeUpdate, NanLossRejected) {
  EXPECT_THROW(hedge_update(v2(0.5, 0.5), v2(0, std::numeric_limits<double>::quiet_NaN()), 1.0),
               InvalidArgument);
}

TEST(HedgeUpdate, LargeLossesStayNormalized) {
  const Vec q = hedge_update(v2(0.5, 0.5), v2(1e6, 1e6 + 1e4), 10.0);
  EXPECT_NEAR(q.sum(), 1.0, 1e-12);
  EXPECT_GE(q.minCoeff(), 0.0);
}

TEST(SampleIndex, InverseCdf) {
  const Vec p = (Vec(3) << 0.25, 0.5, 0.25).finished();
  EXPECT_EQ(sample_index(p, 0.0), 0);
  EXPECT_EQ(sample_index(p, 0.2499), 0);
  EXPECT_EQ(sample_index(p, 0.5), 1);
  EXPECT_EQ(sample_index(p, 0.9999), 2);
}

TEST(HedgeDescent, SinglePieceAlwaysPlaysExpert) {
  HedgeDescent hd({ball_piece(2)}, 2.0, 4.0);
  Rng rng = make_stream(10, 0, StreamPurpose::Test);
  for (int t = 0; t < 20; ++t) {
    const Vec x = hd.propose(rng);
    EXPECT_TRUE(x.isApprox(hd.experts().points[0]) || x.isZero());
    EXPECT_DOUBLE_EQ(hd.hedge().weights(0), 1.0);
    hd.observe(QuadraticCost{1.0, v2(0.5, 0.5)});
  }
}

TEST(HedgeDescent, IdenticalPiecesStayUniform) {
  HedgeDescent hd({ball_piece(2), ball_piece(2), ball_piece(2)}, 2.0, 4.0);
  Rng rng = make_stream(11, 0, StreamPurpose::Test);
  for (int t = 0; t < 10; ++t) {
    hd.propose(rng);
    hd.observe(QuadraticCost{1.0, v2(-0.3, 0.2)});
  }
  for (int m = 0; m < 3; ++m) EXPECT_NEAR(hd.hedge().weights(m), 1.0 / 3.0, 1e-12);
}

TEST(HedgeDescent, StepSchedules) {
  HedgeDescent hd({ball_piece(2), ball_piece(2)}, 2.0, 4.0);
  EXPECT_NEAR(hd.eta(4), 2.0 / (4.0 * 2.0), 1e-15);
  EXPECT_NEAR(hd.zeta(9), std::sqrt(4.0 * std::log(2.0)) / (8.0 * 3.0), 1e-15);
}

TEST(HedgeDescent, DominatedExpertWeightDecays) {
  // Independent scalar recursion: with a constant loss gap of 1, the dominated
  // weight is 1 / (1 + exp(sum_t zeta_t)).
  const double D = 1.0, G = 1.0;
  HedgeDescent hd({ball_piece(1), ball_piece(1)}, D, G);
  double log_ratio = 0.0;
  Vec p = Vec::Constant(2, 0.5);
  for (std::int64_t t = 1; t <= 100; ++t) {
    const double zeta = std::sqrt(4.0 * std::log(2.0)) / (G * D * std::sqrt(double(t)));
    ASSERT_NEAR(hd.zeta(t), zeta, 1e-15);
    log_ratio += zeta;
    p = hedge_update(p, Vec::LinSpaced(2, 0.0, 1.0), hd.zeta(t));
  }
  const double oracle = 1.0 / (1.0 + std::exp(log_ratio));
  EXPECT_NEAR(p(1), oracle, 1e-12);
  EXPECT_LT(p(1), 0.05);
}

TEST(HedgeDescent, ExpertsStayInTheirPieces) {
  std::vector<ConvexPiece> pieces(2, ball_piece(2));
  pieces[0].halfspaces.push_back(Halfspace{v2(1, 0), 0.1});
  pieces[1].halfspaces.push_back(Halfspace{v2(-1, 0), 0.1});
  HedgeDescent hd(pieces, 2.0, 4.0);
  Rng rng = make_stream(12, 0, StreamPurpose::Test);
  for (int t = 0; t < 200; ++t) {
    hd.propose(rng);
    hd.observe(QuadraticCost{1.0, v2(std::cos(0.1 * t), std::sin(0.1 * t))});
    for (int m = 0; m < 2; ++m) ASSERT_LE(pieces[m].max_violation(hd.experts().points[m]), 1e-9);
    ASSERT_NEAR(hd.hedge().weights.sum(), 1.0, 1e-12);
  }
}

TEST(HedgeDescent, EmptyFamilyRejected) {
  EXPECT_THROW(HedgeDescent({}, 1.0, 1.0), InvalidArgument);
}

TEST(EpsilonNet, LargeRadiusGivesOrigin) {
  const auto net = build_epsilon_net(ActionSet::ball(2, 1.0), 2.0);
  ASSERT_EQ(net.size(), 1u);
  EXPECT_TRUE(net[0].isZero());
}

TEST(EpsilonNet, OneDimensionalInterval) {
  const auto net = build_epsilon_net(ActionSet::ball(1, 1.0), 0.5);
  for (double x = -1.0; x <= 1.0; x += 1e-3) {
    double best = INFINITY;
    for (const auto& p : net) best = std::min(best, std::abs(p(0) - x));
    ASSERT_LE(best, 0.5 + 1e-12) << x;
  }
  for (const auto& p : net) EXPECT_LE(std::abs(p(0)), 1.0 + 1e-12);
}

TEST(EpsilonNet, CoversUnitBall) {
  const double delta = 0.1;
  const auto net = build_epsilon_net(ActionSet::ball(2, 1.0), delta);
  Rng rng = make_stream(13, 0, StreamPurpose::Test);
  for (int i = 0; i < 10000; ++i) {
    const Vec x = ActionSet::ball(2, 1.0).project(
        Vec::NullaryExpr(2, [&] { return 2.0 * uniform01(rng) - 1.0; }));
    double best = INFINITY;
    for (const auto& p : net) best = std::min(best, (p - x).norm());
    ASSERT_LE(best, delta + 1e-12);
  }
}

TEST(EpsilonNet, TooManyPointsIsResourceError) {
  EXPECT_THROW(build_epsilon_net(ActionSet::ball(8, 1.0), 1e-3), ResourceError);
  EXPECT_THROW(build_epsilon_net(ActionSet::ball(2, 1.0), 0.0), InvalidArgument);
}

TEST(DoublingSchedule, PowersOfTwo) {
  EXPECT_EQ(doubling_schedule(0), 1);
  EXPECT_EQ(doubling_schedule(3), 8);
  EXPECT_EQ(doubling_schedule(10), 1024);
}

TEST(CoverHedge, SingleNetPointAlwaysPlayed) {
  CoverHedge ch(ActionSet::ball(2, 1.0), [](const Vec& x) { return x.isZero(); }, 2.0, 1.0);
  Rng rng = make_stream(14, 0, StreamPurpose::Test);
  for (int t = 0; t < 10; ++t) {
    EXPECT_TRUE(ch.propose(rng).isZero());
    ch.observe(QuadraticCost{1.0, v2(0.5, 0.0)});
  }
}

TEST(CoverHedge, EpochBoundaryResetsWeights) {
  CoverHedge ch(ActionSet::ball(1, 1.0), nullptr, 2.0, 1.0);
  Rng rng = make_stream(15, 0, StreamPurpose::Test);
  int last_epoch = ch.state().epoch;
  for (int t = 1; t <= 40; ++t) {
    ch.propose(rng);
    if (ch.state().epoch != last_epoch) {
      EXPECT_EQ(t, 2 * doubling_schedule(last_epoch));
      const auto M = ch.state().weights.size();
      EXPECT_TRUE(ch.state().weights.isApprox(Vec::Constant(M, 1.0 / double(M))));
      last_epoch = ch.state().epoch;
    }
    ch.observe(QuadraticCost{1.0, Vec::Constant(1, 0.9)});
  }
  EXPECT_EQ(last_epoch, 5);
}

TEST(CoverHedge, DominatedPointDecaysMonotonically) {
  CoverHedge ch(ActionSet::ball(1, 1.0), nullptr, 2.0, 1.0);
  Rng rng = make_stream(16, 0, StreamPurpose::Test);
  int epoch = -1;
  double prev = 0.0;
  Eigen::Index far = 0;
  for (int t = 1; t <= 30; ++t) {
    ch.propose(rng);
    const auto& pts = ch.state().net_points;
    if (ch.state().epoch != epoch) {
      epoch = ch.state().epoch;
      far = 0;
      for (Eigen::Index m = 0; m < Eigen::Index(pts.size()); ++m)
        if (pts[m](0) < pts[far](0)) far = m;
      prev = ch.state().weights(far);
    }
    ch.observe(QuadraticCost{1.0, Vec::Constant(1, 1.0)});
    if (pts.size() > 1) {
      ASSERT_LT(ch.state().weights(far), prev) << "round " << t;
      prev = ch.state().weights(far);
    }
  }
}

TEST(Ftpl, LinearObjectiveOverBall) {
  Ftpl f({ball_piece(2)}, 2.0, 1.0);
  const Vec x = f.leader(v2(1, 0));
  EXPECT_NEAR(x(0), 1.0, 1e-8);
  EXPECT_NEAR(x(1), 0.0, 1e-8);
}

TEST(Ftpl, ZeroPerturbationPicksPieceZero) {
  std::vector<ConvexPiece> pieces(2, ball_piece(2));
  pieces[1].halfspaces.push_back(Halfspace{v2(1, 0), 0.5});
  Ftpl f(pieces, 2.0, 1.0);
  EXPECT_TRUE(f.leader(Vec::Zero(2)).isZero(1e-12));
}

TEST(Ftpl, SummedQuadraticFirstOrderCondition) {
  Ftpl f({ball_piece(2, 10.0)}, 20.0, 1.0);
  Rng rng = make_stream(17, 0, StreamPurpose::Test);
  Vec sum = Vec::Zero(2);
  for (int t = 1; t <= 5; ++t) {
    const Vec v = v2(uniform01(rng) - 0.5, uniform01(rng) - 0.5);
    sum += v;
    f.observe(QuadraticCost{3.0, v});
  }
  const Vec sigma = v2(0.3, 0.7);
  const Vec expected = (6.0 * sum + sigma) / (6.0 * 5);
  EXPECT_LE((f.leader(sigma) - expected).norm(), 1e-8);
}

TEST(Ftpl, LeaderBeatsRandomFeasiblePoints) {
  std::vector<ConvexPiece> pieces(2, ball_piece(2));
  pieces[0].halfspaces.push_back(Halfspace{v2(1, 1), -0.2});
  pieces[1].halfspaces.push_back(Halfspace{v2(-1, -1), -0.2});
  Ftpl f(pieces, 2.0, 1.0);
  f.observe(QuadraticCost{1.0, v2(0.05, 0.02)});
  f.observe(QuadraticCost{2.0, v2(-0.1, 0.0)});
  Rng rng = make_stream(18, 0, StreamPurpose::Test);
  for (int rep = 0; rep < 20; ++rep) {
    const Vec sigma = v2(uniform01(rng), uniform01(rng));
    const Vec x = f.leader(sigma);
    const double best = f.objective(x, sigma);
    for (int i = 0; i < 1000; ++i) {
      const Vec z = ActionSet::ball(2, 1.0).project(v2(2 * uniform01(rng) - 1, 2 * uniform01(rng) - 1));
      if (pieces[0].contains(z) || pieces[1].contains(z))
        ASSERT_LE(best, f.objective(z, sigma) + 1e-6);
    }
  }
}
