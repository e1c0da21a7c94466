#include "patchlearn/datasets.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "patchlearn/metrics.hpp"

namespace pl = patchlearn;

TEST(Curve1d, ValueMatchesPiecewiseDefinition) {
  EXPECT_DOUBLE_EQ(pl::curve1d_value(0.0), 0.0);
  EXPECT_DOUBLE_EQ(pl::curve1d_value(5.5), 35.75);
  EXPECT_NEAR(pl::curve1d_value(2.0), 13.274379414605454, 1e-12);
  EXPECT_NEAR(pl::curve1d_value(4.5), 22.794939764669806, 1e-12);
  // Bump boundaries belong to the bumps.
  EXPECT_DOUBLE_EQ(pl::curve1d_value(1.5), 1.5 + 2.25 + 8.0 * std::sin(1.5));
  EXPECT_DOUBLE_EQ(pl::curve1d_value(3.0), 12.0 + 8.0 * std::sin(3.0));
  EXPECT_DOUBLE_EQ(pl::curve1d_value(4.0), 20.0 + 2.0 * std::sin(4.0));
  EXPECT_DOUBLE_EQ(pl::curve1d_value(5.0), 30.0 + 2.0 * std::sin(5.0));
  // Just outside: plain quadratic.
  EXPECT_DOUBLE_EQ(pl::curve1d_value(1.4999), 1.4999 + 1.4999 * 1.4999);
  EXPECT_DOUBLE_EQ(pl::curve1d_value(5.0001), 5.0001 + 5.0001 * 5.0001);
}

TEST(Curve1d, GridIsEquallySpacedOnZeroToSix) {
  pl::Dataset d = pl::gen_curve1d();
  ASSERT_EQ(d.size(), 601u);
  ASSERT_EQ(d.dims(), 1u);
  EXPECT_DOUBLE_EQ(d.inputs.front()[0], 0.0);
  EXPECT_DOUBLE_EQ(d.inputs.back()[0], 6.0);
  EXPECT_DOUBLE_EQ(d.inputs[100][0], 1.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_DOUBLE_EQ(d.inputs[i][0], 6.0 * static_cast<double>(i) / 600.0);
    EXPECT_DOUBLE_EQ(d.targets[i], pl::curve1d_value(d.inputs[i][0]));
  }
}

TEST(Sinc2d, ValueHandlesRemovableSingularity) {
  EXPECT_DOUBLE_EQ(pl::sinc2d_value(0.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(pl::sinc2d_value(0.0, 5.0), std::sin(5.0) / 5.0);
  EXPECT_NEAR(pl::sinc2d_value(10.0, 10.0), 0.00295958969093304, 1e-15);
  EXPECT_NEAR(pl::sinc2d_value(M_PI, 5.0), 0.0, 1e-15);
  // Symmetry in both arguments and in sign.
  EXPECT_DOUBLE_EQ(pl::sinc2d_value(3.0, 7.0), pl::sinc2d_value(7.0, 3.0));
  EXPECT_DOUBLE_EQ(pl::sinc2d_value(-3.0, 7.0), pl::sinc2d_value(3.0, 7.0));
}

TEST(Sinc2d, GridCovers30By30Square) {
  pl::Dataset d = pl::gen_sinc2d();
  ASSERT_EQ(d.size(), 900u);
  ASSERT_EQ(d.dims(), 2u);
  EXPECT_DOUBLE_EQ(d.inputs.front()[0], -10.0);
  EXPECT_DOUBLE_EQ(d.inputs.front()[1], -10.0);
  EXPECT_DOUBLE_EQ(d.inputs.back()[0], 10.0);
  EXPECT_DOUBLE_EQ(d.inputs.back()[1], 10.0);
  // Second axis advances fastest.
  EXPECT_DOUBLE_EQ(d.inputs[1][0], -10.0);
  EXPECT_NEAR(d.inputs[1][1], -10.0 + 20.0 / 29.0, 1e-15);
  for (std::size_t i = 0; i < d.size(); ++i)
    EXPECT_DOUBLE_EQ(d.targets[i], pl::sinc2d_value(d.inputs[i][0], d.inputs[i][1]));
}

TEST(Manifold3d, ValueMatchesClosedForm) {
  EXPECT_DOUBLE_EQ(pl::manifold3d_value(1.0, 1.0, 1.0), 16.0);
  EXPECT_DOUBLE_EQ(pl::manifold3d_value(4.0, 1.0, 1.0), 25.0);
  EXPECT_NEAR(pl::manifold3d_value(6.0, 6.0, 6.0), 13.573313364637436, 1e-12);
  EXPECT_NEAR(pl::manifold3d_value(2.0, 3.0, 4.0), 8.251525668032638, 1e-12);
}

TEST(Manifold3d, GridCoversElevenCubed) {
  pl::Dataset d = pl::gen_manifold3d();
  ASSERT_EQ(d.size(), 1331u);
  ASSERT_EQ(d.dims(), 3u);
  for (std::size_t m = 0; m < 3; ++m) {
    EXPECT_DOUBLE_EQ(d.inputs.front()[m], 1.0);
    EXPECT_DOUBLE_EQ(d.inputs.back()[m], 6.0);
  }
  // Last axis fastest, half-unit spacing.
  EXPECT_DOUBLE_EQ(d.inputs[1][2], 1.5);
  EXPECT_DOUBLE_EQ(d.inputs[11][1], 1.5);
  EXPECT_DOUBLE_EQ(d.inputs[121][0], 1.5);
  for (std::size_t i = 0; i < d.size(); i += 97)
    EXPECT_DOUBLE_EQ(d.targets[i],
                     pl::manifold3d_value(d.inputs[i][0], d.inputs[i][1], d.inputs[i][2]));
}

TEST(SysId, InputSignalSwitchesRegimeAfterK499) {
  EXPECT_NEAR(pl::sysid_input(250), 0.0, 1e-12);
  EXPECT_NEAR(pl::sysid_input(1), 0.02513009544333748, 1e-15);
  EXPECT_DOUBLE_EQ(pl::sysid_input(499), std::sin(2.0 * M_PI * 499.0 / 250.0));
  EXPECT_DOUBLE_EQ(pl::sysid_input(500), 0.5 * std::sin(2.0 * M_PI * 500.0 / 250.0) +
                                             0.5 * std::sin(2.0 * M_PI * 500.0 / 25.0));
  EXPECT_NEAR(pl::sysid_input(600), 0.29389262614623385, 1e-15);
}

TEST(SysId, NonlinearityMatchesClosedForm) {
  EXPECT_DOUBLE_EQ(pl::sysid_nonlinearity(0.0), 0.0);
  EXPECT_NEAR(pl::sysid_nonlinearity(1.0), 0.0, 1e-15);
  EXPECT_NEAR(pl::sysid_nonlinearity(0.5), 0.4, 1e-15);
  EXPECT_DOUBLE_EQ(pl::sysid_nonlinearity(-0.5), -pl::sysid_nonlinearity(0.5));
}

TEST(SysId, PairsRecoverTheStaticNonlinearity) {
  pl::SysIdStreams s = pl::gen_sysid();
  ASSERT_EQ(s.u.size(), 700u);
  ASSERT_EQ(s.y.size(), 701u);
  ASSERT_EQ(s.pairs.size(), 699u);
  EXPECT_DOUBLE_EQ(s.y[0], 0.0);
  EXPECT_DOUBLE_EQ(s.y[1], 0.0);
  EXPECT_EQ(s.pair_k(0), 2);
  EXPECT_EQ(s.pair_k(698), 700);
  for (std::size_t row = 0; row < s.pairs.size(); ++row) {
    int k = s.pair_k(row);
    EXPECT_DOUBLE_EQ(s.pairs.inputs[row][0], s.u[k - 1]);
    double f = pl::sysid_nonlinearity(s.u[k - 1]);
    EXPECT_NEAR(s.pairs.targets[row], f, 1e-9 * std::max(1.0, std::abs(f)));
  }
}

TEST(SysId, WindowSelectionByK) {
  pl::SysIdStreams s = pl::gen_sysid();
  pl::Dataset train = s.pairs_between(40, 250);
  pl::Dataset test = s.pairs_between(251, 700);
  EXPECT_EQ(train.size(), 211u);
  EXPECT_EQ(test.size(), 450u);
  EXPECT_DOUBLE_EQ(train.inputs.front()[0], s.u[39]);
  EXPECT_DOUBLE_EQ(train.inputs.back()[0], s.u[249]);
  EXPECT_DOUBLE_EQ(test.inputs.back()[0], s.u[699]);
  EXPECT_EQ(s.pairs_between(2, 700).size(), s.pairs.size());
  EXPECT_EQ(s.pairs_between(701, 900).size(), 0u);
}

TEST(Embedding, BuildsLaggedRowsInGivenOrder) {
  std::vector<double> series{0.0, 1.0, 2.0, 3.0};
  std::vector<int> lags{2, 0};
  pl::Dataset d = pl::apply_embedding(series, lags, 1);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_DOUBLE_EQ(d.inputs[0][0], 0.0);
  EXPECT_DOUBLE_EQ(d.inputs[0][1], 2.0);
  EXPECT_DOUBLE_EQ(d.targets[0], 3.0);

  std::vector<int> identity{0};
  pl::Dataset full = pl::apply_embedding(series, identity, 0);
  ASSERT_EQ(full.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(full.inputs[i][0], series[i]);
    EXPECT_DOUBLE_EQ(full.targets[i], series[i]);
  }
}

TEST(Embedding, RejectsBadArguments) {
  std::vector<double> series{1.0, 2.0, 3.0};
  std::vector<int> lags{5, 0};
  EXPECT_THROW(pl::apply_embedding(series, lags, 0), std::invalid_argument);
  std::vector<int> negLag{-1};
  EXPECT_THROW(pl::apply_embedding(series, negLag, 0), std::invalid_argument);
  std::vector<int> zero{0};
  EXPECT_THROW(pl::apply_embedding(series, zero, -1), std::invalid_argument);
  std::vector<int> none;
  EXPECT_THROW(pl::apply_embedding(series, none, 0), std::invalid_argument);
}

TEST(MackeyGlass, SeriesStaysInKnownBandAndMatchesPinnedValues) {
  pl::MackeyGlassData mg = pl::gen_mackey_glass();
  ASSERT_EQ(mg.series.size(), 1118u);
  EXPECT_DOUBLE_EQ(mg.series[0], 1.2);
  for (double v : mg.series) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.6);
  }
  // Regression pins from the first verified run of this integrator.
  EXPECT_NEAR(mg.series[50], 1.0609707334631189, 1e-12);
  EXPECT_NEAR(mg.series[500], 1.0637519784984584, 1e-12);
  EXPECT_NEAR(mg.series[1117], 0.82742822543648176, 1e-12);
}

TEST(MackeyGlass, AgreesWithFineStepEulerIntegration) {
  // Independent check: forward Euler at h = 1e-3 with the same constant
  // pre-history must stay within 1e-3 of the RK4 series up to t = 100.
  pl::MackeyGlassData mg = pl::gen_mackey_glass();
  const double h = 1e-3;
  const int perUnit = 1000, delay = 17 * perUnit, steps = 100 * perUnit;
  std::vector<double> x(steps + 1);
  x[0] = 1.2;
  auto hist = [&](int i) { return i < 0 ? 1.2 : x[i]; };
  for (int i = 0; i < steps; ++i) {
    double xd = hist(i - delay);
    double p = std::pow(xd, 10.0);
    x[i + 1] = x[i] + h * (0.2 * xd / (1.0 + p) - 0.1 * x[i]);
  }
  double worst = 0.0;
  for (int t = 0; t <= 100; ++t)
    worst = std::max(worst, std::abs(mg.series[t] - x[t * perUnit]));
  EXPECT_LE(worst, 1e-3);
}

TEST(MackeyGlass, EmbeddingAndSplitFollowTheLagLayout) {
  pl::MackeyGlassData mg = pl::gen_mackey_glass();
  ASSERT_EQ(mg.embedded.size(), 1100u);
  ASSERT_EQ(mg.embedded.dims(), 3u);
  EXPECT_EQ(mg.train.size(), 617u);
  EXPECT_EQ(mg.test.size(), 500u);
  // Row for t = 12 + r: inputs (x(t-12), x(t-6), x(t)), target x(t+6).
  for (std::size_t r : {0u, 17u, 400u, 1099u}) {
    std::size_t t = 12 + r;
    EXPECT_DOUBLE_EQ(mg.embedded.inputs[r][0], mg.series[t - 12]);
    EXPECT_DOUBLE_EQ(mg.embedded.inputs[r][1], mg.series[t - 6]);
    EXPECT_DOUBLE_EQ(mg.embedded.inputs[r][2], mg.series[t]);
    EXPECT_DOUBLE_EQ(mg.embedded.targets[r], mg.series[t + 6]);
  }
  // The split windows share the 17 rows between row 600 and row 616.
  EXPECT_DOUBLE_EQ(mg.test.targets[0], mg.embedded.targets[600]);
  EXPECT_DOUBLE_EQ(mg.train.targets[616], mg.embedded.targets[616]);
}

TEST(MackeyGlass, RejectsFractionalDelayGrids) {
  pl::MackeyGlassConfig cfg;
  cfg.stepsPerUnit = 3;  // 17 * 3 = 51 works
  EXPECT_NO_THROW(cfg.validate());
  cfg.tau = 17.5;  // 17.5 * 3 is not integral
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  pl::MackeyGlassConfig bad;
  bad.horizon = 0;
  EXPECT_THROW(gen_mackey_glass(bad), std::invalid_argument);
}

TEST(Generators, RepeatCallsAreBitIdentical) {
  pl::Dataset a = pl::gen_curve1d(), b = pl::gen_curve1d();
  EXPECT_EQ(a.inputs, b.inputs);
  EXPECT_EQ(a.targets, b.targets);
  pl::MackeyGlassData m1 = pl::gen_mackey_glass(), m2 = pl::gen_mackey_glass();
  EXPECT_EQ(m1.series, m2.series);
  pl::SysIdStreams s1 = pl::gen_sysid(), s2 = pl::gen_sysid();
  EXPECT_EQ(s1.pairs.targets, s2.pairs.targets);
}

TEST(Metrics, MatchesHandComputedValues) {
  std::vector<double> perfect{1.0, 2.0, 3.0};
  pl::Metrics m0 = pl::compute_metrics(perfect, perfect);
  EXPECT_DOUBLE_EQ(m0.rmse, 0.0);
  EXPECT_DOUBLE_EQ(m0.sse, 0.0);
  EXPECT_DOUBLE_EQ(m0.ape, 0.0);

  std::vector<double> pred{2.0, 1.0};
  std::vector<double> target{1.0, 2.0};
  pl::Metrics m1 = pl::compute_metrics(pred, target);
  EXPECT_DOUBLE_EQ(m1.rmse, 1.0);
  EXPECT_DOUBLE_EQ(m1.sse, 2.0);

  std::vector<double> p2{1.0, 5.0};
  std::vector<double> t2{2.0, 4.0};
  EXPECT_DOUBLE_EQ(pl::compute_metrics(p2, t2).ape, 0.375);
}

TEST(Metrics, SkipsNearZeroTargetsInApe) {
  std::vector<double> pred{1.0, 3.0};
  std::vector<double> target{0.0, 2.0};
  EXPECT_DOUBLE_EQ(pl::compute_metrics(pred, target).ape, 0.5);
  std::vector<double> zeroTargets{0.0, 0.0};
  std::vector<double> anyPred{1.0, 1.0};
  EXPECT_DOUBLE_EQ(pl::compute_metrics(anyPred, zeroTargets).ape, 0.0);
}

TEST(Metrics, RejectsBadShapes) {
  std::vector<double> a{1.0, 2.0};
  std::vector<double> b{1.0};
  EXPECT_THROW(pl::compute_metrics(a, b), std::invalid_argument);
  std::vector<double> empty;
  EXPECT_THROW(pl::compute_metrics(empty, empty), std::invalid_argument);
}
