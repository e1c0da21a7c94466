#include "patchlearn/anfis.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "patchlearn/datasets.hpp"

using namespace patchlearn;

namespace {

Dataset line_data(double b0, double b1, int n, double lo, double hi) {
  Dataset d;
  for (int i = 0; i < n; ++i) {
    double x = lo + (hi - lo) * i / (n - 1);
    d.push_back({x}, b0 + b1 * x);
  }
  return d;
}

double system_rmse(const TskSystem& sys, const Dataset& data) {
  return std::sqrt(detail::training_mse(sys, data));
}

}  // namespace

TEST(AnfisConfig, Validation) {
  AnfisConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.mfsPerInput = 1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.ridgeLambda = -1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.premiseEpochs = -1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.premiseStep = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(InitFromData, TwoMfLayoutOnZeroToSix) {
  Dataset d = line_data(0, 1, 7, 0, 6);
  TskSystem sys = init_from_data(d, AnfisConfig{});
  ASSERT_EQ(sys.mfs.size(), 1u);
  ASSERT_EQ(sys.mfs[0].size(), 2u);
  EXPECT_DOUBLE_EQ(sys.mfs[0][0].a, 0);
  EXPECT_DOUBLE_EQ(sys.mfs[0][0].b, 0);
  EXPECT_DOUBLE_EQ(sys.mfs[0][0].c, 2);
  EXPECT_DOUBLE_EQ(sys.mfs[0][0].d, 4);
  EXPECT_DOUBLE_EQ(sys.mfs[0][1].a, 2);
  EXPECT_DOUBLE_EQ(sys.mfs[0][1].b, 4);
  EXPECT_DOUBLE_EQ(sys.mfs[0][1].c, 6);
  EXPECT_DOUBLE_EQ(sys.mfs[0][1].d, 6);
  EXPECT_DOUBLE_EQ(sys.ranges[0].lo, 0);
  EXPECT_DOUBLE_EQ(sys.ranges[0].hi, 6);
  for (const auto& r : sys.rules) EXPECT_EQ(r.consequent, (std::vector<double>{0, 0}));
}

TEST(InitFromData, TwoByTwoGridHasFourRules) {
  Dataset d;
  for (double x1 : {0.0, 0.5, 1.0})
    for (double x2 : {0.0, 0.5, 1.0}) d.push_back({x1, x2}, x1 + x2);
  TskSystem sys = init_from_data(d, AnfisConfig{});
  EXPECT_EQ(sys.rules.size(), 4u);
  EXPECT_NO_THROW(sys.validate());
}

TEST(InitFromData, ConstantColumnIsDegenerate) {
  Dataset d;
  for (double x : {0.0, 1.0, 2.0}) d.push_back({x, 5.0}, x);
  try {
    init_from_data(d, AnfisConfig{});
    FAIL() << "expected DegenerateRangeError";
  } catch (const DegenerateRangeError& e) {
    EXPECT_EQ(e.dim, 1u);
    EXPECT_DOUBLE_EQ(e.value, 5.0);
  }
}

TEST(FitConsequents, AffineDataFitExactly) {
  Dataset d = line_data(1.0, 2.0, 101, 0, 6);
  TskSystem sys = init_from_data(d, AnfisConfig{});
  sys = fit_consequents(std::move(sys), d, 0.0);
  EXPECT_LE(system_rmse(sys, d), 1e-8);
}

TEST(FitConsequents, SingleRuleConstantFit) {
  Dataset d;
  d.push_back({0.0}, 3.0);
  d.push_back({1.0}, 3.0);
  TskSystem sys = TskSystem::full_grid({{{0, 0, 1, 1}}}, {{0, 1}});
  sys = fit_consequents(std::move(sys), d, 0.0);
  EXPECT_NEAR(sys.rules[0].consequent[0], 3.0, 1e-12);
  EXPECT_NEAR(sys.rules[0].consequent[1], 0.0, 1e-12);
}

TEST(FitConsequents, SingleRuleAffineFitMatchesClosedFormOnCurveTails) {
  // Samples of the benchmark curve outside both bump intervals are exactly
  // x + x^2; the best affine fit has a closed-form normal-equation solution.
  Dataset full = gen_curve1d();
  Dataset d;
  for (std::size_t i = 0; i < full.size(); ++i) {
    double x = full.inputs[i][0];
    bool inPatch = (x >= 1.5 && x <= 3.0) || (x >= 4.0 && x <= 5.0);
    if (!inPatch) d.push_back(full.inputs[i], full.targets[i]);
  }
  double n = static_cast<double>(d.size()), sx = 0, sxx = 0, sy = 0, sxy = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    double x = d.inputs[i][0], y = d.targets[i];
    sx += x;
    sxx += x * x;
    sy += y;
    sxy += x * y;
  }
  double det = n * sxx - sx * sx;
  double b0 = (sxx * sy - sx * sxy) / det;
  double b1 = (n * sxy - sx * sy) / det;

  TskSystem sys = TskSystem::full_grid({{{0, 0, 6, 6}}}, {{0, 6}});
  sys = fit_consequents(std::move(sys), d, 0.0);
  EXPECT_NEAR(sys.rules[0].consequent[0], b0, 1e-8);
  EXPECT_NEAR(sys.rules[0].consequent[1], b1, 1e-8);
  EXPECT_NEAR(b0, -4.6366151048, 1e-6);
  EXPECT_NEAR(b1, 6.9372750152, 1e-6);
}

TEST(FitConsequents, NeverIncreasesTrainingMse) {
  Dataset d = gen_curve1d();
  TskSystem sys = fit_consequents(init_from_data(d, AnfisConfig{}), d, 0.0);
  double fitted = detail::training_mse(sys, d);
  TskSystem worse = sys;
  for (auto& r : worse.rules)
    for (auto& c : r.consequent) c += 0.5;
  double perturbed = detail::training_mse(worse, d);
  ASSERT_GT(perturbed, fitted);
  TskSystem refit = fit_consequents(std::move(worse), d, 0.0);
  EXPECT_LE(detail::training_mse(refit, d), perturbed + 1e-12);
  EXPECT_NEAR(detail::training_mse(refit, d), fitted, 1e-10);
}

TEST(FitConsequents, ZeroMassRulesKeepZeroConsequents) {
  TskSystem sys = TskSystem::full_grid({{{0, 0, 2, 4}, {2, 4, 6, 6}}}, {{0, 6}});
  Dataset d = line_data(1.0, 1.0, 20, 0.0, 1.9);  // rule 1 never fires
  sys = fit_consequents(std::move(sys), d, 1e-6);
  EXPECT_EQ(sys.rules[1].consequent, (std::vector<double>{0, 0}));
  EXPECT_NE(sys.rules[0].consequent[0], 0.0);
}

TEST(FitConsequents, UncoveredExampleNamesThePoint) {
  TskSystem sys = TskSystem::full_grid({{{0, 1, 2, 3}}}, {{0, 6}});
  Dataset d;
  d.push_back({5.0}, 1.0);
  try {
    fit_consequents(std::move(sys), d, 1e-6);
    FAIL() << "expected UncoveredInputError";
  } catch (const UncoveredInputError& e) {
    EXPECT_DOUBLE_EQ(e.input[0], 5.0);
  }
}

TEST(Train, ZeroEpochsEqualsInitPlusOneFit) {
  Dataset d = gen_curve1d();
  AnfisConfig cfg;
  cfg.premiseEpochs = 0;
  TskSystem trained = train(d, cfg);
  TskSystem manual = fit_consequents(init_from_data(d, cfg), d, cfg.ridgeLambda);
  ASSERT_EQ(trained.rules.size(), manual.rules.size());
  for (std::size_t r = 0; r < trained.rules.size(); ++r)
    EXPECT_EQ(trained.rules[r].consequent, manual.rules[r].consequent);
  for (std::size_t j = 0; j < trained.mfs[0].size(); ++j) {
    EXPECT_EQ(trained.mfs[0][j].a, manual.mfs[0][j].a);
    EXPECT_EQ(trained.mfs[0][j].d, manual.mfs[0][j].d);
  }
}

TEST(Train, RefinementNeverWorsensTrainingMse) {
  Dataset d = gen_curve1d();
  AnfisConfig base;
  base.premiseEpochs = 0;
  AnfisConfig tuned;
  tuned.premiseEpochs = 50;
  double mse0 = detail::training_mse(train(d, base), d);
  double mse1 = detail::training_mse(train(d, tuned), d);
  EXPECT_LE(mse1, mse0 + 1e-12);
}

TEST(Train, OutputSatisfiesSystemInvariants) {
  Dataset d = gen_curve1d();
  TskSystem sys = train(d, AnfisConfig{});
  EXPECT_NO_THROW(sys.validate());
  for (std::size_t m = 0; m < sys.dims(); ++m)
    EXPECT_TRUE(detail::covers_range(sys.mfs[m], sys.ranges[m].lo, sys.ranges[m].hi));
}

TEST(Train, DeterministicAcrossRuns) {
  Dataset d = gen_curve1d();
  TskSystem a = train(d, AnfisConfig{});
  TskSystem b = train(d, AnfisConfig{});
  ASSERT_EQ(a.rules.size(), b.rules.size());
  for (std::size_t r = 0; r < a.rules.size(); ++r)
    EXPECT_EQ(a.rules[r].consequent, b.rules[r].consequent);
  for (std::size_t j = 0; j < a.mfs[0].size(); ++j) {
    EXPECT_EQ(a.mfs[0][j].a, b.mfs[0][j].a);
    EXPECT_EQ(a.mfs[0][j].b, b.mfs[0][j].b);
    EXPECT_EQ(a.mfs[0][j].c, b.mfs[0][j].c);
    EXPECT_EQ(a.mfs[0][j].d, b.mfs[0][j].d);
  }
}

TEST(Train, BenchmarkCurveRmseLandsNearExpectedBand) {
  Dataset d = gen_curve1d();
  TskSystem sys = train(d, AnfisConfig{});
  double rmse = system_rmse(sys, d);
  EXPECT_NEAR(rmse, 1.69, 0.3);
}

TEST(AnfisLearner, FitPredictAndClamping) {
  Dataset d = gen_curve1d();
  AnfisLearner learner;
  ASSERT_TRUE(learner.fit(d));
  std::vector<double> inside{3.5};
  EXPECT_TRUE(std::isfinite(learner.predict(inside)));
  std::vector<double> below{-2.0}, atLo{0.0}, above{9.0}, atHi{6.0};
  EXPECT_DOUBLE_EQ(learner.predict(below), learner.predict(atLo));
  EXPECT_DOUBLE_EQ(learner.predict(above), learner.predict(atHi));
}

TEST(AnfisLearner, RefusesConstantColumn) {
  Dataset d;
  for (int i = 0; i < 10; ++i) d.push_back({1.0, static_cast<double>(i)}, i);
  AnfisLearner learner;
  EXPECT_FALSE(learner.fit(d));
  std::vector<double> x{1.0, 2.0};
  EXPECT_THROW(learner.predict(x), std::logic_error);
}

TEST(AnfisLearner, MinExamplesFormula) {
  AnfisLearner two;  // 2 MFs per input
  EXPECT_EQ(two.min_examples(1), 3u * 2 * 2);
  EXPECT_EQ(two.min_examples(3), 3u * 4 * 8);
  AnfisConfig cfg;
  cfg.mfsPerInput = 3;
  AnfisLearner three(cfg);
  EXPECT_EQ(three.min_examples(2), 3u * 3 * 9);
}

TEST(AnfisLearner, ExposesCandidateBoxes) {
  Dataset d = gen_curve1d();
  AnfisLearner learner;
  ASSERT_TRUE(learner.fit(d));
  auto boxes = learner.candidate_boxes();
  EXPECT_EQ(boxes.size(), 3u);
  EXPECT_DOUBLE_EQ(boxes.front().bounds[0].lo, 0.0);
  EXPECT_DOUBLE_EQ(boxes.back().bounds[0].hi, 6.0);
}
