#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "patchlearn/anfis.hpp"
#include "patchlearn/baselines.hpp"
#include "patchlearn/datasets.hpp"
#include "patchlearn/patch_learning.hpp"
#include "patchlearn/report.hpp"

namespace patchlearn {

struct ExperimentConfig {
  int id = 1;
  int lMax = -1;  // -1 resolves to the experiment default
  double alpha = 0.25;
  int mfsPerInput = 2;
  std::uint64_t seed = 0;
  int retrainEvery = 1;  // experiment 4: retrain cadence over the online window

  void validate() const {
    if (id < 1 || id > 5) throw std::invalid_argument("experiment: id must be 1..5");
    if (!(alpha > 0.0)) throw std::invalid_argument("experiment: alpha must be > 0");
    if (mfsPerInput < 2) throw std::invalid_argument("experiment: mfs must be >= 2");
    if (retrainEvery < 1) throw std::invalid_argument("experiment: retrain cadence must be >= 1");
  }
};

inline int experiment_default_lmax(int id) {
  constexpr int defaults[] = {2, 2, 5, 2, 3};
  if (id < 1 || id > 5) throw std::invalid_argument("experiment: id must be 1..5");
  return defaults[id - 1];
}

namespace detail {

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

struct ExperimentSetup {
  std::string dataset;
  Dataset train;
  std::optional<Dataset> test;
  std::map<std::string, std::string> config;
};

inline ExperimentSetup experiment_setup(const ExperimentConfig& cfg) {
  ExperimentSetup s;
  switch (cfg.id) {
    case 1:
      s.dataset = "curve1d";
      s.train = gen_curve1d();
      break;
    case 2:
      s.dataset = "sinc2d";
      s.train = gen_sinc2d();
      break;
    case 3:
      s.dataset = "manifold3d";
      s.train = gen_manifold3d();
      break;
    case 4: {
      s.dataset = "sysid";
      SysIdStreams streams = gen_sysid();
      s.train = streams.pairs_between(2, 250);
      s.test = streams.pairs_between(251, 700);
      s.config["historyFrom"] = "2";
      s.config["trainWindow"] = "40..250";
      s.config["testWindow"] = "251..700";
      s.config["retrainEvery"] = std::to_string(cfg.retrainEvery);
      s.config["baselineProtocol"] = "batch-final-window";
      break;
    }
    case 5: {
      s.dataset = "mackey-glass";
      MackeyGlassData mg = gen_mackey_glass();
      s.train = std::move(mg.train);
      s.test = std::move(mg.test);
      s.config["split"] = "617/500";
      s.config["lags"] = "12,6,0";
      s.config["predictionHorizon"] = "6";
      break;
    }
    default:
      throw std::invalid_argument("experiment: id must be 1..5");
  }
  s.config["dataset"] = s.dataset;
  return s;
}

inline LearnerFactory anfis_factory(int mfsPerInput) {
  AnfisConfig cfg;
  cfg.mfsPerInput = mfsPerInput;
  return [cfg] { return std::make_unique<AnfisLearner>(cfg); };
}

}  // namespace detail

// Runs one benchmark experiment end to end: a patch-count sweep of the PL
// model plus bagging and LSBoost references with matching learner budgets.
inline Report run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const int lMax = cfg.lMax < 0 ? experiment_default_lmax(cfg.id) : cfg.lMax;
  detail::ExperimentSetup setup = detail::experiment_setup(cfg);
  const Dataset& train = setup.train;
  const Dataset* test = setup.test ? &*setup.test : nullptr;
  LearnerFactory anfis = detail::anfis_factory(cfg.mfsPerInput);

  Report report;
  report.experiment = cfg.id;
  report.seed = cfg.seed;
  report.alpha = cfg.alpha;
  report.config = std::move(setup.config);
  report.config["global"] = "anfis";
  report.config["patch"] = "anfis";
  report.config["mfs"] = std::to_string(cfg.mfsPerInput);
  report.config["lMax"] = std::to_string(lMax);
  report.config["baselineShrinkage"] = "0.1";
  report.config["baselineTreeDepth"] = "4";
  report.config["baselineTreeMinLeaf"] = "5";

  PlConfig plCfg;
  plCfg.alpha = cfg.alpha;
  plCfg.maxPatches = lMax;

  int cap = 0;
  if (cfg.id == 4) {
    // Online protocol: at each eligible k in the training window, retrain
    // from scratch on every pair accumulated so far; the k=250 model is the
    // one reported and scored on the test window.
    SysIdStreams streams = gen_sysid();
    detail::PlSeed probe = detail::prepare_global(train, plCfg, anfis);
    cap = std::max(0, std::min(lMax, static_cast<int>(probe.candidates.size()) - 1));
    for (int L = 0; L <= cap; ++L) {
      PlConfig cfgL = plCfg;
      cfgL.maxPatches = L;
      detail::Stopwatch clock;
      std::optional<PlModel> model;
      for (int k = 40; k <= 250; ++k) {
        if ((k - 40) % cfg.retrainEvery != 0 && k != 250) continue;
        model = train_patch_learning(streams.pairs_between(2, k), cfgL, anfis, anfis);
      }
      report.rows.push_back(make_pl_row("pl-anfis", L, *model, train, test, clock.ms()));
    }
  } else {
    detail::Stopwatch prepClock;
    detail::PlSeed seed = detail::prepare_global(train, plCfg, anfis);
    double prepMs = prepClock.ms();
    cap = std::max(0, std::min(lMax, static_cast<int>(seed.candidates.size()) - 1));
    for (int L = 0; L <= cap; ++L) {
      PlConfig cfgL = plCfg;
      cfgL.maxPatches = L;
      detail::Stopwatch clock;
      PlModel model = detail::assemble(train, cfgL, seed, anfis, anfis);
      // The shared global-model fit is billed to the first row.
      report.rows.push_back(make_pl_row("pl-anfis", L, model, train, test,
                                        clock.ms() + (L == 0 ? prepMs : 0.0)));
    }
  }

  for (std::size_t i = 1; i < report.rows.size(); ++i)
    if (report.rows[i].loss < report.rows[report.bestL].loss) report.bestL = static_cast<int>(i);

  for (int L = 0; L <= cap; ++L) {
    int members = L + 1;
    detail::Stopwatch clock;
    try {
      EnsembleModel bagged = bagging_train(
          train, members, anfis, detail::derive_seed(cfg.seed, static_cast<std::uint64_t>(members)));
      report.baselines.push_back(
          make_baseline_row("bagging-anfis", members, bagged, train, test, clock.ms()));
    } catch (const std::runtime_error& e) {
      // Flag the gap instead of dropping the row silently.
      report.config["partial"] = "bagging-anfis members=" + std::to_string(members) +
                                 " failed: " + e.what();
    }
  }
  for (int L = 0; L <= cap; ++L) {
    int members = L + 1;
    detail::Stopwatch clock;
    EnsembleModel boosted = lsboost_train(train, members, 0.1);
    report.baselines.push_back(
        make_baseline_row("lsboost-tree", members, boosted, train, test, clock.ms()));
  }

  validate_report(report);
  return report;
}

// Tidy long-format plot data (series,x,y) for one experiment: true curve,
// fitted curve, pointwise error, and per-candidate SSE bars under the initial
// global model. plotL < 0 plots the loss-minimal patch count.
inline std::string experiment_plot_csv(const ExperimentConfig& cfg, int plotL = -1) {
  cfg.validate();
  const int lMax = cfg.lMax < 0 ? experiment_default_lmax(cfg.id) : cfg.lMax;
  detail::ExperimentSetup setup = detail::experiment_setup(cfg);
  LearnerFactory anfis = detail::anfis_factory(cfg.mfsPerInput);

  PlConfig plCfg;
  plCfg.alpha = cfg.alpha;
  plCfg.maxPatches = lMax;
  detail::PlSeed seed = detail::prepare_global(setup.train, plCfg, anfis);
  int cap = std::max(0, std::min(lMax, static_cast<int>(seed.candidates.size()) - 1));
  if (plotL > cap)
    throw std::invalid_argument("plot: L exceeds the sweep bound " + std::to_string(cap));

  PlModel model;
  if (plotL < 0) {
    PlSweepResult sweep = select_num_patches(setup.train, plCfg, anfis, anfis);
    model = std::move(sweep.entries[sweep.bestL].model);
  } else {
    PlConfig cfgL = plCfg;
    cfgL.maxPatches = plotL;
    model = detail::assemble(setup.train, cfgL, seed, anfis, anfis);
  }

  const Dataset& eval = setup.test ? *setup.test : setup.train;
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf);
  };
  std::string out = "series,x,y\n";
  auto emit = [&](const char* series, double x, double y) {
    out += std::string(series) + "," + fmt(x) + "," + fmt(y) + "\n";
  };
  for (std::size_t n = 0; n < eval.size(); ++n) {
    double x = eval.dims() == 1 ? eval.inputs[n][0] : static_cast<double>(n);
    double predicted = model.predict(eval.row(n));
    emit("true", x, eval.targets[n]);
    emit("predicted", x, predicted);
    emit("error", x, eval.targets[n] - predicted);
  }
  for (std::size_t k = 0; k < seed.candidates.size(); ++k)
    emit("sse-partition", static_cast<double>(seed.candidates[k].flatIndex), seed.sse[k]);
  return out;
}

}  // namespace patchlearn
