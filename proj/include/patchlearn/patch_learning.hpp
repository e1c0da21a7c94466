#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "patchlearn/core.hpp"
#include "patchlearn/learner.hpp"
#include "patchlearn/metrics.hpp"
#include "patchlearn/partition.hpp"

namespace patchlearn {

// Patch-count-penalized loss: rmse * (L+1)^alpha.
inline double loss(double rmse, int numPatches, double alpha) {
  if (!(rmse >= 0.0)) throw std::invalid_argument("loss: rmse must be >= 0");
  if (numPatches < 0) throw std::invalid_argument("loss: patch count must be >= 0");
  if (!(alpha > 0.0)) throw std::invalid_argument("loss: alpha must be > 0");
  return rmse * std::pow(numPatches + 1.0, alpha);
}

struct PlConfig {
  int maxPatches = 0;
  double alpha = 0.25;
  // Candidates holding fewer examples are skipped as untrainable. Unset means
  // each patch learner's own min_examples() decides.
  std::optional<int> minPatchExamples;
  // Unset: candidates come from the global learner's rule partitions. Set: a
  // user-given list of pairwise-disjoint fully-closed boxes.
  std::optional<std::vector<PatchBox>> explicitCandidates;

  void validate() const {
    if (maxPatches < 0) throw std::invalid_argument("pl config: maxPatches must be >= 0");
    if (!(alpha > 0.0)) throw std::invalid_argument("pl config: alpha must be > 0");
    if (minPatchExamples && *minPatchExamples < 1)
      throw std::invalid_argument("pl config: minPatchExamples must be >= 1");
  }
};

struct PlPatch {
  PatchBox box;
  std::shared_ptr<const BaseLearner> learner;
  double sse = 0;         // ranking SSE under the initial global model
  int trainExamples = 0;  // examples this patch claimed during training
};

struct PlModel {
  std::vector<PlPatch> patches;
  // Answers queries outside every patch. When the update was skipped this is
  // the initial global model itself.
  std::shared_ptr<const BaseLearner> globalModel;
  std::shared_ptr<const BaseLearner> initialGlobal;
  bool globalUpdateSkipped = false;
  int globalUpdateExamples = 0;
  double alpha = 0.25;
  double trainingRmse = 0;
  double loss = 0;
  // Training RMSE/loss trajectory: initial global alone, then after each
  // recorded patch (still routing misses to the initial global), then the
  // final model after the global update. Length = patches + 2.
  std::vector<double> stagedRmse;
  std::vector<double> stagedLoss;

  double predict(std::span<const double> x) const {
    for (const auto& p : patches)
      if (p.box.contains(x)) return p.learner->predict(x);
    return globalModel->predict(x);
  }
};

// SSE of the model's residuals inside each box. Boxes holding no examples
// score 0.
inline std::vector<double> candidate_sse(const BaseLearner& model, const Dataset& data,
                                         const std::vector<PatchBox>& boxes) {
  data.validate();
  std::vector<double> sse(boxes.size(), 0.0);
  for (std::size_t n = 0; n < data.size(); ++n) {
    double e = model.predict(data.row(n)) - data.targets[n];
    for (std::size_t k = 0; k < boxes.size(); ++k)
      if (boxes[k].contains(data.row(n))) sse[k] += e * e;
  }
  return sse;
}

namespace detail {

inline bool boxes_overlap(const PatchBox& a, const PatchBox& b) {
  for (std::size_t m = 0; m < a.bounds.size(); ++m) {
    const Interval &ia = a.bounds[m], &ib = b.bounds[m];
    double lo = std::max(ia.lo, ib.lo);
    double hi = std::min(ia.hi, ib.hi);
    if (lo > hi) return false;
    if (lo == hi) {
      // The shared edge point belongs to both only if the lower interval is
      // closed above and the point is not excluded by either lower bound.
      const Interval& upperEnd = ia.hi <= ib.hi ? ia : ib;
      if (!upperEnd.closedAbove) return false;
    }
  }
  return true;
}

inline void validate_explicit_candidates(const std::vector<PatchBox>& boxes,
                                         const Dataset& data) {
  for (const auto& box : boxes) {
    if (box.dims() != data.dims())
      throw std::invalid_argument("patch learning: candidate box dimensionality mismatch");
    for (std::size_t m = 0; m < box.dims(); ++m)
      if (!(box.bounds[m].lo < box.bounds[m].hi))
        throw std::invalid_argument("patch learning: candidate box has empty extent");
  }
  for (std::size_t i = 0; i < boxes.size(); ++i)
    for (std::size_t j = i + 1; j < boxes.size(); ++j)
      if (boxes_overlap(boxes[i], boxes[j]))
        throw std::invalid_argument("patch learning: explicit candidate boxes " +
                                    std::to_string(i) + " and " + std::to_string(j) +
                                    " overlap");
}

struct PlSeed {
  std::shared_ptr<const BaseLearner> initialGlobal;
  std::vector<PatchBox> candidates;
  std::vector<double> sse;
};

inline PlSeed prepare_global(const Dataset& data, const PlConfig& cfg,
                             const LearnerFactory& globalFactory) {
  data.validate();
  cfg.validate();
  auto global = globalFactory();
  if (!global->fit(data))
    throw std::runtime_error("patch learning: global learner refused the full training set");
  PlSeed seed;
  if (cfg.explicitCandidates) {
    validate_explicit_candidates(*cfg.explicitCandidates, data);
    seed.candidates = *cfg.explicitCandidates;
  } else {
    const auto* source = dynamic_cast<const RulePartitionSource*>(global.get());
    if (!source)
      throw std::invalid_argument(
          "patch learning: global learner exposes no rule partitions; pass explicit candidate boxes");
    seed.candidates = source->candidate_boxes();
  }
  seed.sse = candidate_sse(*global, data, seed.candidates);
  seed.initialGlobal = std::move(global);
  return seed;
}

inline double routed_rmse(const Dataset& data, const std::vector<PlPatch>& patches,
                          const BaseLearner& fallback) {
  double sum = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    double yhat = 0.0;
    bool owned = false;
    for (const auto& p : patches)
      if (p.box.contains(data.row(n))) {
        yhat = p.learner->predict(data.row(n));
        owned = true;
        break;
      }
    if (!owned) yhat = fallback.predict(data.row(n));
    double e = yhat - data.targets[n];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(data.size()));
}

inline PlModel assemble(const Dataset& data, const PlConfig& cfg, const PlSeed& seed,
                        const LearnerFactory& globalFactory,
                        const LearnerFactory& patchFactory) {
  PlModel model;
  model.alpha = cfg.alpha;
  model.initialGlobal = seed.initialGlobal;
  model.stagedRmse.push_back(routed_rmse(data, {}, *seed.initialGlobal));
  model.stagedLoss.push_back(loss(model.stagedRmse.back(), 0, cfg.alpha));

  std::vector<bool> inPool(seed.candidates.size(), true);
  std::vector<bool> claimed(data.size(), false);
  while (static_cast<int>(model.patches.size()) < cfg.maxPatches) {
    // Max-SSE candidate still in the pool; scanning order breaks SSE ties
    // toward the lowest flat index.
    std::size_t pick = seed.candidates.size();
    for (std::size_t k = 0; k < seed.candidates.size(); ++k)
      if (inPool[k] && (pick == seed.candidates.size() || seed.sse[k] > seed.sse[pick])) pick = k;
    if (pick == seed.candidates.size()) break;  // pool exhausted
    inPool[pick] = false;

    std::vector<std::size_t> inside;
    for (std::size_t n = 0; n < data.size(); ++n)
      if (!claimed[n] && seed.candidates[pick].contains(data.row(n))) inside.push_back(n);

    auto learner = patchFactory();
    std::size_t needed = cfg.minPatchExamples
                             ? static_cast<std::size_t>(*cfg.minPatchExamples)
                             : learner->min_examples(data.dims());
    if (inside.size() < needed) continue;                 // untrainable: too few examples
    if (!learner->fit(data.subset(inside))) continue;     // untrainable: learner refused

    PlPatch patch;
    patch.box = seed.candidates[pick];
    patch.learner = std::move(learner);
    patch.sse = seed.sse[pick];
    patch.trainExamples = static_cast<int>(inside.size());
    model.patches.push_back(std::move(patch));
    for (std::size_t n : inside) claimed[n] = true;

    double staged = routed_rmse(data, model.patches, *model.initialGlobal);
    model.stagedRmse.push_back(staged);
    model.stagedLoss.push_back(loss(staged, static_cast<int>(model.patches.size()), cfg.alpha));
  }

  std::vector<std::size_t> outside;
  for (std::size_t n = 0; n < data.size(); ++n)
    if (!claimed[n]) outside.push_back(n);
  model.globalUpdateExamples = static_cast<int>(outside.size());
  if (outside.empty()) {
    model.globalUpdateSkipped = true;
    model.globalModel = model.initialGlobal;
  } else {
    auto updated = globalFactory();
    if (updated->fit(data.subset(outside))) {
      model.globalModel = std::move(updated);
    } else {
      model.globalUpdateSkipped = true;
      model.globalModel = model.initialGlobal;
    }
  }

  model.trainingRmse = routed_rmse(data, model.patches, *model.globalModel);
  model.loss = loss(model.trainingRmse, static_cast<int>(model.patches.size()), cfg.alpha);
  model.stagedRmse.push_back(model.trainingRmse);
  model.stagedLoss.push_back(model.loss);
  return model;
}

}  // namespace detail

// Algorithm: train the global model on everything, rank candidate boxes by
// the SSE of its residuals, repeatedly hand the worst box to a fresh patch
// learner (skipping untrainable ones), then refit the global model on the
// examples no patch claimed.
inline PlModel train_patch_learning(const Dataset& data, const PlConfig& cfg,
                                    const LearnerFactory& globalFactory,
                                    const LearnerFactory& patchFactory) {
  return detail::assemble(data, cfg, detail::prepare_global(data, cfg, globalFactory),
                          globalFactory, patchFactory);
}

struct PlSweepEntry {
  int requestedPatches = 0;
  PlModel model;
};

struct PlSweepResult {
  int bestL = 0;
  std::vector<PlSweepEntry> entries;
};

// Trains PL models for L = 0..min(maxPatches, candidates-1), so the final
// candidate always stays with the global model, and picks the loss-minimal
// L, ties toward fewer patches. The global model is trained once and shared.
inline PlSweepResult select_num_patches(const Dataset& data, const PlConfig& cfg,
                                        const LearnerFactory& globalFactory,
                                        const LearnerFactory& patchFactory) {
  detail::PlSeed seed = detail::prepare_global(data, cfg, globalFactory);
  int cap = std::min(cfg.maxPatches, static_cast<int>(seed.candidates.size()) - 1);
  cap = std::max(cap, 0);
  PlSweepResult result;
  for (int L = 0; L <= cap; ++L) {
    PlConfig cfgL = cfg;
    cfgL.maxPatches = L;
    result.entries.push_back({L, detail::assemble(data, cfgL, seed, globalFactory, patchFactory)});
  }
  for (std::size_t i = 1; i < result.entries.size(); ++i)
    if (result.entries[i].model.loss < result.entries[result.bestL].model.loss)
      result.bestL = static_cast<int>(i);
  return result;
}

}  // namespace patchlearn
