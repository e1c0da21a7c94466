#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "patchlearn/core.hpp"
#include "patchlearn/partition.hpp"

namespace patchlearn {

// Minimal trained-regressor contract the patch engine works against.
class BaseLearner {
 public:
  virtual ~BaseLearner() = default;

  // Returns false when the learner refuses the data (its untrainable signal,
  // e.g. a constant input column or an underdetermined fit). The learner is
  // unusable for predict() after a refusal.
  virtual bool fit(const Dataset& data) = 0;

  virtual double predict(std::span<const double> x) const = 0;

  // Smallest training-set size worth attempting on `dims` inputs; the patch
  // engine skips candidates holding fewer examples.
  virtual std::size_t min_examples(std::size_t dims) const = 0;
};

using LearnerFactory = std::function<std::unique_ptr<BaseLearner>()>;

// Fitted learners that carve the input space into rule partitions expose the
// resulting candidate patch boxes through this interface.
class RulePartitionSource {
 public:
  virtual ~RulePartitionSource() = default;
  virtual std::vector<PatchBox> candidate_boxes() const = 0;
};

}  // namespace patchlearn
