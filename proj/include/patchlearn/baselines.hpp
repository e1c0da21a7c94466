#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "patchlearn/core.hpp"
#include "patchlearn/learner.hpp"

namespace patchlearn {

// Per-input polynomial without cross terms: y = b0 + sum_m sum_p b_{m,p} x_m^p.
// Coefficient layout: [b0, x1^1..xM^1, x1^2..xM^2, ...] (degree-major).
struct PolynomialModel {
  int degree = 2;
  std::vector<double> coeffs;

  double evaluate(std::span<const double> x) const {
    std::size_t M = x.size();
    if (coeffs.size() != 1 + degree * M)
      throw std::invalid_argument("polynomial: input dimension mismatch");
    double y = coeffs[0];
    std::vector<double> pow(x.begin(), x.end());
    std::size_t at = 1;
    for (int p = 1; p <= degree; ++p) {
      for (std::size_t m = 0; m < M; ++m) y += coeffs[at++] * pow[m];
      if (p < degree)
        for (std::size_t m = 0; m < M; ++m) pow[m] *= x[m];
    }
    return y;
  }
};

// Ordinary least squares; nullopt when the design is underdetermined or
// rank-deficient (the untrainable signal).
inline std::optional<PolynomialModel> poly_fit(const Dataset& data, int degree) {
  data.validate();
  if (degree < 1) throw std::invalid_argument("poly_fit: degree must be >= 1");
  const std::size_t N = data.size(), M = data.dims(), C = 1 + degree * M;
  if (N < C) return std::nullopt;
  Eigen::MatrixXd A(N, C);
  for (std::size_t n = 0; n < N; ++n) {
    A(n, 0) = 1.0;
    std::size_t at = 1;
    std::vector<double> pow(data.inputs[n]);
    for (int p = 1; p <= degree; ++p) {
      for (std::size_t m = 0; m < M; ++m) A(n, at++) = pow[m];
      if (p < degree)
        for (std::size_t m = 0; m < M; ++m) pow[m] *= data.inputs[n][m];
    }
  }
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(data.targets.data(), N);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < static_cast<Eigen::Index>(C)) return std::nullopt;
  Eigen::VectorXd c = qr.solve(y);
  PolynomialModel model;
  model.degree = degree;
  model.coeffs.assign(c.data(), c.data() + C);
  return model;
}

class PolynomialLearner final : public BaseLearner {
 public:
  explicit PolynomialLearner(int degree = 2) : degree_(degree) {
    if (degree < 1) throw std::invalid_argument("polynomial learner: degree must be >= 1");
  }
  explicit PolynomialLearner(PolynomialModel trained)
      : degree_(trained.degree), model_(std::move(trained)) {}

  bool fit(const Dataset& data) override {
    model_ = poly_fit(data, degree_);
    return model_.has_value();
  }

  double predict(std::span<const double> x) const override { return model().evaluate(x); }

  std::size_t min_examples(std::size_t) const override {
    return 3 * (static_cast<std::size_t>(degree_) + 1);
  }

  const PolynomialModel& model() const {
    if (!model_) throw std::logic_error("polynomial learner used before a successful fit");
    return *model_;
  }

  int degree() const { return degree_; }

 private:
  int degree_;
  std::optional<PolynomialModel> model_;
};

struct TreeParams {
  int maxDepth = 4;
  int minLeaf = 5;

  void validate() const {
    if (maxDepth < 0) throw std::invalid_argument("tree: maxDepth must be >= 0");
    if (minLeaf < 1) throw std::invalid_argument("tree: minLeaf must be >= 1");
  }
};

// CART-style regression tree: axis-aligned splits at midpoints of adjacent
// sorted values, chosen greedily by SSE reduction; leaves predict the mean.
struct RegressionTree {
  struct Node {
    bool leaf = true;
    double value = 0;   // leaf mean
    int count = 0;      // training examples in this node
    int dim = -1;
    double threshold = 0;
    int left = -1, right = -1;  // x[dim] < threshold goes left
  };
  std::vector<Node> nodes;  // nodes[0] is the root
  TreeParams params;

  double predict(std::span<const double> x) const {
    if (nodes.empty()) throw std::logic_error("regression tree: empty");
    int at = 0;
    while (!nodes[at].leaf) at = x[nodes[at].dim] < nodes[at].threshold ? nodes[at].left : nodes[at].right;
    return nodes[at].value;
  }
};

namespace detail {

struct SplitChoice {
  bool found = false;
  std::size_t dim = 0;
  double threshold = 0;
  double gain = 0;
};

inline SplitChoice best_split(const Dataset& data, const std::vector<std::size_t>& idx,
                              int minLeaf) {
  const std::size_t n = idx.size(), M = data.dims();
  double sy = 0, syy = 0;
  for (std::size_t i : idx) {
    sy += data.targets[i];
    syy += data.targets[i] * data.targets[i];
  }
  double parentSse = syy - sy * sy / static_cast<double>(n);
  // Gains below this are split-noise on constant-ish leaves, not structure.
  double gainFloor = 1e-12 * std::max(parentSse, 1e-300);

  SplitChoice best;
  std::vector<std::size_t> order(idx);
  for (std::size_t m = 0; m < M; ++m) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return data.inputs[a][m] < data.inputs[b][m];
    });
    double leftSy = 0, leftSyy = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      double yi = data.targets[order[i]];
      leftSy += yi;
      leftSyy += yi * yi;
      std::size_t nl = i + 1, nr = n - nl;
      if (nl < static_cast<std::size_t>(minLeaf) || nr < static_cast<std::size_t>(minLeaf))
        continue;
      double xl = data.inputs[order[i]][m], xr = data.inputs[order[i + 1]][m];
      if (!(xl < xr)) continue;
      double sseL = leftSyy - leftSy * leftSy / static_cast<double>(nl);
      double rightSy = sy - leftSy, rightSyy = syy - leftSyy;
      double sseR = rightSyy - rightSy * rightSy / static_cast<double>(nr);
      double gain = parentSse - sseL - sseR;
      if (gain > best.gain + gainFloor || (!best.found && gain > gainFloor)) {
        best = {true, m, 0.5 * (xl + xr), gain};
      }
    }
  }
  return best;
}

inline int grow_tree(RegressionTree& tree, const Dataset& data, std::vector<std::size_t> idx,
                     int depth) {
  RegressionTree::Node node;
  node.count = static_cast<int>(idx.size());
  double mean = 0;
  for (std::size_t i : idx) mean += data.targets[i];
  node.value = mean / static_cast<double>(idx.size());

  int self = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(node);
  if (depth >= tree.params.maxDepth ||
      idx.size() < 2 * static_cast<std::size_t>(tree.params.minLeaf))
    return self;
  SplitChoice split = best_split(data, idx, tree.params.minLeaf);
  if (!split.found) return self;

  std::vector<std::size_t> leftIdx, rightIdx;
  for (std::size_t i : idx)
    (data.inputs[i][split.dim] < split.threshold ? leftIdx : rightIdx).push_back(i);
  tree.nodes[self].leaf = false;
  tree.nodes[self].dim = static_cast<int>(split.dim);
  tree.nodes[self].threshold = split.threshold;
  int left = grow_tree(tree, data, std::move(leftIdx), depth + 1);
  tree.nodes[self].left = left;
  int right = grow_tree(tree, data, std::move(rightIdx), depth + 1);
  tree.nodes[self].right = right;
  return self;
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer over seed + salt: decorrelated per-member streams
  // from one experiment-level seed.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

inline RegressionTree tree_fit(const Dataset& data, const TreeParams& params = {}) {
  data.validate();
  params.validate();
  RegressionTree tree;
  tree.params = params;
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  detail::grow_tree(tree, data, std::move(idx), 0);
  return tree;
}

class TreeLearner final : public BaseLearner {
 public:
  explicit TreeLearner(TreeParams params = {}) : params_(params) {}
  explicit TreeLearner(RegressionTree trained)
      : params_(trained.params), tree_(std::move(trained)) {}

  bool fit(const Dataset& data) override {
    tree_ = tree_fit(data, params_);
    return true;
  }

  double predict(std::span<const double> x) const override { return tree().predict(x); }

  std::size_t min_examples(std::size_t) const override {
    return static_cast<std::size_t>(params_.minLeaf);
  }

  const RegressionTree& tree() const {
    if (!tree_) throw std::logic_error("tree learner used before fit");
    return *tree_;
  }

 private:
  TreeParams params_;
  std::optional<RegressionTree> tree_;
};

// Trained ensemble: plain average, or boosted sum F0 + shrinkage * sum.
struct EnsembleModel {
  enum class Combiner { average, boostedSum };

  Combiner combiner = Combiner::average;
  double shrinkage = 1.0;  // boosted-sum only
  double f0 = 0.0;         // boosted-sum only
  std::vector<std::shared_ptr<const BaseLearner>> members;

  double predict(std::span<const double> x) const {
    if (members.empty()) throw std::logic_error("ensemble: no members");
    double sum = 0.0;
    for (const auto& m : members) sum += m->predict(x);
    if (combiner == Combiner::average) return sum / static_cast<double>(members.size());
    return f0 + shrinkage * sum;
  }
};

// Per-attempt bootstrap index generator; the default draws size-n with
// replacement from a per-member seeded engine. Exposed so tests can force
// identity or failing resamples.
using Resampler = std::function<std::vector<std::size_t>(int member, int attempt, std::size_t n)>;

inline EnsembleModel bagging_train(const Dataset& data, int B, const LearnerFactory& factory,
                                   std::uint64_t seed, const Resampler& resample = {}) {
  data.validate();
  if (B < 1) throw std::invalid_argument("bagging: member count must be >= 1");
  const std::size_t N = data.size();
  EnsembleModel ensemble;
  ensemble.combiner = EnsembleModel::Combiner::average;
  for (int b = 0; b < B; ++b) {
    // mt19937_64 modulo N instead of uniform_int_distribution: the latter's
    // stream is implementation-defined, this is bit-reproducible everywhere.
    std::mt19937_64 eng(detail::derive_seed(seed, static_cast<std::uint64_t>(b)));
    for (int attempt = 0; attempt < 5; ++attempt) {
      std::vector<std::size_t> idx;
      if (resample) {
        idx = resample(b, attempt, N);
      } else {
        idx.reserve(N);
        for (std::size_t i = 0; i < N; ++i) idx.push_back(eng() % N);
      }
      auto learner = factory();
      if (learner->fit(data.subset(idx))) {
        ensemble.members.emplace_back(std::move(learner));
        break;
      }
    }
  }
  if (ensemble.members.empty())
    throw std::runtime_error("bagging: every member was untrainable after 5 resamples");
  return ensemble;
}

inline EnsembleModel lsboost_train(const Dataset& data, int rounds, double shrinkage,
                                   const TreeParams& params = {}) {
  data.validate();
  if (rounds < 1) throw std::invalid_argument("lsboost: rounds must be >= 1");
  if (!(shrinkage >= 0.0)) throw std::invalid_argument("lsboost: negative shrinkage");
  EnsembleModel ensemble;
  ensemble.combiner = EnsembleModel::Combiner::boostedSum;
  ensemble.shrinkage = shrinkage;
  double mean = 0.0;
  for (double y : data.targets) mean += y;
  ensemble.f0 = mean / static_cast<double>(data.size());

  Dataset residuals = data;
  for (double& r : residuals.targets) r -= ensemble.f0;
  for (int t = 0; t < rounds; ++t) {
    RegressionTree tree = tree_fit(residuals, params);
    for (std::size_t n = 0; n < residuals.size(); ++n)
      residuals.targets[n] -= shrinkage * tree.predict(residuals.row(n));
    ensemble.members.push_back(std::make_shared<TreeLearner>(std::move(tree)));
  }
  return ensemble;
}

}  // namespace patchlearn
