#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "patchlearn/core.hpp"

namespace patchlearn {

// Trapezoid (a, b, c, d): 0 outside [a, d], 1 on [b, c], linear ramps between.
// Degenerate edges collapse: membership at x == a is 1 exactly when a == b,
// and at x == d exactly when c == d (the shoulder case).
struct TrapezoidMf {
  double a = 0, b = 0, c = 0, d = 0;

  bool valid() const { return a <= b && b <= c && c <= d; }

  double membership(double x) const {
    if (x < a || x > d) return 0.0;
    if (x >= b && x <= c) return 1.0;
    if (x < b) return (x - a) / (b - a);
    return (d - x) / (d - c);
  }
};

struct InputRange {
  double lo = 0, hi = 0;
};

// One grid rule: an antecedent MF index per input dimension and a first-order
// consequent b0 + b1 x1 + ... + bM xM.
struct TskRule {
  std::vector<int> antecedent;
  std::vector<double> consequent;

  double consequent_value(std::span<const double> x) const {
    double y = consequent[0];
    for (std::size_t m = 0; m < x.size(); ++m) y += consequent[m + 1] * x[m];
    return y;
  }
};

// Full-grid first-order TSK system. Rules are stored in grid order with the
// last dimension's MF index varying fastest, matching the flat candidate-box
// numbering used elsewhere.
struct TskSystem {
  std::vector<std::vector<TrapezoidMf>> mfs;  // per dimension
  std::vector<TskRule> rules;
  std::vector<InputRange> ranges;

  std::size_t dims() const { return mfs.size(); }

  void validate() const {
    if (mfs.empty()) throw std::invalid_argument("tsk: no input dimensions");
    if (mfs.size() != ranges.size())
      throw std::invalid_argument("tsk: mfs/ranges dimension mismatch");
    std::size_t grid = 1;
    for (std::size_t m = 0; m < mfs.size(); ++m) {
      if (mfs[m].empty()) throw std::invalid_argument("tsk: dimension " + std::to_string(m) + " has no MFs");
      for (const auto& mf : mfs[m])
        if (!mf.valid())
          throw std::invalid_argument("tsk: unordered trapezoid on dimension " + std::to_string(m));
      if (!(ranges[m].lo < ranges[m].hi))
        throw std::invalid_argument("tsk: empty input range on dimension " + std::to_string(m));
      grid *= mfs[m].size();
    }
    if (rules.size() != grid)
      throw std::invalid_argument("tsk: rule count " + std::to_string(rules.size()) +
                                  " does not cover the full grid of " + std::to_string(grid));
    for (const auto& r : rules) {
      if (r.antecedent.size() != mfs.size() || r.consequent.size() != mfs.size() + 1)
        throw std::invalid_argument("tsk: rule arity mismatch");
      for (std::size_t m = 0; m < mfs.size(); ++m)
        if (r.antecedent[m] < 0 || static_cast<std::size_t>(r.antecedent[m]) >= mfs[m].size())
          throw std::invalid_argument("tsk: rule references missing MF");
    }
  }

  // Every MF combination once, zero consequents, grid order (last dim fastest).
  static TskSystem full_grid(std::vector<std::vector<TrapezoidMf>> mfsPerDim,
                             std::vector<InputRange> inputRanges) {
    TskSystem sys;
    sys.mfs = std::move(mfsPerDim);
    sys.ranges = std::move(inputRanges);
    std::size_t M = sys.mfs.size();
    std::size_t grid = 1;
    for (const auto& dim : sys.mfs) grid *= dim.size();
    sys.rules.reserve(grid);
    std::vector<int> ant(M, 0);
    for (std::size_t r = 0; r < grid; ++r) {
      TskRule rule;
      rule.antecedent = ant;
      rule.consequent.assign(M + 1, 0.0);
      sys.rules.push_back(std::move(rule));
      for (std::size_t m = M; m-- > 0;) {
        if (++ant[m] < static_cast<int>(sys.mfs[m].size())) break;
        ant[m] = 0;
      }
    }
    return sys;
  }
};

// Product t-norm over the rule's antecedent memberships.
inline double rule_firing(const TskSystem& sys, const TskRule& rule, std::span<const double> x) {
  if (x.size() != sys.dims() || rule.antecedent.size() != sys.dims())
    throw std::invalid_argument("rule_firing: input has " + std::to_string(x.size()) +
                                " dims, system has " + std::to_string(sys.dims()));
  double w = 1.0;
  for (std::size_t m = 0; m < x.size(); ++m) {
    w *= sys.mfs[m][rule.antecedent[m]].membership(x[m]);
    if (w == 0.0) return 0.0;
  }
  return w;
}

// Firing-strength-weighted average of the rule consequents.
inline double tsk_infer(const TskSystem& sys, std::span<const double> x) {
  if (x.size() != sys.dims())
    throw std::invalid_argument("tsk_infer: input has " + std::to_string(x.size()) +
                                " dims, system has " + std::to_string(sys.dims()));
  double num = 0.0, den = 0.0;
  for (const auto& rule : sys.rules) {
    double w = rule_firing(sys, rule, x);
    if (w == 0.0) continue;
    num += w * rule.consequent_value(x);
    den += w;
  }
  if (den == 0.0) throw UncoveredInputError(std::vector<double>(x.begin(), x.end()));
  return num / den;
}

}  // namespace patchlearn
