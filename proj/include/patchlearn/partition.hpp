#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "patchlearn/core.hpp"
#include "patchlearn/fuzzy.hpp"

namespace patchlearn {

// Half-open [lo, hi) by default; the last interval of a partition and every
// explicitly given patch box close the upper end too, so a tiling of a range
// assigns each point to exactly one interval.
struct Interval {
  double lo = 0, hi = 0;
  bool closedAbove = false;

  bool contains(double x) const { return x >= lo && (closedAbove ? x <= hi : x < hi); }
};

// Splits [lo, hi] into maximal intervals on which the set of positively fired
// MFs is constant. Fired sets are decided on interval interiors, so a foot
// touching an interval boundary does not leak into it. `dim` only labels errors.
inline std::vector<Interval> partitions_1d(const std::vector<TrapezoidMf>& mfs, double lo,
                                           double hi, std::size_t dim = 0) {
  if (!(lo < hi)) throw std::invalid_argument("partitions_1d: empty range");
  if (mfs.empty()) throw std::invalid_argument("partitions_1d: no MFs");
  for (const auto& mf : mfs)
    if (!mf.valid()) throw std::invalid_argument("partitions_1d: unordered trapezoid");

  std::vector<double> pts{lo, hi};
  for (const auto& mf : mfs) {
    if (mf.a > lo && mf.a < hi) pts.push_back(mf.a);
    if (mf.d > lo && mf.d < hi) pts.push_back(mf.d);
  }
  std::sort(pts.begin(), pts.end());
  const double tol = 1e-9 * (hi - lo);
  std::vector<double> uniq;
  for (double p : pts)
    if (uniq.empty() || p - uniq.back() > tol) uniq.push_back(p);

  auto fired_at = [&](double x) {
    std::vector<int> s;
    for (std::size_t j = 0; j < mfs.size(); ++j)
      if (mfs[j].membership(x) > 0.0) s.push_back(static_cast<int>(j));
    return s;
  };

  std::vector<Interval> out;
  std::vector<int> prevSet;
  for (std::size_t i = 0; i + 1 < uniq.size(); ++i) {
    std::vector<int> set = fired_at(0.5 * (uniq[i] + uniq[i + 1]));
    if (set.empty()) throw UncoveredRangeError(dim, uniq[i], uniq[i + 1]);
    if (!out.empty() && set == prevSet) {
      out.back().hi = uniq[i + 1];
    } else {
      out.push_back({uniq[i], uniq[i + 1], false});
      prevSet = std::move(set);
    }
  }
  out.back().closedAbove = true;
  return out;
}

// Grid numbering between a 1-based multi-index and a 1-based flat index, with
// the last dimension varying fastest. dims holds the per-dimension counts.
inline int flat_index(std::span<const int> multi, std::span<const int> dims) {
  if (multi.size() != dims.size() || dims.empty())
    throw std::invalid_argument("flat_index: index arity mismatch");
  long k = 0;
  for (std::size_t m = 0; m < dims.size(); ++m) {
    if (dims[m] < 1) throw std::invalid_argument("flat_index: empty dimension");
    if (multi[m] < 1 || multi[m] > dims[m])
      throw std::invalid_argument("flat_index: component " + std::to_string(m) +
                                  " out of range: " + std::to_string(multi[m]));
    k = k * dims[m] + (multi[m] - 1);
  }
  return static_cast<int>(k + 1);
}

inline std::vector<int> multi_index(int k, std::span<const int> dims) {
  if (dims.empty()) throw std::invalid_argument("multi_index: no dimensions");
  long total = 1;
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("multi_index: empty dimension");
    total *= d;
  }
  if (k < 1 || k > total)
    throw std::invalid_argument("multi_index: flat index " + std::to_string(k) +
                                " outside [1, " + std::to_string(total) + "]");
  std::vector<int> multi(dims.size());
  long rem = k - 1;
  for (std::size_t m = dims.size(); m-- > 0;) {
    multi[m] = static_cast<int>(rem % dims[m]) + 1;
    rem /= dims[m];
  }
  return multi;
}

// An axis-aligned input box a patch model is responsible for. Boxes produced
// from rule partitions keep their grid identity (1-based flat index and
// per-dimension partition index); user-given boxes have flatIndex 0 and close
// every upper bound.
struct PatchBox {
  std::vector<Interval> bounds;
  int flatIndex = 0;
  std::vector<int> sourcePartition;

  std::size_t dims() const { return bounds.size(); }

  bool contains(std::span<const double> x) const {
    if (x.size() != bounds.size())
      throw std::invalid_argument("patch box: input has " + std::to_string(x.size()) +
                                  " dims, box has " + std::to_string(bounds.size()));
    for (std::size_t m = 0; m < bounds.size(); ++m)
      if (!bounds[m].contains(x[m])) return false;
    return true;
  }

  static PatchBox closed(const std::vector<std::pair<double, double>>& b) {
    if (b.empty()) throw std::invalid_argument("patch box: no dimensions");
    PatchBox box;
    for (std::size_t m = 0; m < b.size(); ++m) {
      if (!(b[m].first < b[m].second))
        throw std::invalid_argument("patch box: bound " + std::to_string(m) +
                                    " has lo >= hi");
      box.bounds.push_back({b[m].first, b[m].second, true});
    }
    return box;
  }
};

// Cartesian product of the per-dimension rule partitions, in flat-index order.
inline std::vector<PatchBox> candidate_boxes(const TskSystem& sys) {
  sys.validate();
  std::size_t M = sys.dims();
  std::vector<std::vector<Interval>> parts(M);
  std::vector<int> counts(M);
  long total = 1;
  for (std::size_t m = 0; m < M; ++m) {
    parts[m] = partitions_1d(sys.mfs[m], sys.ranges[m].lo, sys.ranges[m].hi, m);
    counts[m] = static_cast<int>(parts[m].size());
    total *= counts[m];
  }
  std::vector<PatchBox> out;
  out.reserve(total);
  std::vector<int> multi(M, 1);
  for (long k = 1; k <= total; ++k) {
    PatchBox box;
    box.flatIndex = static_cast<int>(k);
    box.sourcePartition = multi;
    for (std::size_t m = 0; m < M; ++m) box.bounds.push_back(parts[m][multi[m] - 1]);
    out.push_back(std::move(box));
    for (std::size_t m = M; m-- > 0;) {
      if (++multi[m] <= counts[m]) break;
      multi[m] = 1;
    }
  }
  return out;
}

}  // namespace patchlearn
