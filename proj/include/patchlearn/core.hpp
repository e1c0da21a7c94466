#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace patchlearn {

// A labeled regression sample: N rows of M real inputs plus one real target each.
// Rows are stored row-major; the container is deliberately dumb so generators,
// learners and the patch engine can all share it.
struct Dataset {
  std::vector<std::vector<double>> inputs;
  std::vector<double> targets;

  std::size_t size() const { return targets.size(); }
  std::size_t dims() const { return inputs.empty() ? 0 : inputs.front().size(); }

  std::span<const double> row(std::size_t i) const { return inputs[i]; }

  void push_back(std::vector<double> x, double y) {
    inputs.push_back(std::move(x));
    targets.push_back(y);
  }

  Dataset subset(const std::vector<std::size_t>& idx) const {
    Dataset out;
    out.inputs.reserve(idx.size());
    out.targets.reserve(idx.size());
    for (std::size_t i : idx) {
      out.inputs.push_back(inputs[i]);
      out.targets.push_back(targets[i]);
    }
    return out;
  }

  // Rectangular, non-empty, finite. Throws std::invalid_argument otherwise.
  void validate() const {
    if (targets.empty() || inputs.size() != targets.size())
      throw std::invalid_argument("dataset: empty or ragged (inputs vs targets)");
    std::size_t m = inputs.front().size();
    if (m == 0) throw std::invalid_argument("dataset: zero input dimensions");
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (inputs[i].size() != m)
        throw std::invalid_argument("dataset: ragged row " + std::to_string(i));
      for (double v : inputs[i])
        if (!std::isfinite(v))
          throw std::invalid_argument("dataset: non-finite input in row " + std::to_string(i));
      if (!std::isfinite(targets[i]))
        throw std::invalid_argument("dataset: non-finite target in row " + std::to_string(i));
    }
  }
};

namespace detail {

inline std::string join_doubles(std::span<const double> v) {
  std::string s;
  char buf[64];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6g", v[i]);
    if (i) s += ", ";
    s += buf;
  }
  return s;
}

// Shortest fixed-precision significant-digit form, locale independent.
inline std::string format_sig(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return std::string(buf);
}

}  // namespace detail

// An input fell outside every region a model can answer for.
struct UncoveredInputError : std::runtime_error {
  explicit UncoveredInputError(std::vector<double> x)
      : std::runtime_error("no rule fires at input (" + detail::join_doubles(x) + ")"),
        input(std::move(x)) {}
  std::vector<double> input;
};

// A training column was constant, so no membership layout can be placed on it.
struct DegenerateRangeError : std::runtime_error {
  DegenerateRangeError(std::size_t dim_, double value_)
      : std::runtime_error("zero-width input range on dimension " + std::to_string(dim_) +
                           " (all values " + detail::format_sig(value_, 6) + ")"),
        dim(dim_), value(value_) {}
  std::size_t dim;
  double value;
};

// The membership functions on one dimension leave a gap inside the input range.
struct UncoveredRangeError : std::runtime_error {
  UncoveredRangeError(std::size_t dim_, double gapLo_, double gapHi_)
      : std::runtime_error("membership gap on dimension " + std::to_string(dim_) + ": [" +
                           detail::format_sig(gapLo_, 6) + ", " +
                           detail::format_sig(gapHi_, 6) + "] fires no rule"),
        dim(dim_), gapLo(gapLo_), gapHi(gapHi_) {}
  std::size_t dim;
  double gapLo;
  double gapHi;
};

}  // namespace patchlearn
