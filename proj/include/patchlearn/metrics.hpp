#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace patchlearn {

struct Metrics {
  double rmse = 0;
  double sse = 0;
  // Mean |y - yhat| / |y| over examples with |y| > 1e-12, as a fraction.
  double ape = 0;
};

inline Metrics compute_metrics(std::span<const double> predictions,
                               std::span<const double> targets) {
  if (predictions.size() != targets.size() || predictions.empty())
    throw std::invalid_argument("metrics: prediction/target length mismatch or empty");
  Metrics m;
  std::size_t apeCount = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    double e = predictions[i] - targets[i];
    m.sse += e * e;
    if (std::abs(targets[i]) > 1e-12) {
      m.ape += std::abs(e) / std::abs(targets[i]);
      ++apeCount;
    }
  }
  m.rmse = std::sqrt(m.sse / static_cast<double>(targets.size()));
  m.ape = apeCount ? m.ape / static_cast<double>(apeCount) : 0.0;
  return m;
}

}  // namespace patchlearn
