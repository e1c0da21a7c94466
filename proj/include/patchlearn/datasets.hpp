#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "patchlearn/core.hpp"

namespace patchlearn {

// All generators are pure and seedless: repeated calls are bit-identical.

// Piecewise 1-D benchmark curve: x + x^2 plus a sine bump of height 8 on
// [1.5, 3] and height 2 on [4, 5] (closed intervals).
inline double curve1d_value(double x) {
  double base = x + x * x;
  if (x >= 1.5 && x <= 3.0) return base + 8.0 * std::sin(x);
  if (x >= 4.0 && x <= 5.0) return base + 2.0 * std::sin(x);
  return base;
}

inline Dataset gen_curve1d() {
  Dataset out;
  for (int i = 0; i <= 600; ++i) {
    double x = 6.0 * i / 600.0;
    out.push_back({x}, curve1d_value(x));
  }
  return out;
}

inline double sinc2d_value(double x1, double x2) {
  auto sinc = [](double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; };
  return sinc(x1) * sinc(x2);
}

// 30 x 30 grid on [-10, 10]^2.
inline Dataset gen_sinc2d() {
  Dataset out;
  for (int i = 0; i < 30; ++i) {
    double x1 = -10.0 + 20.0 * i / 29.0;
    for (int j = 0; j < 30; ++j) {
      double x2 = -10.0 + 20.0 * j / 29.0;
      out.push_back({x1, x2}, sinc2d_value(x1, x2));
    }
  }
  return out;
}

inline double manifold3d_value(double x1, double x2, double x3) {
  double s = 1.0 + std::sqrt(x1) + 1.0 / x2 + std::pow(x3, -1.5);
  return s * s;
}

// 11 x 11 x 11 grid on [1, 6]^3.
inline Dataset gen_manifold3d() {
  Dataset out;
  for (int i = 0; i <= 10; ++i) {
    double x1 = 1.0 + 0.5 * i;
    for (int j = 0; j <= 10; ++j) {
      double x2 = 1.0 + 0.5 * j;
      for (int k = 0; k <= 10; ++k) out.push_back({x1, x2, 1.0 + 0.5 * k}, manifold3d_value(x1, x2, 1.0 + 0.5 * k));
    }
  }
  return out;
}

inline double sysid_input(int k) {
  if (k <= 499) return std::sin(2.0 * M_PI * k / 250.0);
  return 0.5 * std::sin(2.0 * M_PI * k / 250.0) + 0.5 * std::sin(2.0 * M_PI * k / 25.0);
}

inline double sysid_nonlinearity(double u) {
  return 0.6 * std::sin(M_PI * u) + 0.3 * std::sin(3.0 * M_PI * u) + 0.1 * std::sin(5.0 * M_PI * u);
}

// Second-order plant driven by sysid_input: y(k+1) = 0.3 y(k) + 0.6 y(k-1)
// + f(u(k)), seeded with y(1) = y(2) = 0. Identification pairs recover the
// static nonlinearity from the streams: target_k = y(k+1) - 0.3 y(k)
// - 0.6 y(k-1), one pair per k = 2..700.
struct SysIdStreams {
  std::vector<double> u;  // u[k-1] holds u(k), k = 1..700
  std::vector<double> y;  // y[k-1] holds y(k), k = 1..701
  Dataset pairs;

  static constexpr int firstPairK = 2;

  int pair_k(std::size_t row) const { return firstPairK + static_cast<int>(row); }

  // Pairs with k in the inclusive window [kLo, kHi].
  Dataset pairs_between(int kLo, int kHi) const {
    Dataset out;
    for (std::size_t row = 0; row < pairs.size(); ++row) {
      int k = pair_k(row);
      if (k >= kLo && k <= kHi) out.push_back(pairs.inputs[row], pairs.targets[row]);
    }
    return out;
  }
};

inline SysIdStreams gen_sysid() {
  SysIdStreams s;
  for (int k = 1; k <= 700; ++k) s.u.push_back(sysid_input(k));
  s.y.assign(701, 0.0);  // y(1) = y(2) = 0
  for (int k = 2; k <= 700; ++k)
    s.y[k] = 0.3 * s.y[k - 1] + 0.6 * s.y[k - 2] + sysid_nonlinearity(s.u[k - 1]);
  for (int k = 2; k <= 700; ++k) {
    double recovered = s.y[k] - 0.3 * s.y[k - 1] - 0.6 * s.y[k - 2];
    s.pairs.push_back({s.u[k - 1]}, recovered);
  }
  return s;
}

// Delay embedding: one row per t from max(lags) to len-1-horizon, inputs
// series[t - lag] in the given lag order, target series[t + horizon].
inline Dataset apply_embedding(std::span<const double> series, std::span<const int> lags,
                               int horizon) {
  if (lags.empty()) throw std::invalid_argument("embedding: no lags");
  if (horizon < 0) throw std::invalid_argument("embedding: negative horizon");
  int maxLag = 0;
  for (int lag : lags) {
    if (lag < 0) throw std::invalid_argument("embedding: negative lag");
    maxLag = std::max(maxLag, lag);
  }
  if (series.size() < static_cast<std::size_t>(maxLag + horizon + 1))
    throw std::invalid_argument("embedding: series shorter than max lag + horizon");
  Dataset out;
  for (std::size_t t = maxLag; t + horizon < series.size(); ++t) {
    std::vector<double> row;
    row.reserve(lags.size());
    for (int lag : lags) row.push_back(series[t - lag]);
    out.push_back(std::move(row), series[t + horizon]);
  }
  return out;
}

struct MackeyGlassConfig {
  double tau = 17.0;
  double x0 = 1.2;
  int stepsPerUnit = 10;
  int horizon = 1117;  // last integer time emitted
  std::vector<int> lags{12, 6, 0};
  int predictionHorizon = 6;

  void validate() const {
    if (!(tau > 0.0)) throw std::invalid_argument("mackey-glass: tau must be > 0");
    if (stepsPerUnit < 1) throw std::invalid_argument("mackey-glass: stepsPerUnit must be >= 1");
    if (horizon < 1) throw std::invalid_argument("mackey-glass: horizon must be >= 1");
    double steps = tau * stepsPerUnit;
    if (std::abs(steps - std::round(steps)) > 1e-9)
      throw std::invalid_argument("mackey-glass: stepsPerUnit * tau must be integral");
    if (predictionHorizon < 0) throw std::invalid_argument("mackey-glass: negative horizon");
  }
};

struct MackeyGlassData {
  std::vector<double> series;  // x(t) at integer t = 0..horizon
  Dataset embedded;
  Dataset train;  // first 617 embedded rows
  Dataset test;   // last 500 embedded rows
};

// Fixed-step RK4 on dx/dt = 0.2 x(t-tau) / (1 + x(t-tau)^10) - 0.1 x(t) with
// constant pre-history x(t) = x0 for t <= 0. The delayed value at half steps
// (k2/k3 stages) is linearly interpolated between the two adjacent stored
// grid values, which are always already computed because tau spans whole
// grid steps.
inline MackeyGlassData gen_mackey_glass(const MackeyGlassConfig& cfg = {}) {
  cfg.validate();
  const double h = 1.0 / cfg.stepsPerUnit;
  const long D = std::lround(cfg.tau * cfg.stepsPerUnit);
  const long n = static_cast<long>(cfg.horizon) * cfg.stepsPerUnit;

  std::vector<double> grid(n + 1);
  grid[0] = cfg.x0;
  auto hist = [&](long i) { return i < 0 ? cfg.x0 : grid[i]; };
  auto deriv = [](double x, double xd) {
    double p = xd * xd;        // xd^2
    p = p * p * p * p * p;     // xd^10
    return 0.2 * xd / (1.0 + p) - 0.1 * x;
  };
  for (long i = 0; i < n; ++i) {
    double xdA = hist(i - D);
    double xdB = hist(i + 1 - D);
    double xdM = 0.5 * (xdA + xdB);
    double x = grid[i];
    double k1 = deriv(x, xdA);
    double k2 = deriv(x + 0.5 * h * k1, xdM);
    double k3 = deriv(x + 0.5 * h * k2, xdM);
    double k4 = deriv(x + h * k3, xdB);
    grid[i + 1] = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  MackeyGlassData out;
  out.series.reserve(cfg.horizon + 1);
  for (long t = 0; t <= cfg.horizon; ++t) out.series.push_back(grid[t * cfg.stepsPerUnit]);
  out.embedded = apply_embedding(out.series, cfg.lags, cfg.predictionHorizon);

  const std::size_t nTrain = 617, nTest = 500;
  if (out.embedded.size() < std::max(nTrain, nTest))
    throw std::invalid_argument("mackey-glass: series too short for the 617/500 split");
  std::vector<std::size_t> trainIdx, testIdx;
  for (std::size_t i = 0; i < nTrain; ++i) trainIdx.push_back(i);
  for (std::size_t i = out.embedded.size() - nTest; i < out.embedded.size(); ++i) testIdx.push_back(i);
  out.train = out.embedded.subset(trainIdx);
  out.test = out.embedded.subset(testIdx);
  return out;
}

}  // namespace patchlearn
