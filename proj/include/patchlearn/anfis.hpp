#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "patchlearn/core.hpp"
#include "patchlearn/fuzzy.hpp"
#include "patchlearn/learner.hpp"
#include "patchlearn/partition.hpp"

namespace patchlearn {

struct AnfisConfig {
  int mfsPerInput = 2;
  double ridgeLambda = 1e-6;
  int premiseEpochs = 50;
  // Finite-difference step as a fraction of each dimension's range.
  double premiseStep = 0.02;

  void validate() const {
    if (mfsPerInput < 2)
      throw std::invalid_argument("anfis config: mfsPerInput must be at least 2");
    if (!(ridgeLambda >= 0.0)) throw std::invalid_argument("anfis config: ridgeLambda must be >= 0");
    if (premiseEpochs < 0) throw std::invalid_argument("anfis config: premiseEpochs must be >= 0");
    if (!(premiseStep > 0.0)) throw std::invalid_argument("anfis config: premiseStep must be > 0");
  }
};

// Uniform-overlap trapezoid layout: the range splits into 2K-1 equal segments,
// MF i takes segment 2i as its core and extends its feet one segment to each
// side, clamped at the range ends into flat shoulders. For K=2 on [0,6] this
// is (0,0,2,4) and (2,4,6,6). Consequents start at zero.
inline TskSystem init_from_data(const Dataset& data, const AnfisConfig& cfg) {
  data.validate();
  cfg.validate();
  std::size_t M = data.dims();
  int K = cfg.mfsPerInput;
  std::vector<std::vector<TrapezoidMf>> mfs(M);
  std::vector<InputRange> ranges(M);
  for (std::size_t m = 0; m < M; ++m) {
    double lo = data.inputs[0][m], hi = lo;
    for (const auto& row : data.inputs) {
      lo = std::min(lo, row[m]);
      hi = std::max(hi, row[m]);
    }
    if (!(hi > lo)) throw DegenerateRangeError(m, lo);
    ranges[m] = {lo, hi};
    double s = (hi - lo) / (2 * K - 1);
    // Segment boundary k of the 2K-1 equal segments, pinned to the exact range
    // endpoints: lo + (2K-1)*s can round to either side of hi, which would
    // leave the last core edge above its own foot or strand hi on a ramp foot
    // with zero membership.
    auto boundary = [&](int k) {
      if (k <= 0) return lo;
      if (k >= 2 * K - 1) return hi;
      return std::min(hi, std::max(lo, lo + k * s));
    };
    for (int i = 0; i < K; ++i)
      mfs[m].push_back(
          {boundary(2 * i - 1), boundary(2 * i), boundary(2 * i + 1), boundary(2 * i + 2)});
  }
  return TskSystem::full_grid(std::move(mfs), std::move(ranges));
}

namespace detail {

// N x R matrix of normalized firing strengths. Rows sum to 1; a row with no
// fired rule is the caller's uncovered-input case.
inline Eigen::MatrixXd normalized_firing(const TskSystem& sys, const Dataset& data) {
  const std::size_t N = data.size(), R = sys.rules.size();
  Eigen::MatrixXd W(N, R);
  for (std::size_t n = 0; n < N; ++n) {
    double sum = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      double w = rule_firing(sys, sys.rules[r], data.row(n));
      W(n, r) = w;
      sum += w;
    }
    if (sum == 0.0)
      throw UncoveredInputError(std::vector<double>(data.inputs[n].begin(), data.inputs[n].end()));
    W.row(n) /= sum;
  }
  return W;
}

inline double training_mse(const TskSystem& sys, const Dataset& data) {
  double sum = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    double e = tsk_infer(sys, data.row(n)) - data.targets[n];
    sum += e * e;
  }
  return sum / static_cast<double>(data.size());
}

// Exhaustive coverage check for one dimension: positive membership must hold
// at every breakpoint inside [lo, hi] and on every open segment between
// consecutive breakpoints (positivity is piecewise constant there, so the
// midpoint decides the whole segment).
inline bool covers_range(const std::vector<TrapezoidMf>& mfs, double lo, double hi) {
  std::vector<double> pts{lo, hi};
  for (const auto& mf : mfs) {
    if (mf.a > lo && mf.a < hi) pts.push_back(mf.a);
    if (mf.d > lo && mf.d < hi) pts.push_back(mf.d);
  }
  std::sort(pts.begin(), pts.end());
  auto covered = [&](double x) {
    for (const auto& mf : mfs)
      if (mf.membership(x) > 0.0) return true;
    return false;
  };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!covered(pts[i])) return false;
    if (i + 1 < pts.size() && !covered(0.5 * (pts[i] + pts[i + 1]))) return false;
  }
  return true;
}

}  // namespace detail

// Least-squares estimate of all rule consequents with the premises fixed,
// using the normalized firing strengths as features. Rules firing on no
// training example are excluded from the solve and keep zero consequents.
inline TskSystem fit_consequents(TskSystem sys, const Dataset& data, double ridgeLambda) {
  sys.validate();
  data.validate();
  if (data.dims() != sys.dims())
    throw std::invalid_argument("fit_consequents: data/system dimension mismatch");
  if (!(ridgeLambda >= 0.0)) throw std::invalid_argument("fit_consequents: negative ridge");

  const std::size_t N = data.size(), R = sys.rules.size(), M = sys.dims(), P = M + 1;
  Eigen::MatrixXd W = detail::normalized_firing(sys, data);

  std::vector<std::size_t> active;
  for (std::size_t r = 0; r < R; ++r)
    if (W.col(r).sum() > 0.0) active.push_back(r);

  Eigen::MatrixXd Z(N, active.size() * P);
  for (std::size_t j = 0; j < active.size(); ++j) {
    Z.col(j * P) = W.col(active[j]);
    for (std::size_t m = 0; m < M; ++m)
      for (std::size_t n = 0; n < N; ++n) Z(n, j * P + m + 1) = W(n, active[j]) * data.inputs[n][m];
  }
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(data.targets.data(), N);

  Eigen::VectorXd c;
  if (ridgeLambda > 0.0) {
    Eigen::MatrixXd G = Z.transpose() * Z;
    G.diagonal().array() += ridgeLambda;
    c = G.ldlt().solve(Z.transpose() * y);
  } else {
    c = Z.colPivHouseholderQr().solve(y);
  }

  for (auto& rule : sys.rules) std::fill(rule.consequent.begin(), rule.consequent.end(), 0.0);
  for (std::size_t j = 0; j < active.size(); ++j)
    for (std::size_t p = 0; p < P; ++p) sys.rules[active[j]].consequent[p] = c(j * P + p);
  return sys;
}

// ANFIS: uniform-overlap init, then premiseEpochs rounds of derivative-free
// coordinate descent over all 4*sum(|mfs|) breakpoints (candidate moves are
// judged on training MSE with the current consequents held fixed, projected
// back to a<=b<=c<=d, and rejected if they would open a coverage gap),
// each round closing with a consequent refit. The step scale halves whenever
// a full round accepts nothing. Returns the best system seen.
inline TskSystem train(const Dataset& data, const AnfisConfig& cfg) {
  cfg.validate();
  TskSystem cur = init_from_data(data, cfg);
  cur = fit_consequents(std::move(cur), data, cfg.ridgeLambda);
  double curMse = detail::training_mse(cur, data);
  TskSystem best = cur;
  double bestMse = curMse;

  const std::size_t M = cur.dims();
  std::vector<double> baseStep(M);
  for (std::size_t m = 0; m < M; ++m)
    baseStep[m] = cfg.premiseStep * (cur.ranges[m].hi - cur.ranges[m].lo);

  double scale = 1.0;
  for (int epoch = 0; epoch < cfg.premiseEpochs && scale > 1e-6; ++epoch) {
    bool accepted = false;
    double sweepMse = curMse;
    for (std::size_t m = 0; m < M; ++m) {
      for (std::size_t j = 0; j < cur.mfs[m].size(); ++j) {
        for (int p = 0; p < 4; ++p) {
          for (double dir : {1.0, -1.0}) {
            TrapezoidMf cand = cur.mfs[m][j];
            double* v[4] = {&cand.a, &cand.b, &cand.c, &cand.d};
            *v[p] += dir * scale * baseStep[m];
            // Project back to a<=b<=c<=d by clamping the moved breakpoint
            // against its neighbours.
            if (p > 0) *v[p] = std::max(*v[p], *v[p - 1]);
            if (p < 3) *v[p] = std::min(*v[p], *v[p + 1]);
            if (cand.a == cur.mfs[m][j].a && cand.b == cur.mfs[m][j].b &&
                cand.c == cur.mfs[m][j].c && cand.d == cur.mfs[m][j].d)
              continue;
            TrapezoidMf saved = cur.mfs[m][j];
            cur.mfs[m][j] = cand;
            if (!detail::covers_range(cur.mfs[m], cur.ranges[m].lo, cur.ranges[m].hi)) {
              cur.mfs[m][j] = saved;
              continue;
            }
            double mse = detail::training_mse(cur, data);
            if (mse < sweepMse - 1e-14 * (1.0 + sweepMse)) {
              sweepMse = mse;
              accepted = true;
              break;
            }
            cur.mfs[m][j] = saved;
          }
        }
      }
    }
    cur = fit_consequents(std::move(cur), data, cfg.ridgeLambda);
    cur.validate();
    curMse = detail::training_mse(cur, data);
    if (curMse < bestMse) {
      best = cur;
      bestMse = curMse;
    }
    if (!accepted) scale *= 0.5;
  }
  return best;
}

// BaseLearner adapter. Out-of-range queries clamp to the trained input ranges
// before inference, keeping predictions total and deterministic.
class AnfisLearner final : public BaseLearner, public RulePartitionSource {
 public:
  AnfisLearner() = default;
  explicit AnfisLearner(AnfisConfig cfg) : cfg_(cfg) {}
  AnfisLearner(AnfisConfig cfg, TskSystem trained) : cfg_(cfg), sys_(std::move(trained)) {
    sys_->validate();
  }

  bool fit(const Dataset& data) override {
    try {
      sys_ = train(data, cfg_);
    } catch (const DegenerateRangeError&) {
      sys_.reset();
      return false;
    }
    return true;
  }

  double predict(std::span<const double> x) const override {
    const TskSystem& sys = system();
    if (x.size() != sys.dims())
      throw std::invalid_argument("anfis predict: input dimension mismatch");
    std::vector<double> q(x.begin(), x.end());
    for (std::size_t m = 0; m < q.size(); ++m)
      q[m] = std::clamp(q[m], sys.ranges[m].lo, sys.ranges[m].hi);
    return tsk_infer(sys, q);
  }

  std::size_t min_examples(std::size_t dims) const override {
    std::size_t rules = 1;
    for (std::size_t m = 0; m < dims; ++m) rules *= static_cast<std::size_t>(cfg_.mfsPerInput);
    return 3 * (dims + 1) * rules;
  }

  std::vector<PatchBox> candidate_boxes() const override {
    return patchlearn::candidate_boxes(system());
  }

  bool fitted() const { return sys_.has_value(); }

  const TskSystem& system() const {
    if (!sys_) throw std::logic_error("anfis learner used before a successful fit");
    return *sys_;
  }

  const AnfisConfig& config() const { return cfg_; }

 private:
  AnfisConfig cfg_{};
  std::optional<TskSystem> sys_;
};

}  // namespace patchlearn
