#include "cbsim/reward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "cbsim/rng.hpp"

namespace cbsim {

void validate(const RewardTransform& transform) {
  if (const auto* sc = std::get_if<ScaledCosine>(&transform)) {
    if (!(sc->alpha > 0.0)) throw ConfigError("alpha must be positive");
  } else if (const auto* ac = std::get_if<AffineClip>(&transform)) {
    if (!(ac->clip_low <= ac->clip_high)) {
      throw ConfigError("affine clip requires clip_low <= clip_high");
    }
    if (ac->round_step && !(*ac->round_step > 0.0)) {
      throw ConfigError("round_step must be positive");
    }
  }
}

bool is_discrete(const RewardTransform& transform) {
  if (std::holds_alternative<MovieLensClipRound>(transform)) return true;
  if (std::holds_alternative<ImdbSqrtRound>(transform)) return true;
  if (const auto* ac = std::get_if<AffineClip>(&transform)) {
    return ac->round_step.has_value();
  }
  return false;
}

double cosine(std::span<const double> s, std::span<const double> a) {
  if (s.size() != a.size()) {
    throw InvariantError("cosine: dimension mismatch");
  }
  long double dot = 0.0L, ss = 0.0L, aa = 0.0L;
  for (std::size_t i = 0; i < s.size(); ++i) {
    dot += static_cast<long double>(s[i]) * a[i];
    ss += static_cast<long double>(s[i]) * s[i];
    aa += static_cast<long double>(a[i]) * a[i];
  }
  if (ss == 0.0L || aa == 0.0L) {
    throw InvariantError("cosine of a zero-norm vector is undefined");
  }
  const double c = static_cast<double>(dot / (std::sqrt(ss) * std::sqrt(aa)));
  return std::clamp(c, -1.0, 1.0);
}

double ceil_to_step(double value, double step) {
  if (!(step > 0.0)) throw ConfigError("round step must be positive");
  double k = std::ceil(value / step);
  // Guard against value/step landing one ulp above an exact integer.
  if ((k - 1.0) * step >= value) k -= 1.0;
  return k * step;
}

double apply_transform(double c, const RewardTransform& transform) {
  struct Visitor {
    double c;
    double operator()(const ScaledCosine& t) const { return t.alpha * c; }
    double operator()(const MovieLensClipRound&) const {
      return std::clamp(0.5 * std::ceil(2.0 + 10.0 * c), 0.5, 5.0);
    }
    double operator()(const ImdbSqrtRound&) const {
      const double raw = std::ceil(10.0 * std::sqrt(0.5 + 0.5 * c));
      return std::max(1.0, raw);
    }
    double operator()(const AffineClip& t) const {
      double v = t.scale * c + t.offset;
      if (t.round_step) v = ceil_to_step(v, *t.round_step);
      return std::clamp(v, t.clip_low, t.clip_high);
    }
  };
  return std::visit(Visitor{c}, transform);
}

double reward(std::span<const double> s, std::span<const double> a,
              const RewardTransform& transform) {
  return apply_transform(cosine(s, a), transform);
}

RewardHistogram make_histogram(std::span<const double> values) {
  std::map<double, std::uint64_t> bins;
  for (const double v : values) ++bins[v];
  RewardHistogram hist;
  hist.bin_values.reserve(bins.size());
  hist.counts.reserve(bins.size());
  for (const auto& [value, count] : bins) {
    hist.bin_values.push_back(value);
    hist.counts.push_back(count);
    hist.total += count;
  }
  return hist;
}

RewardHistogram reward_histogram(const StateSet& states,
                                 const ActionSet& actions,
                                 const RewardTransform& transform,
                                 const HistogramSampling& sampling) {
  if (!is_discrete(transform)) {
    throw ConfigError(
        "reward histogram needs a transform with discrete output; add a "
        "round_step or bin explicitly");
  }
  const std::size_t ns = states.matrix.rows();
  const std::size_t na = actions.matrix.rows();
  if (ns == 0 || na == 0) throw ConfigError("histogram over empty sets");

  std::map<double, std::uint64_t> bins;
  if (sampling.kind == HistogramSampling::Kind::exhaustive) {
    for (std::size_t i = 0; i < ns; ++i) {
      for (std::size_t j = 0; j < na; ++j) {
        ++bins[reward(states.matrix.row(i), actions.matrix.row(j), transform)];
      }
    }
  } else {
    if (sampling.n_pairs == 0) throw ConfigError("n_pairs must be positive");
    SplitMix64 rng(sampling.seed);
    for (std::uint64_t n = 0; n < sampling.n_pairs; ++n) {
      const std::size_t i = static_cast<std::size_t>(rng.bounded(ns));
      const std::size_t j = static_cast<std::size_t>(rng.bounded(na));
      ++bins[reward(states.matrix.row(i), actions.matrix.row(j), transform)];
    }
  }

  RewardHistogram hist;
  for (const auto& [value, count] : bins) {
    hist.bin_values.push_back(value);
    hist.counts.push_back(count);
    hist.total += count;
  }
  return hist;
}

double tv_distance(const RewardHistogram& h1, const RewardHistogram& h2) {
  if (h1.total == 0 || h2.total == 0) {
    throw ConfigError("total variation distance of an empty histogram");
  }
  std::map<double, std::pair<double, double>> merged;
  for (std::size_t i = 0; i < h1.bin_values.size(); ++i) {
    merged[h1.bin_values[i]].first =
        static_cast<double>(h1.counts[i]) / static_cast<double>(h1.total);
  }
  for (std::size_t i = 0; i < h2.bin_values.size(); ++i) {
    merged[h2.bin_values[i]].second =
        static_cast<double>(h2.counts[i]) / static_cast<double>(h2.total);
  }
  double sum = 0.0;
  for (const auto& [value, p] : merged) sum += std::abs(p.first - p.second);
  return 0.5 * sum;
}

CalibrationResult calibrate_sweep(const StateSet& states,
                                  const ActionSet& actions,
                                  const RewardHistogram& target,
                                  std::span<const double> grid,
                                  double round_step,
                                  std::pair<double, double> clip) {
  if (grid.empty()) throw ConfigError("calibration grid is empty");
  if (target.total == 0) throw ConfigError("calibration target is empty");

  // The cosine of every pair is alpha-independent; compute once.
  const std::size_t ns = states.matrix.rows();
  const std::size_t na = actions.matrix.rows();
  std::vector<double> cosines;
  cosines.reserve(ns * na);
  for (std::size_t i = 0; i < ns; ++i) {
    for (std::size_t j = 0; j < na; ++j) {
      cosines.push_back(cosine(states.matrix.row(i), actions.matrix.row(j)));
    }
  }

  CalibrationResult result;
  result.best_alpha = std::numeric_limits<double>::quiet_NaN();
  double best_tv = std::numeric_limits<double>::infinity();
  std::vector<double> rewards(cosines.size());
  for (const double alpha : grid) {
    if (!(alpha > 0.0)) throw ConfigError("calibration grid alpha <= 0");
    const RewardTransform t =
        AffineClip{alpha, 0.0, round_step, clip.first, clip.second};
    for (std::size_t i = 0; i < cosines.size(); ++i) {
      rewards[i] = apply_transform(cosines[i], t);
    }
    const double tv = tv_distance(make_histogram(rewards), target);
    result.curve.emplace_back(alpha, tv);
    if (tv < best_tv || (tv == best_tv && alpha < result.best_alpha)) {
      best_tv = tv;
      result.best_alpha = alpha;
    }
  }
  return result;
}

double calibrate_alpha(const StateSet& states, const ActionSet& actions,
                       const RewardHistogram& target,
                       std::span<const double> grid, double round_step,
                       std::pair<double, double> clip) {
  return calibrate_sweep(states, actions, target, grid, round_step, clip)
      .best_alpha;
}

}  // namespace cbsim
