#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "cbsim/encoder.hpp"

namespace cbsim {

/// r = alpha * cos(s, a).
struct ScaledCosine {
  double alpha = 1.0;
  bool operator==(const ScaledCosine&) const = default;
};

/// Half-star movie scale: clip(ceil(2 + 10c) / 2, 0.5, 5.0).
struct MovieLensClipRound {
  bool operator==(const MovieLensClipRound&) const = default;
};

/// Ten-star scale: ceil(10 * sqrt(1/2 + c/2)), clamped below to 1 (the raw
/// formula yields 0 at c = -1, outside the declared 1..10 range).
struct ImdbSqrtRound {
  bool operator==(const ImdbSqrtRound&) const = default;
};

/// clip(ceil_to_step(scale * c + offset), clip_low, clip_high); without a
/// round_step no rounding is applied.
struct AffineClip {
  double scale = 1.0;
  double offset = 0.0;
  std::optional<double> round_step;
  double clip_low = 0.0;
  double clip_high = 1.0;
  bool operator==(const AffineClip&) const = default;
};

using RewardTransform =
    std::variant<ScaledCosine, MovieLensClipRound, ImdbSqrtRound, AffineClip>;

void validate(const RewardTransform& transform);

/// Whether the transform has a discrete output set (histogram-friendly).
bool is_discrete(const RewardTransform& transform);

/// Cosine similarity, clamped to exactly [-1, 1]. Dot products accumulate
/// in the widest native precision. Zero-norm inputs are an error, never a
/// silent zero.
double cosine(std::span<const double> s, std::span<const double> a);

/// Maps a cosine value through a transform. Precondition: c in [-1, 1].
double apply_transform(double c, const RewardTransform& transform);

/// reward(s, a) = apply_transform(cosine(s, a)).
double reward(std::span<const double> s, std::span<const double> a,
              const RewardTransform& transform);

/// Smallest multiple of step that is >= value (mathematical ceiling:
/// exact multiples stay put).
double ceil_to_step(double value, double step);

/// Counts of a discrete value set; bin_values are strictly increasing and
/// counts sum to total.
struct RewardHistogram {
  std::vector<double> bin_values;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  bool operator==(const RewardHistogram&) const = default;
};

RewardHistogram make_histogram(std::span<const double> values);

struct HistogramSampling {
  enum class Kind { exhaustive, sampled };
  Kind kind = Kind::exhaustive;
  std::uint64_t n_pairs = 0;
  std::uint64_t seed = 0;

  static HistogramSampling exhaustive() { return {}; }
  static HistogramSampling sampled(std::uint64_t n_pairs, std::uint64_t seed) {
    return {Kind::sampled, n_pairs, seed};
  }
};

/// Histogram of rewards over all |S|*|A| pairs, or over n seeded uniform
/// pairs. Requires a discrete transform.
RewardHistogram reward_histogram(const StateSet& states,
                                 const ActionSet& actions,
                                 const RewardTransform& transform,
                                 const HistogramSampling& sampling);

/// Half the L1 distance between the normalized histograms, over the union
/// of their supports. In [0, 1].
double tv_distance(const RewardHistogram& h1, const RewardHistogram& h2);

struct CalibrationResult {
  double best_alpha = 0.0;
  /// (alpha, tv distance) for every grid point, in grid order.
  std::vector<std::pair<double, double>> curve;
};

/// Grid search for the scale alpha whose AffineClip{alpha, 0, round_step,
/// clip} reward histogram (exhaustive pairs) is closest in total variation
/// to the target. Ties go to the smallest alpha.
CalibrationResult calibrate_sweep(const StateSet& states,
                                  const ActionSet& actions,
                                  const RewardHistogram& target,
                                  std::span<const double> grid,
                                  double round_step,
                                  std::pair<double, double> clip);

double calibrate_alpha(const StateSet& states, const ActionSet& actions,
                       const RewardHistogram& target,
                       std::span<const double> grid, double round_step,
                       std::pair<double, double> clip);

}  // namespace cbsim
