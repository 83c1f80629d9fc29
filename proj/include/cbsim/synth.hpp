#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "cbsim/dataset.hpp"
#include "cbsim/encoder.hpp"

namespace cbsim {

/// Discrete distribution over allowed feedback values.
struct RatingSupport {
  std::vector<double> values;
  std::vector<double> probabilities;

  void validate() const;

  /// Uniform over the whole-number ratings low..high.
  static RatingSupport uniform_integer(int low, int high);

  /// A skewed ten-star support shaped like typical public movie-rating
  /// averages (unimodal, peaked around 7). A stand-in, not a fit.
  static RatingSupport imdb_like();
};

/// Configuration for synthesizing user feedback when a dataset records
/// none.
struct SynthConfig {
  std::size_t num_users = 0;
  std::size_t num_nonzero = 50;
  RatingSupport support;
  std::uint64_t seed = 0;
};

struct SparseEntry {
  std::size_t item = 0;
  double value = 0.0;

  bool operator==(const SparseEntry&) const = default;
};

/// One sparse feedback vector per user: exactly num_nonzero distinct item
/// indices drawn uniformly without replacement, each with a value drawn
/// from the rating support. Entries are sorted by item index. User i draws
/// from the stream seeded with derive_seed(config.seed, i), so output is
/// reproducible bit-for-bit and independent of generation order.
std::vector<std::vector<SparseEntry>> simulate_feedback(
    std::size_t catalog_size, const SynthConfig& config);

/// Composes simulate_feedback with encode_states over the full catalog.
/// Synthetic users are named synth_00000, synth_00001, ...
StateSet generate_states(const ActionSet& full_action_set,
                         const FeedbackScale& scale,
                         std::pair<double, double> target,
                         const SynthConfig& config);

}  // namespace cbsim
