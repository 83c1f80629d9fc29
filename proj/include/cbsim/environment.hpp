#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cbsim/encoder.hpp"
#include "cbsim/reward.hpp"

namespace cbsim {

enum class SamplerKind { uniform_iid, round_robin };

struct SamplerConfig {
  SamplerKind kind = SamplerKind::uniform_iid;
  std::uint64_t seed = 0;

  bool operator==(const SamplerConfig&) const = default;
};

/// Ordered build metadata carried by the environment file verbatim
/// (source tag, preset, seeds, synthesis parameters, ...).
using Provenance = std::vector<std::pair<std::string, std::string>>;

/// Position in a state stream. Fresh cursors start at step 0; observe()
/// advances them. Cursors are per-run values, never shared.
struct ObserveCursor {
  std::uint64_t position = 0;
};

/// One agent-environment interaction, as recorded by the harness.
struct Interaction {
  std::uint64_t step_index = 0;
  std::size_t state_index = 0;
  std::size_t action_index = 0;
  double reward = 0.0;

  bool operator==(const Interaction&) const = default;
};

/// A sealed (states, actions, reward) triple with a sampling rule. Immutable
/// after build(); rewards are pure functions of the stored rows, so any two
/// loads of the same file behave identically.
class BanditEnvironment {
 public:
  /// Validates and seals the triple: dimensions must agree, both sets must
  /// be non-empty (|A| >= 2), action entries must be binary, and no row may
  /// have zero norm (offending indices are reported).
  static BanditEnvironment build(StateSet states, ActionSet actions,
                                 RewardTransform transform,
                                 SamplerConfig sampler,
                                 FeatureVocabulary vocabulary = {},
                                 Provenance provenance = {});

  std::size_t num_states() const { return states_.matrix.rows(); }
  std::size_t num_actions() const { return actions_.matrix.rows(); }
  std::size_t dim() const { return actions_.matrix.cols(); }

  std::span<const double> state(std::size_t i) const;
  std::span<const double> action(std::size_t i) const;

  const StateSet& states() const { return states_; }
  const ActionSet& actions() const { return actions_; }
  const RewardTransform& transform() const { return transform_; }
  const SamplerConfig& sampler() const { return sampler_; }
  const FeatureVocabulary& vocabulary() const { return vocabulary_; }
  const Provenance& provenance() const { return provenance_; }

  /// State index for a given stream seed and step count. round_robin cycles
  /// 0..|S|-1 and ignores the seed; uniform_iid draws step t from the
  /// stream seeded with derive_seed(seed, t).
  std::size_t state_index_at(std::uint64_t seed, std::uint64_t position) const;

  /// Draws the next state with the environment's own sampler seed.
  std::pair<std::size_t, std::span<const double>> observe(
      ObserveCursor& cursor) const;

  /// Draws the next state with an explicit stream seed (training runs use
  /// seeds derived from the run config, not the environment default).
  std::pair<std::size_t, std::span<const double>> observe(
      ObserveCursor& cursor, std::uint64_t seed) const;

  /// Reward for one (state, action) pair.
  double step(std::size_t state_index, std::size_t action_index) const;

  /// Exhaustive argmax over actions for a state; ties go to the smallest
  /// action index.
  std::pair<std::size_t, double> best_action(std::size_t state_index) const;

  /// Writes/reads the versioned, checksummed environment container
  /// (format documented in the README). Round-trips are byte-canonical.
  void save(const std::string& path) const;
  static BanditEnvironment load(const std::string& path);

 private:
  BanditEnvironment() = default;

  StateSet states_;
  ActionSet actions_;
  RewardTransform transform_;
  SamplerConfig sampler_;
  FeatureVocabulary vocabulary_;
  Provenance provenance_;
};

}  // namespace cbsim
