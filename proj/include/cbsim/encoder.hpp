#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cbsim/dataset.hpp"
#include "cbsim/matrix.hpp"

namespace cbsim {

/// Ordered list of distinct feature strings. The order is fixed: coordinate
/// j of every action and state vector corresponds to features()[j].
class FeatureVocabulary {
 public:
  FeatureVocabulary() = default;
  explicit FeatureVocabulary(std::vector<std::string> features);

  const std::vector<std::string>& features() const { return features_; }
  std::size_t size() const { return features_.size(); }

  /// Index of a feature, or nullopt if unknown.
  std::optional<std::size_t> index_of(const std::string& feature) const;

  bool operator==(const FeatureVocabulary& other) const {
    return features_ == other.features_;
  }

 private:
  std::vector<std::string> features_;
};

/// Binary |A| x |T| matrix: row i is the multi-hot feature encoding of item
/// item_ids[i]. Items without features keep an all-zero row and are listed
/// in zero_rows so callers can decide what to do with them.
struct ActionSet {
  Matrix matrix;
  std::vector<std::string> item_ids;
  std::vector<std::string> titles;
  std::vector<std::size_t> zero_rows;
};

/// Real |S| x |T| matrix: row i is the feedback-weighted sum of action rows
/// for user user_ids[i], with feedback normalized to norm_range.
struct StateSet {
  Matrix matrix;
  std::vector<std::string> user_ids;
  std::pair<double, double> norm_range{0.0, 1.0};
};

/// Builds the feature vocabulary for a dataset. With an explicit list the
/// order is preserved and every feature occurring in the data must be
/// covered (offenders are reported); otherwise the vocabulary is the sorted
/// set of distinct features found.
FeatureVocabulary build_vocabulary(
    const Dataset& dataset,
    const std::optional<std::vector<std::string>>& explicit_features =
        std::nullopt);

/// Multi-hot encodes items against a vocabulary.
ActionSet encode_actions(const std::vector<RawItem>& items,
                         const FeatureVocabulary& vocab);

/// Affine map from the dataset scale to the target interval; endpoints map
/// to endpoints exactly.
double normalize_feedback(double value, const FeedbackScale& scale,
                          std::pair<double, double> target);

/// Builds user state rows: for each user, the sum of normalized feedback
/// times the action row of the rated item. Pairs without recorded feedback
/// contribute exactly nothing (the term is skipped, not zero-filled).
/// Users are ordered by ascending user_id.
StateSet encode_states(const Dataset& dataset, const ActionSet& action_set,
                       const FeedbackScale& scale,
                       std::pair<double, double> target);

}  // namespace cbsim
