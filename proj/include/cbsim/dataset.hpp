#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cbsim/errors.hpp"

namespace cbsim {

/// The feedback scale a dataset declares, e.g. half-step stars on
/// [0.5, 5.0] or whole-number votes on [1, 10].
struct FeedbackScale {
  double min = 0.0;
  double max = 1.0;
  std::optional<double> discrete_step;

  bool contains(double value) const { return value >= min && value <= max; }

  void validate() const {
    if (!(min < max)) throw ConfigError("feedback scale requires min < max");
    if (discrete_step) {
      if (!(*discrete_step > 0.0))
        throw ConfigError("feedback scale step must be positive");
      const double steps = (max - min) / *discrete_step;
      if (std::abs(steps - std::round(steps)) > 1e-9)
        throw ConfigError(
            "feedback scale span is not a whole number of steps");
    }
  }

  bool operator==(const FeedbackScale&) const = default;
};

/// One content item: id, display title, its feature tags, and a popularity
/// figure (rating count or vote count depending on the source).
struct RawItem {
  std::string item_id;
  std::string title;
  std::vector<std::string> features;
  double popularity = 0.0;

  bool operator==(const RawItem&) const = default;
};

/// One recorded feedback event. (user_id, item_id) is unique after parsing;
/// duplicate raw rows are resolved latest-timestamp-wins.
struct RawInteraction {
  std::string user_id;
  std::string item_id;
  double feedback = 0.0;
  std::optional<std::int64_t> timestamp;

  bool operator==(const RawInteraction&) const = default;
};

enum class SourceTag { movielens, imdb, generic, classification };

const char* to_string(SourceTag tag);

/// In-memory recommendation dataset shared by all parsers. Interactions may
/// be empty (IMDb-style sources), in which case user feedback is synthesized
/// downstream.
struct Dataset {
  std::vector<RawItem> items;
  std::vector<RawInteraction> interactions;
  FeedbackScale scale;
  SourceTag source_tag = SourceTag::generic;

  /// Content equality ignoring the source tag, which records provenance
  /// rather than substance.
  bool same_content(const Dataset& other) const {
    return items == other.items && interactions == other.interactions &&
           scale == other.scale;
  }
};

}  // namespace cbsim
