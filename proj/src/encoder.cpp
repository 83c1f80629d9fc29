#include "cbsim/encoder.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

namespace cbsim {

FeatureVocabulary::FeatureVocabulary(std::vector<std::string> features)
    : features_(std::move(features)) {
  std::set<std::string_view> seen;
  for (const auto& f : features_) {
    if (!seen.insert(f).second) {
      throw ConfigError("duplicate feature in vocabulary: " + f);
    }
  }
}

std::optional<std::size_t> FeatureVocabulary::index_of(
    const std::string& feature) const {
  const auto it = std::find(features_.begin(), features_.end(), feature);
  if (it == features_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - features_.begin());
}

FeatureVocabulary build_vocabulary(
    const Dataset& dataset,
    const std::optional<std::vector<std::string>>& explicit_features) {
  if (!explicit_features) {
    std::set<std::string> distinct;
    for (const auto& item : dataset.items) {
      distinct.insert(item.features.begin(), item.features.end());
    }
    return FeatureVocabulary(
        std::vector<std::string>(distinct.begin(), distinct.end()));
  }

  FeatureVocabulary vocab(*explicit_features);
  std::set<std::string> offenders;
  for (const auto& item : dataset.items) {
    for (const auto& f : item.features) {
      if (!vocab.index_of(f)) offenders.insert(f);
    }
  }
  if (!offenders.empty()) {
    std::string msg = "dataset features missing from the vocabulary:";
    for (const auto& f : offenders) msg += " '" + f + "'";
    throw ConfigError(msg);
  }
  return vocab;
}

ActionSet encode_actions(const std::vector<RawItem>& items,
                         const FeatureVocabulary& vocab) {
  std::unordered_map<std::string_view, std::size_t> index;
  index.reserve(vocab.size());
  for (std::size_t j = 0; j < vocab.size(); ++j) {
    index.emplace(vocab.features()[j], j);
  }

  ActionSet actions;
  actions.matrix = Matrix(items.size(), vocab.size());
  actions.item_ids.reserve(items.size());
  actions.titles.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    const RawItem& item = items[i];
    for (const auto& f : item.features) {
      const auto it = index.find(f);
      if (it == index.end()) {
        throw ConfigError("item " + item.item_id +
                          " has a feature outside the vocabulary: '" + f + "'");
      }
      actions.matrix(i, it->second) = 1.0;
    }
    if (item.features.empty()) actions.zero_rows.push_back(i);
    actions.item_ids.push_back(item.item_id);
    actions.titles.push_back(item.title);
  }
  return actions;
}

double normalize_feedback(double value, const FeedbackScale& scale,
                          std::pair<double, double> target) {
  scale.validate();
  if (!(target.first < target.second)) {
    throw ConfigError("normalization target requires low < high");
  }
  if (!scale.contains(value)) {
    throw ConfigError("feedback value outside the declared scale");
  }
  return target.first + (value - scale.min) * (target.second - target.first) /
                            (scale.max - scale.min);
}

StateSet encode_states(const Dataset& dataset, const ActionSet& action_set,
                       const FeedbackScale& scale,
                       std::pair<double, double> target) {
  std::unordered_map<std::string_view, std::size_t> item_row;
  item_row.reserve(action_set.item_ids.size());
  for (std::size_t i = 0; i < action_set.item_ids.size(); ++i) {
    item_row.emplace(action_set.item_ids[i], i);
  }

  // Group interactions per user; the map keeps users in ascending id order.
  std::map<std::string, std::vector<const RawInteraction*>> by_user;
  for (const auto& inter : dataset.interactions) {
    if (!item_row.contains(inter.item_id)) {
      throw InvariantError("interaction references item " + inter.item_id +
                           " absent from the action set");
    }
    by_user[inter.user_id].push_back(&inter);
  }

  StateSet states;
  states.norm_range = target;
  states.matrix = Matrix(by_user.size(), action_set.matrix.cols());
  states.user_ids.reserve(by_user.size());
  std::size_t row = 0;
  for (const auto& [user, inters] : by_user) {
    for (const RawInteraction* inter : inters) {
      const double f = normalize_feedback(inter->feedback, scale, target);
      const auto action_row = action_set.matrix.row(item_row.at(inter->item_id));
      for (std::size_t j = 0; j < action_row.size(); ++j) {
        states.matrix(row, j) += f * action_row[j];
      }
    }
    states.user_ids.push_back(user);
    ++row;
  }
  return states;
}

}  // namespace cbsim
