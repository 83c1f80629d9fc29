#include "cbsim/presets.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <unordered_set>

namespace cbsim {
namespace {

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::size_t count_users(const Dataset& dataset) {
  std::set<std::string_view> users;
  for (const auto& inter : dataset.interactions) users.insert(inter.user_id);
  return users.size();
}

/// Items with no features encode to all-zero action rows, which the
/// environment rejects; the pipelines drop them (with a count) before
/// truncation so the action space stays full-size.
Dataset drop_featureless_items(Dataset dataset, std::size_t& dropped) {
  std::unordered_set<std::string> removed;
  std::vector<RawItem> kept;
  kept.reserve(dataset.items.size());
  for (auto& item : dataset.items) {
    if (item.features.empty()) {
      removed.insert(item.item_id);
    } else {
      kept.push_back(std::move(item));
    }
  }
  dropped = removed.size();
  dataset.items = std::move(kept);
  if (!removed.empty()) {
    std::erase_if(dataset.interactions, [&](const RawInteraction& inter) {
      return removed.contains(inter.item_id);
    });
  }
  return dataset;
}

/// Users whose feedback summed to the zero vector cannot receive cosine
/// rewards; they are removed with a count.
void drop_zero_states(StateSet& states, std::size_t& dropped) {
  const std::size_t rows = states.matrix.rows();
  const std::size_t cols = states.matrix.cols();
  std::vector<std::size_t> keep;
  keep.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    bool nonzero = false;
    for (const double v : states.matrix.row(i)) {
      if (v != 0.0) {
        nonzero = true;
        break;
      }
    }
    if (nonzero) keep.push_back(i);
  }
  dropped = rows - keep.size();
  if (dropped == 0) return;

  Matrix pruned(keep.size(), cols);
  std::vector<std::string> user_ids;
  user_ids.reserve(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const auto src = states.matrix.row(keep[r]);
    std::copy(src.begin(), src.end(), pruned.row(r).begin());
    user_ids.push_back(std::move(states.user_ids[keep[r]]));
  }
  states.matrix = std::move(pruned);
  states.user_ids = std::move(user_ids);
}

RewardHistogram feedback_histogram(const Dataset& dataset) {
  if (dataset.interactions.empty()) return {};
  std::vector<double> values;
  values.reserve(dataset.interactions.size());
  for (const auto& inter : dataset.interactions) {
    values.push_back(inter.feedback);
  }
  return make_histogram(values);
}

void append_common_provenance(Provenance& prov,
                              std::pair<double, double> normalization) {
  prov.emplace_back("rng_algorithm", "splitmix64");
  prov.emplace_back("norm_low", format_double(normalization.first));
  prov.emplace_back("norm_high", format_double(normalization.second));
}

}  // namespace

const std::vector<std::string>& movielens_genres() {
  static const std::vector<std::string> genres = {
      "Action",  "Adventure", "Animation", "Children's", "Comedy",
      "Crime",   "Documentary", "Drama",   "Fantasy",    "Film-Noir",
      "Horror",  "Musical",   "Mystery",   "Romance",    "Sci-Fi",
      "Thriller", "War",      "Western"};
  return genres;
}

const std::vector<std::string>& imdb_genres() {
  static const std::vector<std::string> genres = {
      "Action",    "Adventure", "Animation", "Biography", "Comedy",
      "Crime",     "Documentary", "Drama",   "Family",    "Fantasy",
      "Film-Noir", "Game-Show", "History",   "Horror",    "Music",
      "Musical",   "Mystery",   "News",      "Reality-TV", "Romance",
      "Sci-Fi",    "Short",     "Sport",     "Talk-Show", "Thriller",
      "War",       "Western"};
  return genres;
}

PipelineResult build_movielens_pipeline(const std::string& ratings_path,
                                        const std::string& movies_path,
                                        const MovielensBuildOptions& options) {
  PipelineResult result;
  Dataset dataset = parse_movielens(ratings_path, movies_path);
  result.report.items_parsed = dataset.items.size();
  result.report.interactions_parsed = dataset.interactions.size();
  result.dataset_feedback = feedback_histogram(dataset);

  const std::size_t users_before = count_users(dataset);
  dataset = drop_featureless_items(std::move(dataset),
                                   result.report.items_without_features);
  dataset = top_k_items(dataset, options.top_items);
  result.report.users_dropped = users_before - count_users(dataset);
  dataset = top_k_users(dataset, options.top_users);

  result.vocabulary = build_vocabulary(
      dataset, options.vocabulary ? options.vocabulary
                                  : std::optional(movielens_genres()));
  result.actions = encode_actions(dataset.items, result.vocabulary);
  result.states = encode_states(dataset, result.actions, dataset.scale,
                                options.normalization);
  drop_zero_states(result.states, result.report.zero_state_users);

  result.transform = options.transform;
  result.sampler = options.sampler;
  result.provenance.emplace_back("source_tag", to_string(dataset.source_tag));
  result.provenance.emplace_back("preset", "movielens");
  result.provenance.emplace_back("top_items",
                                 std::to_string(options.top_items));
  result.provenance.emplace_back("top_users",
                                 std::to_string(options.top_users));
  append_common_provenance(result.provenance, options.normalization);
  result.dataset = std::move(dataset);
  return result;
}

PipelineResult build_imdb_pipeline(const std::string& basics_path,
                                   const std::string& ratings_path,
                                   const ImdbBuildOptions& options) {
  PipelineResult result;
  Dataset dataset = parse_imdb(basics_path, ratings_path, options.title_types);
  result.report.items_parsed = dataset.items.size();

  dataset = drop_featureless_items(std::move(dataset),
                                   result.report.items_without_features);
  dataset = top_k_items(dataset, options.catalog_items);

  result.vocabulary = build_vocabulary(
      dataset,
      options.vocabulary ? options.vocabulary : std::optional(imdb_genres()));
  const ActionSet catalog = encode_actions(dataset.items, result.vocabulary);

  SynthConfig synth;
  synth.num_users = options.synth_users;
  synth.num_nonzero = options.synth_nonzero;
  synth.support = options.support;
  synth.seed = options.synth_seed;
  result.states = generate_states(catalog, dataset.scale,
                                  options.normalization, synth);
  drop_zero_states(result.states, result.report.zero_state_users);

  // The catalog is popularity-ranked, so the action space is its prefix.
  const std::size_t num_actions =
      std::min(options.action_items, dataset.items.size());
  const std::vector<RawItem> action_items(
      dataset.items.begin(),
      dataset.items.begin() + static_cast<std::ptrdiff_t>(num_actions));
  result.actions = encode_actions(action_items, result.vocabulary);

  result.transform = options.transform;
  result.sampler = options.sampler;
  result.provenance.emplace_back("source_tag", to_string(dataset.source_tag));
  result.provenance.emplace_back("preset", "imdb");
  result.provenance.emplace_back("catalog_items",
                                 std::to_string(options.catalog_items));
  result.provenance.emplace_back("action_items",
                                 std::to_string(options.action_items));
  result.provenance.emplace_back("synth_users",
                                 std::to_string(options.synth_users));
  result.provenance.emplace_back("synth_nonzero",
                                 std::to_string(options.synth_nonzero));
  result.provenance.emplace_back("synth_seed",
                                 std::to_string(options.synth_seed));
  std::string support;
  for (std::size_t i = 0; i < options.support.values.size(); ++i) {
    if (i) support += ' ';
    support += format_double(options.support.values[i]) + ':' +
               format_double(options.support.probabilities[i]);
  }
  result.provenance.emplace_back("synth_support", support);
  append_common_provenance(result.provenance, options.normalization);
  result.dataset = std::move(dataset);
  return result;
}

PipelineResult build_generic_pipeline(const std::string& interactions_path,
                                      const std::string& items_path,
                                      const GenericSchema& schema,
                                      const GenericBuildOptions& options) {
  PipelineResult result;
  Dataset dataset = parse_generic(interactions_path, items_path, schema);
  result.report.items_parsed = dataset.items.size();
  result.report.interactions_parsed = dataset.interactions.size();
  result.dataset_feedback = feedback_histogram(dataset);
  if (dataset.interactions.empty()) {
    throw ConfigError(
        "the generic pipeline needs recorded interactions to build states; "
        "sources without them need synthesized users (imdb preset)");
  }

  const std::size_t users_before = count_users(dataset);
  dataset = drop_featureless_items(std::move(dataset),
                                   result.report.items_without_features);
  if (options.top_items > 0) dataset = top_k_items(dataset, options.top_items);
  result.report.users_dropped = users_before - count_users(dataset);
  if (options.top_users > 0) dataset = top_k_users(dataset, options.top_users);

  result.vocabulary = build_vocabulary(dataset, options.vocabulary);
  result.actions = encode_actions(dataset.items, result.vocabulary);
  result.states = encode_states(dataset, result.actions, dataset.scale,
                                options.normalization);
  drop_zero_states(result.states, result.report.zero_state_users);

  result.transform = options.transform;
  result.sampler = options.sampler;
  result.provenance.emplace_back("source_tag", to_string(dataset.source_tag));
  result.provenance.emplace_back("preset", "generic");
  append_common_provenance(result.provenance, options.normalization);
  result.dataset = std::move(dataset);
  return result;
}

PipelineResult build_classification_pipeline(
    const std::string& examples_path,
    const ClassificationBuildOptions& options) {
  PipelineResult result;
  Dataset dataset = parse_classification(examples_path);
  result.report.items_parsed = dataset.items.size();
  result.report.interactions_parsed = dataset.interactions.size();
  result.dataset_feedback = feedback_histogram(dataset);

  result.vocabulary = build_vocabulary(dataset);
  result.actions = encode_actions(dataset.items, result.vocabulary);
  result.states = encode_states(dataset, result.actions, dataset.scale,
                                {0.0, 1.0});
  drop_zero_states(result.states, result.report.zero_state_users);

  result.transform = AffineClip{1.0, 0.0, 1.0, 0.0, 1.0};
  result.sampler = options.sampler;
  result.provenance.emplace_back("source_tag", to_string(dataset.source_tag));
  result.provenance.emplace_back("preset", "classification");
  append_common_provenance(result.provenance, {0.0, 1.0});
  result.dataset = std::move(dataset);
  return result;
}

EnvBuild seal_environment(PipelineResult&& parts) {
  BanditEnvironment env = BanditEnvironment::build(
      std::move(parts.states), std::move(parts.actions),
      std::move(parts.transform), parts.sampler, std::move(parts.vocabulary),
      std::move(parts.provenance));
  return EnvBuild{std::move(env), parts.report};
}

EnvBuild build_movielens_env(const std::string& ratings_path,
                             const std::string& movies_path,
                             const MovielensBuildOptions& options) {
  return seal_environment(
      build_movielens_pipeline(ratings_path, movies_path, options));
}

EnvBuild build_imdb_env(const std::string& basics_path,
                        const std::string& ratings_path,
                        const ImdbBuildOptions& options) {
  return seal_environment(
      build_imdb_pipeline(basics_path, ratings_path, options));
}

EnvBuild build_generic_env(const std::string& interactions_path,
                           const std::string& items_path,
                           const GenericSchema& schema,
                           const GenericBuildOptions& options) {
  return seal_environment(
      build_generic_pipeline(interactions_path, items_path, schema, options));
}

EnvBuild build_classification_env(const std::string& examples_path,
                                  const ClassificationBuildOptions& options) {
  return seal_environment(
      build_classification_pipeline(examples_path, options));
}

}  // namespace cbsim
