#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cbsim/environment.hpp"
#include "cbsim/ingest.hpp"
#include "cbsim/synth.hpp"

namespace cbsim {

/// The 18-genre movie vocabulary used by the MovieLens pipeline.
const std::vector<std::string>& movielens_genres();

/// The 27-genre vocabulary used by the IMDb pipeline.
const std::vector<std::string>& imdb_genres();

struct MovielensBuildOptions {
  std::size_t top_items = 100;
  std::size_t top_users = 10000;
  std::pair<double, double> normalization{0.0, 1.0};
  RewardTransform transform = MovieLensClipRound{};
  SamplerConfig sampler{SamplerKind::uniform_iid, 0};
  std::optional<std::vector<std::string>> vocabulary;  // default: 18 genres
};

struct ImdbBuildOptions {
  std::size_t catalog_items = 10000;  // state construction sums over these
  std::size_t action_items = 100;     // the action space
  std::pair<double, double> normalization{-1.0, 1.0};
  RewardTransform transform = ImdbSqrtRound{};
  SamplerConfig sampler{SamplerKind::uniform_iid, 0};
  std::optional<std::vector<std::string>> vocabulary;  // default: 27 genres
  std::size_t synth_users = 10000;
  std::size_t synth_nonzero = 50;
  RatingSupport support = RatingSupport::uniform_integer(1, 10);
  std::uint64_t synth_seed = 0;
  std::vector<std::string> title_types = {"movie"};
};

struct GenericBuildOptions {
  std::size_t top_items = 0;  // 0 keeps all
  std::size_t top_users = 0;  // 0 keeps all
  std::pair<double, double> normalization{-1.0, 1.0};
  RewardTransform transform = ScaledCosine{1.0};
  SamplerConfig sampler{SamplerKind::uniform_iid, 0};
  std::optional<std::vector<std::string>> vocabulary;
};

struct ClassificationBuildOptions {
  SamplerConfig sampler{SamplerKind::uniform_iid, 0};
};

/// What the pipeline did besides the happy path.
struct BuildReport {
  std::size_t items_parsed = 0;
  std::size_t interactions_parsed = 0;
  std::size_t items_without_features = 0;  // dropped before truncation
  std::size_t users_dropped = 0;           // truncation removed all their feedback
  std::size_t zero_state_users = 0;        // state summed to the zero vector
};

/// Everything the pipeline produced short of sealing: enough to calibrate
/// alpha or compare histograms without building an environment.
struct PipelineResult {
  Dataset dataset;  // after feature filtering and truncation
  FeatureVocabulary vocabulary;
  ActionSet actions;  // the environment action space
  StateSet states;
  RewardTransform transform;
  SamplerConfig sampler;
  Provenance provenance;
  BuildReport report;
  /// Distribution of the recorded feedback in the full parsed dataset
  /// (before truncation); empty when the source records no feedback.
  RewardHistogram dataset_feedback;
};

PipelineResult build_movielens_pipeline(const std::string& ratings_path,
                                        const std::string& movies_path,
                                        const MovielensBuildOptions& options = {});

PipelineResult build_imdb_pipeline(const std::string& basics_path,
                                   const std::string& ratings_path,
                                   const ImdbBuildOptions& options = {});

PipelineResult build_generic_pipeline(const std::string& interactions_path,
                                      const std::string& items_path,
                                      const GenericSchema& schema,
                                      const GenericBuildOptions& options = {});

PipelineResult build_classification_pipeline(
    const std::string& examples_path,
    const ClassificationBuildOptions& options = {});

struct EnvBuild {
  BanditEnvironment env;
  BuildReport report;
};

/// Seals a pipeline result into a validated environment.
EnvBuild seal_environment(PipelineResult&& parts);

EnvBuild build_movielens_env(const std::string& ratings_path,
                             const std::string& movies_path,
                             const MovielensBuildOptions& options = {});

EnvBuild build_imdb_env(const std::string& basics_path,
                        const std::string& ratings_path,
                        const ImdbBuildOptions& options = {});

EnvBuild build_generic_env(const std::string& interactions_path,
                           const std::string& items_path,
                           const GenericSchema& schema,
                           const GenericBuildOptions& options = {});

EnvBuild build_classification_env(
    const std::string& examples_path,
    const ClassificationBuildOptions& options = {});

}  // namespace cbsim
