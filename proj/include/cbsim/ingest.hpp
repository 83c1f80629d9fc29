#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cbsim/dataset.hpp"

namespace cbsim {

/// Parses MovieLens-style `ratings.csv` (userId,movieId,rating,timestamp)
/// and `movies.csv` (movieId,title,genres). Genres are pipe-separated; the
/// literal token `(no genres listed)` yields an empty feature list. Item
/// popularity is the number of (deduplicated) ratings the item received.
Dataset parse_movielens(const std::string& ratings_path,
                        const std::string& movies_path);

/// Parses IMDb `title.basics.tsv` and `title.ratings.tsv`. Only titles
/// present in both files and whose titleType is in `title_types` are kept.
/// `\N` marks missing genres. Popularity is numVotes; interactions are
/// empty (user feedback is synthesized downstream).
Dataset parse_imdb(const std::string& basics_path,
                   const std::string& ratings_path,
                   const std::vector<std::string>& title_types = {"movie"});

/// Column mapping for the generic parser. Loaded from a flat key-value
/// config file: one `key value` pair per line, `#` comments allowed.
struct GenericSchema {
  std::string user_col;
  std::string item_col;
  std::string feedback_col;
  std::string feature_col;
  std::string title_col;             // optional; item_id used when empty
  std::string timestamp_col;         // optional
  std::string popularity_col;        // optional; used when no interactions
  std::string feature_delim = "|";
  std::string feature_empty_token;   // optional sentinel for "no features"
  std::string delimiter = ",";       // field delimiter of the data files
  FeedbackScale scale;
};

GenericSchema load_generic_schema(const std::string& path);

/// Parses arbitrary delimited files through a column mapping. With an empty
/// `interactions_path` the dataset has items only. Produces field-level the
/// same dataset as the specialized parsers on equivalently mapped files.
Dataset parse_generic(const std::string& interactions_path,
                      const std::string& items_path,
                      const GenericSchema& schema);

/// Writes a dataset back out in the generic format (items.csv +
/// interactions.csv) and returns the schema that re-parses it.
GenericSchema write_generic(const Dataset& dataset,
                            const std::string& interactions_path,
                            const std::string& items_path);

/// Adapts a labeled classification file (example_id,label,...) into a
/// dataset: one item per distinct label (whose single feature is the label
/// itself) and one feedback-1 interaction per example row.
Dataset parse_classification(const std::string& examples_path);

/// Keeps the k most popular items (ties broken by ascending item_id) in
/// rank order and drops interactions that reference removed items. A k
/// larger than the item count keeps everything.
Dataset top_k_items(const Dataset& dataset, std::size_t k);

/// Keeps interactions belonging to the k users with the most interactions
/// (ties broken by ascending user_id); items are untouched.
Dataset top_k_users(const Dataset& dataset, std::size_t k);

}  // namespace cbsim
