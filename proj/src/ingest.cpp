#include "cbsim/ingest.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace cbsim {

const char* to_string(SourceTag tag) {
  switch (tag) {
    case SourceTag::movielens: return "movielens";
    case SourceTag::imdb: return "imdb";
    case SourceTag::generic: return "generic";
    case SourceTag::classification: return "classification";
  }
  return "generic";
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return std::move(out).str();
}

bool valid_utf8(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    const unsigned char c = text[i];
    std::size_t extra = 0;
    if (c < 0x80) {
      extra = 0;
    } else if ((c >> 5) == 0x6) {
      extra = 1;
    } else if ((c >> 4) == 0xe) {
      extra = 2;
    } else if ((c >> 3) == 0x1e) {
      extra = 3;
    } else {
      return false;
    }
    if (i + extra >= text.size()) return false;
    for (std::size_t j = 1; j <= extra; ++j) {
      if ((static_cast<unsigned char>(text[i + j]) >> 6) != 0x2) return false;
    }
    i += extra + 1;
  }
  return true;
}

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line the record starts on
};

[[noreturn]] void row_error(const std::string& path, std::size_t line,
                            const std::string& what) {
  throw RowError(path + ":" + std::to_string(line) + ": " + what);
}

/// RFC 4180 reader: quoted fields may contain the delimiter, doubled
/// quotes, and embedded line breaks. Accepts both LF and CRLF endings.
std::vector<Record> parse_delimited(const std::string& text,
                                    const std::string& path, char delim) {
  std::vector<Record> records;
  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    Record rec;
    rec.line = line;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    for (;;) {
      if (i >= n) {
        if (in_quotes) row_error(path, rec.line, "unterminated quoted field");
        rec.fields.push_back(std::move(field));
        break;
      }
      const char c = text[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < n && text[i + 1] == '"') {
            field.push_back('"');
            i += 2;
          } else {
            in_quotes = false;
            ++i;
          }
        } else {
          if (c == '\n') ++line;
          field.push_back(c);
          ++i;
        }
      } else if (c == '"' && field.empty() && !any) {
        in_quotes = true;
        any = true;
        ++i;
      } else if (c == delim) {
        rec.fields.push_back(std::move(field));
        field.clear();
        any = false;
        ++i;
      } else if (c == '\n' || (c == '\r' && i + 1 < n && text[i + 1] == '\n')) {
        rec.fields.push_back(std::move(field));
        i += (c == '\r') ? 2 : 1;
        ++line;
        break;
      } else {
        field.push_back(c);
        any = true;
        ++i;
      }
    }
    for (const auto& f : rec.fields) {
      if (!valid_utf8(f)) row_error(path, rec.line, "invalid UTF-8 in field");
    }
    records.push_back(std::move(rec));
  }
  // Trailing blank line is an artifact of the final newline, not a record.
  if (!records.empty() && records.back().fields.size() == 1 &&
      records.back().fields[0].empty()) {
    records.pop_back();
  }
  return records;
}

std::size_t require_column(const Record& header, const std::string& name,
                           const std::string& path) {
  const auto it =
      std::find(header.fields.begin(), header.fields.end(), name);
  if (it == header.fields.end()) {
    throw SchemaError(path + ": missing column '" + name + "'");
  }
  return static_cast<std::size_t>(it - header.fields.begin());
}

const std::string& field_at(const Record& rec, std::size_t idx,
                            const std::string& path) {
  if (idx >= rec.fields.size()) {
    row_error(path, rec.line, "row has too few fields");
  }
  return rec.fields[idx];
}

double parse_double(const std::string& text, const std::string& path,
                    std::size_t line, const std::string& what) {
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    row_error(path, line, "unparsable " + what + ": '" + text + "'");
  }
  return value;
}

std::int64_t parse_int64(const std::string& text, const std::string& path,
                         std::size_t line, const std::string& what) {
  char* end = nullptr;
  const long long value = std::strtoll(text.c_str(), &end, 10);
  if (text.empty() || end != text.c_str() + text.size()) {
    row_error(path, line, "unparsable " + what + ": '" + text + "'");
  }
  return value;
}

std::vector<std::string> split_features(const std::string& text,
                                        const std::string& delim,
                                        const std::string& empty_token) {
  std::vector<std::string> features;
  if (text.empty() || (!empty_token.empty() && text == empty_token)) {
    return features;
  }
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find(delim, start);
    std::string token = text.substr(
        start, pos == std::string::npos ? std::string::npos : pos - start);
    if (!token.empty() &&
        std::find(features.begin(), features.end(), token) == features.end()) {
      features.push_back(std::move(token));
    }
    if (pos == std::string::npos) break;
    start = pos + delim.size();
  }
  return features;
}

/// Collapses repeated (user, item) pairs: the entry with the latest
/// timestamp wins, and on equal or absent timestamps the later occurrence
/// does. The surviving entry keeps the first occurrence's position.
void dedup_latest_wins(std::vector<RawInteraction>& interactions) {
  std::unordered_map<std::string, std::size_t> seen;
  std::vector<RawInteraction> result;
  result.reserve(interactions.size());
  for (auto& inter : interactions) {
    std::string key = inter.user_id + '\x1f' + inter.item_id;
    const auto [it, inserted] = seen.emplace(std::move(key), result.size());
    if (inserted) {
      result.push_back(std::move(inter));
    } else {
      RawInteraction& old = result[it->second];
      const bool keep_old =
          old.timestamp && inter.timestamp && *old.timestamp > *inter.timestamp;
      if (!keep_old) old = std::move(inter);
    }
  }
  interactions = std::move(result);
}

void count_popularity_from_interactions(Dataset& dataset) {
  std::unordered_map<std::string, double> counts;
  for (const auto& inter : dataset.interactions) counts[inter.item_id] += 1.0;
  for (auto& item : dataset.items) {
    const auto it = counts.find(item.item_id);
    item.popularity = it == counts.end() ? 0.0 : it->second;
  }
}

std::unordered_set<std::string> item_id_set(const Dataset& dataset) {
  std::unordered_set<std::string> ids;
  ids.reserve(dataset.items.size());
  for (const auto& item : dataset.items) ids.insert(item.item_id);
  return ids;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

}  // namespace

Dataset parse_movielens(const std::string& ratings_path,
                        const std::string& movies_path) {
  Dataset dataset;
  dataset.scale = FeedbackScale{0.5, 5.0, 0.5};
  dataset.source_tag = SourceTag::movielens;

  const auto movies = parse_delimited(read_file(movies_path), movies_path, ',');
  if (movies.empty()) throw SchemaError(movies_path + ": empty file");
  const std::size_t id_col = require_column(movies[0], "movieId", movies_path);
  const std::size_t title_col = require_column(movies[0], "title", movies_path);
  const std::size_t genres_col =
      require_column(movies[0], "genres", movies_path);

  std::unordered_set<std::string> ids;
  for (std::size_t r = 1; r < movies.size(); ++r) {
    const Record& rec = movies[r];
    RawItem item;
    item.item_id = field_at(rec, id_col, movies_path);
    item.title = field_at(rec, title_col, movies_path);
    item.features = split_features(field_at(rec, genres_col, movies_path), "|",
                                   "(no genres listed)");
    if (!ids.insert(item.item_id).second) {
      row_error(movies_path, rec.line, "duplicate movieId " + item.item_id);
    }
    dataset.items.push_back(std::move(item));
  }

  const auto ratings =
      parse_delimited(read_file(ratings_path), ratings_path, ',');
  if (ratings.empty()) throw SchemaError(ratings_path + ": empty file");
  const std::size_t user_col =
      require_column(ratings[0], "userId", ratings_path);
  const std::size_t movie_col =
      require_column(ratings[0], "movieId", ratings_path);
  const std::size_t rating_col =
      require_column(ratings[0], "rating", ratings_path);
  const std::size_t ts_col =
      require_column(ratings[0], "timestamp", ratings_path);

  for (std::size_t r = 1; r < ratings.size(); ++r) {
    const Record& rec = ratings[r];
    RawInteraction inter;
    inter.user_id = field_at(rec, user_col, ratings_path);
    inter.item_id = field_at(rec, movie_col, ratings_path);
    inter.feedback = parse_double(field_at(rec, rating_col, ratings_path),
                                  ratings_path, rec.line, "rating");
    if (!dataset.scale.contains(inter.feedback)) {
      row_error(ratings_path, rec.line,
                "rating outside [0.5, 5.0]: " +
                    field_at(rec, rating_col, ratings_path));
    }
    inter.timestamp = parse_int64(field_at(rec, ts_col, ratings_path),
                                  ratings_path, rec.line, "timestamp");
    if (!ids.contains(inter.item_id)) {
      row_error(ratings_path, rec.line,
                "rating references unknown movieId " + inter.item_id);
    }
    dataset.interactions.push_back(std::move(inter));
  }

  dedup_latest_wins(dataset.interactions);
  count_popularity_from_interactions(dataset);
  return dataset;
}

Dataset parse_imdb(const std::string& basics_path,
                   const std::string& ratings_path,
                   const std::vector<std::string>& title_types) {
  Dataset dataset;
  dataset.scale = FeedbackScale{1.0, 10.0, 1.0};
  dataset.source_tag = SourceTag::imdb;

  const auto ratings =
      parse_delimited(read_file(ratings_path), ratings_path, '\t');
  if (ratings.empty()) throw SchemaError(ratings_path + ": empty file");
  const std::size_t r_id_col =
      require_column(ratings[0], "tconst", ratings_path);
  require_column(ratings[0], "averageRating", ratings_path);
  const std::size_t votes_col =
      require_column(ratings[0], "numVotes", ratings_path);

  std::unordered_map<std::string, double> votes;
  for (std::size_t r = 1; r < ratings.size(); ++r) {
    const Record& rec = ratings[r];
    const std::string& id = field_at(rec, r_id_col, ratings_path);
    const std::string& votes_text = field_at(rec, votes_col, ratings_path);
    const std::int64_t n =
        parse_int64(votes_text, ratings_path, rec.line, "numVotes");
    if (n < 0) row_error(ratings_path, rec.line, "negative numVotes");
    if (!votes.emplace(id, static_cast<double>(n)).second) {
      row_error(ratings_path, rec.line, "duplicate tconst " + id);
    }
  }

  const auto basics = parse_delimited(read_file(basics_path), basics_path, '\t');
  if (basics.empty()) throw SchemaError(basics_path + ": empty file");
  const std::size_t b_id_col = require_column(basics[0], "tconst", basics_path);
  const std::size_t type_col =
      require_column(basics[0], "titleType", basics_path);
  const std::size_t title_col =
      require_column(basics[0], "primaryTitle", basics_path);
  const std::size_t genres_col =
      require_column(basics[0], "genres", basics_path);

  std::unordered_set<std::string> ids;
  for (std::size_t r = 1; r < basics.size(); ++r) {
    const Record& rec = basics[r];
    const std::string& id = field_at(rec, b_id_col, basics_path);
    if (!ids.insert(id).second) {
      row_error(basics_path, rec.line, "duplicate tconst " + id);
    }
    const std::string& type = field_at(rec, type_col, basics_path);
    if (std::find(title_types.begin(), title_types.end(), type) ==
        title_types.end()) {
      continue;
    }
    const auto it = votes.find(id);
    if (it == votes.end()) continue;
    RawItem item;
    item.item_id = id;
    item.title = field_at(rec, title_col, basics_path);
    item.features =
        split_features(field_at(rec, genres_col, basics_path), ",", "\\N");
    item.popularity = it->second;
    dataset.items.push_back(std::move(item));
  }

  if (dataset.items.empty()) {
    throw DataError("joining " + basics_path + " with " + ratings_path +
                    " produced zero items");
  }
  return dataset;
}

GenericSchema load_generic_schema(const std::string& path) {
  GenericSchema schema;
  schema.feature_delim.clear();
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_min = false, have_max = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::size_t sep = line.find_first_of(" \t");
    const std::string key = line.substr(0, sep);
    std::string value;
    if (sep != std::string::npos) {
      const std::size_t start = line.find_first_not_of(" \t", sep);
      if (start != std::string::npos) value = line.substr(start);
    }
    if (key == "user_col") schema.user_col = value;
    else if (key == "item_col") schema.item_col = value;
    else if (key == "feedback_col") schema.feedback_col = value;
    else if (key == "feature_col") schema.feature_col = value;
    else if (key == "title_col") schema.title_col = value;
    else if (key == "timestamp_col") schema.timestamp_col = value;
    else if (key == "popularity_col") schema.popularity_col = value;
    else if (key == "feature_delim") schema.feature_delim = value;
    else if (key == "feature_empty_token") schema.feature_empty_token = value;
    else if (key == "delimiter") schema.delimiter = value;
    else if (key == "scale_min") {
      schema.scale.min = parse_double(value, path, line_no, "scale_min");
      have_min = true;
    } else if (key == "scale_max") {
      schema.scale.max = parse_double(value, path, line_no, "scale_max");
      have_max = true;
    } else if (key == "scale_step") {
      schema.scale.discrete_step =
          parse_double(value, path, line_no, "scale_step");
    } else {
      throw SchemaError(path + ":" + std::to_string(line_no) +
                        ": unknown schema key '" + key + "'");
    }
  }
  if (schema.feature_delim.empty()) schema.feature_delim = "|";
  if (schema.item_col.empty())
    throw SchemaError(path + ": schema needs item_col");
  if (schema.feature_col.empty())
    throw SchemaError(path + ": schema needs feature_col");
  if (!have_min || !have_max)
    throw SchemaError(path + ": schema needs scale_min and scale_max");
  schema.scale.validate();
  return schema;
}

Dataset parse_generic(const std::string& interactions_path,
                      const std::string& items_path,
                      const GenericSchema& schema) {
  if (schema.delimiter.size() != 1) {
    throw SchemaError("generic schema delimiter must be a single character");
  }
  schema.scale.validate();
  const char delim = schema.delimiter[0];

  Dataset dataset;
  dataset.scale = schema.scale;
  dataset.source_tag = SourceTag::generic;

  const auto items = parse_delimited(read_file(items_path), items_path, delim);
  if (items.empty()) throw SchemaError(items_path + ": empty file");
  const std::size_t id_col =
      require_column(items[0], schema.item_col, items_path);
  const std::size_t feat_col =
      require_column(items[0], schema.feature_col, items_path);
  std::optional<std::size_t> title_col;
  if (!schema.title_col.empty()) {
    title_col = require_column(items[0], schema.title_col, items_path);
  }
  std::optional<std::size_t> pop_col;
  if (!schema.popularity_col.empty()) {
    pop_col = require_column(items[0], schema.popularity_col, items_path);
  }

  std::unordered_set<std::string> ids;
  for (std::size_t r = 1; r < items.size(); ++r) {
    const Record& rec = items[r];
    RawItem item;
    item.item_id = field_at(rec, id_col, items_path);
    item.title =
        title_col ? field_at(rec, *title_col, items_path) : item.item_id;
    item.features = split_features(field_at(rec, feat_col, items_path),
                                   schema.feature_delim,
                                   schema.feature_empty_token);
    if (pop_col) {
      item.popularity = parse_double(field_at(rec, *pop_col, items_path),
                                     items_path, rec.line, "popularity");
    }
    if (!ids.insert(item.item_id).second) {
      row_error(items_path, rec.line, "duplicate item id " + item.item_id);
    }
    dataset.items.push_back(std::move(item));
  }

  if (!interactions_path.empty()) {
    if (schema.user_col.empty() || schema.feedback_col.empty()) {
      throw SchemaError(
          "generic schema needs user_col and feedback_col to parse "
          "interactions");
    }
    const auto inters =
        parse_delimited(read_file(interactions_path), interactions_path, delim);
    if (inters.empty()) throw SchemaError(interactions_path + ": empty file");
    const std::size_t user_col =
        require_column(inters[0], schema.user_col, interactions_path);
    const std::size_t item_col =
        require_column(inters[0], schema.item_col, interactions_path);
    const std::size_t fb_col =
        require_column(inters[0], schema.feedback_col, interactions_path);
    std::optional<std::size_t> ts_col;
    if (!schema.timestamp_col.empty()) {
      ts_col = require_column(inters[0], schema.timestamp_col,
                              interactions_path);
    }
    for (std::size_t r = 1; r < inters.size(); ++r) {
      const Record& rec = inters[r];
      RawInteraction inter;
      inter.user_id = field_at(rec, user_col, interactions_path);
      inter.item_id = field_at(rec, item_col, interactions_path);
      inter.feedback =
          parse_double(field_at(rec, fb_col, interactions_path),
                       interactions_path, rec.line, "feedback");
      if (!dataset.scale.contains(inter.feedback)) {
        row_error(interactions_path, rec.line,
                  "feedback outside declared scale");
      }
      if (ts_col) {
        const std::string& ts = field_at(rec, *ts_col, interactions_path);
        if (!ts.empty()) {
          inter.timestamp =
              parse_int64(ts, interactions_path, rec.line, "timestamp");
        }
      }
      if (!ids.contains(inter.item_id)) {
        row_error(interactions_path, rec.line,
                  "interaction references unknown item " + inter.item_id);
      }
      dataset.interactions.push_back(std::move(inter));
    }
    dedup_latest_wins(dataset.interactions);
    // With recorded feedback, popularity means rating count; otherwise the
    // popularity column (when mapped) stands.
    if (!dataset.interactions.empty()) {
      count_popularity_from_interactions(dataset);
    }
  }
  return dataset;
}

GenericSchema write_generic(const Dataset& dataset,
                            const std::string& interactions_path,
                            const std::string& items_path) {
  GenericSchema schema;
  schema.user_col = "user_id";
  schema.item_col = "item_id";
  schema.feedback_col = "feedback";
  schema.feature_col = "features";
  schema.title_col = "title";
  schema.timestamp_col = "timestamp";
  schema.popularity_col = "popularity";
  schema.feature_delim = "|";
  schema.scale = dataset.scale;

  std::ofstream items(items_path, std::ios::binary);
  if (!items) throw DataError("cannot write " + items_path);
  items << "item_id,title,features,popularity\n";
  for (const auto& item : dataset.items) {
    std::string joined;
    for (std::size_t i = 0; i < item.features.size(); ++i) {
      if (i) joined += "|";
      joined += item.features[i];
    }
    items << csv_quote(item.item_id) << ',' << csv_quote(item.title) << ','
          << csv_quote(joined) << ',' << format_double(item.popularity)
          << '\n';
  }

  std::ofstream inters(interactions_path, std::ios::binary);
  if (!inters) throw DataError("cannot write " + interactions_path);
  inters << "user_id,item_id,feedback,timestamp\n";
  for (const auto& inter : dataset.interactions) {
    inters << csv_quote(inter.user_id) << ',' << csv_quote(inter.item_id)
           << ',' << format_double(inter.feedback) << ',';
    if (inter.timestamp) inters << *inter.timestamp;
    inters << '\n';
  }
  return schema;
}

Dataset parse_classification(const std::string& examples_path) {
  Dataset dataset;
  dataset.scale = FeedbackScale{0.0, 1.0, 1.0};
  dataset.source_tag = SourceTag::classification;

  const auto rows =
      parse_delimited(read_file(examples_path), examples_path, ',');
  if (rows.empty()) throw SchemaError(examples_path + ": empty file");
  const std::size_t id_col =
      require_column(rows[0], "example_id", examples_path);
  const std::size_t label_col =
      require_column(rows[0], "label", examples_path);

  std::unordered_set<std::string> labels;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const Record& rec = rows[r];
    const std::string& label = field_at(rec, label_col, examples_path);
    if (labels.insert(label).second) {
      dataset.items.push_back(RawItem{label, label, {label}, 0.0});
    }
    RawInteraction inter;
    inter.user_id = field_at(rec, id_col, examples_path);
    inter.item_id = label;
    inter.feedback = 1.0;
    dataset.interactions.push_back(std::move(inter));
  }
  if (dataset.items.empty()) {
    throw SchemaError(examples_path + ": no labeled rows, label set is empty");
  }
  dedup_latest_wins(dataset.interactions);
  count_popularity_from_interactions(dataset);
  return dataset;
}

Dataset top_k_items(const Dataset& dataset, std::size_t k) {
  if (k == 0) throw ConfigError("top_k_items requires k >= 1");
  std::vector<std::size_t> order(dataset.items.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     const RawItem& ia = dataset.items[a];
                     const RawItem& ib = dataset.items[b];
                     if (ia.popularity != ib.popularity)
                       return ia.popularity > ib.popularity;
                     return ia.item_id < ib.item_id;
                   });
  if (k < order.size()) order.resize(k);

  Dataset result;
  result.scale = dataset.scale;
  result.source_tag = dataset.source_tag;
  result.items.reserve(order.size());
  for (const std::size_t idx : order) result.items.push_back(dataset.items[idx]);

  const auto kept = item_id_set(result);
  for (const auto& inter : dataset.interactions) {
    if (kept.contains(inter.item_id)) result.interactions.push_back(inter);
  }
  return result;
}

Dataset top_k_users(const Dataset& dataset, std::size_t k) {
  if (k == 0) throw ConfigError("top_k_users requires k >= 1");
  if (dataset.interactions.empty()) {
    throw ConfigError("top_k_users requires a dataset with interactions");
  }
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& inter : dataset.interactions) ++counts[inter.user_id];

  std::vector<std::pair<std::string, std::size_t>> users(counts.begin(),
                                                         counts.end());
  std::sort(users.begin(), users.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (k < users.size()) users.resize(k);

  std::unordered_set<std::string> kept;
  for (const auto& [user, count] : users) kept.insert(user);

  Dataset result;
  result.scale = dataset.scale;
  result.source_tag = dataset.source_tag;
  result.items = dataset.items;
  for (const auto& inter : dataset.interactions) {
    if (kept.contains(inter.user_id)) result.interactions.push_back(inter);
  }
  return result;
}

}  // namespace cbsim
