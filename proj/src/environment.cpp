#include "cbsim/environment.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>

#include "cbsim/rng.hpp"

namespace cbsim {
namespace {

constexpr std::string_view kMagic = "CBSIM-ENV";
constexpr int kFormatVersion = 1;

/// CRC-32 (IEEE 802.3): reflected, polynomial 0xEDB88320, initial and
/// final XOR 0xFFFFFFFF.
std::uint32_t crc32(std::string_view data) {
  static const std::array<std::uint32_t, 256> table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) {
        c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      }
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (const char ch : data) {
    crc = table[(crc ^ static_cast<unsigned char>(ch)) & 0xFFu] ^ (crc >> 8);
  }
  return crc ^ 0xFFFFFFFFu;
}

std::string escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape(std::string_view text, const std::string& context) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\') {
      out.push_back(text[i]);
      continue;
    }
    if (i + 1 >= text.size()) {
      throw FormatError(context + ": dangling escape");
    }
    switch (text[++i]) {
      case '\\': out.push_back('\\'); break;
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default: throw FormatError(context + ": unknown escape sequence");
    }
  }
  return out;
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

double parse_double(const std::string& text, const std::string& context) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw FormatError(context + ": bad number '" + text + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& text, const std::string& context) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw FormatError(context + ": bad integer '" + text + "'");
  }
  return v;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find('\t', start);
    out.push_back(line.substr(
        start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

void parse_row_values(const std::string& blob, std::span<double> out,
                      const std::string& context) {
  std::size_t start = 0;
  for (std::size_t j = 0; j < out.size(); ++j) {
    const std::size_t pos = blob.find(' ', start);
    const std::string token = blob.substr(
        start, pos == std::string::npos ? std::string::npos : pos - start);
    out[j] = parse_double(token, context);
    if (pos == std::string::npos) {
      if (j + 1 != out.size()) throw FormatError(context + ": short row");
      return;
    }
    start = pos + 1;
  }
  if (start <= blob.size()) throw FormatError(context + ": long row");
}

const char* sampler_kind_name(SamplerKind kind) {
  return kind == SamplerKind::uniform_iid ? "uniform_iid" : "round_robin";
}

SamplerKind sampler_kind_from(const std::string& name) {
  if (name == "uniform_iid") return SamplerKind::uniform_iid;
  if (name == "round_robin") return SamplerKind::round_robin;
  throw FormatError("unknown sampler kind '" + name + "'");
}

/// Sequential line reader over the file body.
struct LineCursor {
  const std::vector<std::string>& lines;
  std::size_t next = 0;

  const std::string& take(const std::string& expectation) {
    if (next >= lines.size()) {
      throw FormatError("truncated file: expected " + expectation);
    }
    return lines[next++];
  }
};

void expect_header(LineCursor& cursor, const std::string& name,
                   std::vector<std::string>& fields) {
  fields = split_tabs(cursor.take(name + " block"));
  if (fields.empty() || fields[0] != name) {
    throw FormatError("expected " + name + " block header");
  }
}

}  // namespace

BanditEnvironment BanditEnvironment::build(StateSet states, ActionSet actions,
                                           RewardTransform transform,
                                           SamplerConfig sampler,
                                           FeatureVocabulary vocabulary,
                                           Provenance provenance) {
  validate(transform);
  if (states.matrix.cols() != actions.matrix.cols()) {
    throw ConfigError("state dimension " +
                      std::to_string(states.matrix.cols()) +
                      " does not match action dimension " +
                      std::to_string(actions.matrix.cols()));
  }
  if (states.matrix.rows() == 0) throw ConfigError("environment needs |S| >= 1");
  if (actions.matrix.rows() < 2) throw ConfigError("environment needs |A| >= 2");
  if (states.matrix.rows() != states.user_ids.size() ||
      actions.matrix.rows() != actions.item_ids.size() ||
      actions.matrix.rows() != actions.titles.size()) {
    throw InvariantError("matrix rows do not align with provenance lists");
  }
  if (vocabulary.size() != 0 && vocabulary.size() != actions.matrix.cols()) {
    throw ConfigError("vocabulary size does not match the matrix dimension");
  }

  std::string zero_rows;
  for (std::size_t i = 0; i < actions.matrix.rows(); ++i) {
    double norm = 0.0;
    for (const double v : actions.matrix.row(i)) {
      if (v != 0.0 && v != 1.0) {
        throw InvariantError("action entries must be 0 or 1 (row " +
                             std::to_string(i) + ")");
      }
      norm += v;
    }
    if (norm == 0.0) zero_rows += " action:" + std::to_string(i);
  }
  for (std::size_t i = 0; i < states.matrix.rows(); ++i) {
    double norm = 0.0;
    for (const double v : states.matrix.row(i)) {
      if (!std::isfinite(v)) {
        throw InvariantError("non-finite state entry in row " +
                             std::to_string(i));
      }
      norm += v * v;
    }
    if (norm == 0.0) zero_rows += " state:" + std::to_string(i);
  }
  if (!zero_rows.empty()) {
    throw ConfigError(
        "zero-norm rows make cosine rewards undefined; offending rows:" +
        zero_rows);
  }

  BanditEnvironment env;
  env.states_ = std::move(states);
  env.actions_ = std::move(actions);
  env.transform_ = std::move(transform);
  env.sampler_ = sampler;
  env.vocabulary_ = std::move(vocabulary);
  env.provenance_ = std::move(provenance);
  return env;
}

std::span<const double> BanditEnvironment::state(std::size_t i) const {
  if (i >= num_states()) throw std::out_of_range("state index out of range");
  return states_.matrix.row(i);
}

std::span<const double> BanditEnvironment::action(std::size_t i) const {
  if (i >= num_actions()) throw std::out_of_range("action index out of range");
  return actions_.matrix.row(i);
}

std::size_t BanditEnvironment::state_index_at(std::uint64_t seed,
                                              std::uint64_t position) const {
  if (sampler_.kind == SamplerKind::round_robin) {
    return static_cast<std::size_t>(position % num_states());
  }
  SplitMix64 rng(derive_seed(seed, position));
  return static_cast<std::size_t>(rng.bounded(num_states()));
}

std::pair<std::size_t, std::span<const double>> BanditEnvironment::observe(
    ObserveCursor& cursor) const {
  return observe(cursor, sampler_.seed);
}

std::pair<std::size_t, std::span<const double>> BanditEnvironment::observe(
    ObserveCursor& cursor, std::uint64_t seed) const {
  const std::size_t index = state_index_at(seed, cursor.position);
  ++cursor.position;
  return {index, states_.matrix.row(index)};
}

double BanditEnvironment::step(std::size_t state_index,
                               std::size_t action_index) const {
  return reward(state(state_index), action(action_index), transform_);
}

std::pair<std::size_t, double> BanditEnvironment::best_action(
    std::size_t state_index) const {
  const auto s = state(state_index);
  std::size_t best = 0;
  double best_reward = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < num_actions(); ++a) {
    const double r = reward(s, actions_.matrix.row(a), transform_);
    if (r > best_reward) {
      best_reward = r;
      best = a;
    }
  }
  return {best, best_reward};
}

void BanditEnvironment::save(const std::string& path) const {
  std::ostringstream out;
  out << kMagic << ' ' << kFormatVersion << '\n';

  out << "[meta]\n";
  for (const auto& [key, value] : provenance_) {
    out << escape(key) << '\t' << escape(value) << '\n';
  }

  out << "[sampler]\t" << sampler_kind_name(sampler_.kind) << '\t'
      << sampler_.seed << '\n';

  out << "[transform]\t";
  if (const auto* sc = std::get_if<ScaledCosine>(&transform_)) {
    out << "scaled_cosine\t" << format_double(sc->alpha);
  } else if (std::holds_alternative<MovieLensClipRound>(transform_)) {
    out << "movielens_clip_round";
  } else if (std::holds_alternative<ImdbSqrtRound>(transform_)) {
    out << "imdb_sqrt_round";
  } else {
    const auto& ac = std::get<AffineClip>(transform_);
    out << "affine_clip\t" << format_double(ac.scale) << '\t'
        << format_double(ac.offset) << '\t'
        << (ac.round_step ? format_double(*ac.round_step)
                          : std::string("none"))
        << '\t' << format_double(ac.clip_low) << '\t'
        << format_double(ac.clip_high);
  }
  out << '\n';

  out << "[vocabulary]\t" << vocabulary_.size() << '\n';
  for (const auto& feature : vocabulary_.features()) {
    out << escape(feature) << '\n';
  }

  out << "[actions]\t" << num_actions() << '\t' << dim() << '\n';
  for (std::size_t i = 0; i < num_actions(); ++i) {
    out << escape(actions_.item_ids[i]) << '\t' << escape(actions_.titles[i])
        << '\t';
    const auto row = actions_.matrix.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ' ';
      out << format_double(row[j]);
    }
    out << '\n';
  }

  out << "[states]\t" << num_states() << '\t' << dim() << '\t'
      << format_double(states_.norm_range.first) << '\t'
      << format_double(states_.norm_range.second) << '\n';
  for (std::size_t i = 0; i < num_states(); ++i) {
    out << escape(states_.user_ids[i]) << '\t';
    const auto row = states_.matrix.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ' ';
      out << format_double(row[j]);
    }
    out << '\n';
  }

  std::string body = std::move(out).str();
  char checksum[16];
  std::snprintf(checksum, sizeof(checksum), "%08x", crc32(body));
  body += "[checksum]\tcrc32\t";
  body += checksum;
  body += '\n';

  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot write " + path);
  file << body;
  if (!file) throw DataError("write failed for " + path);
}

BanditEnvironment BanditEnvironment::load(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot open " + path);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  const std::string content = std::move(buffer).str();

  // The checksum line covers every byte before it.
  const std::size_t checksum_pos = content.rfind("[checksum]\t");
  if (checksum_pos == std::string::npos ||
      (checksum_pos != 0 && content[checksum_pos - 1] != '\n')) {
    throw FormatError(path + ": missing checksum (truncated file?)");
  }
  const std::string_view body(content.data(), checksum_pos);
  const auto checksum_fields =
      split_tabs(content.substr(checksum_pos).substr(
          0, content.find('\n', checksum_pos) - checksum_pos));
  if (checksum_fields.size() != 3 || checksum_fields[1] != "crc32") {
    throw FormatError(path + ": malformed checksum line");
  }
  char expected[16];
  std::snprintf(expected, sizeof(expected), "%08x", crc32(body));
  if (checksum_fields[2] != expected) {
    throw FormatError(path + ": checksum mismatch, file is corrupted");
  }

  std::vector<std::string> lines;
  {
    std::size_t start = 0;
    while (start < body.size()) {
      std::size_t pos = body.find('\n', start);
      if (pos == std::string_view::npos) pos = body.size();
      lines.emplace_back(body.substr(start, pos - start));
      start = pos + 1;
    }
  }
  LineCursor cursor{lines};

  {
    const auto magic = split_tabs(cursor.take("magic line"));
    std::istringstream header(magic.empty() ? "" : magic[0]);
    std::string name;
    int version = -1;
    header >> name >> version;
    if (name != kMagic) throw FormatError(path + ": not an environment file");
    if (version != kFormatVersion) {
      throw FormatError(path + ": unsupported format version " +
                        std::to_string(version));
    }
  }

  Provenance provenance;
  {
    const std::string& header = cursor.take("[meta] block");
    if (header != "[meta]") throw FormatError(path + ": expected [meta]");
    while (cursor.next < lines.size() && lines[cursor.next][0] != '[') {
      const auto kv = split_tabs(lines[cursor.next++]);
      if (kv.size() != 2) throw FormatError(path + ": malformed meta line");
      provenance.emplace_back(unescape(kv[0], path), unescape(kv[1], path));
    }
  }

  SamplerConfig sampler;
  {
    std::vector<std::string> fields;
    expect_header(cursor, "[sampler]", fields);
    if (fields.size() != 3) throw FormatError(path + ": malformed sampler");
    sampler.kind = sampler_kind_from(fields[1]);
    sampler.seed = parse_u64(fields[2], path);
  }

  RewardTransform transform;
  {
    std::vector<std::string> fields;
    expect_header(cursor, "[transform]", fields);
    if (fields.size() < 2) throw FormatError(path + ": malformed transform");
    const std::string& kind = fields[1];
    if (kind == "scaled_cosine" && fields.size() == 3) {
      transform = ScaledCosine{parse_double(fields[2], path)};
    } else if (kind == "movielens_clip_round" && fields.size() == 2) {
      transform = MovieLensClipRound{};
    } else if (kind == "imdb_sqrt_round" && fields.size() == 2) {
      transform = ImdbSqrtRound{};
    } else if (kind == "affine_clip" && fields.size() == 7) {
      AffineClip ac;
      ac.scale = parse_double(fields[2], path);
      ac.offset = parse_double(fields[3], path);
      if (fields[4] != "none") ac.round_step = parse_double(fields[4], path);
      ac.clip_low = parse_double(fields[5], path);
      ac.clip_high = parse_double(fields[6], path);
      transform = ac;
    } else {
      throw FormatError(path + ": unknown transform '" + kind + "'");
    }
  }

  FeatureVocabulary vocabulary;
  {
    std::vector<std::string> fields;
    expect_header(cursor, "[vocabulary]", fields);
    if (fields.size() != 2) throw FormatError(path + ": malformed vocabulary");
    const std::uint64_t count = parse_u64(fields[1], path);
    std::vector<std::string> features;
    features.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      features.push_back(unescape(cursor.take("vocabulary entry"), path));
    }
    vocabulary = FeatureVocabulary(std::move(features));
  }

  ActionSet actions;
  {
    std::vector<std::string> fields;
    expect_header(cursor, "[actions]", fields);
    if (fields.size() != 3) throw FormatError(path + ": malformed actions");
    const std::uint64_t rows = parse_u64(fields[1], path);
    const std::uint64_t cols = parse_u64(fields[2], path);
    actions.matrix = Matrix(rows, cols);
    for (std::uint64_t i = 0; i < rows; ++i) {
      const auto parts = split_tabs(cursor.take("action row"));
      if (parts.size() != 3) throw FormatError(path + ": malformed action row");
      actions.item_ids.push_back(unescape(parts[0], path));
      actions.titles.push_back(unescape(parts[1], path));
      parse_row_values(parts[2], actions.matrix.row(i), path);
    }
  }

  StateSet states;
  {
    std::vector<std::string> fields;
    expect_header(cursor, "[states]", fields);
    if (fields.size() != 5) throw FormatError(path + ": malformed states");
    const std::uint64_t rows = parse_u64(fields[1], path);
    const std::uint64_t cols = parse_u64(fields[2], path);
    states.norm_range = {parse_double(fields[3], path),
                         parse_double(fields[4], path)};
    states.matrix = Matrix(rows, cols);
    for (std::uint64_t i = 0; i < rows; ++i) {
      const auto parts = split_tabs(cursor.take("state row"));
      if (parts.size() != 2) throw FormatError(path + ": malformed state row");
      states.user_ids.push_back(unescape(parts[0], path));
      parse_row_values(parts[1], states.matrix.row(i), path);
    }
  }

  if (cursor.next != lines.size()) {
    throw FormatError(path + ": trailing data before checksum");
  }

  return build(std::move(states), std::move(actions), std::move(transform),
               sampler, std::move(vocabulary), std::move(provenance));
}

}  // namespace cbsim
