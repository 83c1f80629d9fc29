#include "cbsim/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "cbsim/rng.hpp"

namespace cbsim {

void RatingSupport::validate() const {
  if (values.empty() || values.size() != probabilities.size()) {
    throw ConfigError("rating support needs matching values/probabilities");
  }
  double sum = 0.0;
  for (const double p : probabilities) {
    if (p < 0.0) throw ConfigError("rating support probability is negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ConfigError("rating support probabilities must sum to 1");
  }
}

RatingSupport RatingSupport::uniform_integer(int low, int high) {
  if (low > high) throw ConfigError("rating support range is empty");
  RatingSupport support;
  const std::size_t n = static_cast<std::size_t>(high - low + 1);
  support.values.reserve(n);
  support.probabilities.assign(n, 1.0 / static_cast<double>(n));
  for (int v = low; v <= high; ++v) {
    support.values.push_back(static_cast<double>(v));
  }
  return support;
}

RatingSupport RatingSupport::imdb_like() {
  RatingSupport support;
  support.values = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  support.probabilities = {0.01, 0.01, 0.02, 0.04, 0.08,
                           0.15, 0.25, 0.24, 0.13, 0.07};
  return support;
}

std::vector<std::vector<SparseEntry>> simulate_feedback(
    std::size_t catalog_size, const SynthConfig& config) {
  config.support.validate();
  if (config.num_users == 0) throw ConfigError("num_users must be positive");
  if (config.num_nonzero == 0) {
    throw ConfigError("num_nonzero must be positive");
  }
  if (config.num_nonzero > catalog_size) {
    throw ConfigError("num_nonzero exceeds the catalog size");
  }

  std::vector<double> cumulative(config.support.probabilities.size());
  std::partial_sum(config.support.probabilities.begin(),
                   config.support.probabilities.end(), cumulative.begin());
  cumulative.back() = 1.0;

  std::vector<std::vector<SparseEntry>> users(config.num_users);
  std::vector<std::size_t> pool(catalog_size);
  for (std::size_t u = 0; u < config.num_users; ++u) {
    SplitMix64 rng(derive_seed(config.seed, u));

    // Partial Fisher-Yates: the first num_nonzero slots end up holding a
    // uniform sample without replacement.
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    auto& entries = users[u];
    entries.resize(config.num_nonzero);
    for (std::size_t j = 0; j < config.num_nonzero; ++j) {
      const std::size_t pick =
          j + static_cast<std::size_t>(rng.bounded(catalog_size - j));
      std::swap(pool[j], pool[pick]);
      entries[j].item = pool[j];
    }
    for (auto& entry : entries) {
      const double u01 = rng.uniform_double();
      const std::size_t idx = static_cast<std::size_t>(
          std::lower_bound(cumulative.begin(), cumulative.end(), u01) -
          cumulative.begin());
      entry.value = config.support.values[std::min(
          idx, config.support.values.size() - 1)];
    }
    std::sort(entries.begin(), entries.end(),
              [](const SparseEntry& a, const SparseEntry& b) {
                return a.item < b.item;
              });
  }
  return users;
}

StateSet generate_states(const ActionSet& full_action_set,
                         const FeedbackScale& scale,
                         std::pair<double, double> target,
                         const SynthConfig& config) {
  const std::size_t catalog = full_action_set.matrix.rows();
  const auto feedback = simulate_feedback(catalog, config);

  Dataset synthetic;
  synthetic.scale = scale;
  synthetic.interactions.reserve(config.num_users * config.num_nonzero);
  char name[24];
  for (std::size_t u = 0; u < feedback.size(); ++u) {
    std::snprintf(name, sizeof(name), "synth_%05zu", u);
    for (const SparseEntry& entry : feedback[u]) {
      synthetic.interactions.push_back(RawInteraction{
          name, full_action_set.item_ids[entry.item], entry.value,
          std::nullopt});
    }
  }
  return encode_states(synthetic, full_action_set, scale, target);
}

}  // namespace cbsim
