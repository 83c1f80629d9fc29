#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <set>

#include "cbsim/synth.hpp"

using namespace cbsim;

namespace {

SynthConfig basic_config(std::size_t users, std::size_t nonzero,
                         std::uint64_t seed) {
  SynthConfig config;
  config.num_users = users;
  config.num_nonzero = nonzero;
  config.support = RatingSupport::uniform_integer(1, 10);
  config.seed = seed;
  return config;
}

}  // namespace

TEST_CASE("rating supports validate") {
  CHECK_NOTHROW(RatingSupport::uniform_integer(1, 10).validate());
  CHECK_NOTHROW(RatingSupport::imdb_like().validate());
  RatingSupport bad;
  bad.values = {1.0, 2.0};
  bad.probabilities = {0.6, 0.6};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("every user gets exactly num_nonzero distinct sorted indices") {
  const auto users = simulate_feedback(1000, basic_config(200, 50, 7));
  REQUIRE(users.size() == 200);
  for (const auto& entries : users) {
    CHECK(entries.size() == 50);
    std::set<std::size_t> distinct;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      CHECK(entries[i].item < 1000);
      distinct.insert(entries[i].item);
      if (i) CHECK(entries[i - 1].item < entries[i].item);
    }
    CHECK(distinct.size() == 50);
  }
}

TEST_CASE("num_nonzero equal to the catalog uses every index once") {
  const auto users = simulate_feedback(25, basic_config(10, 25, 3));
  for (const auto& entries : users) {
    REQUIRE(entries.size() == 25);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      CHECK(entries[i].item == i);
    }
  }
}

TEST_CASE("sampled values come from the support") {
  const auto users = simulate_feedback(100, basic_config(100, 20, 11));
  for (const auto& entries : users) {
    for (const auto& entry : entries) {
      CHECK(entry.value >= 1.0);
      CHECK(entry.value <= 10.0);
      CHECK(entry.value == std::floor(entry.value));
    }
  }
}

TEST_CASE("identical seeds reproduce identical output, fresh seeds differ") {
  const auto a = simulate_feedback(500, basic_config(50, 50, 42));
  const auto b = simulate_feedback(500, basic_config(50, 50, 42));
  CHECK(a == b);
  const auto c = simulate_feedback(500, basic_config(50, 50, 43));
  CHECK(a != c);
}

TEST_CASE("oversized num_nonzero is a config error") {
  CHECK_THROWS_AS(simulate_feedback(10, basic_config(5, 11, 0)), ConfigError);
}

TEST_CASE("value frequencies sit within three standard errors") {
  // 1000 users x 50 draws with uniform ten-value support: each value has
  // p = 0.1 over N = 50000 draws, se = sqrt(p(1-p)/N).
  const std::size_t num_users = 1000, nonzero = 50;
  const auto users =
      simulate_feedback(10000, basic_config(num_users, nonzero, 123));
  std::map<double, std::size_t> counts;
  for (const auto& entries : users) {
    for (const auto& entry : entries) ++counts[entry.value];
  }
  const double n = static_cast<double>(num_users * nonzero);
  const double p = 0.1;
  const double se = std::sqrt(p * (1.0 - p) / n);
  for (double v = 1.0; v <= 10.0; v += 1.0) {
    const double freq = static_cast<double>(counts[v]) / n;
    CHECK(std::abs(freq - p) < 3.0 * se);
  }
}

namespace {

ActionSet small_catalog() {
  const std::vector<RawItem> items = {
      RawItem{"i0", "", {"a"}, 0.0},       RawItem{"i1", "", {"b"}, 0.0},
      RawItem{"i2", "", {"a", "b"}, 0.0},  RawItem{"i3", "", {"c"}, 0.0},
      RawItem{"i4", "", {"b", "c"}, 0.0},
  };
  return encode_actions(items, FeatureVocabulary({"a", "b", "c"}));
}

}  // namespace

TEST_CASE("a single one-entry user reproduces the scaled action row") {
  const ActionSet catalog = small_catalog();
  SynthConfig config;
  config.num_users = 1;
  config.num_nonzero = 1;
  config.support = RatingSupport::uniform_integer(1, 10);
  config.seed = 5;
  const FeedbackScale scale{1.0, 10.0, 1.0};

  const auto feedback = simulate_feedback(5, config);
  REQUIRE(feedback.size() == 1);
  REQUIRE(feedback[0].size() == 1);
  const SparseEntry entry = feedback[0][0];

  const StateSet states = generate_states(catalog, scale, {-1.0, 1.0}, config);
  REQUIRE(states.matrix.rows() == 1);
  const double f = -1.0 + (entry.value - 1.0) * 2.0 / 9.0;
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(states.matrix(0, j) ==
          doctest::Approx(f * catalog.matrix(entry.item, j)).epsilon(1e-12));
  }
}

TEST_CASE("generated states equal a brute-force recomposition") {
  const ActionSet catalog = small_catalog();
  SynthConfig config;
  config.num_users = 10;
  config.num_nonzero = 3;
  config.support = RatingSupport::uniform_integer(1, 10);
  config.seed = 99;
  const FeedbackScale scale{1.0, 10.0, 1.0};
  const auto target = std::pair{-1.0, 1.0};

  const auto feedback = simulate_feedback(5, config);
  const StateSet states = generate_states(catalog, scale, target, config);
  REQUIRE(states.matrix.rows() == 10);

  for (std::size_t u = 0; u < 10; ++u) {
    double expected[3] = {0.0, 0.0, 0.0};
    for (const SparseEntry& entry : feedback[u]) {
      const double f =
          target.first + (entry.value - scale.min) *
                             (target.second - target.first) /
                             (scale.max - scale.min);
      for (std::size_t j = 0; j < 3; ++j) {
        expected[j] += f * catalog.matrix(entry.item, j);
      }
    }
    // generate_states names users synth_%05u, so row u is user u.
    char name[16];
    std::snprintf(name, sizeof(name), "synth_%05zu", u);
    CHECK(states.user_ids[u] == name);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(states.matrix(u, j) ==
            doctest::Approx(expected[j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("generated state dimensionality follows the vocabulary") {
  const ActionSet catalog = small_catalog();
  SynthConfig config;
  config.num_users = 4;
  config.num_nonzero = 2;
  config.support = RatingSupport::uniform_integer(1, 10);
  config.seed = 1;
  const StateSet states =
      generate_states(catalog, FeedbackScale{1.0, 10.0, 1.0}, {-1.0, 1.0},
                      config);
  CHECK(states.matrix.cols() == 3);
  CHECK(states.matrix.rows() == 4);
}
