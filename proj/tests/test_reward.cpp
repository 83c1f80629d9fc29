#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "cbsim/reward.hpp"

using namespace cbsim;

TEST_CASE("cosine of the paper examples") {
  const std::vector<double> e1 = {1.0, 0.0};
  const std::vector<double> e2 = {0.0, 1.0};
  const std::vector<double> diag = {1.0, 1.0};
  CHECK(cosine(e1, e1) == 1.0);
  CHECK(cosine(e1, e2) == 0.0);
  CHECK(cosine(diag, e1) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("cosine rejects zero-norm vectors loudly") {
  const std::vector<double> zero = {0.0, 0.0};
  const std::vector<double> unit = {1.0, 0.0};
  CHECK_THROWS_AS(cosine(zero, unit), InvariantError);
  CHECK_THROWS_AS(cosine(unit, zero), InvariantError);
  CHECK_THROWS_AS(cosine(unit, std::vector<double>{1.0, 0.0, 0.0}),
                  InvariantError);
}

TEST_CASE("cosine is symmetric bit for bit") {
  const std::vector<std::vector<double>> vectors = {
      {0.3, -1.7, 2.9, 0.0001},
      {1e3, 2e-3, -5.5, 7.25},
      {0.1, 0.2, 0.3, 0.4},
      {-2.0, 1.0, -1.0, 2.0},
  };
  for (const auto& s : vectors) {
    for (const auto& a : vectors) {
      CHECK(cosine(s, a) == cosine(a, s));
    }
  }
}

TEST_CASE("transform point values") {
  const RewardTransform ml = MovieLensClipRound{};
  CHECK(apply_transform(1.0, ml) == 5.0);
  CHECK(apply_transform(-1.0, ml) == 0.5);
  CHECK(apply_transform(0.0, ml) == 1.0);

  const RewardTransform imdb = ImdbSqrtRound{};
  CHECK(apply_transform(1.0, imdb) == 10.0);
  CHECK(apply_transform(0.0, imdb) == 8.0);  // ceil(10 * sqrt(0.5)) = 8
  // The raw formula gives 0 at c = -1; the documented clamp raises it to 1,
  // keeping the output inside the declared {1, ..., 10} value set.
  CHECK(apply_transform(-1.0, imdb) == 1.0);

  const RewardTransform scaled = ScaledCosine{2.0};
  CHECK(apply_transform(0.5, scaled) == 1.0);
  CHECK(apply_transform(-1.0, scaled) == -2.0);
}

TEST_CASE("ceil_to_step is a mathematical ceiling") {
  CHECK(ceil_to_step(1.0, 0.5) == 1.0);   // exact multiples stay put
  CHECK(ceil_to_step(1.01, 0.5) == 1.5);
  CHECK(ceil_to_step(-0.75, 0.5) == -0.5);
  CHECK(ceil_to_step(-1.0, 0.5) == -1.0);
  CHECK(ceil_to_step(2.0, 1.0) == 2.0);
  CHECK(ceil_to_step(2.000001, 1.0) == 3.0);
  CHECK_THROWS_AS(ceil_to_step(1.0, 0.0), ConfigError);
}

TEST_CASE("affine clip composes scale, ceiling, and clipping") {
  const RewardTransform t = AffineClip{5.0, 1.0, 0.5, 0.5, 5.0};
  // Identical by construction to the half-star map: ceil(2+10c)/2 clipped.
  const RewardTransform ml = MovieLensClipRound{};
  for (int i = 0; i <= 1000; ++i) {
    const double c = -1.0 + 2.0 * i / 1000.0;
    CHECK(apply_transform(c, t) == apply_transform(c, ml));
  }
  SUBCASE("without a round_step there is no rounding") {
    const RewardTransform raw = AffineClip{2.0, 0.0, std::nullopt, -1.5, 1.5};
    CHECK(apply_transform(0.3, raw) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(apply_transform(0.9, raw) == 1.5);
  }
}

TEST_CASE("discrete codomains hold over a fine grid") {
  const std::set<double> half_stars = {0.5, 1.0, 1.5, 2.0, 2.5,
                                       3.0, 3.5, 4.0, 4.5, 5.0};
  std::set<double> ten_stars;
  for (int v = 1; v <= 10; ++v) ten_stars.insert(v);

  const RewardTransform ml = MovieLensClipRound{};
  const RewardTransform imdb = ImdbSqrtRound{};
  for (int i = 0; i <= 10000; ++i) {
    const double c = -1.0 + 2.0 * i / 10000.0;
    CHECK(half_stars.contains(apply_transform(c, ml)));
    CHECK(ten_stars.contains(apply_transform(c, imdb)));
  }
}

TEST_CASE("all transforms are nondecreasing in c") {
  const std::vector<RewardTransform> transforms = {
      ScaledCosine{3.0}, MovieLensClipRound{}, ImdbSqrtRound{},
      AffineClip{2.0, -0.5, 0.25, -1.0, 1.0},
      AffineClip{2.0, -0.5, std::nullopt, -1.0, 1.0}};
  for (const auto& t : transforms) {
    double previous = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 10000; ++i) {
      const double c = -1.0 + 2.0 * i / 10000.0;
      const double r = apply_transform(c, t);
      CHECK(r >= previous);
      previous = r;
    }
  }
}

TEST_CASE("reward is invariant to positive rescaling of the state") {
  const std::vector<double> s = {0.7, 1.9, 0.0, 3.2};
  const std::vector<double> a = {1.0, 0.0, 1.0, 1.0};
  const std::vector<RewardTransform> transforms = {
      ScaledCosine{2.5}, MovieLensClipRound{}, ImdbSqrtRound{}};
  for (const auto& t : transforms) {
    const double base = reward(s, a, t);
    for (const double c : {1e-3, 0.5, 2.0, 1e3}) {
      std::vector<double> scaled(s);
      for (double& v : scaled) v *= c;
      CHECK(reward(scaled, a, t) == doctest::Approx(base).epsilon(1e-9));
    }
  }
}

namespace {

/// Scalar re-implementation used as the oracle: plain double accumulation,
/// no shared helpers.
double oracle_reward(const std::vector<double>& s, const std::vector<double>& a,
                     const RewardTransform& t) {
  double dot = 0.0, ss = 0.0, aa = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    dot += s[i] * a[i];
    ss += s[i] * s[i];
    aa += a[i] * a[i];
  }
  double c = dot / (std::sqrt(ss) * std::sqrt(aa));
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  if (std::holds_alternative<MovieLensClipRound>(t)) {
    double r = std::ceil(2.0 + 10.0 * c) / 2.0;
    return std::min(5.0, std::max(0.5, r));
  }
  if (std::holds_alternative<ImdbSqrtRound>(t)) {
    return std::max(1.0, std::ceil(10.0 * std::pow(0.5 + c / 2.0, 0.5)));
  }
  if (const auto* sc = std::get_if<ScaledCosine>(&t)) return sc->alpha * c;
  const auto& ac = std::get<AffineClip>(t);
  double v = ac.scale * c + ac.offset;
  if (ac.round_step) v = std::ceil(v / *ac.round_step) * *ac.round_step;
  return std::min(ac.clip_high, std::max(ac.clip_low, v));
}

}  // namespace

TEST_CASE("vectorized rewards equal the scalar brute-force loop") {
  const std::vector<std::vector<double>> states = {
      {1.0, 0.5, 0.0, 2.0}, {0.25, 0.25, 0.25, 0.25}, {3.0, 0.0, 1.0, 0.0},
      {0.5, 4.5, 2.0, 1.0}, {1e-3, 2.0, 0.0, 5.0}};
  const std::vector<std::vector<double>> actions = {
      {1.0, 0.0, 0.0, 1.0}, {0.0, 1.0, 0.0, 0.0}, {1.0, 1.0, 1.0, 1.0},
      {0.0, 0.0, 1.0, 1.0}, {1.0, 1.0, 0.0, 0.0}};
  const std::vector<RewardTransform> transforms = {
      ScaledCosine{1.5}, MovieLensClipRound{}, ImdbSqrtRound{},
      AffineClip{4.0, 0.5, 0.5, 0.5, 4.5}};
  for (const auto& t : transforms) {
    for (const auto& s : states) {
      for (const auto& a : actions) {
        CHECK(reward(s, a, t) ==
              doctest::Approx(oracle_reward(s, a, t)).epsilon(1e-12));
      }
    }
  }
}

namespace {

StateSet one_state(std::vector<double> row) {
  StateSet states;
  states.matrix = Matrix(1, row.size());
  for (std::size_t j = 0; j < row.size(); ++j) states.matrix(0, j) = row[j];
  states.user_ids = {"u"};
  return states;
}

ActionSet two_actions() {
  ActionSet actions;
  actions.matrix = Matrix(2, 2);
  actions.matrix(0, 0) = 1.0;  // parallel to the state: c = 1
  actions.matrix(1, 1) = 1.0;  // orthogonal: c = 0
  actions.item_ids = {"i0", "i1"};
  actions.titles = {"", ""};
  return actions;
}

}  // namespace

TEST_CASE("reward_histogram bins known pair values") {
  const StateSet states = one_state({1.0, 0.0});
  const ActionSet actions = two_actions();
  const RewardHistogram hist =
      reward_histogram(states, actions, MovieLensClipRound{},
                       HistogramSampling::exhaustive());
  REQUIRE(hist.bin_values == std::vector<double>{1.0, 5.0});
  CHECK(hist.counts == std::vector<std::uint64_t>{1, 1});
  CHECK(hist.total == 2);

  SUBCASE("exhaustive total is |S| * |A|") {
    CHECK(hist.total == states.matrix.rows() * actions.matrix.rows());
  }
  SUBCASE("a continuous transform needs explicit binning") {
    CHECK_THROWS_AS(reward_histogram(states, actions, ScaledCosine{1.0},
                                     HistogramSampling::exhaustive()),
                    ConfigError);
  }
  SUBCASE("sampled mode is seeded and sized") {
    const RewardHistogram sampled =
        reward_histogram(states, actions, MovieLensClipRound{},
                         HistogramSampling::sampled(1000, 9));
    CHECK(sampled.total == 1000);
    const RewardHistogram again =
        reward_histogram(states, actions, MovieLensClipRound{},
                         HistogramSampling::sampled(1000, 9));
    CHECK(sampled == again);
  }
}

TEST_CASE("tv_distance hand values") {
  const auto make = [](std::vector<double> values,
                       std::vector<std::uint64_t> counts) {
    RewardHistogram h;
    h.bin_values = std::move(values);
    h.counts = std::move(counts);
    for (const auto c : h.counts) h.total += c;
    return h;
  };
  const RewardHistogram a = make({1.0, 2.0}, {1, 1});
  CHECK(tv_distance(a, a) == 0.0);

  const RewardHistogram disjoint = make({3.0, 4.0}, {5, 5});
  CHECK(tv_distance(a, disjoint) == 1.0);

  // Hand arithmetic: 0.5 * (|0.5 - 1| + |0.5 - 0|) = 0.5.
  const RewardHistogram b = make({1.0}, {2});
  CHECK(tv_distance(a, b) == 0.5);

  RewardHistogram empty;
  CHECK_THROWS_AS(tv_distance(a, empty), ConfigError);
}

namespace {

StateSet calibration_states() {
  // Six directions spread over the positive quadrant-ish region so the
  // cosine values cover a usable spread.
  const std::vector<std::vector<double>> rows = {
      {1.0, 0.1, 0.0}, {0.2, 1.0, 0.3}, {0.5, 0.5, 0.5},
      {0.0, 0.2, 1.0}, {1.0, 1.0, 0.1}, {0.3, 0.0, 0.9}};
  StateSet states;
  states.matrix = Matrix(rows.size(), 3);
  states.user_ids.resize(rows.size(), "u");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < 3; ++j) states.matrix(i, j) = rows[i][j];
  }
  return states;
}

ActionSet calibration_actions() {
  const std::vector<std::vector<double>> rows = {
      {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0},
      {1.0, 1.0, 0.0}, {1.0, 1.0, 1.0}};
  ActionSet actions;
  actions.matrix = Matrix(rows.size(), 3);
  actions.item_ids.resize(rows.size(), "i");
  actions.titles.resize(rows.size(), "");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < 3; ++j) actions.matrix(i, j) = rows[i][j];
  }
  return actions;
}

}  // namespace

TEST_CASE("calibrate_alpha recovers a planted alpha exactly") {
  const StateSet states = calibration_states();
  const ActionSet actions = calibration_actions();
  const double planted = 5.0;
  const std::pair<double, double> clip{0.5, 5.0};
  const RewardHistogram target = reward_histogram(
      states, actions, AffineClip{planted, 0.0, 0.5, clip.first, clip.second},
      HistogramSampling::exhaustive());

  const std::vector<double> grid = {0.5, 1.0, 2.0, 5.0, 10.0};
  CHECK(calibrate_alpha(states, actions, target, grid, 0.5, clip) == planted);

  SUBCASE("the sweep reports one distance per grid point") {
    const CalibrationResult sweep =
        calibrate_sweep(states, actions, target, grid, 0.5, clip);
    REQUIRE(sweep.curve.size() == grid.size());
    CHECK(sweep.best_alpha == planted);
    for (const auto& [alpha, tv] : sweep.curve) {
      if (alpha == planted) CHECK(tv == 0.0);
      else CHECK(tv > 0.0);
    }
  }
  SUBCASE("a singleton grid is returned as-is") {
    CHECK(calibrate_alpha(states, actions, target, std::vector<double>{2.0},
                          0.5, clip) == 2.0);
  }
  SUBCASE("an empty grid is a config error") {
    CHECK_THROWS_AS(calibrate_alpha(states, actions, target, {}, 0.5, clip),
                    ConfigError);
  }
  SUBCASE("ties resolve to the smallest alpha") {
    // Saturating clip makes every large alpha equivalent.
    const RewardHistogram sat = reward_histogram(
        states, actions, AffineClip{1000.0, 0.0, 0.5, 0.5, 5.0},
        HistogramSampling::exhaustive());
    const double chosen = calibrate_alpha(states, actions, sat,
                                          std::vector<double>{4000.0, 2000.0},
                                          0.5, {0.5, 5.0});
    CHECK(chosen == 2000.0);
  }
}
