#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <vector>

#include "cbsim/harness.hpp"
#include "test_util.hpp"

using namespace cbsim;
using cbsim_test::TempDir;

namespace {

BanditEnvironment medium_env(SamplerKind kind = SamplerKind::uniform_iid) {
  const std::vector<std::vector<double>> srows = {
      {1.0, 0.2, 0.0, 0.4}, {0.0, 1.0, 0.5, 0.0}, {0.3, 0.3, 0.3, 0.3},
      {2.0, 0.0, 0.0, 1.0}, {0.1, 0.9, 0.2, 0.7}};
  const std::vector<std::vector<double>> arows = {
      {1.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0},
      {0.0, 0.0, 1.0, 1.0}, {1.0, 1.0, 0.0, 0.0}};
  StateSet states;
  states.matrix = Matrix(srows.size(), 4);
  ActionSet actions;
  actions.matrix = Matrix(arows.size(), 4);
  for (std::size_t i = 0; i < srows.size(); ++i) {
    states.user_ids.push_back("u" + std::to_string(i));
    for (std::size_t j = 0; j < 4; ++j) states.matrix(i, j) = srows[i][j];
  }
  for (std::size_t i = 0; i < arows.size(); ++i) {
    actions.item_ids.push_back("i" + std::to_string(i));
    actions.titles.push_back("");
    for (std::size_t j = 0; j < 4; ++j) actions.matrix(i, j) = arows[i][j];
  }
  return BanditEnvironment::build(std::move(states), std::move(actions),
                                  MovieLensClipRound{}, {kind, 5});
}

RunConfig config_for(const std::string& agent, std::uint64_t steps,
                     std::uint64_t seed) {
  RunConfig config;
  config.num_steps = steps;
  config.seed = seed;
  config.agent.name = agent;
  config.moving_average_window = std::min<std::uint64_t>(100, steps);
  return config;
}

}  // namespace

TEST_CASE("the oracle agent accumulates exactly zero regret") {
  const BanditEnvironment env = medium_env();
  const RunMetrics metrics = run(env, config_for("oracle", 2000, 3));
  CHECK(metrics.summary.total_regret == 0.0);
  for (const double r : metrics.regret_series) CHECK(r == 0.0);
}

TEST_CASE("run produces aligned, recomputable series") {
  const BanditEnvironment env = medium_env();
  const RunConfig config = config_for("egreedy", 1500, 11);
  const RunMetrics metrics = run(env, config);
  REQUIRE(metrics.reward_series.size() == 1500);
  REQUIRE(metrics.regret_series.size() == 1500);
  REQUIRE(metrics.interactions.size() == 1500);

  double sum = 0.0;
  double regret = 0.0;
  for (std::size_t t = 0; t < metrics.interactions.size(); ++t) {
    const Interaction& step = metrics.interactions[t];
    CHECK(step.step_index == t);
    CHECK(step.reward == env.step(step.state_index, step.action_index));
    CHECK(step.reward == metrics.reward_series[t]);
    sum += step.reward;
    regret += env.best_action(step.state_index).second - step.reward;
    CHECK(metrics.regret_series[t] == doctest::Approx(regret).epsilon(1e-12));
    if (t) CHECK(metrics.regret_series[t] >= metrics.regret_series[t - 1]);
  }
  CHECK(metrics.summary.mean_reward_overall ==
        doctest::Approx(sum / 1500).epsilon(1e-12));
  CHECK(metrics.summary.total_regret == metrics.regret_series.back());
}

TEST_CASE("uniform agent mean matches the exhaustive pair mean") {
  const BanditEnvironment env = medium_env();
  // Under uniform state sampling and a uniform policy each step draws a
  // uniform (s, a) pair, so the run mean concentrates around the exhaustive
  // mean with se = sqrt(var / steps).
  double mean = 0.0, second = 0.0;
  const double pairs =
      static_cast<double>(env.num_states() * env.num_actions());
  for (std::size_t s = 0; s < env.num_states(); ++s) {
    for (std::size_t a = 0; a < env.num_actions(); ++a) {
      const double r = env.step(s, a);
      mean += r;
      second += r * r;
    }
  }
  mean /= pairs;
  const double var = second / pairs - mean * mean;

  const std::uint64_t steps = 1000;
  const RunMetrics metrics = run(env, config_for("uniform", steps, 17));
  const double se = std::sqrt(var / static_cast<double>(steps));
  CHECK(std::abs(metrics.summary.mean_reward_overall - mean) < 3 * se);
}

TEST_CASE("identical configs give bit-identical metrics") {
  const BanditEnvironment env = medium_env();
  for (const char* agent : {"uniform", "egreedy", "linucb", "softmax"}) {
    const RunConfig config = config_for(agent, 500, 23);
    CHECK(run(env, config) == run(env, config));
  }
  // A different seed must actually change something.
  CHECK(run(env, config_for("uniform", 500, 23)) !=
        run(env, config_for("uniform", 500, 24)));
}

TEST_CASE("cumulative reward plus regret equals the oracle sum") {
  const BanditEnvironment env = medium_env();
  for (const char* agent : {"uniform", "egreedy", "linucb", "softmax"}) {
    const RunMetrics metrics = run(env, config_for(agent, 20000, 31));
    double reward_sum = 0.0;
    double oracle_sum = 0.0;
    for (const Interaction& step : metrics.interactions) {
      reward_sum += step.reward;
      oracle_sum += env.best_action(step.state_index).second;
    }
    CHECK(reward_sum + metrics.summary.total_regret ==
          doctest::Approx(oracle_sum).epsilon(1e-9));
  }
}

TEST_CASE("moving_average expands at the head then trails") {
  CHECK(moving_average({1, 2, 3, 4}, 2) ==
        std::vector<double>{1.0, 1.5, 2.5, 3.5});
  CHECK(moving_average({5, 7, 9}, 1) == std::vector<double>{5.0, 7.0, 9.0});

  const std::vector<double> series = {2, 4, 6, 8};
  const auto full = moving_average(series, 4);
  CHECK(full.back() == 5.0);  // overall mean
  CHECK(full == std::vector<double>{2.0, 3.0, 4.0, 5.0});

  CHECK_THROWS_AS(moving_average({}, 3), ConfigError);
  CHECK_THROWS_AS(moving_average({1.0}, 0), ConfigError);
}

TEST_CASE("compare aggregates repeated seeded runs") {
  const BanditEnvironment env = medium_env();
  const std::vector<RunConfig> configs = {config_for("oracle", 400, 1),
                                          config_for("uniform", 400, 1)};
  const ComparisonTable table = compare(env, configs, 3);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0].agent == "oracle");
  CHECK(table.rows[0].repeats == 3);
  CHECK(table.rows[0].mean_reward_mean >= table.rows[1].mean_reward_mean);
  CHECK(table.rows[0].total_regret_mean == 0.0);

  SUBCASE("one repeat reports zero standard deviation") {
    const ComparisonTable single = compare(env, configs, 1);
    CHECK(single.rows[1].mean_reward_std == 0.0);
    CHECK(single.rows[1].last_window_std == 0.0);
    CHECK(single.rows[1].total_regret_std == 0.0);
  }
  SUBCASE("the table is deterministic") {
    const ComparisonTable again = compare(env, configs, 3);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      CHECK(table.rows[i].mean_reward_mean == again.rows[i].mean_reward_mean);
      CHECK(table.rows[i].total_regret_std == again.rows[i].total_regret_std);
    }
  }
  SUBCASE("empty config lists are rejected") {
    CHECK_THROWS_AS(compare(env, {}, 3), ConfigError);
  }
}

TEST_CASE("metrics CSV round-trips through its decimal encoding") {
  TempDir dir;
  const BanditEnvironment env = medium_env();
  const RunConfig config = config_for("softmax", 300, 77);
  const RunMetrics metrics = run(env, config);
  const std::string path = dir.file("metrics.csv");
  export_csv(metrics, path);

  std::istringstream in(cbsim_test::read_file(path));
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "step,reward,moving_avg,cumulative_regret");
  const auto smoothed = moving_average(metrics.reward_series, metrics.window);
  std::size_t t = 0;
  while (std::getline(in, line)) {
    double step, reward, avg, regret;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &step, &reward, &avg,
                        &regret) == 4);
    CHECK(step == static_cast<double>(t));
    CHECK(reward == metrics.reward_series[t]);
    CHECK(avg == smoothed[t]);
    CHECK(regret == metrics.regret_series[t]);
    ++t;
  }
  CHECK(t == metrics.reward_series.size());

  SUBCASE("empty metrics produce a header-only file") {
    const std::string empty_path = dir.file("empty.csv");
    export_csv(RunMetrics{}, empty_path);
    CHECK(cbsim_test::read_file(empty_path) ==
          "step,reward,moving_avg,cumulative_regret\n");
  }
}

TEST_CASE("comparison CSV carries one row per agent") {
  TempDir dir;
  const BanditEnvironment env = medium_env();
  const ComparisonTable table =
      compare(env, {config_for("oracle", 100, 1), config_for("uniform", 100, 1)},
              2);
  const std::string path = dir.file("table.csv");
  export_csv(table, path);
  const std::string content = cbsim_test::read_file(path);
  CHECK(content.find("agent,repeats,") == 0);
  CHECK(content.find("\noracle,2,") != std::string::npos);
  CHECK(content.find("\nuniform,2,") != std::string::npos);
}

TEST_CASE("plots emit one polyline per series") {
  TempDir dir;
  const std::string path = dir.file("plot.svg");
  PlotSeries a{"first", {1.0, 2.0, 1.5, 3.0}, {}};
  PlotSeries b{"second", {0.5, 0.25, 0.75, 0.4}, {}};
  export_plot({a, b}, path, "step", "reward");
  const std::string svg = cbsim_test::read_file(path);

  std::size_t polylines = 0;
  for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos;
       pos = svg.find("<polyline", pos + 1)) {
    ++polylines;
  }
  CHECK(polylines == 2);
  CHECK(svg.find("first") != std::string::npos);
  CHECK(svg.find("second") != std::string::npos);
  CHECK(svg.find("<svg") == 0);
}
