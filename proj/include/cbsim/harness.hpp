#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cbsim/agents.hpp"
#include "cbsim/environment.hpp"

namespace cbsim {

struct RunConfig {
  std::uint64_t num_steps = 20000;
  std::uint64_t seed = 0;
  AgentConfig agent;
  std::uint64_t moving_average_window = 500;
};

struct RunSummary {
  double mean_reward_overall = 0.0;
  double mean_reward_last_window = 0.0;
  double total_regret = 0.0;

  bool operator==(const RunSummary&) const = default;
};

struct RunMetrics {
  std::vector<Interaction> interactions;
  std::vector<double> reward_series;
  std::vector<double> regret_series;  // cumulative, nondecreasing
  RunSummary summary;
  std::uint64_t window = 1;

  bool operator==(const RunMetrics&) const = default;
};

/// Runs num_steps of observe -> act -> step -> update. Per-step regret is
/// the exact-oracle reward minus the received reward. The state stream and
/// the agent's own randomness use seeds derived from config.seed
/// (derive_seed(seed, 0) and derive_seed(seed, 1)), so a run is fully
/// determined by (environment, config).
RunMetrics run(const BanditEnvironment& env, const RunConfig& config);

/// Trailing moving average with an expanding head: element i averages the
/// last min(i+1, window) values.
std::vector<double> moving_average(const std::vector<double>& series,
                                   std::uint64_t window);

struct ComparisonRow {
  std::string agent;
  std::uint64_t repeats = 0;
  double mean_reward_mean = 0.0;
  double mean_reward_std = 0.0;
  double last_window_mean = 0.0;
  double last_window_std = 0.0;
  double total_regret_mean = 0.0;
  double total_regret_std = 0.0;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
};

/// Runs each config `repeats` times with child seeds derive_seed(config
/// seed, repeat index) and aggregates summary metrics (mean and population
/// standard deviation, so repeats=1 reports 0).
ComparisonTable compare(const BanditEnvironment& env,
                        const std::vector<RunConfig>& configs,
                        std::uint64_t repeats);

/// CSV with header step,reward,moving_avg,cumulative_regret.
void export_csv(const RunMetrics& metrics, const std::string& path);

void export_csv(const ComparisonTable& table, const std::string& path);

struct PlotSeries {
  std::string label;
  std::vector<double> values;
  /// Optional x positions; indices 0..n-1 when empty.
  std::vector<double> x;
};

/// Self-contained SVG line chart: one polyline per series, labeled axes,
/// and a small legend.
void export_plot(const std::vector<PlotSeries>& series,
                 const std::string& path, const std::string& x_label = "step",
                 const std::string& y_label = "value");

}  // namespace cbsim
