#include "cbsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "cbsim/rng.hpp"

namespace cbsim {
namespace {

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void validate(const RunConfig& config) {
  if (config.num_steps == 0) throw ConfigError("num_steps must be positive");
  if (config.moving_average_window == 0) {
    throw ConfigError("moving_average_window must be positive");
  }
  if (config.moving_average_window > config.num_steps) {
    throw ConfigError("moving_average_window exceeds num_steps");
  }
}

double mean_of(std::span<const double> values) {
  double sum = 0.0;
  for (const double v : values) sum += v;
  return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
}

}  // namespace

RunMetrics run(const BanditEnvironment& env, const RunConfig& config) {
  validate(config);
  AgentConfig agent_config = config.agent;
  agent_config.seed = derive_seed(config.seed, 1);
  const std::uint64_t observe_seed = derive_seed(config.seed, 0);
  const auto agent = make_agent(agent_config, env);

  RunMetrics metrics;
  metrics.window = config.moving_average_window;
  metrics.interactions.reserve(config.num_steps);
  metrics.reward_series.reserve(config.num_steps);
  metrics.regret_series.reserve(config.num_steps);

  // The oracle reward of a state never changes; compute it once per state.
  std::vector<double> best(env.num_states(),
                           std::numeric_limits<double>::quiet_NaN());

  ObserveCursor cursor;
  double cumulative_regret = 0.0;
  for (std::uint64_t t = 0; t < config.num_steps; ++t) {
    const auto [state_index, state] = env.observe(cursor, observe_seed);
    const std::size_t action_index = agent->act(state_index, state);
    const double reward = env.step(state_index, action_index);
    if (std::isnan(best[state_index])) {
      best[state_index] = env.best_action(state_index).second;
    }
    cumulative_regret += best[state_index] - reward;
    agent->update(state, action_index, reward);

    metrics.interactions.push_back(
        Interaction{t, state_index, action_index, reward});
    metrics.reward_series.push_back(reward);
    metrics.regret_series.push_back(cumulative_regret);
  }

  metrics.summary.mean_reward_overall = mean_of(metrics.reward_series);
  const std::size_t window = static_cast<std::size_t>(
      std::min<std::uint64_t>(config.moving_average_window, config.num_steps));
  metrics.summary.mean_reward_last_window = mean_of(
      {metrics.reward_series.data() + metrics.reward_series.size() - window,
       window});
  metrics.summary.total_regret = cumulative_regret;
  return metrics;
}

std::vector<double> moving_average(const std::vector<double>& series,
                                   std::uint64_t window) {
  if (series.empty()) throw ConfigError("moving average of an empty series");
  if (window == 0) throw ConfigError("window must be positive");
  std::vector<double> out(series.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    sum += series[i];
    if (i >= window) sum -= series[i - window];
    const std::size_t n = std::min<std::size_t>(i + 1, window);
    out[i] = sum / static_cast<double>(n);
  }
  return out;
}

ComparisonTable compare(const BanditEnvironment& env,
                        const std::vector<RunConfig>& configs,
                        std::uint64_t repeats) {
  if (configs.empty()) throw ConfigError("compare needs at least one config");
  if (repeats == 0) throw ConfigError("repeats must be positive");

  ComparisonTable table;
  for (const RunConfig& config : configs) {
    std::vector<double> mean_rewards, last_windows, regrets;
    for (std::uint64_t r = 0; r < repeats; ++r) {
      RunConfig child = config;
      child.seed = derive_seed(config.seed, r);
      const RunMetrics metrics = run(env, child);
      mean_rewards.push_back(metrics.summary.mean_reward_overall);
      last_windows.push_back(metrics.summary.mean_reward_last_window);
      regrets.push_back(metrics.summary.total_regret);
    }
    const auto stats = [](const std::vector<double>& xs) {
      const double mean = mean_of(xs);
      double var = 0.0;
      for (const double x : xs) var += (x - mean) * (x - mean);
      var /= static_cast<double>(xs.size());
      return std::pair<double, double>{mean, std::sqrt(var)};
    };
    ComparisonRow row;
    row.agent = config.agent.name;
    row.repeats = repeats;
    std::tie(row.mean_reward_mean, row.mean_reward_std) = stats(mean_rewards);
    std::tie(row.last_window_mean, row.last_window_std) = stats(last_windows);
    std::tie(row.total_regret_mean, row.total_regret_std) = stats(regrets);
    table.rows.push_back(std::move(row));
  }
  return table;
}

void export_csv(const RunMetrics& metrics, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "step,reward,moving_avg,cumulative_regret\n";
  if (metrics.reward_series.empty()) return;
  const auto smoothed = moving_average(metrics.reward_series, metrics.window);
  for (std::size_t i = 0; i < metrics.reward_series.size(); ++i) {
    out << i << ',' << format_double(metrics.reward_series[i]) << ','
        << format_double(smoothed[i]) << ','
        << format_double(metrics.regret_series[i]) << '\n';
  }
  if (!out) throw DataError("write failed for " + path);
}

void export_csv(const ComparisonTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "agent,repeats,mean_reward_mean,mean_reward_std,last_window_mean,"
         "last_window_std,total_regret_mean,total_regret_std\n";
  for (const ComparisonRow& row : table.rows) {
    out << row.agent << ',' << row.repeats << ','
        << format_double(row.mean_reward_mean) << ','
        << format_double(row.mean_reward_std) << ','
        << format_double(row.last_window_mean) << ','
        << format_double(row.last_window_std) << ','
        << format_double(row.total_regret_mean) << ','
        << format_double(row.total_regret_std) << '\n';
  }
  if (!out) throw DataError("write failed for " + path);
}

void export_plot(const std::vector<PlotSeries>& series,
                 const std::string& path, const std::string& x_label,
                 const std::string& y_label) {
  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                  "#d62728", "#9467bd", "#8c564b"};
  const double width = 960, height = 540;
  const double left = 70, right = 30, top = 40, bottom = 50;

  double x_min = 0.0, x_max = 1.0;
  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -y_min;
  bool any = false;
  for (const PlotSeries& s : series) {
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      const double x = s.x.empty() ? static_cast<double>(i) : s.x[i];
      x_min = any ? std::min(x_min, x) : x;
      x_max = any ? std::max(x_max, x) : x;
      y_min = std::min(y_min, s.values[i]);
      y_max = std::max(y_max, s.values[i]);
      any = true;
    }
  }
  if (!any) {
    x_min = y_min = 0.0;
    x_max = y_max = 1.0;
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) {
    y_max += 1.0;
    y_min -= 1.0;
  }

  const auto sx = [&](double x) {
    return left + (x - x_min) / (x_max - x_min) * (width - left - right);
  };
  const auto sy = [&](double y) {
    return height - bottom -
           (y - y_min) / (y_max - y_min) * (height - top - bottom);
  };
  const auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
  };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
      << height << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\""
      << width - right << "\" y2=\"" << height - bottom
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
      << "\" y2=\"" << height - bottom << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << (left + width - right) / 2 << "\" y=\""
      << height - 12 << "\" text-anchor=\"middle\" font-size=\"14\">"
      << x_label << "</text>\n";
  out << "<text x=\"18\" y=\"" << (top + height - bottom) / 2
      << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 "
         "18 "
      << (top + height - bottom) / 2 << ")\">" << y_label << "</text>\n";
  out << "<text x=\"" << left << "\" y=\"" << height - bottom + 18
      << "\" text-anchor=\"middle\" font-size=\"12\">" << num(x_min)
      << "</text>\n";
  out << "<text x=\"" << width - right << "\" y=\"" << height - bottom + 18
      << "\" text-anchor=\"middle\" font-size=\"12\">" << num(x_max)
      << "</text>\n";
  out << "<text x=\"" << left - 8 << "\" y=\"" << height - bottom + 4
      << "\" text-anchor=\"end\" font-size=\"12\">" << num(y_min)
      << "</text>\n";
  out << "<text x=\"" << left - 8 << "\" y=\"" << top + 4
      << "\" text-anchor=\"end\" font-size=\"12\">" << num(y_max)
      << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const PlotSeries& s = series[k];
    const char* color = kColors[k % std::size(kColors)];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      const double x = s.x.empty() ? static_cast<double>(i) : s.x[i];
      if (i) out << ' ';
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f", sx(x), sy(s.values[i]));
      out << buf;
    }
    out << "\"/>\n";
    out << "<text x=\"" << width - right - 150 << "\" y=\""
        << top + 16 * static_cast<double>(k) << "\" font-size=\"12\" fill=\""
        << color << "\">" << s.label << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw DataError("write failed for " + path);
}

}  // namespace cbsim
