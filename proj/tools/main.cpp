#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cbsim/harness.hpp"
#include "cbsim/presets.hpp"
#include "cbsim/reward.hpp"

namespace {

using namespace cbsim;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

RewardTransform parse_transform(const std::string& spec) {
  if (spec == "movielens") return MovieLensClipRound{};
  if (spec == "imdb") return ImdbSqrtRound{};
  if (spec.rfind("scaled:", 0) == 0) {
    return ScaledCosine{std::stod(spec.substr(7))};
  }
  if (spec.rfind("affine:", 0) == 0) {
    std::vector<std::string> parts;
    std::string rest = spec.substr(7);
    std::size_t pos;
    while ((pos = rest.find(',')) != std::string::npos) {
      parts.push_back(rest.substr(0, pos));
      rest = rest.substr(pos + 1);
    }
    parts.push_back(rest);
    if (parts.size() != 5) {
      throw ConfigError(
          "affine transform spec is affine:<scale>,<offset>,<step|none>,"
          "<clip_low>,<clip_high>");
    }
    AffineClip ac;
    ac.scale = std::stod(parts[0]);
    ac.offset = std::stod(parts[1]);
    if (parts[2] != "none") ac.round_step = std::stod(parts[2]);
    ac.clip_low = std::stod(parts[3]);
    ac.clip_high = std::stod(parts[4]);
    return ac;
  }
  throw ConfigError("unknown transform '" + spec +
                    "'; use movielens, imdb, scaled:<alpha>, or "
                    "affine:<scale>,<offset>,<step|none>,<lo>,<hi>");
}

/// Dataset-source flags shared by build-env, inspect, and calibrate.
struct SourceArgs {
  std::string preset;
  std::string ratings;
  std::string movies;
  std::string basics;
  std::string classification;
  std::string interactions;
  std::string items;
  std::string schema;

  std::size_t top_items = 0;
  std::size_t top_users = 0;
  std::size_t catalog_items = 0;
  std::size_t synth_users = 0;
  std::size_t synth_nonzero = 0;
  std::string support = "uniform";
  std::vector<double> norm;
  std::string transform;
  std::string sampler = "uniform";
  std::uint64_t seed = 0;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--preset", preset, "Pipeline preset: movielens or imdb")
        ->check(CLI::IsMember({"movielens", "imdb"}));
    cmd.add_option("--ratings", ratings,
                   "ratings.csv (movielens) or title.ratings.tsv (imdb)");
    cmd.add_option("--movies", movies, "movies.csv (movielens preset)");
    cmd.add_option("--basics", basics, "title.basics.tsv (imdb preset)");
    cmd.add_option("--classification", classification,
                   "Labeled examples CSV (example_id,label,...)");
    cmd.add_option("--interactions", interactions,
                   "Interactions file (generic source)");
    cmd.add_option("--items", items, "Items file (generic source)");
    cmd.add_option("--schema", schema,
                   "Column-mapping config for the generic source");
    cmd.add_option("--top-items", top_items,
                   "Keep only the most popular items (0 = preset default)");
    cmd.add_option("--top-users", top_users,
                   "Keep only the most active users (0 = preset default)");
    cmd.add_option("--catalog-items", catalog_items,
                   "imdb: catalog size states are summed over");
    cmd.add_option("--synth-users", synth_users,
                   "imdb: number of synthesized users");
    cmd.add_option("--num-nonzero", synth_nonzero,
                   "imdb: non-zero ratings per synthesized user");
    cmd.add_option("--support", support,
                   "imdb: rating value distribution (uniform or imdb-like)")
        ->check(CLI::IsMember({"uniform", "imdb-like"}));
    cmd.add_option("--norm", norm,
                   "Feedback normalization range, two values")
        ->expected(2);
    cmd.add_option("--transform", transform,
                   "Reward transform: movielens, imdb, scaled:<alpha>, or "
                   "affine:<scale>,<offset>,<step|none>,<lo>,<hi>");
    cmd.add_option("--sampler", sampler, "State sampler")
        ->check(CLI::IsMember({"uniform", "round-robin"}));
    cmd.add_option("--seed", seed, "Seed for synthesis and sampling");
  }

  SamplerConfig sampler_config() const {
    return SamplerConfig{sampler == "round-robin" ? SamplerKind::round_robin
                                                  : SamplerKind::uniform_iid,
                         seed};
  }

  PipelineResult build_pipeline() const {
    if (preset == "movielens") {
      if (ratings.empty() || movies.empty()) {
        throw ConfigError("movielens preset needs --ratings and --movies");
      }
      MovielensBuildOptions options;
      if (top_items) options.top_items = top_items;
      if (top_users) options.top_users = top_users;
      if (!norm.empty()) options.normalization = {norm[0], norm[1]};
      if (!transform.empty()) options.transform = parse_transform(transform);
      options.sampler = sampler_config();
      return build_movielens_pipeline(ratings, movies, options);
    }
    if (preset == "imdb") {
      if (basics.empty() || ratings.empty()) {
        throw ConfigError("imdb preset needs --basics and --ratings");
      }
      ImdbBuildOptions options;
      if (catalog_items) options.catalog_items = catalog_items;
      if (top_items) options.action_items = top_items;
      if (synth_users) options.synth_users = synth_users;
      if (synth_nonzero) options.synth_nonzero = synth_nonzero;
      if (support == "imdb-like") options.support = RatingSupport::imdb_like();
      if (!norm.empty()) options.normalization = {norm[0], norm[1]};
      if (!transform.empty()) options.transform = parse_transform(transform);
      options.sampler = sampler_config();
      options.synth_seed = seed;
      return build_imdb_pipeline(basics, ratings, options);
    }
    if (!classification.empty()) {
      ClassificationBuildOptions options;
      options.sampler = sampler_config();
      return build_classification_pipeline(classification, options);
    }
    if (!items.empty()) {
      if (schema.empty()) {
        throw ConfigError("generic source needs --schema");
      }
      GenericBuildOptions options;
      options.top_items = top_items;
      options.top_users = top_users;
      if (!norm.empty()) options.normalization = {norm[0], norm[1]};
      if (!transform.empty()) options.transform = parse_transform(transform);
      options.sampler = sampler_config();
      return build_generic_pipeline(interactions, items,
                                    load_generic_schema(schema), options);
    }
    throw ConfigError(
        "no dataset source given: use --preset movielens/imdb, "
        "--classification, or --items/--interactions/--schema");
  }
};

void print_report(const PipelineResult& parts) {
  const BuildReport& r = parts.report;
  std::printf("|S| = %zu   |A| = %zu   |T| = %zu\n",
              parts.states.matrix.rows(), parts.actions.matrix.rows(),
              parts.vocabulary.size());
  std::printf("parsed: %zu items, %zu interactions\n", r.items_parsed,
              r.interactions_parsed);
  if (r.items_without_features) {
    std::printf("warning: dropped %zu items without features\n",
                r.items_without_features);
  }
  if (r.users_dropped) {
    std::printf("warning: %zu users lost all feedback under truncation\n",
                r.users_dropped);
  }
  if (r.zero_state_users) {
    std::printf("warning: excluded %zu users with zero-vector states\n",
                r.zero_state_users);
  }
}

std::vector<PlotSeries> histogram_series(const RewardHistogram& hist,
                                         const std::string& label) {
  PlotSeries series;
  series.label = label;
  series.x = hist.bin_values;
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    series.values.push_back(static_cast<double>(hist.counts[i]) /
                            static_cast<double>(hist.total));
  }
  return {series};
}

void write_histogram_csv(const RewardHistogram& hist,
                         const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "wb");
  if (!out) throw DataError("cannot write " + path);
  std::fputs("value,count\n", out);
  for (std::size_t i = 0; i < hist.bin_values.size(); ++i) {
    std::fprintf(out, "%.17g,%llu\n", hist.bin_values[i],
                 static_cast<unsigned long long>(hist.counts[i]));
  }
  std::fclose(out);
}

int run_cli(int argc, char** argv) {
  CLI::App app{
      "cbsim: builds simulated contextual bandit environments from "
      "recommendation datasets and benchmarks bandit agents on them"};
  app.require_subcommand(1);

  // ---- build-env ----
  auto* build = app.add_subcommand(
      "build-env", "Build an environment file from a dataset");
  auto build_src = std::make_shared<SourceArgs>();
  build_src->add_to(*build);
  auto build_out = std::make_shared<std::string>();
  build->add_option("--out", *build_out, "Output environment file (.cbe)")
      ->required();
  build->callback([build_src, build_out] {
    PipelineResult parts = build_src->build_pipeline();
    print_report(parts);
    EnvBuild built = seal_environment(std::move(parts));
    built.env.save(*build_out);
    std::printf("wrote %s\n", build_out->c_str());
  });

  // ---- inspect ----
  auto* inspect = app.add_subcommand(
      "inspect",
      "Report an environment's reward distribution (and compare it with the "
      "source dataset's feedback distribution when one is given)");
  auto inspect_src = std::make_shared<SourceArgs>();
  inspect_src->add_to(*inspect);
  auto inspect_env = std::make_shared<std::string>();
  auto inspect_prefix = std::make_shared<std::string>();
  inspect->add_option("--env", *inspect_env, "Environment file")->required();
  inspect->add_option("--out-prefix", *inspect_prefix,
                      "Prefix for CSV/SVG outputs")
      ->required();
  inspect->callback([inspect_src, inspect_env, inspect_prefix] {
    const BanditEnvironment env = BanditEnvironment::load(*inspect_env);
    std::printf("|S| = %zu   |A| = %zu   |T| = %zu\n", env.num_states(),
                env.num_actions(), env.dim());
    const RewardHistogram env_hist =
        reward_histogram(env.states(), env.actions(), env.transform(),
                         HistogramSampling::exhaustive());
    write_histogram_csv(env_hist, *inspect_prefix + "_env_hist.csv");

    auto series = histogram_series(env_hist, "environment rewards");
    const bool have_dataset = !inspect_src->preset.empty() ||
                              !inspect_src->classification.empty() ||
                              !inspect_src->items.empty();
    if (have_dataset) {
      const PipelineResult parts = inspect_src->build_pipeline();
      if (parts.dataset_feedback.total == 0) {
        throw ConfigError(
            "the given dataset records no feedback to compare against");
      }
      write_histogram_csv(parts.dataset_feedback,
                          *inspect_prefix + "_dataset_hist.csv");
      const auto dataset_series =
          histogram_series(parts.dataset_feedback, "dataset feedback");
      series.push_back(dataset_series[0]);
      std::printf("tv_distance = %.6f\n",
                  tv_distance(parts.dataset_feedback, env_hist));
    }
    export_plot(series, *inspect_prefix + "_hist.svg", "value", "frequency");
    std::string extra;
    if (have_dataset) extra = ", " + *inspect_prefix + "_dataset_hist.csv";
    std::printf("wrote %s_env_hist.csv%s and %s_hist.svg\n",
                inspect_prefix->c_str(), extra.c_str(),
                inspect_prefix->c_str());
  });

  // ---- calibrate ----
  auto* calibrate = app.add_subcommand(
      "calibrate",
      "Grid-search the reward scale alpha that best matches the dataset "
      "feedback distribution");
  auto cal_src = std::make_shared<SourceArgs>();
  cal_src->add_to(*calibrate);
  auto cal_grid = std::make_shared<std::vector<double>>();
  auto cal_step = std::make_shared<double>(0.0);
  auto cal_clip = std::make_shared<std::vector<double>>();
  auto cal_out = std::make_shared<std::string>();
  calibrate->add_option("--grid", *cal_grid, "Candidate alphas")
      ->required()
      ->delimiter(',');
  calibrate->add_option("--round-step", *cal_step,
                        "Reward rounding step (default from preset)");
  calibrate->add_option("--clip", *cal_clip, "Reward clip range, two values")
      ->expected(2);
  calibrate->add_option("--out", *cal_out, "Curve CSV (alpha,tv_distance)")
      ->required();
  calibrate->callback([cal_src, cal_grid, cal_step, cal_clip, cal_out] {
    const PipelineResult parts = cal_src->build_pipeline();
    if (parts.dataset_feedback.total == 0) {
      throw ConfigError("calibration needs a dataset with recorded feedback");
    }
    double step = *cal_step;
    std::pair<double, double> clip;
    if (!cal_clip->empty()) {
      clip = {(*cal_clip)[0], (*cal_clip)[1]};
    } else if (cal_src->preset == "movielens") {
      clip = {0.5, 5.0};
    } else if (cal_src->preset == "imdb") {
      clip = {1.0, 10.0};
    } else {
      clip = {parts.dataset.scale.min, parts.dataset.scale.max};
    }
    if (step == 0.0) {
      step = parts.dataset.scale.discrete_step.value_or(0.0);
      if (step == 0.0) {
        throw ConfigError("--round-step is required for this dataset");
      }
    }
    const CalibrationResult sweep =
        calibrate_sweep(parts.states, parts.actions, parts.dataset_feedback,
                        *cal_grid, step, clip);
    std::FILE* out = std::fopen(cal_out->c_str(), "wb");
    if (!out) throw DataError("cannot write " + *cal_out);
    std::fputs("alpha,tv_distance\n", out);
    for (const auto& [alpha, tv] : sweep.curve) {
      std::fprintf(out, "%.17g,%.17g\n", alpha, tv);
    }
    std::fclose(out);
    std::printf("best_alpha = %.17g\n", sweep.best_alpha);
    std::printf("wrote %s\n", cal_out->c_str());
  });

  // ---- train ----
  auto* train = app.add_subcommand(
      "train", "Run one agent on an environment and export metrics");
  auto train_env = std::make_shared<std::string>();
  auto train_agent = std::make_shared<std::string>();
  auto train_cfg = std::make_shared<RunConfig>();
  auto train_prefix = std::make_shared<std::string>();
  auto train_eps = std::make_shared<double>(0.1);
  auto train_beta = std::make_shared<double>(1.0);
  auto train_ridge = std::make_shared<double>(1.0);
  auto train_lr = std::make_shared<double>(kSoftmaxDefaultLearningRate);
  train->add_option("--env", *train_env, "Environment file")->required();
  train->add_option("--agent", *train_agent,
                    "Agent: uniform, egreedy, linucb, softmax, oracle")
      ->required();
  train->add_option("--steps", train_cfg->num_steps, "Interaction count");
  train->add_option("--seed", train_cfg->seed, "Run seed");
  train->add_option("--window", train_cfg->moving_average_window,
                    "Moving-average window");
  train->add_option("--epsilon", *train_eps, "egreedy exploration rate");
  train->add_option("--beta", *train_beta, "linucb exploration weight");
  train->add_option("--ridge", *train_ridge, "linucb ridge");
  train->add_option("--lr", *train_lr, "softmax learning rate");
  train->add_option("--out-prefix", *train_prefix,
                    "Prefix for CSV/SVG outputs")
      ->required();
  train->callback([train_env, train_agent, train_cfg, train_prefix, train_eps,
                   train_beta, train_ridge, train_lr] {
    const BanditEnvironment env = BanditEnvironment::load(*train_env);
    RunConfig config = *train_cfg;
    config.agent.name = *train_agent;
    config.agent.epsilon = *train_eps;
    config.agent.ucb_beta = *train_beta;
    config.agent.ucb_ridge = *train_ridge;
    config.agent.learning_rate = *train_lr;
    const RunMetrics metrics = run(env, config);
    export_csv(metrics, *train_prefix + ".csv");
    PlotSeries reward_series;
    reward_series.label = *train_agent + " reward (moving avg)";
    reward_series.values = moving_average(metrics.reward_series, metrics.window);
    export_plot({reward_series}, *train_prefix + "_reward.svg", "step",
                "reward");
    PlotSeries regret_series;
    regret_series.label = *train_agent + " cumulative regret";
    regret_series.values = metrics.regret_series;
    export_plot({regret_series}, *train_prefix + "_regret.svg", "step",
                "cumulative regret");
    std::printf(
        "agent=%s steps=%llu mean_reward=%.6f last_window=%.6f "
        "total_regret=%.6f\n",
        train_agent->c_str(),
        static_cast<unsigned long long>(config.num_steps),
        metrics.summary.mean_reward_overall,
        metrics.summary.mean_reward_last_window, metrics.summary.total_regret);
    std::printf("wrote %s.csv, %s_reward.svg, %s_regret.svg\n",
                train_prefix->c_str(), train_prefix->c_str(),
                train_prefix->c_str());
  });

  // ---- compare ----
  auto* cmp = app.add_subcommand(
      "compare", "Benchmark several agents with repeated seeded runs");
  auto cmp_env = std::make_shared<std::string>();
  auto cmp_agents = std::make_shared<std::vector<std::string>>();
  auto cmp_steps = std::make_shared<std::uint64_t>(20000);
  auto cmp_repeats = std::make_shared<std::uint64_t>(5);
  auto cmp_seed = std::make_shared<std::uint64_t>(0);
  auto cmp_window = std::make_shared<std::uint64_t>(500);
  auto cmp_out = std::make_shared<std::string>();
  cmp->add_option("--env", *cmp_env, "Environment file")->required();
  cmp->add_option("--agents", *cmp_agents, "Comma-separated agent names")
      ->required()
      ->delimiter(',');
  cmp->add_option("--steps", *cmp_steps, "Steps per run");
  cmp->add_option("--repeats", *cmp_repeats, "Seeded repeats per agent");
  cmp->add_option("--seed", *cmp_seed, "Master seed");
  cmp->add_option("--window", *cmp_window, "Moving-average window");
  cmp->add_option("--out", *cmp_out, "Comparison table CSV")->required();
  cmp->callback([cmp_env, cmp_agents, cmp_steps, cmp_repeats, cmp_seed,
                 cmp_window, cmp_out] {
    const BanditEnvironment env = BanditEnvironment::load(*cmp_env);
    std::vector<RunConfig> configs;
    for (const std::string& name : *cmp_agents) {
      RunConfig config;
      config.num_steps = *cmp_steps;
      config.seed = *cmp_seed;
      config.moving_average_window = *cmp_window;
      config.agent.name = name;
      configs.push_back(config);
    }
    const ComparisonTable table = compare(env, configs, *cmp_repeats);
    export_csv(table, *cmp_out);
    std::printf("%-10s %12s %12s %14s\n", "agent", "mean_reward",
                "last_window", "total_regret");
    for (const ComparisonRow& row : table.rows) {
      std::printf("%-10s %7.4f±%.4f %7.4f±%.4f %10.2f±%.2f\n",
                  row.agent.c_str(), row.mean_reward_mean, row.mean_reward_std,
                  row.last_window_mean, row.last_window_std,
                  row.total_regret_mean, row.total_regret_std);
    }
    std::printf("wrote %s\n", cmp_out->c_str());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}
