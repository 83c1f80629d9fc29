#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cbsim/environment.hpp"
#include "cbsim/rng.hpp"

namespace cbsim {

/// Default softmax policy-gradient learning rate. Pinned by the two-action
/// toy experiment in the agent tests: with this rate the better arm's
/// probability passes 0.9 well within 5000 updates.
inline constexpr double kSoftmaxDefaultLearningRate = 0.1;

struct AgentConfig {
  std::string name = "uniform";  // uniform|egreedy|linucb|softmax|oracle
  double epsilon = 0.1;
  double ucb_beta = 1.0;
  double ucb_ridge = 1.0;
  double learning_rate = kSoftmaxDefaultLearningRate;
  std::uint64_t seed = 0;
};

/// A bandit policy with mutable learning state. Single-writer: one run
/// drives act/update on an instance at a time.
class Agent {
 public:
  virtual ~Agent() = default;

  /// Picks an action for the observed state. state_index is provided for
  /// the oracle; learning agents use only the vector.
  virtual std::size_t act(std::size_t state_index,
                          std::span<const double> state) = 0;

  /// Incorporates the reward for (state, chosen action). Rewards must be
  /// finite.
  virtual void update(std::span<const double> state, std::size_t action_index,
                      double reward) = 0;

  virtual std::string_view name() const = 0;
};

/// Seeded uniform-random action choice; never learns.
class UniformAgent : public Agent {
 public:
  UniformAgent(std::size_t num_actions, std::uint64_t seed);
  std::size_t act(std::size_t, std::span<const double>) override;
  void update(std::span<const double>, std::size_t, double) override;
  std::string_view name() const override { return "uniform"; }

 private:
  std::size_t num_actions_;
  SplitMix64 rng_;
};

/// Context-free baseline: tracks a running mean per action, explores with
/// probability epsilon, otherwise plays the argmax (ties to the smallest
/// index).
class EpsilonGreedyAgent : public Agent {
 public:
  EpsilonGreedyAgent(std::size_t num_actions, double epsilon,
                     std::uint64_t seed);
  std::size_t act(std::size_t, std::span<const double>) override;
  void update(std::span<const double>, std::size_t action_index,
              double reward) override;
  std::string_view name() const override { return "egreedy"; }

  const std::vector<double>& means() const { return means_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }

 private:
  double epsilon_;
  SplitMix64 rng_;
  std::vector<double> means_;
  std::vector<std::uint64_t> counts_;
};

/// Disjoint-arm linear UCB. Per action a it maintains the ridge design
/// matrix A_a = ridge*I + sum s s^T and b_a = sum r s, scoring actions by
/// theta_a . s + beta * sqrt(s^T A_a^-1 s). The inverse is kept current
/// with Sherman-Morrison rank-one updates.
class LinUcbAgent : public Agent {
 public:
  LinUcbAgent(std::size_t num_actions, std::size_t dim, double beta,
              double ridge);
  std::size_t act(std::size_t, std::span<const double> state) override;
  void update(std::span<const double> state, std::size_t action_index,
              double reward) override;
  std::string_view name() const override { return "linucb"; }

  /// Row-major d x d design matrix of one action (for invariant checks).
  std::span<const double> design_matrix(std::size_t action_index) const;
  double ridge() const { return ridge_; }

 private:
  std::size_t num_actions_;
  std::size_t dim_;
  double beta_;
  double ridge_;
  std::vector<std::vector<double>> design_;   // A_a, row-major
  std::vector<std::vector<double>> inverse_;  // A_a^-1, row-major
  std::vector<std::vector<double>> bias_;     // b_a
  std::vector<std::vector<double>> theta_;    // A_a^-1 b_a
  std::vector<double> scratch_;
};

/// Linear softmax policy trained by the likelihood-ratio gradient with a
/// running-mean reward baseline.
class SoftmaxAgent : public Agent {
 public:
  SoftmaxAgent(std::size_t num_actions, std::size_t dim, double learning_rate,
               std::uint64_t seed);
  std::size_t act(std::size_t, std::span<const double> state) override;
  void update(std::span<const double> state, std::size_t action_index,
              double reward) override;
  std::string_view name() const override { return "softmax"; }

  /// Action probabilities for a state (strictly positive, sums to 1).
  std::vector<double> probabilities(std::span<const double> state) const;

 private:
  std::size_t num_actions_;
  std::size_t dim_;
  double learning_rate_;
  SplitMix64 rng_;
  std::vector<double> weights_;  // |A| x d, row-major
  double baseline_ = 0.0;
  std::uint64_t baseline_count_ = 0;
};

/// Plays the environment's exact best action; the regret reference.
class OracleAgent : public Agent {
 public:
  explicit OracleAgent(const BanditEnvironment& env) : env_(&env) {}
  std::size_t act(std::size_t state_index, std::span<const double>) override;
  void update(std::span<const double>, std::size_t, double) override {}
  std::string_view name() const override { return "oracle"; }

 private:
  const BanditEnvironment* env_;
};

/// Known agent names, in the order the CLI lists them.
std::vector<std::string> agent_names();

/// Instantiates an agent for an environment. Unknown names raise a
/// ConfigError listing the valid ones.
std::unique_ptr<Agent> make_agent(const AgentConfig& config,
                                  const BanditEnvironment& env);

}  // namespace cbsim
