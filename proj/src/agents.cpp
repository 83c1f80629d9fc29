#include "cbsim/agents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cbsim {
namespace {

void require_finite_reward(double reward) {
  if (!std::isfinite(reward)) {
    throw InvariantError("agent update received a non-finite reward");
  }
}

void require_dim(std::size_t expected, std::span<const double> state) {
  if (state.size() != expected) {
    throw ConfigError("state dimension " + std::to_string(state.size()) +
                      " does not match agent dimension " +
                      std::to_string(expected));
  }
}

std::size_t argmax_smallest_tie(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace

UniformAgent::UniformAgent(std::size_t num_actions, std::uint64_t seed)
    : num_actions_(num_actions), rng_(seed) {
  if (num_actions_ == 0) throw ConfigError("agent needs at least one action");
}

std::size_t UniformAgent::act(std::size_t, std::span<const double>) {
  return static_cast<std::size_t>(rng_.bounded(num_actions_));
}

void UniformAgent::update(std::span<const double>, std::size_t, double) {}

EpsilonGreedyAgent::EpsilonGreedyAgent(std::size_t num_actions, double epsilon,
                                       std::uint64_t seed)
    : epsilon_(epsilon),
      rng_(seed),
      means_(num_actions, 0.0),
      counts_(num_actions, 0) {
  if (num_actions == 0) throw ConfigError("agent needs at least one action");
  if (epsilon < 0.0 || epsilon > 1.0) {
    throw ConfigError("epsilon must lie in [0, 1]");
  }
}

std::size_t EpsilonGreedyAgent::act(std::size_t, std::span<const double>) {
  if (epsilon_ > 0.0 && rng_.uniform_double() < epsilon_) {
    return static_cast<std::size_t>(rng_.bounded(means_.size()));
  }
  return argmax_smallest_tie(means_);
}

void EpsilonGreedyAgent::update(std::span<const double>,
                                std::size_t action_index, double reward) {
  require_finite_reward(reward);
  if (action_index >= means_.size()) {
    throw std::out_of_range("action index out of range");
  }
  ++counts_[action_index];
  means_[action_index] +=
      (reward - means_[action_index]) / static_cast<double>(counts_[action_index]);
}

LinUcbAgent::LinUcbAgent(std::size_t num_actions, std::size_t dim, double beta,
                         double ridge)
    : num_actions_(num_actions),
      dim_(dim),
      beta_(beta),
      ridge_(ridge),
      scratch_(dim, 0.0) {
  if (num_actions == 0 || dim == 0) {
    throw ConfigError("linucb needs positive action count and dimension");
  }
  if (!(ridge > 0.0)) throw ConfigError("linucb ridge must be positive");
  if (beta < 0.0) throw ConfigError("linucb beta must be nonnegative");
  design_.assign(num_actions, std::vector<double>(dim * dim, 0.0));
  inverse_.assign(num_actions, std::vector<double>(dim * dim, 0.0));
  bias_.assign(num_actions, std::vector<double>(dim, 0.0));
  theta_.assign(num_actions, std::vector<double>(dim, 0.0));
  for (std::size_t a = 0; a < num_actions; ++a) {
    for (std::size_t i = 0; i < dim; ++i) {
      design_[a][i * dim + i] = ridge;
      inverse_[a][i * dim + i] = 1.0 / ridge;
    }
  }
}

std::size_t LinUcbAgent::act(std::size_t, std::span<const double> state) {
  require_dim(dim_, state);
  std::vector<double> scores(num_actions_);
  for (std::size_t a = 0; a < num_actions_; ++a) {
    const auto& inv = inverse_[a];
    const auto& theta = theta_[a];
    double mean = 0.0;
    double spread = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      mean += theta[i] * state[i];
      double row = 0.0;
      for (std::size_t j = 0; j < dim_; ++j) {
        row += inv[i * dim_ + j] * state[j];
      }
      spread += state[i] * row;
    }
    scores[a] = mean + beta_ * std::sqrt(std::max(0.0, spread));
  }
  return argmax_smallest_tie(scores);
}

void LinUcbAgent::update(std::span<const double> state,
                         std::size_t action_index, double reward) {
  require_finite_reward(reward);
  require_dim(dim_, state);
  if (action_index >= num_actions_) {
    throw std::out_of_range("action index out of range");
  }
  auto& design = design_[action_index];
  auto& inv = inverse_[action_index];
  auto& bias = bias_[action_index];
  auto& theta = theta_[action_index];

  // A += s s^T, then the Sherman-Morrison rank-one inverse update.
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j < dim_; ++j) {
      design[i * dim_ + j] += state[i] * state[j];
    }
  }
  std::vector<double>& u = scratch_;
  double denom = 1.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      row += inv[i * dim_ + j] * state[j];
    }
    u[i] = row;
    denom += row * state[i];
  }
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j < dim_; ++j) {
      inv[i * dim_ + j] -= u[i] * u[j] / denom;
    }
  }
  for (std::size_t i = 0; i < dim_; ++i) bias[i] += reward * state[i];
  for (std::size_t i = 0; i < dim_; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      row += inv[i * dim_ + j] * bias[j];
    }
    theta[i] = row;
  }
}

std::span<const double> LinUcbAgent::design_matrix(
    std::size_t action_index) const {
  return design_.at(action_index);
}

SoftmaxAgent::SoftmaxAgent(std::size_t num_actions, std::size_t dim,
                           double learning_rate, std::uint64_t seed)
    : num_actions_(num_actions),
      dim_(dim),
      learning_rate_(learning_rate),
      rng_(seed),
      weights_(num_actions * dim, 0.0) {
  if (num_actions == 0 || dim == 0) {
    throw ConfigError("softmax needs positive action count and dimension");
  }
  if (!(learning_rate > 0.0)) {
    throw ConfigError("softmax learning rate must be positive");
  }
}

std::vector<double> SoftmaxAgent::probabilities(
    std::span<const double> state) const {
  require_dim(dim_, state);
  std::vector<double> logits(num_actions_);
  for (std::size_t a = 0; a < num_actions_; ++a) {
    double z = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      z += weights_[a * dim_ + i] * state[i];
    }
    logits[a] = z;
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& z : logits) {
    z = std::exp(z - top);
    sum += z;
  }
  for (double& z : logits) z /= sum;
  return logits;
}

std::size_t SoftmaxAgent::act(std::size_t, std::span<const double> state) {
  const auto probs = probabilities(state);
  const double draw = rng_.uniform_double();
  double cumulative = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    cumulative += probs[a];
    if (draw < cumulative) return a;
  }
  return probs.size() - 1;
}

void SoftmaxAgent::update(std::span<const double> state,
                          std::size_t action_index, double reward) {
  require_finite_reward(reward);
  require_dim(dim_, state);
  if (action_index >= num_actions_) {
    throw std::out_of_range("action index out of range");
  }
  const auto probs = probabilities(state);
  const double advantage = reward - baseline_;
  for (std::size_t a = 0; a < num_actions_; ++a) {
    const double indicator = (a == action_index) ? 1.0 : 0.0;
    const double grad = (indicator - probs[a]) * advantage;
    for (std::size_t i = 0; i < dim_; ++i) {
      weights_[a * dim_ + i] += learning_rate_ * grad * state[i];
    }
  }
  ++baseline_count_;
  baseline_ += (reward - baseline_) / static_cast<double>(baseline_count_);
}

std::size_t OracleAgent::act(std::size_t state_index, std::span<const double>) {
  return env_->best_action(state_index).first;
}

std::vector<std::string> agent_names() {
  return {"uniform", "egreedy", "linucb", "softmax", "oracle"};
}

std::unique_ptr<Agent> make_agent(const AgentConfig& config,
                                  const BanditEnvironment& env) {
  if (config.name == "uniform") {
    return std::make_unique<UniformAgent>(env.num_actions(), config.seed);
  }
  if (config.name == "egreedy") {
    return std::make_unique<EpsilonGreedyAgent>(env.num_actions(),
                                                config.epsilon, config.seed);
  }
  if (config.name == "linucb") {
    return std::make_unique<LinUcbAgent>(env.num_actions(), env.dim(),
                                         config.ucb_beta, config.ucb_ridge);
  }
  if (config.name == "softmax") {
    return std::make_unique<SoftmaxAgent>(env.num_actions(), env.dim(),
                                          config.learning_rate, config.seed);
  }
  if (config.name == "oracle") {
    return std::make_unique<OracleAgent>(env);
  }
  std::string valid;
  for (const auto& name : agent_names()) valid += " " + name;
  throw ConfigError("unknown agent '" + config.name + "'; valid agents:" +
                    valid);
}

}  // namespace cbsim
