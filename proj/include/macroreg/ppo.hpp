#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "macroreg/env.hpp"
#include "macroreg/policy.hpp"
#include "macroreg/synthetic.hpp"

namespace macroreg {

struct PPOConfig {
  double learning_rate = 2.5e-3;
  int episodes = 1000;
  int update_epochs = 10;
  int batch_size = 64;
  int buffer_capacity = 5120;
  double clip_eps = 0.2;
  double grad_clip_norm = 0.5;
  double gamma = 0.95;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  /// Episodes collected between updates (bounded by the buffer).
  int episodes_per_update = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Transition {
  PolicyInput input;
  int action = -1;
  double log_prob = 0.0;
  double value = 0.0;
  double reward = 0.0;
  bool done = false;
};

class RolloutBuffer {
 public:
  explicit RolloutBuffer(int capacity) : capacity_(capacity) {}

  int capacity() const { return capacity_; }
  int size() const { return static_cast<int>(items_.size()); }
  bool empty() const { return items_.empty(); }
  int remaining() const { return capacity_ - size(); }
  /// Appends one whole episode; false (and nothing stored) if it would
  /// overflow.
  bool append_episode(std::vector<Transition> episode);
  const std::vector<Transition>& transitions() const { return items_; }
  void clear() { items_.clear(); }

 private:
  int capacity_;
  std::vector<Transition> items_;
};

/// Discounted returns; the sum restarts after every `done`.
std::vector<double> discounted_returns(std::span<const double> rewards, const std::vector<bool>& dones, double gamma);

struct Sample {
  const Transition* transition = nullptr;
  double ret = 0.0;
  double advantage = 0.0;
};

struct LossStats {
  double loss = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

/// Mean over `batch` of -min(r A, clip(r) A) + c_v (V - R)^2 - c_e H.
/// When `grads` is given the gradient is accumulated into it.
LossStats ppo_loss(const Policy& policy, std::span<const double> params, std::span<const Sample> batch,
                   const PPOConfig& config, std::span<double> grads = {});

class PPOTrainer {
 public:
  PPOTrainer(Policy& policy, PPOConfig config);

  /// update_epochs passes of shuffled minibatches, one Adam step each.
  /// Throws NonFiniteLoss with the parameters restored. Clears the buffer.
  LossStats update(RolloutBuffer& buffer);

  const PPOConfig& config() const { return config_; }
  Policy& policy() { return policy_; }

 private:
  Policy& policy_;
  PPOConfig config_;
  nn::Adam adam_;
  Rng rng_;
};

struct EpisodeSummary {
  double total_reward = 0.0;
  double mean_reward = 0.0;
  double hpwl = 0.0;
  double regularity = 0.0;
  Placement placement;
};

struct RolloutStats {
  std::vector<EpisodeSummary> episodes;
  double mean_episode_reward = 0.0;
  double mean_final_hpwl = 0.0;
};

/// Observes each step: the observation acted on and what came of it.
using StepObserver = std::function<void(const Observation&, const StepResult&)>;

/// Runs whole sampled episodes into `buffer` until the next one would not
/// fit or `max_episodes` have run.
RolloutStats collect_rollout(Env& env, const Policy& policy, RolloutBuffer& buffer, Rng& rng,
                             const std::optional<Placement>& initial, int max_episodes,
                             const StepObserver& on_step = {});

struct CurvePoint {
  int episode = 0;
  double reward = 0.0;  // mean step reward
  double hpwl = 0.0;
  double regularity = 0.0;
};

struct TrainResult {
  std::vector<double> best_params;
  std::optional<EpisodeSummary> best;  // lowest final HPWL seen
  std::vector<CurvePoint> curve;
  std::vector<LossStats> updates;
};

struct TrainHooks {
  std::function<void(const CurvePoint&)> on_episode;
  StepObserver on_step;
};

/// Alternates collect_rollout and PPO updates for config.episodes episodes.
/// best_params are the parameters that generated the best episode.
TrainResult train(Policy& policy, const Netlist& netlist, const EnvConfig& env_config, const PPOConfig& config,
                  const std::optional<Placement>& initial, const TrainHooks& hooks = {});

void write_curve(std::ostream& os, std::span<const CurvePoint> curve);

/// Deterministic argmax episode.
EpisodeSummary run_policy(Env& env, const Policy& policy, const std::optional<Placement>& initial);

}  // namespace macroreg
