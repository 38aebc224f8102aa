#include "macroreg/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/ostream.h>

#include "macroreg/error.hpp"

namespace macroreg {

void PPOConfig::validate() const {
  const auto need = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::InvalidConfig, what);
  };
  need(learning_rate > 0.0, "learning_rate must be positive");
  need(episodes >= 0, "episodes must be >= 0");
  need(update_epochs >= 1, "update_epochs must be >= 1");
  need(batch_size >= 1, "batch_size must be >= 1");
  need(buffer_capacity >= 1, "buffer_capacity must be >= 1");
  need(clip_eps > 0.0, "clip_eps must be positive");
  need(grad_clip_norm > 0.0, "grad_clip_norm must be positive");
  need(gamma > 0.0 && gamma <= 1.0, "gamma must lie in (0, 1]");
  need(entropy_coef >= 0.0 && value_coef >= 0.0, "loss coefficients must be >= 0");
  need(episodes_per_update >= 1, "episodes_per_update must be >= 1");
}

bool RolloutBuffer::append_episode(std::vector<Transition> episode) {
  if (static_cast<int>(episode.size()) > remaining()) return false;
  for (auto& t : episode) items_.push_back(std::move(t));
  return true;
}

std::vector<double> discounted_returns(std::span<const double> rewards, const std::vector<bool>& dones, double gamma) {
  std::vector<double> out(rewards.size());
  double running = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    if (dones[i]) running = 0.0;
    running = rewards[i] + gamma * running;
    out[i] = running;
  }
  return out;
}

LossStats ppo_loss(const Policy& policy, std::span<const double> params, std::span<const Sample> batch,
                   const PPOConfig& config, std::span<double> grads) {
  LossStats stats;
  if (batch.empty()) return stats;
  const double scale = 1.0 / static_cast<double>(batch.size());
  const bool want_grad = !grads.empty();
  Policy::Cache cache;
  std::vector<double> dlogits;
  for (const Sample& s : batch) {
    const Transition& t = *s.transition;
    const PolicyOutput out = policy.forward(t.input, params, want_grad ? &cache : nullptr);
    const std::vector<double> p = softmax(out.logits);
    const double logp = std::log(p[t.action]);
    const double ratio = std::exp(logp - t.log_prob);
    const double clipped = std::clamp(ratio, 1.0 - config.clip_eps, 1.0 + config.clip_eps);
    const double surr1 = ratio * s.advantage;
    const double surr2 = clipped * s.advantage;
    const double h = entropy(p);
    const double verr = out.value - s.ret;

    stats.policy_loss += -std::min(surr1, surr2) * scale;
    stats.value_loss += verr * verr * scale;
    stats.entropy += h * scale;
    if (std::abs(ratio - 1.0) > config.clip_eps) stats.clip_fraction += scale;

    if (!want_grad) continue;
    // d(-min(surr1, surr2))/d log p; zero when the clipped branch is active.
    const double g_logp = surr1 <= surr2 ? -surr1 : 0.0;
    dlogits.assign(p.size(), 0.0);
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (p[j] <= 0.0) continue;
      const double pg = g_logp * ((static_cast<int>(j) == t.action ? 1.0 : 0.0) - p[j]);
      const double eg = config.entropy_coef * p[j] * (std::log(p[j]) + h);
      dlogits[j] = (pg + eg) * scale;
    }
    policy.backward(cache, dlogits, 2.0 * config.value_coef * verr * scale, params, grads);
  }
  stats.loss = stats.policy_loss + config.value_coef * stats.value_loss - config.entropy_coef * stats.entropy;
  return stats;
}

PPOTrainer::PPOTrainer(Policy& policy, PPOConfig config)
    : policy_(policy),
      config_(config),
      adam_(policy.num_params(), config.learning_rate),
      rng_(config.seed ^ 0x9e3779b97f4a7c15ULL) {
  config_.validate();
}

LossStats PPOTrainer::update(RolloutBuffer& buffer) {
  const auto& items = buffer.transitions();
  if (items.empty()) throw Error(ErrorKind::InvalidConfig, "update on an empty buffer");

  std::vector<double> rewards(items.size());
  std::vector<bool> dones(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    rewards[i] = items[i].reward;
    dones[i] = items[i].done;
  }
  const std::vector<double> returns = discounted_returns(rewards, dones, config_.gamma);

  std::vector<Sample> samples(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    samples[i] = {&items[i], returns[i], returns[i] - items[i].value};
  }

  const std::vector<double> saved = policy_.params();
  const nn::Adam saved_adam = adam_;
  std::vector<double>& params = policy_.params();
  std::vector<double> grads(params.size());
  std::vector<Sample> batch;
  LossStats total;
  int steps = 0;
  std::vector<std::size_t> idx(samples.size());
  for (int epoch = 0; epoch < config_.update_epochs; ++epoch) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng_.below(i)]);
    for (std::size_t start = 0; start < idx.size(); start += config_.batch_size) {
      const std::size_t stop = std::min(idx.size(), start + config_.batch_size);
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(samples[idx[i]]);
      std::fill(grads.begin(), grads.end(), 0.0);
      const LossStats s = ppo_loss(policy_, params, batch, config_, grads);

      double norm2 = 0.0;
      for (double g : grads) norm2 += g * g;
      if (!std::isfinite(s.loss) || !std::isfinite(norm2)) {
        params = saved;
        adam_ = saved_adam;
        buffer.clear();
        throw Error(ErrorKind::NonFiniteLoss, fmt::format("epoch {}: loss {}", epoch, s.loss));
      }
      const double norm = std::sqrt(norm2);
      if (norm > config_.grad_clip_norm) {
        const double k = config_.grad_clip_norm / norm;
        for (double& g : grads) g *= k;
      }
      adam_.step(params, grads);

      total.loss += s.loss;
      total.policy_loss += s.policy_loss;
      total.value_loss += s.value_loss;
      total.entropy += s.entropy;
      total.clip_fraction += s.clip_fraction;
      ++steps;
    }
  }
  const double inv = 1.0 / steps;
  total.loss *= inv;
  total.policy_loss *= inv;
  total.value_loss *= inv;
  total.entropy *= inv;
  total.clip_fraction *= inv;
  buffer.clear();
  return total;
}

namespace {

EpisodeSummary finish(const Env& env, int steps, double total_reward, const StepResult& last) {
  EpisodeSummary ep;
  ep.total_reward = total_reward;
  ep.mean_reward = steps > 0 ? total_reward / steps : 0.0;
  ep.hpwl = last.hpwl;
  ep.regularity = last.regularity;
  ep.placement = env.placement();
  return ep;
}

}  // namespace

RolloutStats collect_rollout(Env& env, const Policy& policy, RolloutBuffer& buffer, Rng& rng,
                             const std::optional<Placement>& initial, int max_episodes,
                             const StepObserver& on_step) {
  RolloutStats stats;
  const int length = env.episode_length();
  if (length == 0) return stats;
  while (static_cast<int>(stats.episodes.size()) < max_episodes && buffer.remaining() >= length) {
    env.reset(initial);
    std::vector<Transition> episode;
    episode.reserve(length);
    double total = 0.0;
    StepResult last;
    while (!env.done()) {
      Transition t;
      const Observation before = on_step ? env.observation() : Observation{};
      t.input = make_input(env.observation());
      const PolicyOutput out = policy.forward(t.input);
      const std::vector<double> p = softmax(out.logits);
      t.action = sample_action(p, rng);
      t.log_prob = std::log(p[t.action]);
      t.value = out.value;
      last = env.step(t.action);
      if (last.invalid_action) throw Error(ErrorKind::NoValidPosition, "policy sampled a masked cell");
      if (on_step) on_step(before, last);
      t.reward = last.reward;
      t.done = last.done;
      total += last.reward;
      episode.push_back(std::move(t));
    }
    stats.episodes.push_back(finish(env, static_cast<int>(episode.size()), total, last));
    buffer.append_episode(std::move(episode));
  }
  if (!stats.episodes.empty()) {
    for (const auto& ep : stats.episodes) {
      stats.mean_episode_reward += ep.total_reward;
      stats.mean_final_hpwl += ep.hpwl;
    }
    stats.mean_episode_reward /= static_cast<double>(stats.episodes.size());
    stats.mean_final_hpwl /= static_cast<double>(stats.episodes.size());
  }
  return stats;
}

TrainResult train(Policy& policy, const Netlist& netlist, const EnvConfig& env_config, const PPOConfig& config,
                  const std::optional<Placement>& initial, const TrainHooks& hooks) {
  config.validate();
  if (policy.n() != env_config.n_grid) {
    throw Error(ErrorKind::ShapeMismatch, fmt::format("policy N {} vs env N {}", policy.n(), env_config.n_grid));
  }
  TrainResult result;
  result.best_params = policy.params();
  if (config.episodes == 0) return result;

  Env env(netlist, env_config);
  if (env.episode_length() > config.buffer_capacity) {
    throw Error(ErrorKind::InvalidConfig, "buffer_capacity is smaller than one episode");
  }
  RolloutBuffer buffer(config.buffer_capacity);
  PPOTrainer trainer(policy, config);
  Rng rng(config.seed);

  int seen = 0;
  while (seen < config.episodes) {
    const int want = std::min(config.episodes_per_update, config.episodes - seen);
    const std::vector<double> acting = policy.params();
    const RolloutStats stats = collect_rollout(env, policy, buffer, rng, initial, want, hooks.on_step);
    for (const EpisodeSummary& ep : stats.episodes) {
      ++seen;
      const CurvePoint point{seen, ep.mean_reward, ep.hpwl, ep.regularity};
      result.curve.push_back(point);
      if (hooks.on_episode) hooks.on_episode(point);
      if (!result.best || ep.hpwl < result.best->hpwl) {
        result.best = ep;
        result.best_params = acting;
      }
    }
    result.updates.push_back(trainer.update(buffer));
  }
  return result;
}

void write_curve(std::ostream& os, std::span<const CurvePoint> curve) {
  os << "episode,reward,hpwl,regularity\n";
  for (const CurvePoint& p : curve) fmt::print(os, "{},{},{},{}\n", p.episode, p.reward, p.hpwl, p.regularity);
}

EpisodeSummary run_policy(Env& env, const Policy& policy, const std::optional<Placement>& initial) {
  env.reset(initial);
  double total = 0.0;
  int steps = 0;
  StepResult last;
  while (!env.done()) {
    const PolicyOutput out = policy.forward(make_input(env.observation()));
    last = env.step(argmax_action(out.logits));
    total += last.reward;
    ++steps;
  }
  return finish(env, steps, total, last);
}

}  // namespace macroreg
