#include "macroreg/greedy.hpp"

#include <algorithm>

#include "macroreg/error.hpp"

namespace macroreg {

int greedy_act(const Observation& obs, double alpha) {
  const ValidRange wr = valid_range(obs.wire_raw);
  const ValidRange rr = valid_range(obs.regular_raw);
  const auto unit = [](double v, const ValidRange& r) { return r.max > r.min ? (v - r.min) / (r.max - r.min) : 0.0; };
  int best = -1;
  double best_score = 0.0;
  for (int i = 0; i < static_cast<int>(obs.position.values.size()); ++i) {
    if (obs.position.values[i] == 0.0) continue;
    const double score = alpha * unit(obs.wire_raw.values[i], wr) + (1.0 - alpha) * unit(obs.regular_raw.values[i], rr);
    if (best < 0 || score < best_score) {
      best = i;
      best_score = score;
    }
  }
  if (best < 0) throw Error(ErrorKind::NoValidPosition, "no legal cell for the current macro");
  return best;
}

StepLog to_log(int action, const StepResult& result) {
  return {result.macro, action, result.reward, result.r_wire, result.r_reg, result.hpwl, result.regularity};
}

EpisodeRecord run_greedy(Env& env, double alpha, const std::optional<Placement>& initial) {
  EpisodeRecord rec;
  env.reset(initial);
  rec.initial_hpwl = env.initial_hpwl();
  while (!env.done()) {
    const int action = greedy_act(env.observation(), alpha);
    const StepResult r = env.step(action);
    rec.steps.push_back(to_log(action, r));
    rec.total_reward += r.reward;
    rec.hpwl = r.hpwl;
    rec.regularity = r.regularity;
  }
  rec.placement = env.placement();
  return rec;
}

Placement greedy_place(const Netlist& netlist, int n_grid, double alpha, OrderRule rule) {
  EnvConfig cfg;
  cfg.mode = Mode::Place;
  cfg.alpha = alpha;
  cfg.n_grid = n_grid;
  cfg.order_rule = rule;
  Env env(netlist, cfg);
  return run_greedy(env, alpha).placement;
}

Placement initial_or_greedy(const Netlist& netlist, int n_grid, OrderRule rule) {
  const bool complete = !netlist.initial.empty() &&
                        std::all_of(netlist.initial.begin(), netlist.initial.end(), [](const auto& p) { return p.has_value(); });
  if (!complete) return greedy_place(netlist, n_grid, 1.0, rule);
  std::vector<Point> pts;
  pts.reserve(netlist.initial.size());
  for (const auto& p : netlist.initial) pts.push_back(*p);
  return snap_to_grid(canvas_for(netlist, n_grid), pts);
}

}  // namespace macroreg
