#pragma once

#include <optional>
#include <vector>

#include "macroreg/env.hpp"

namespace macroreg {

/// argmin over valid cells of alpha * unit(wire_raw) + (1 - alpha) *
/// unit(regular_raw), where unit is the [0, 1] min-max map. Ties go to the
/// smallest cell index (lowest gy, then gx). Throws NoValidPosition.
int greedy_act(const Observation& obs, double alpha);

/// What happened at one step, without the observation payload.
struct StepLog {
  int macro = -1;
  int action = -1;
  double reward = 0.0;
  double r_wire = 0.0;
  double r_reg = 0.0;
  double hpwl = 0.0;
  double regularity = 0.0;
};

StepLog to_log(int action, const StepResult& result);

struct EpisodeRecord {
  Placement placement;
  std::vector<StepLog> steps;
  double initial_hpwl = 0.0;
  double hpwl = 0.0;
  double regularity = 0.0;
  double total_reward = 0.0;
};

/// One greedy episode on `env` using `alpha` for selection.
EpisodeRecord run_greedy(Env& env, double alpha, const std::optional<Placement>& initial = std::nullopt);

/// Greedy Place-mode layout; the default starting point for regulation.
Placement greedy_place(const Netlist& netlist, int n_grid, double alpha = 1.0,
                       OrderRule rule = OrderRule::AreaThenNets);

/// `netlist.initial` snapped to the grid when every macro has one, else
/// greedy_place with alpha 1.
Placement initial_or_greedy(const Netlist& netlist, int n_grid, OrderRule rule = OrderRule::AreaThenNets);

}  // namespace macroreg
