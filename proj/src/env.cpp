#include "macroreg/env.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "macroreg/error.hpp"

namespace macroreg {

std::string_view to_string(Mode mode) { return mode == Mode::Place ? "place" : "regulate"; }

std::string_view to_string(OrderRule rule) {
  switch (rule) {
    case OrderRule::AreaDesc: return "area";
    case OrderRule::NetCountDesc: return "nets";
    case OrderRule::AreaThenNets: return "area-then-nets";
  }
  return "unknown";
}

std::optional<Mode> mode_from(std::string_view name) {
  if (name == "place") return Mode::Place;
  if (name == "regulate") return Mode::Regulate;
  return std::nullopt;
}

std::optional<OrderRule> order_rule_from(std::string_view name) {
  for (OrderRule r : {OrderRule::AreaDesc, OrderRule::NetCountDesc, OrderRule::AreaThenNets}) {
    if (to_string(r) == name) return r;
  }
  return std::nullopt;
}

std::string_view to_string(Blocking rule) { return rule == Blocking::AllPlaced ? "all" : "adjusted"; }

std::optional<Blocking> blocking_from(std::string_view name) {
  if (name == "all") return Blocking::AllPlaced;
  if (name == "adjusted") return Blocking::AdjustedOnly;
  return std::nullopt;
}

void EnvConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorKind::InvalidConfig, fmt::format("alpha {} not in [0, 1]", alpha));
  if (n_grid < 2) throw Error(ErrorKind::InvalidConfig, fmt::format("grid {} < 2", n_grid));
}

std::vector<int> macro_order(const Netlist& netlist, OrderRule rule) {
  const Connectivity conn(netlist);
  std::vector<int> order(netlist.macros.size());
  std::iota(order.begin(), order.end(), 0);
  const auto area = [&](int m) { return netlist.macros[m].width * netlist.macros[m].height; };
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (rule != OrderRule::NetCountDesc && area(a) != area(b)) return area(a) > area(b);
    if (rule != OrderRule::AreaDesc && conn.net_count(a) != conn.net_count(b)) {
      return conn.net_count(a) > conn.net_count(b);
    }
    return netlist.macros[a].id < netlist.macros[b].id;
  });
  return order;
}

RewardParts reward_components(const Mask& wire_raw, const Mask& regular_raw, int chosen) {
  const auto score = [chosen](const Mask& mask) {
    const ValidRange r = valid_range(mask);
    if (!(r.max > r.min)) return 0.0;
    return (r.max - mask.values[chosen]) / (r.max - r.min);
  };
  return {score(wire_raw), score(regular_raw)};
}

Evaluation evaluate(const Netlist& netlist, const Canvas& canvas, const Placement& placement) {
  if (placement.size() != netlist.macros.size()) {
    throw Error(ErrorKind::UnplacedOwner, "placement does not cover every macro");
  }
  const RegularityValue reg = regularity_total(canvas, placement);
  return {hpwl_total(netlist, canvas, placement), reg.total, reg.mean()};
}

Env::Env(std::shared_ptr<const Netlist> netlist, EnvConfig config)
    : netlist_(std::move(netlist)),
      config_(config),
      canvas_(canvas_for(*netlist_, config.n_grid)),
      connectivity_(*netlist_),
      order_(macro_order(*netlist_, config.order_rule)) {
  config_.validate();
}

Env::Env(const Netlist& netlist, EnvConfig config) : Env(std::make_shared<const Netlist>(netlist), config) {}

const Observation& Env::reset(const std::optional<Placement>& initial) {
  state_.emplace(*netlist_, canvas_, config_.mode, config_.blocking);
  extremes_.emplace(*netlist_, canvas_);
  step_ = 0;
  done_ = false;
  initial_hpwl_ = 0.0;

  if (config_.mode == Mode::Regulate) {
    if (!initial) throw Error(ErrorKind::MissingInitial, "regulate mode needs a starting placement");
    if (initial->size() != netlist_->macros.size()) {
      throw Error(ErrorKind::InvalidInitialPlacement,
                  fmt::format("{} positions for {} macros", initial->size(), netlist_->macros.size()));
    }
    try {
      state_->seat(*initial);
    } catch (const Error& e) {
      throw Error(ErrorKind::InvalidInitialPlacement, e.what());
    }
    if (!overlap_free(*netlist_, canvas_, *initial)) {
      throw Error(ErrorKind::InvalidInitialPlacement, "starting placement has overlapping blocks");
    }
    for (int m = 0; m < netlist_->num_macros(); ++m) extremes_->add_macro(m, (*initial)[m]);
    initial_hpwl_ = extremes_->total();
  } else if (initial) {
    throw Error(ErrorKind::InvalidInitialPlacement, "place mode starts from an empty canvas");
  }

  if (order_.empty()) {
    done_ = true;
    obs_ = Observation{};
    return obs_;
  }
  begin_macro();
  return obs_;
}

void Env::begin_macro() {
  const int m = order_[step_];
  if (config_.mode == Mode::Regulate) {
    const GridPos at = *state_->position(m);
    state_->lift(m);
    extremes_->remove_macro(m, at);
  }
  build_observation();
}

void Env::build_observation() {
  const int m = order_[step_];
  const NormTarget target = config_.mode == Mode::Regulate ? NormTarget::SymmetricUnit : NormTarget::Unit;
  Observation obs;
  obs.macro = m;
  obs.macro_index = step_;
  obs.macro_dims = state_->span(m);
  obs.position = position_mask(*state_, m);
  obs.wire_raw = wire_mask(*state_, obs.position, m, *extremes_, connectivity_);
  obs.wire_norm = normalize_mask(obs.wire_raw, target);
  obs.regular_raw = regular_mask(*state_, obs.position, m);
  if (config_.use_regular_mask) {
    obs.regular_norm = normalize_mask(obs.regular_raw, target);
  } else {
    obs.regular_norm = Mask(canvas_.n(), MaskKind::RegularNorm, 0.0);
  }
  obs.canvas_image = canvas_image(*state_);
  obs.valid_cells = static_cast<int>(std::count(obs.position.values.begin(), obs.position.values.end(), 1.0));
  obs_ = std::move(obs);
}

StepResult Env::step(int action) {
  if (done_) throw Error(ErrorKind::InvalidConfig, "step() on a finished episode; call reset()");
  const int m = order_[step_];
  StepResult result;
  result.macro = m;
  if (action < 0 || action >= canvas_.cells() || obs_.position.values[action] == 0.0) {
    result.invalid_action = true;
    result.done = true;
    result.cell = action >= 0 && action < canvas_.cells() ? canvas_.pos(action) : GridPos{-1, -1};
    done_ = true;
    obs_ = Observation{};
    return result;
  }
  result.cell = canvas_.pos(action);

  if (config_.normalize_reward) {
    const RewardParts parts = reward_components(obs_.wire_raw, obs_.regular_raw, action);
    result.r_wire = parts.r_wire;
    result.r_reg = parts.r_reg;
  } else {
    result.r_wire = -obs_.wire_raw.values[action];
    result.r_reg = -obs_.regular_raw.values[action];
  }
  result.reward = config_.alpha * result.r_wire + (1.0 - config_.alpha) * result.r_reg;

  state_->drop(m, result.cell);
  extremes_->add_macro(m, result.cell);
  result.hpwl = extremes_->total();
  for (int i = 0; i < state_->num_macros(); ++i) {
    if (const auto p = state_->position(i)) result.regularity += regularity_of_grid(p->gx, p->gy, canvas_);
  }

  ++step_;
  if (step_ == episode_length()) {
    done_ = true;
    obs_ = Observation{};
  } else {
    begin_macro();
  }
  result.done = done_;
  result.observation = obs_;
  return result;
}

void write_transcript_header(std::ostream& os) { os << "step macro action r_wire r_reg hpwl regularity\n"; }

void write_transcript_line(std::ostream& os, int step, std::string_view macro_id, int action,
                           const StepResult& result) {
  fmt::print(os, "{} {} {} {} {} {} {}\n", step, macro_id, action, result.r_wire, result.r_reg, result.hpwl,
             result.regularity);
}

}  // namespace macroreg
