#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "macroreg/geometry.hpp"
#include "macroreg/masks.hpp"
#include "macroreg/metrics.hpp"
#include "macroreg/netlist.hpp"

namespace macroreg {

enum class OrderRule { AreaDesc, NetCountDesc, AreaThenNets };

std::string_view to_string(Mode mode);
std::string_view to_string(OrderRule rule);
std::optional<Mode> mode_from(std::string_view name);
std::optional<OrderRule> order_rule_from(std::string_view name);
std::string_view to_string(Blocking rule);
std::optional<Blocking> blocking_from(std::string_view name);

struct EnvConfig {
  static constexpr double kDefaultAlpha = 0.7;

  Mode mode = Mode::Regulate;
  /// Weight of the wirelength reward; 1 - alpha goes to regularity.
  double alpha = kDefaultAlpha;
  int n_grid = Canvas::kDefaultGrid;
  std::uint64_t seed = 0;
  OrderRule order_rule = OrderRule::AreaThenNets;
  Blocking blocking = Blocking::AllPlaced;
  /// When false the regularity channel of the observation is all zeros
  /// (the wirelength-only regulator).
  bool use_regular_mask = true;
  /// When false r_wire / r_reg are the raw negated mask values instead of
  /// per-step min-max scores in [0, 1].
  bool normalize_reward = true;

  void validate() const;
};

/// Deterministic macro order for an episode.
std::vector<int> macro_order(const Netlist& netlist, OrderRule rule);

struct Observation {
  Mask canvas_image;
  Mask position;
  Mask wire_raw;
  Mask wire_norm;
  Mask regular_raw;
  Mask regular_norm;
  int macro = -1;        // netlist index of the macro to act on
  int macro_index = 0;   // its position in the episode order
  Span macro_dims;
  int valid_cells = 0;
};

struct StepResult {
  Observation observation;  // next observation; empty masks once done
  double reward = 0.0;
  double r_wire = 0.0;
  double r_reg = 0.0;
  bool done = false;
  bool invalid_action = false;
  int macro = -1;  // macro that was acted on
  GridPos cell;
  double hpwl = 0.0;        // HPWL over every placed pin after the drop
  double regularity = 0.0;  // regularity summed over placed macros
};

struct RewardParts {
  double r_wire = 0.0;
  double r_reg = 0.0;
};

/// Per-step min-max scores of the chosen cell: the best valid cell earns 1,
/// the worst 0, a constant mask 0.
RewardParts reward_components(const Mask& wire_raw, const Mask& regular_raw, int chosen);

struct Evaluation {
  double hpwl = 0.0;
  double regularity = 0.0;
  double regularity_mean = 0.0;
};

Evaluation evaluate(const Netlist& netlist, const Canvas& canvas, const Placement& placement);

/// The placement MDP. Regulate mode starts from a complete layout and moves
/// every macro once; Place mode builds a layout from an empty canvas.
class Env {
 public:
  Env(std::shared_ptr<const Netlist> netlist, EnvConfig config);
  Env(const Netlist& netlist, EnvConfig config);

  /// Regulate mode requires `initial` (MissingInitial) that fits the grid and
  /// is overlap free (InvalidInitialPlacement). Place mode rejects one.
  const Observation& reset(const std::optional<Placement>& initial = std::nullopt);

  /// `action` is a cell index gy * N + gx.
  StepResult step(int action);

  const Observation& observation() const { return obs_; }
  const PlacementState& state() const { return *state_; }
  const Netlist& netlist() const { return *netlist_; }
  const Canvas& canvas() const { return canvas_; }
  const EnvConfig& config() const { return config_; }
  std::span<const int> order() const { return order_; }
  int episode_length() const { return static_cast<int>(order_.size()); }
  bool done() const { return done_; }
  int steps_taken() const { return step_; }

  /// Current positions, with the macro in hand at its previous cell
  /// (Regulate). Throws UnplacedOwner mid-episode in Place mode.
  Placement placement() const { return state_->snapshot(); }
  /// HPWL of the layout the episode started from (Regulate) or 0.
  double initial_hpwl() const { return initial_hpwl_; }

 private:
  void begin_macro();
  void build_observation();

  std::shared_ptr<const Netlist> netlist_;
  EnvConfig config_;
  Canvas canvas_;
  Connectivity connectivity_;
  std::vector<int> order_;
  std::optional<PlacementState> state_;
  std::optional<NetExtremes> extremes_;
  Observation obs_;
  int step_ = 0;
  bool done_ = true;
  double initial_hpwl_ = 0.0;
};

/// "step macro action r_wire r_reg hpwl regularity" transcript line.
void write_transcript_header(std::ostream& os);
void write_transcript_line(std::ostream& os, int step, std::string_view macro_id, int action,
                           const StepResult& result);

}  // namespace macroreg
