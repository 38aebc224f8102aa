#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "macroreg/geometry.hpp"
#include "macroreg/netlist.hpp"

namespace macroreg {

/// Half-perimeter of the bounding box of `points`; 0 for fewer than two.
double half_perimeter(std::span<const Point> points);

/// Absolute pin position given its owner's left-bottom corner.
inline Point pin_position(Point anchor, const Pin& pin) { return {anchor.x + pin.dx, anchor.y + pin.dy}; }

/// HPWL of one net. Throws UnplacedOwner if a macro owner has no position.
double hpwl_net(const Netlist& netlist, const Net& net, const Canvas& canvas, const Placement& placement);
double hpwl_net(const Netlist& netlist, const Net& net, const PlacementState& state);

/// Sum of net HPWL in net order.
double hpwl_total(const Netlist& netlist, const Canvas& canvas, const Placement& placement);
double hpwl_total(const Netlist& netlist, const PlacementState& state);

/// Per-macro view of connectivity: for each incident net, the extreme pin
/// offsets of that macro on the net.
class Connectivity {
 public:
  struct Incidence {
    int net;
    double min_dx, max_dx, min_dy, max_dy;
  };

  explicit Connectivity(const Netlist& netlist);

  std::span<const Incidence> nets_of(int macro) const { return incidence_[macro]; }
  int net_count(int macro) const { return static_cast<int>(incidence_[macro].size()); }

 private:
  std::vector<std::vector<Incidence>> incidence_;
};

/// Axis-aligned box of absolute pin coordinates.
struct PinBox {
  double xmin, xmax, ymin, ymax;
  double half_perimeter() const { return (xmax - xmin) + (ymax - ymin); }
};

/// Per-net sorted multisets of the x and y coordinates of every placed pin.
/// Terminal pins are inserted at construction; macro pins follow
/// add_macro/remove_macro.
class NetExtremes {
 public:
  NetExtremes(const Netlist& netlist, const Canvas& canvas);

  void add_macro(int macro, GridPos pos);
  void remove_macro(int macro, GridPos pos);

  bool empty(int net) const { return xs_[net].empty(); }
  std::optional<PinBox> box(int net) const;
  double net_hpwl(int net) const;
  /// Sum of net_hpwl in net order.
  double total() const;
  int num_nets() const { return static_cast<int>(xs_.size()); }
  const Canvas& canvas() const { return canvas_; }

 private:
  struct MacroPin {
    int net;
    double dx, dy;
  };

  Canvas canvas_;
  std::vector<std::vector<MacroPin>> macro_pins_;
  std::vector<std::multiset<double>> xs_;
  std::vector<std::multiset<double>> ys_;
};

/// HPWL(with `macro` at `pos`) - HPWL(without it), summed over the macro's
/// nets. `extremes` must not contain the macro's pins.
double hpwl_delta(const NetExtremes& extremes, const Connectivity& connectivity, int macro, GridPos pos);

/// min{x, W - x} + min{y, H - y} at the real coordinates of a grid point.
double regularity_of_grid(int gx, int gy, const Canvas& canvas);

struct RegularityValue {
  double total = 0.0;
  std::vector<double> per_macro;
  double mean() const { return per_macro.empty() ? 0.0 : total / static_cast<double>(per_macro.size()); }
};

RegularityValue regularity_total(const Canvas& canvas, const Placement& placement);
/// Throws UnplacedOwner if any macro is not placed.
RegularityValue regularity_total(const PlacementState& state);

/// One row of the metric CSV.
struct MetricRow {
  std::string instance;
  int step = 0;
  double hpwl = 0.0;
  double regularity_total = 0.0;
  double regularity_mean = 0.0;
};

void write_metrics_header(std::ostream& os);
void write_metrics_row(std::ostream& os, const MetricRow& row);

}  // namespace macroreg
