#include "macroreg/metrics.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "macroreg/error.hpp"

namespace macroreg {

double half_perimeter(std::span<const Point> points) {
  if (points.size() < 2) return 0.0;
  PinBox box{points[0].x, points[0].x, points[0].y, points[0].y};
  for (const Point& p : points.subspan(1)) {
    box.xmin = std::min(box.xmin, p.x);
    box.xmax = std::max(box.xmax, p.x);
    box.ymin = std::min(box.ymin, p.y);
    box.ymax = std::max(box.ymax, p.y);
  }
  return box.half_perimeter();
}

namespace {

template <class AnchorOf>
double net_hpwl_with(const Net& net, AnchorOf&& anchor_of) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  PinBox box{inf, -inf, inf, -inf};
  for (const Pin& pin : net.pins) {
    const Point p = pin_position(anchor_of(pin), pin);
    box.xmin = std::min(box.xmin, p.x);
    box.xmax = std::max(box.xmax, p.x);
    box.ymin = std::min(box.ymin, p.y);
    box.ymax = std::max(box.ymax, p.y);
  }
  return net.pins.empty() ? 0.0 : box.half_perimeter();
}

Point terminal_anchor(const Netlist& netlist, const Pin& pin) {
  const Terminal& t = netlist.terminals[pin.owner];
  return {t.x, t.y};
}

}  // namespace

double hpwl_net(const Netlist& netlist, const Net& net, const Canvas& canvas, const Placement& placement) {
  return net_hpwl_with(net, [&](const Pin& pin) -> Point {
    if (pin.kind == OwnerKind::Terminal) return terminal_anchor(netlist, pin);
    if (pin.owner >= static_cast<int>(placement.size())) {
      throw Error(ErrorKind::UnplacedOwner, netlist.macros[pin.owner].id);
    }
    const GridPos g = placement[pin.owner];
    return {canvas.x_of(g.gx), canvas.y_of(g.gy)};
  });
}

double hpwl_net(const Netlist& netlist, const Net& net, const PlacementState& state) {
  const Canvas& canvas = state.canvas();
  return net_hpwl_with(net, [&](const Pin& pin) -> Point {
    if (pin.kind == OwnerKind::Terminal) return terminal_anchor(netlist, pin);
    const auto g = state.position(pin.owner);
    if (!g) throw Error(ErrorKind::UnplacedOwner, netlist.macros[pin.owner].id);
    return {canvas.x_of(g->gx), canvas.y_of(g->gy)};
  });
}

double hpwl_total(const Netlist& netlist, const Canvas& canvas, const Placement& placement) {
  double total = 0.0;
  for (const Net& net : netlist.nets) total += hpwl_net(netlist, net, canvas, placement);
  return total;
}

double hpwl_total(const Netlist& netlist, const PlacementState& state) {
  double total = 0.0;
  for (const Net& net : netlist.nets) total += hpwl_net(netlist, net, state);
  return total;
}

Connectivity::Connectivity(const Netlist& netlist) : incidence_(netlist.macros.size()) {
  for (int e = 0; e < static_cast<int>(netlist.nets.size()); ++e) {
    for (const Pin& pin : netlist.nets[e].pins) {
      if (pin.kind != OwnerKind::Macro) continue;
      auto& list = incidence_[pin.owner];
      if (list.empty() || list.back().net != e) {
        list.push_back({e, pin.dx, pin.dx, pin.dy, pin.dy});
      } else {
        Incidence& inc = list.back();
        inc.min_dx = std::min(inc.min_dx, pin.dx);
        inc.max_dx = std::max(inc.max_dx, pin.dx);
        inc.min_dy = std::min(inc.min_dy, pin.dy);
        inc.max_dy = std::max(inc.max_dy, pin.dy);
      }
    }
  }
}

NetExtremes::NetExtremes(const Netlist& netlist, const Canvas& canvas)
    : canvas_(canvas), macro_pins_(netlist.macros.size()), xs_(netlist.nets.size()), ys_(netlist.nets.size()) {
  for (int e = 0; e < static_cast<int>(netlist.nets.size()); ++e) {
    for (const Pin& pin : netlist.nets[e].pins) {
      if (pin.kind == OwnerKind::Macro) {
        macro_pins_[pin.owner].push_back({e, pin.dx, pin.dy});
      } else {
        const Point p = pin_position(terminal_anchor(netlist, pin), pin);
        xs_[e].insert(p.x);
        ys_[e].insert(p.y);
      }
    }
  }
}

void NetExtremes::add_macro(int macro, GridPos pos) {
  const Point anchor{canvas_.x_of(pos.gx), canvas_.y_of(pos.gy)};
  for (const MacroPin& mp : macro_pins_[macro]) {
    xs_[mp.net].insert(anchor.x + mp.dx);
    ys_[mp.net].insert(anchor.y + mp.dy);
  }
}

void NetExtremes::remove_macro(int macro, GridPos pos) {
  const Point anchor{canvas_.x_of(pos.gx), canvas_.y_of(pos.gy)};
  for (const MacroPin& mp : macro_pins_[macro]) {
    auto ix = xs_[mp.net].find(anchor.x + mp.dx);
    auto iy = ys_[mp.net].find(anchor.y + mp.dy);
    if (ix == xs_[mp.net].end() || iy == ys_[mp.net].end()) {
      throw Error(ErrorKind::UnplacedOwner, fmt::format("macro {} has no pins at ({}, {})", macro, pos.gx, pos.gy));
    }
    xs_[mp.net].erase(ix);
    ys_[mp.net].erase(iy);
  }
}

std::optional<PinBox> NetExtremes::box(int net) const {
  if (xs_[net].empty()) return std::nullopt;
  return PinBox{*xs_[net].begin(), *xs_[net].rbegin(), *ys_[net].begin(), *ys_[net].rbegin()};
}

double NetExtremes::net_hpwl(int net) const {
  const auto b = box(net);
  return b ? b->half_perimeter() : 0.0;
}

double NetExtremes::total() const {
  double total = 0.0;
  for (int e = 0; e < num_nets(); ++e) total += net_hpwl(e);
  return total;
}

double hpwl_delta(const NetExtremes& extremes, const Connectivity& connectivity, int macro, GridPos pos) {
  const Canvas& canvas = extremes.canvas();
  const double ax = canvas.x_of(pos.gx);
  const double ay = canvas.y_of(pos.gy);
  double delta = 0.0;
  for (const auto& inc : connectivity.nets_of(macro)) {
    PinBox moved{ax + inc.min_dx, ax + inc.max_dx, ay + inc.min_dy, ay + inc.max_dy};
    double before = 0.0;
    if (const auto rest = extremes.box(inc.net)) {
      before = rest->half_perimeter();
      moved.xmin = std::min(moved.xmin, rest->xmin);
      moved.xmax = std::max(moved.xmax, rest->xmax);
      moved.ymin = std::min(moved.ymin, rest->ymin);
      moved.ymax = std::max(moved.ymax, rest->ymax);
    }
    delta += moved.half_perimeter() - before;
  }
  return delta;
}

double regularity_of_grid(int gx, int gy, const Canvas& canvas) {
  const double x = canvas.x_of(gx);
  const double y = canvas.y_of(gy);
  return std::min(x, canvas.width() - x) + std::min(y, canvas.height() - y);
}

RegularityValue regularity_total(const Canvas& canvas, const Placement& placement) {
  RegularityValue out;
  out.per_macro.reserve(placement.size());
  for (const GridPos& g : placement) {
    out.per_macro.push_back(regularity_of_grid(g.gx, g.gy, canvas));
    out.total += out.per_macro.back();
  }
  return out;
}

RegularityValue regularity_total(const PlacementState& state) {
  Placement placement;
  placement.reserve(state.num_macros());
  for (int m = 0; m < state.num_macros(); ++m) {
    const auto g = state.position(m);
    if (!g) throw Error(ErrorKind::UnplacedOwner, state.id(m));
    placement.push_back(*g);
  }
  return regularity_total(state.canvas(), placement);
}

void write_metrics_header(std::ostream& os) { os << "instance,step,hpwl,regularity_total,regularity_mean\n"; }

void write_metrics_row(std::ostream& os, const MetricRow& row) {
  fmt::print(os, "{},{},{},{},{}\n", row.instance, row.step, row.hpwl, row.regularity_total, row.regularity_mean);
}

}  // namespace macroreg
