#include "macroreg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

#include "macroreg/error.hpp"

namespace macroreg {

namespace {

// Slack for float division of lengths that are exact multiples of a bin.
constexpr double kGridEps = 1e-9;

}  // namespace

Canvas::Canvas(double width, double height, int n_grid)
    : width_(width), height_(height), n_(n_grid), bin_w_(width / n_grid), bin_h_(height / n_grid) {
  if (n_grid < 2) throw Error(ErrorKind::InvalidConfig, fmt::format("grid must be >= 2, got {}", n_grid));
  if (!(width > 0.0) || !(height > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, fmt::format("canvas must be positive, got {} x {}", width, height));
  }
}

Span Canvas::span_of(double w, double h) const {
  const auto cells = [](double len, double bin) {
    return std::max(1, static_cast<int>(std::ceil(len / bin - kGridEps)));
  };
  return {cells(w, bin_w_), cells(h, bin_h_)};
}

CellRect Canvas::raster(double x, double y, double w, double h) const {
  if (!(w > 0.0) || !(h > 0.0)) return {};
  const auto lo = [&](double v, double bin) { return std::clamp(static_cast<int>(std::floor(v / bin + kGridEps)), 0, n_); };
  const auto hi = [&](double v, double bin) { return std::clamp(static_cast<int>(std::ceil(v / bin - kGridEps)), 0, n_); };
  return {lo(x, bin_w_), lo(y, bin_h_), hi(x + w, bin_w_), hi(y + h, bin_h_)};
}

Canvas canvas_for(const Netlist& netlist, int n_grid) {
  return Canvas(netlist.canvas_width, netlist.canvas_height, n_grid);
}

std::vector<GridPos> footprint(const Macro& macro, GridPos pos, const Canvas& canvas) {
  const Span s = canvas.span_of(macro.width, macro.height);
  if (pos.gx < 0 || pos.gy < 0 || pos.gx + s.cols > canvas.n() || pos.gy + s.rows > canvas.n()) {
    throw Error(ErrorKind::OutOfCanvas,
                fmt::format("{} at ({}, {}) spans {}x{} cells on a {}-grid", macro.id, pos.gx, pos.gy, s.cols,
                            s.rows, canvas.n()));
  }
  std::vector<GridPos> cells;
  cells.reserve(static_cast<std::size_t>(s.cols) * s.rows);
  for (int gy = pos.gy; gy < pos.gy + s.rows; ++gy) {
    for (int gx = pos.gx; gx < pos.gx + s.cols; ++gx) cells.push_back({gx, gy});
  }
  return cells;
}

PlacementState::PlacementState(const Netlist& netlist, const Canvas& canvas, Mode mode, Blocking rule)
    : canvas_(canvas),
      mode_(mode),
      rule_(rule),
      pos_(netlist.macros.size()),
      previous_(netlist.macros.size()),
      adjusted_(netlist.macros.size(), false),
      occupancy_(static_cast<std::size_t>(canvas.cells()), kFree) {
  ids_.reserve(netlist.macros.size());
  spans_.reserve(netlist.macros.size());
  for (const auto& m : netlist.macros) {
    ids_.push_back(m.id);
    spans_.push_back(canvas.span_of(m.width, m.height));
  }
  for (const auto& t : netlist.terminals) {
    const CellRect r = canvas.raster(t.x, t.y, t.width, t.height);
    for (int gy = r.y0; gy < r.y1; ++gy) {
      for (int gx = r.x0; gx < r.x1; ++gx) occupancy_[canvas.index({gx, gy})] = kTerminal;
    }
  }
}

int PlacementState::find(std::string_view id) const {
  const auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end()) throw Error(ErrorKind::UnknownMacro, std::string(id));
  return static_cast<int>(it - ids_.begin());
}

int PlacementState::checked(int macro) const {
  if (macro < 0 || macro >= num_macros()) throw Error(ErrorKind::UnknownMacro, fmt::format("index {}", macro));
  return macro;
}

bool PlacementState::blocking(int macro) const {
  return placed(macro) && (mode_ == Mode::Place || rule_ == Blocking::AllPlaced || adjusted_[macro]);
}

CellRect PlacementState::rect_of(int macro, GridPos pos) const {
  const Span s = spans_[macro];
  return {pos.gx, pos.gy, pos.gx + s.cols, pos.gy + s.rows};
}

bool PlacementState::fits(int macro, GridPos pos) const {
  const CellRect r = rect_of(checked(macro), pos);
  return r.x0 >= 0 && r.y0 >= 0 && r.x1 <= canvas_.n() && r.y1 <= canvas_.n();
}

bool PlacementState::can_drop(int macro, GridPos pos) const {
  if (!fits(macro, pos)) return false;
  const CellRect r = rect_of(macro, pos);
  for (int gy = r.y0; gy < r.y1; ++gy) {
    for (int gx = r.x0; gx < r.x1; ++gx) {
      if (occupancy_[canvas_.index({gx, gy})] != kFree) return false;
    }
  }
  return true;
}

void PlacementState::claim(int macro, GridPos pos, std::int32_t value) {
  const CellRect r = rect_of(macro, pos);
  for (int gy = r.y0; gy < r.y1; ++gy) {
    for (int gx = r.x0; gx < r.x1; ++gx) occupancy_[canvas_.index({gx, gy})] = value;
  }
}

void PlacementState::seat(const Placement& placement) {
  if (placement.size() != pos_.size()) {
    throw Error(ErrorKind::InvalidInitialPlacement,
                fmt::format("placement has {} entries for {} macros", placement.size(), pos_.size()));
  }
  for (int m = 0; m < num_macros(); ++m) {
    if (placed(m)) lift(m);
  }
  for (int m = 0; m < num_macros(); ++m) {
    if (!fits(m, placement[m])) {
      throw Error(ErrorKind::OutOfCanvas, fmt::format("{} at ({}, {})", ids_[m], placement[m].gx, placement[m].gy));
    }
    pos_[m] = placement[m];
    previous_[m].reset();
    adjusted_[m] = false;
    if (blocking(m)) claim(m, placement[m], m);
  }
}

void PlacementState::lift(int macro) {
  checked(macro);
  if (!placed(macro)) throw Error(ErrorKind::UnknownMacro, fmt::format("{} is not placed", ids_[macro]));
  if (blocking(macro)) claim(macro, *pos_[macro], kFree);
  previous_[macro] = pos_[macro];
  pos_[macro].reset();
}

void PlacementState::lift(std::string_view id) { lift(find(id)); }

void PlacementState::drop(int macro, GridPos pos) {
  checked(macro);
  if (placed(macro)) throw Error(ErrorKind::CellOccupied, fmt::format("{} is already placed", ids_[macro]));
  if (!fits(macro, pos)) {
    throw Error(ErrorKind::OutOfCanvas, fmt::format("{} at ({}, {})", ids_[macro], pos.gx, pos.gy));
  }
  if (!can_drop(macro, pos)) {
    throw Error(ErrorKind::CellOccupied, fmt::format("{} at ({}, {})", ids_[macro], pos.gx, pos.gy));
  }
  pos_[macro] = pos;
  adjusted_[macro] = true;
  claim(macro, pos, macro);
}

void PlacementState::drop(std::string_view id, GridPos pos) { drop(find(id), pos); }

Placement PlacementState::snapshot() const {
  Placement out(pos_.size());
  for (int m = 0; m < num_macros(); ++m) {
    if (pos_[m]) {
      out[m] = *pos_[m];
    } else if (previous_[m]) {
      out[m] = *previous_[m];
    } else {
      throw Error(ErrorKind::UnplacedOwner, ids_[m]);
    }
  }
  return out;
}

namespace {

struct Rect {
  double x0, y0, x1, y1;
  bool terminal;
};

bool overlap_free_rects(std::vector<Rect> rects, double tol) {
  std::sort(rects.begin(), rects.end(), [](const Rect& a, const Rect& b) { return a.x0 < b.x0; });
  for (std::size_t i = 0; i < rects.size(); ++i) {
    for (std::size_t j = i + 1; j < rects.size() && rects[j].x0 < rects[i].x1 - tol; ++j) {
      if (rects[i].terminal && rects[j].terminal) continue;
      const double ox = std::min(rects[i].x1, rects[j].x1) - std::max(rects[i].x0, rects[j].x0);
      const double oy = std::min(rects[i].y1, rects[j].y1) - std::max(rects[i].y0, rects[j].y0);
      if (ox > tol && oy > tol) return false;
    }
  }
  return true;
}

std::vector<Rect> terminal_rects(const Netlist& netlist) {
  std::vector<Rect> rects;
  for (const auto& t : netlist.terminals) {
    if (t.width > 0.0 && t.height > 0.0) rects.push_back({t.x, t.y, t.x + t.width, t.y + t.height, true});
  }
  return rects;
}

double tolerance(const Canvas& canvas) { return kGridEps * std::max(canvas.bin_w(), canvas.bin_h()); }

}  // namespace

bool overlap_free(const Netlist& netlist, const Canvas& canvas, const Placement& placement) {
  std::vector<Rect> rects = terminal_rects(netlist);
  for (std::size_t m = 0; m < placement.size(); ++m) {
    const double x = canvas.x_of(placement[m].gx);
    const double y = canvas.y_of(placement[m].gy);
    rects.push_back({x, y, x + netlist.macros[m].width, y + netlist.macros[m].height, false});
  }
  return overlap_free_rects(std::move(rects), tolerance(canvas));
}

bool overlap_free(const PlacementState& state, const Netlist& netlist) {
  const Canvas& canvas = state.canvas();
  std::vector<Rect> rects = terminal_rects(netlist);
  for (int m = 0; m < state.num_macros(); ++m) {
    if (!state.placed(m)) continue;
    const GridPos p = *state.position(m);
    const double x = canvas.x_of(p.gx);
    const double y = canvas.y_of(p.gy);
    rects.push_back({x, y, x + netlist.macros[m].width, y + netlist.macros[m].height, false});
  }
  return overlap_free_rects(std::move(rects), tolerance(canvas));
}

Placement snap_to_grid(const Canvas& canvas, std::span<const Point> positions) {
  Placement out;
  out.reserve(positions.size());
  for (const Point& p : positions) {
    out.push_back({static_cast<int>(std::lround(p.x / canvas.bin_w())),
                   static_cast<int>(std::lround(p.y / canvas.bin_h()))});
  }
  return out;
}

}  // namespace macroreg
