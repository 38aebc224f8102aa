#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "macroreg/netlist.hpp"

namespace macroreg {

/// Grid coordinates of a macro's left-bottom corner.
struct GridPos {
  int gx = 0;
  int gy = 0;
  auto operator<=>(const GridPos&) const = default;
};

/// Number of grid cells a macro claims along each axis.
struct Span {
  int cols = 1;
  int rows = 1;
  bool operator==(const Span&) const = default;
};

/// Half-open cell rectangle [x0, x1) x [y0, y1).
struct CellRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;
  bool empty() const { return x0 >= x1 || y0 >= y1; }
};

/// The continuous canvas discretized into an N x N grid.
class Canvas {
 public:
  static constexpr int kDefaultGrid = 224;

  Canvas(double width, double height, int n_grid = kDefaultGrid);

  double width() const { return width_; }
  double height() const { return height_; }
  int n() const { return n_; }
  int cells() const { return n_ * n_; }
  double bin_w() const { return bin_w_; }
  double bin_h() const { return bin_h_; }

  // Real coordinates of a grid line. Every anchor in the library goes
  // through these two so that incremental and from-scratch metrics agree
  // bit for bit.
  double x_of(int gx) const { return gx * bin_w_; }
  double y_of(int gy) const { return gy * bin_h_; }

  int index(GridPos p) const { return p.gy * n_ + p.gx; }
  GridPos pos(int index) const { return {index % n_, index / n_}; }
  bool contains(GridPos p) const { return p.gx >= 0 && p.gy >= 0 && p.gx < n_ && p.gy < n_; }

  /// Cells covered by a w x h block; partially covered bins count (ceil).
  Span span_of(double w, double h) const;

  /// Cells touched by a real rectangle with positive area, clipped to the grid.
  CellRect raster(double x, double y, double w, double h) const;

  /// Canvas with every length multiplied by `factor`.
  Canvas scaled(double factor) const { return Canvas(width_ * factor, height_ * factor, n_); }

  bool operator==(const Canvas&) const = default;

 private:
  double width_;
  double height_;
  int n_;
  double bin_w_;
  double bin_h_;
};

Canvas canvas_for(const Netlist& netlist, int n_grid = Canvas::kDefaultGrid);

/// A complete assignment of every macro to a grid cell, indexed like
/// Netlist::macros.
using Placement = std::vector<GridPos>;

enum class Mode { Place, Regulate };

/// Which placed macros block cells in Regulate mode. AllPlaced keeps every
/// other macro solid, so a lifted macro can always return to where it was.
/// AdjustedOnly frees the cells of macros not yet moved this episode; a
/// layout can then overlap until those macros are moved too.
enum class Blocking { AllPlaced, AdjustedOnly };

/// Footprint cells of `macro` anchored at `pos`; throws OutOfCanvas if it
/// leaves the grid.
std::vector<GridPos> footprint(const Macro& macro, GridPos pos, const Canvas& canvas);

/// Grid state of an episode.
///
/// Occupancy holds terminals plus every macro that is *blocking* under the
/// active mode: in Place mode every placed macro blocks. In Regulate mode
/// that depends on the Blocking rule; under AdjustedOnly unadjusted macros
/// stay placed (they count for wirelength and the canvas image) but their
/// cells remain available.
class PlacementState {
 public:
  static constexpr std::int32_t kFree = -1;
  static constexpr std::int32_t kTerminal = -2;

  PlacementState(const Netlist& netlist, const Canvas& canvas, Mode mode, Blocking rule = Blocking::AllPlaced);

  const Canvas& canvas() const { return canvas_; }
  Mode mode() const { return mode_; }
  Blocking blocking_rule() const { return rule_; }
  int num_macros() const { return static_cast<int>(spans_.size()); }
  Span span(int macro) const { return spans_[macro]; }
  const std::string& id(int macro) const { return ids_[macro]; }
  int find(std::string_view id) const;

  bool placed(int macro) const { return pos_[macro].has_value(); }
  bool adjusted(int macro) const { return adjusted_[macro]; }
  bool blocking(int macro) const;
  std::optional<GridPos> position(int macro) const { return pos_[macro]; }
  /// Last position a lifted macro occupied, if it was ever placed.
  std::optional<GridPos> previous(int macro) const { return previous_[macro]; }

  /// Regulate mode: seat a full starting layout; every macro is placed and
  /// unadjusted. Throws OutOfCanvas if any footprint leaves the grid.
  void seat(const Placement& placement);

  /// Releases the macro's cells and remembers its position as "previous".
  void lift(int macro);
  void lift(std::string_view id);

  /// Places the macro; marks it adjusted. Throws OutOfCanvas or CellOccupied.
  void drop(int macro, GridPos pos);
  void drop(std::string_view id, GridPos pos);

  bool fits(int macro, GridPos pos) const;
  /// True iff the footprint fits and touches no blocking cell.
  bool can_drop(int macro, GridPos pos) const;

  /// N*N cell claims, row-major by gy: kFree, kTerminal, or a macro index.
  std::span<const std::int32_t> occupancy() const { return occupancy_; }

  /// Current positions, substituting `previous` for lifted macros. Throws
  /// UnplacedOwner for a macro that was never placed.
  Placement snapshot() const;

 private:
  int checked(int macro) const;
  CellRect rect_of(int macro, GridPos pos) const;
  void claim(int macro, GridPos pos, std::int32_t value);

  Canvas canvas_;
  Mode mode_;
  Blocking rule_;
  std::vector<std::string> ids_;
  std::vector<Span> spans_;
  std::vector<std::optional<GridPos>> pos_;
  std::vector<std::optional<GridPos>> previous_;
  std::vector<bool> adjusted_;
  std::vector<std::int32_t> occupancy_;
};

/// True iff no two macro rectangles intersect with positive area and no
/// macro intersects a terminal. Only entries of `placement` are considered.
bool overlap_free(const Netlist& netlist, const Canvas& canvas, const Placement& placement);

/// Same check over the macros currently placed in `state`.
bool overlap_free(const PlacementState& state, const Netlist& netlist);

/// Snap real left-bottom positions to the nearest grid cell.
Placement snap_to_grid(const Canvas& canvas, std::span<const Point> positions);

}  // namespace macroreg
