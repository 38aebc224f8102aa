#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "macroreg/geometry.hpp"
#include "macroreg/metrics.hpp"

namespace macroreg {

enum class MaskKind { Position, WireRaw, WireNorm, RegularRaw, RegularNorm, CanvasImage };

std::string_view to_string(MaskKind kind);
std::optional<MaskKind> mask_kind_from(std::string_view name);

/// An N x N scalar field, row-major by gy (index = gy * N + gx).
struct Mask {
  /// Marks position-invalid cells of wire/regular masks.
  static constexpr double kInvalid = std::numeric_limits<double>::max();

  int n = 0;
  MaskKind kind = MaskKind::Position;
  std::vector<double> values;

  Mask() = default;
  Mask(int n_grid, MaskKind k, double fill = 0.0)
      : n(n_grid), kind(k), values(static_cast<std::size_t>(n_grid) * n_grid, fill) {}

  double& at(int gx, int gy) { return values[static_cast<std::size_t>(gy) * n + gx]; }
  double at(int gx, int gy) const { return values[static_cast<std::size_t>(gy) * n + gx]; }
  static bool valid(double v) { return v != kInvalid; }

  bool operator==(const Mask&) const = default;
};

/// 1 where the (lifted) macro may be dropped, else 0. The blocking set comes
/// from the state's mode: see PlacementState.
Mask position_mask(const PlacementState& state, int macro);

/// HPWL change per valid cell. In Place mode it is relative to the macro
/// being absent; in Regulate mode relative to its previous position, so the
/// null move scores exactly 0 and improvements are negative.
Mask wire_mask(const PlacementState& state, const Mask& position, int macro, const NetExtremes& extremes,
               const Connectivity& connectivity);

/// Regularity change per valid cell relative to the previous position (or
/// to 0 when the macro has none).
Mask regular_mask(const PlacementState& state, const Mask& position, int macro);

enum class NormTarget { SymmetricUnit, Unit };

/// SymmetricUnit: v / max|v|. Unit: (v - min) / (max - min). Degenerate
/// masks map to 0; invalid cells are left untouched.
Mask normalize_mask(const Mask& mask, NormTarget target);

/// 1 on every cell covered by a placed macro or a terminal.
Mask canvas_image(const PlacementState& state);

struct ValidRange {
  double min = 0.0;
  double max = 0.0;
  int count = 0;
};
/// Min and max over valid cells of a raw mask (count 0 if none).
ValidRange valid_range(const Mask& mask);

/// Text form: a header line "N kind" then N rows, gy = 0 first. Invalid
/// cells are written as "x".
void write_mask(std::ostream& os, const Mask& mask);
Mask read_mask(std::istream& is);

}  // namespace macroreg
