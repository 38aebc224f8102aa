#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace macroreg {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

/// A movable macro block. Sizes are in microns.
struct Macro {
  std::string id;
  double width = 0.0;
  double height = 0.0;
  bool movable = true;
  bool operator==(const Macro&) const = default;
};

/// A fixed rectangle (I/O pad or pre-placed block) at an absolute position.
/// `x`, `y` are the left-bottom corner relative to the canvas origin.
struct Terminal {
  std::string id;
  double x = 0.0;
  double y = 0.0;
  double width = 0.0;
  double height = 0.0;
  bool operator==(const Terminal&) const = default;
};

enum class OwnerKind : std::uint8_t { Macro, Terminal };

/// Pin offsets are stored relative to the owner's left-bottom corner.
/// Bookshelf files carry center-relative offsets; the parser and writer
/// convert at the boundary.
struct Pin {
  OwnerKind kind = OwnerKind::Macro;
  int owner = 0;
  double dx = 0.0;
  double dy = 0.0;
  bool operator==(const Pin&) const = default;
};

struct Net {
  std::string id;
  std::vector<Pin> pins;
  bool operator==(const Net&) const = default;
};

struct Netlist {
  std::vector<Macro> macros;
  std::vector<Terminal> terminals;
  std::vector<Net> nets;
  double canvas_width = 0.0;
  double canvas_height = 0.0;
  // Bookshelf coordinates of the canvas' left-bottom corner. Everything
  // stored here is relative to it.
  double origin_x = 0.0;
  double origin_y = 0.0;
  // Initial left-bottom positions of macros (from a .pl), if any.
  std::vector<std::optional<Point>> initial;

  bool operator==(const Netlist&) const = default;

  int num_macros() const { return static_cast<int>(macros.size()); }

  /// Index of the macro named `id`, or -1.
  int find_macro(std::string_view id) const;

  std::string_view owner_id(const Pin& pin) const;
  double owner_width(const Pin& pin) const;
  double owner_height(const Pin& pin) const;

  /// Checks every structural invariant; throws Error(InvalidNetlist) on the
  /// first violation.
  void validate() const;
};

}  // namespace macroreg
