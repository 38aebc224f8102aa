#pragma once

#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "macroreg/geometry.hpp"
#include "macroreg/netlist.hpp"

namespace macroreg::bookshelf {

struct ParseOptions {
  // Treat fixed nodes taller than a placement row as movable macros. Some
  // academic suites ship their macros as terminals.
  bool free_fixed_macros = false;
};

/// Reads an .aux bundle (.nodes/.nets/.pl, optional .scl).
///
/// Movable nodes no taller than the smallest .scl row are standard cells and
/// are dropped, along with their pins; nets left with fewer than two pins are
/// removed. Without an .scl every movable node is a macro and the canvas is
/// the bounding box of the origin and every positioned node.
///
/// Throws MissingFile, MalformedLine (message carries file:line) or
/// UnresolvedPinOwner.
Netlist parse_bundle(const std::filesystem::path& aux_path, const ParseOptions& options = {});

/// Reads macro positions from a .pl file, relative to the netlist's canvas
/// origin. Entries for unknown names and terminals are ignored.
std::vector<std::optional<Point>> read_pl(const Netlist& netlist, const std::filesystem::path& path);

/// Writes "name x y : N" for every macro (grid anchor scaled to microns)
/// and "name x y : N /FIXED" for every terminal.
void write_pl(const Netlist& netlist, const Canvas& canvas, const Placement& placement,
              const std::filesystem::path& path);

/// Writes `<dir>/<name>.{aux,nodes,nets,pl,scl}`. Macro lines in the .pl
/// come from `netlist.initial`; macros without one are omitted.
/// Returns the path of the .aux file.
std::filesystem::path write_bundle(const Netlist& netlist, const std::filesystem::path& dir, std::string_view name);

}  // namespace macroreg::bookshelf
