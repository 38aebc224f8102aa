#pragma once

#include <filesystem>
#include <iosfwd>

#include "macroreg/geometry.hpp"
#include "macroreg/netlist.hpp"

namespace macroreg {

struct RenderOptions {
  double pixels = 512.0;  // longer canvas side in SVG units
  bool grid_lines = false;
};

/// SVG 1.1 layout picture. y is flipped so the canvas origin sits at the
/// bottom-left. An empty placement draws the canvas and terminals only.
void render_svg(std::ostream& os, const Netlist& netlist, const Canvas& canvas, const Placement& placement,
                const RenderOptions& options = {});
void render_svg(const std::filesystem::path& path, const Netlist& netlist, const Canvas& canvas,
                const Placement& placement, const RenderOptions& options = {});

}  // namespace macroreg
