#include "macroreg/render.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include <fmt/ostream.h>

#include "macroreg/error.hpp"

namespace macroreg {

void render_svg(std::ostream& os, const Netlist& netlist, const Canvas& canvas, const Placement& placement,
                const RenderOptions& options) {
  const double k = options.pixels / std::max(canvas.width(), canvas.height());
  const double w = canvas.width() * k;
  const double h = canvas.height() * k;
  // Canvas-relative rectangle with the y axis flipped.
  const auto rect = [&](double x, double y, double rw, double rh, const char* cls, std::string_view id) {
    fmt::print(os, R"(<rect class="{}" x="{}" y="{}" width="{}" height="{}"><title>{}</title></rect>)", cls, x * k,
               h - (y + rh) * k, rw * k, rh * k, id);
    os << '\n';
  };

  os << R"(<?xml version="1.0" encoding="UTF-8"?>)" << '\n';
  fmt::print(os,
             R"(<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">)",
             w, h, w, h);
  os << '\n'
     << "<style>.canvas{fill:#ffffff;stroke:#000000}.terminal{fill:#7f7f7f}"
        ".macro{fill:#4a7ebb;fill-opacity:0.8;stroke:#1f3d5c}.grid{stroke:#d0d0d0;stroke-width:0.5}</style>\n";
  fmt::print(os, R"(<rect class="canvas" x="0" y="0" width="{}" height="{}"/>)", w, h);
  os << '\n';

  if (options.grid_lines) {
    for (int i = 1; i < canvas.n(); ++i) {
      const double gx = canvas.x_of(i) * k;
      const double gy = h - canvas.y_of(i) * k;
      fmt::print(os, R"(<line class="grid" x1="{}" y1="0" x2="{}" y2="{}"/>)", gx, gx, h);
      os << '\n';
      fmt::print(os, R"(<line class="grid" x1="0" y1="{}" x2="{}" y2="{}"/>)", gy, w, gy);
      os << '\n';
    }
  }
  for (const Terminal& t : netlist.terminals) {
    rect(t.x, t.y, t.width, t.height, "terminal", t.id);
  }
  for (std::size_t m = 0; m < placement.size() && m < netlist.macros.size(); ++m) {
    const Macro& mac = netlist.macros[m];
    rect(canvas.x_of(placement[m].gx), canvas.y_of(placement[m].gy), mac.width, mac.height, "macro", mac.id);
  }
  os << "</svg>\n";
}

void render_svg(const std::filesystem::path& path, const Netlist& netlist, const Canvas& canvas,
                const Placement& placement, const RenderOptions& options) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
  render_svg(os, netlist, canvas, placement, options);
  if (!os) throw Error(ErrorKind::Io, "short write to " + path.string());
}

}  // namespace macroreg
