#pragma once

// Brute-force reference computations shared by the unit and acceptance
// tests. Nothing here calls the incremental machinery under test.

#include <algorithm>
#include <optional>
#include <vector>

#include "macroreg/env.hpp"
#include "macroreg/synthetic.hpp"

namespace oracle {

using namespace macroreg;

using Partial = std::vector<std::optional<GridPos>>;

inline Partial partial_of(const Placement& p) { return Partial(p.begin(), p.end()); }

// Sum over nets of the bounding-box half-perimeter of the placed pins.
inline double hpwl(const Netlist& nl, const Canvas& canvas, const Partial& pos) {
  double total = 0.0;
  for (const Net& net : nl.nets) {
    bool any = false;
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
    for (const Pin& pin : net.pins) {
      double x, y;
      if (pin.kind == OwnerKind::Terminal) {
        x = nl.terminals[pin.owner].x + pin.dx;
        y = nl.terminals[pin.owner].y + pin.dy;
      } else {
        if (!pos[pin.owner]) continue;
        x = canvas.x_of(pos[pin.owner]->gx) + pin.dx;
        y = canvas.y_of(pos[pin.owner]->gy) + pin.dy;
      }
      if (!any) {
        x0 = x1 = x;
        y0 = y1 = y;
        any = true;
      }
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
    if (any) total += (x1 - x0) + (y1 - y0);
  }
  return total;
}

inline double hpwl(const Netlist& nl, const Canvas& canvas, const Placement& p) {
  return hpwl(nl, canvas, partial_of(p));
}

inline double regularity(const Canvas& canvas, const Placement& p) {
  double total = 0.0;
  for (const GridPos& g : p) {
    const double x = g.gx * canvas.bin_w();
    const double y = g.gy * canvas.bin_h();
    total += std::min(x, canvas.width() - x) + std::min(y, canvas.height() - y);
  }
  return total;
}

struct Rect {
  double x0, y0, x1, y1;
};

inline bool intersects(const Rect& a, const Rect& b) {
  return std::min(a.x1, b.x1) > std::max(a.x0, b.x0) && std::min(a.y1, b.y1) > std::max(a.y0, b.y0);
}

// Pairwise O(k^2) check over real macro rectangles (and macro vs terminal),
// plus containment in the canvas.
inline bool overlap_free(const Netlist& nl, const Canvas& canvas, const Partial& pos) {
  std::vector<Rect> macros;
  for (std::size_t m = 0; m < pos.size(); ++m) {
    if (!pos[m]) continue;
    const double x = canvas.x_of(pos[m]->gx), y = canvas.y_of(pos[m]->gy);
    const Rect r{x, y, x + nl.macros[m].width, y + nl.macros[m].height};
    if (r.x0 < 0 || r.y0 < 0 || r.x1 > canvas.width() || r.y1 > canvas.height()) return false;
    macros.push_back(r);
  }
  for (std::size_t i = 0; i < macros.size(); ++i) {
    for (std::size_t j = i + 1; j < macros.size(); ++j) {
      if (intersects(macros[i], macros[j])) return false;
    }
    for (const Terminal& t : nl.terminals) {
      if (intersects(macros[i], {t.x, t.y, t.x + t.width, t.y + t.height})) return false;
    }
  }
  return true;
}

inline bool overlap_free(const Netlist& nl, const Canvas& canvas, const Placement& p) {
  return overlap_free(nl, canvas, partial_of(p));
}

// Uniformly random valid cell of the current observation, or -1.
inline int random_valid(const Observation& obs, Rng& rng) {
  std::vector<int> cells;
  for (int i = 0; i < static_cast<int>(obs.position.values.size()); ++i) {
    if (obs.position.values[i] != 0.0) cells.push_back(i);
  }
  if (cells.empty()) return -1;
  return cells[rng.below(cells.size())];
}

// Random legal complete placement built by a Place-mode episode with random
// valid actions; retries on dead ends.
inline std::optional<Placement> random_legal(const Netlist& nl, int n_grid, Rng& rng, int attempts = 100) {
  EnvConfig cfg;
  cfg.mode = Mode::Place;
  cfg.n_grid = n_grid;
  Env env(nl, cfg);
  for (int a = 0; a < attempts; ++a) {
    env.reset();
    bool stuck = false;
    while (!env.done()) {
      const int cell = random_valid(env.observation(), rng);
      if (cell < 0) {
        stuck = true;
        break;
      }
      env.step(cell);
    }
    if (!stuck) return env.placement();
  }
  return std::nullopt;
}

}  // namespace oracle
