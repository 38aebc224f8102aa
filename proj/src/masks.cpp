#include "macroreg/masks.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "macroreg/error.hpp"

namespace macroreg {

std::string_view to_string(MaskKind kind) {
  switch (kind) {
    case MaskKind::Position: return "Position";
    case MaskKind::WireRaw: return "WireRaw";
    case MaskKind::WireNorm: return "WireNorm";
    case MaskKind::RegularRaw: return "RegularRaw";
    case MaskKind::RegularNorm: return "RegularNorm";
    case MaskKind::CanvasImage: return "CanvasImage";
  }
  return "Unknown";
}

std::optional<MaskKind> mask_kind_from(std::string_view name) {
  for (MaskKind k : {MaskKind::Position, MaskKind::WireRaw, MaskKind::WireNorm, MaskKind::RegularRaw,
                     MaskKind::RegularNorm, MaskKind::CanvasImage}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

Mask position_mask(const PlacementState& state, int macro) {
  const int n = state.canvas().n();
  const Span span = state.span(macro);
  Mask mask(n, MaskKind::Position);
  if (span.cols > n || span.rows > n) return mask;

  // Summed-area table of blocked cells, (n + 1) x (n + 1).
  const auto occ = state.occupancy();
  std::vector<int> sat(static_cast<std::size_t>(n + 1) * (n + 1), 0);
  const auto at = [&](int x, int y) -> int& { return sat[static_cast<std::size_t>(y) * (n + 1) + x]; };
  for (int gy = 0; gy < n; ++gy) {
    for (int gx = 0; gx < n; ++gx) {
      const int blocked = occ[static_cast<std::size_t>(gy) * n + gx] != PlacementState::kFree ? 1 : 0;
      at(gx + 1, gy + 1) = blocked + at(gx, gy + 1) + at(gx + 1, gy) - at(gx, gy);
    }
  }
  for (int gy = 0; gy + span.rows <= n; ++gy) {
    for (int gx = 0; gx + span.cols <= n; ++gx) {
      const int x1 = gx + span.cols;
      const int y1 = gy + span.rows;
      const int blocked = at(x1, y1) - at(gx, y1) - at(x1, gy) + at(gx, gy);
      if (blocked == 0) mask.at(gx, gy) = 1.0;
    }
  }
  return mask;
}

namespace {

// Per-axis HPWL change of every anchor column (or row) relative to the
// macro being absent. Net HPWL separates into an x and a y extent, so the
// 2-D mask is the outer sum of two 1-D profiles.
struct AxisProfiles {
  std::vector<double> dx;
  std::vector<double> dy;
};

AxisProfiles axis_profiles(const PlacementState& state, int macro, const NetExtremes& extremes,
                           const Connectivity& connectivity) {
  const Canvas& canvas = state.canvas();
  const int n = canvas.n();
  const Span span = state.span(macro);
  AxisProfiles out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (const auto& inc : connectivity.nets_of(macro)) {
    const auto rest = extremes.box(inc.net);
    const double rest_x = rest ? rest->xmax - rest->xmin : 0.0;
    const double rest_y = rest ? rest->ymax - rest->ymin : 0.0;
    for (int g = 0; g + span.cols <= n; ++g) {
      const double a = canvas.x_of(g);
      double lo = a + inc.min_dx;
      double hi = a + inc.max_dx;
      if (rest) {
        lo = std::min(lo, rest->xmin);
        hi = std::max(hi, rest->xmax);
      }
      out.dx[g] += (hi - lo) - rest_x;
    }
    for (int g = 0; g + span.rows <= n; ++g) {
      const double a = canvas.y_of(g);
      double lo = a + inc.min_dy;
      double hi = a + inc.max_dy;
      if (rest) {
        lo = std::min(lo, rest->ymin);
        hi = std::max(hi, rest->ymax);
      }
      out.dy[g] += (hi - lo) - rest_y;
    }
  }
  return out;
}

// Regulate mode measures change from where the macro was; Place mode from
// nothing.
std::optional<GridPos> reference_of(const PlacementState& state, int macro) {
  if (state.mode() != Mode::Regulate) return std::nullopt;
  return state.previous(macro);
}

}  // namespace

Mask wire_mask(const PlacementState& state, const Mask& position, int macro, const NetExtremes& extremes,
               const Connectivity& connectivity) {
  const int n = state.canvas().n();
  const AxisProfiles p = axis_profiles(state, macro, extremes, connectivity);
  const auto ref = reference_of(state, macro);
  Mask mask(n, MaskKind::WireRaw, Mask::kInvalid);
  for (int gy = 0; gy < n; ++gy) {
    for (int gx = 0; gx < n; ++gx) {
      if (position.at(gx, gy) == 0.0) continue;
      mask.at(gx, gy) = ref ? (p.dx[gx] - p.dx[ref->gx]) + (p.dy[gy] - p.dy[ref->gy]) : p.dx[gx] + p.dy[gy];
    }
  }
  return mask;
}

Mask regular_mask(const PlacementState& state, const Mask& position, int macro) {
  const Canvas& canvas = state.canvas();
  const int n = canvas.n();
  const auto ref = reference_of(state, macro);
  const double base = ref ? regularity_of_grid(ref->gx, ref->gy, canvas) : 0.0;
  Mask mask(n, MaskKind::RegularRaw, Mask::kInvalid);
  for (int gy = 0; gy < n; ++gy) {
    for (int gx = 0; gx < n; ++gx) {
      if (position.at(gx, gy) == 0.0) continue;
      mask.at(gx, gy) = regularity_of_grid(gx, gy, canvas) - base;
    }
  }
  return mask;
}

ValidRange valid_range(const Mask& mask) {
  ValidRange r;
  for (double v : mask.values) {
    if (!Mask::valid(v)) continue;
    if (r.count == 0) {
      r.min = r.max = v;
    } else {
      r.min = std::min(r.min, v);
      r.max = std::max(r.max, v);
    }
    ++r.count;
  }
  return r;
}

Mask normalize_mask(const Mask& mask, NormTarget target) {
  Mask out = mask;
  if (mask.kind == MaskKind::WireRaw) out.kind = MaskKind::WireNorm;
  if (mask.kind == MaskKind::RegularRaw) out.kind = MaskKind::RegularNorm;
  const ValidRange r = valid_range(mask);
  for (double& v : out.values) {
    if (!Mask::valid(v)) continue;
    if (target == NormTarget::SymmetricUnit) {
      const double scale = std::max(std::abs(r.min), std::abs(r.max));
      v = scale > 0.0 ? v / scale : 0.0;
    } else {
      v = r.max > r.min ? (v - r.min) / (r.max - r.min) : 0.0;
    }
  }
  return out;
}

Mask canvas_image(const PlacementState& state) {
  const int n = state.canvas().n();
  Mask mask(n, MaskKind::CanvasImage);
  const auto occ = state.occupancy();
  for (std::size_t i = 0; i < occ.size(); ++i) {
    if (occ[i] == PlacementState::kTerminal) mask.values[i] = 1.0;
  }
  for (int m = 0; m < state.num_macros(); ++m) {
    const auto p = state.position(m);
    if (!p) continue;
    const Span s = state.span(m);
    for (int gy = p->gy; gy < std::min(n, p->gy + s.rows); ++gy) {
      for (int gx = p->gx; gx < std::min(n, p->gx + s.cols); ++gx) mask.at(gx, gy) = 1.0;
    }
  }
  return mask;
}

void write_mask(std::ostream& os, const Mask& mask) {
  fmt::print(os, "{} {}\n", mask.n, to_string(mask.kind));
  for (int gy = 0; gy < mask.n; ++gy) {
    for (int gx = 0; gx < mask.n; ++gx) {
      const double v = mask.at(gx, gy);
      if (gx > 0) os << ' ';
      if (Mask::valid(v)) {
        fmt::print(os, "{}", v);
      } else {
        os << 'x';
      }
    }
    os << '\n';
  }
}

Mask read_mask(std::istream& is) {
  int n = 0;
  std::string kind;
  if (!(is >> n >> kind) || n < 1) throw Error(ErrorKind::MalformedLine, "mask header");
  const auto k = mask_kind_from(kind);
  if (!k) throw Error(ErrorKind::MalformedLine, fmt::format("unknown mask kind {}", kind));
  Mask mask(n, *k);
  std::string tok;
  for (double& v : mask.values) {
    if (!(is >> tok)) throw Error(ErrorKind::MalformedLine, "mask body truncated");
    if (tok == "x") {
      v = Mask::kInvalid;
    } else {
      try {
        v = std::stod(tok);
      } catch (const std::exception&) {
        throw Error(ErrorKind::MalformedLine, fmt::format("bad mask value {}", tok));
      }
    }
  }
  return mask;
}

}  // namespace macroreg
