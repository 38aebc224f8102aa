#include "macroreg/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "macroreg/error.hpp"

namespace macroreg {

Rng::Rng(std::uint64_t seed) : state_(seed) {}

// splitmix64
std::uint64_t Rng::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  // Lemire's multiply-shift with rejection.
  const std::uint64_t threshold = (0 - n) % n;
  while (true) {
    const unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
    if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
  }
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

namespace {

constexpr double kAreaCap = 0.5;
constexpr double kAreaTarget = 0.25;
constexpr int kQuantaPerSide = 64;
constexpr int kPinSubdivisions = 4;

}  // namespace

Netlist gen_synthetic(const SyntheticSpec& spec) {
  if (spec.k_macros < 1) throw Error(ErrorKind::InvalidConfig, "k_macros must be >= 1");
  if (spec.n_nets < 0) throw Error(ErrorKind::InvalidConfig, "n_nets must be >= 0");
  const double W = spec.canvas_width;
  const double H = spec.canvas_height;
  if (!(W > 0.0) || !(H > 0.0)) throw Error(ErrorKind::InvalidConfig, "canvas must be positive");

  const double q = std::min(W, H) / kQuantaPerSide;
  const double pin_q = q / kPinSubdivisions;
  const long min_side = std::max(2L, static_cast<long>(std::ceil(1.0 / q)));
  const long max_side = std::max(min_side, static_cast<long>(0.6 * kQuantaPerSide));
  const double canvas_area = W * H;
  const double min_area = static_cast<double>(min_side * min_side) * q * q;
  if (spec.k_macros * min_area > kAreaCap * canvas_area) {
    throw Error(ErrorKind::InfeasibleAreaBudget,
                fmt::format("{} macros of at least {} x {} exceed half of a {} x {} canvas", spec.k_macros,
                            min_side * q, min_side * q, W, H));
  }

  Rng rng(spec.seed);
  Netlist nl;
  nl.canvas_width = W;
  nl.canvas_height = H;

  // Side lengths in quanta.
  std::vector<std::pair<long, long>> sides;
  const double target = kAreaTarget * canvas_area / spec.k_macros;
  for (int i = 0; i < spec.k_macros; ++i) {
    const double aspect = std::exp(rng.uniform(std::log(0.5), std::log(2.0)));
    const double size = rng.uniform(0.7, 1.3);
    const double w = std::sqrt(target * aspect) * size;
    const double h = std::sqrt(target / aspect) * size;
    sides.emplace_back(std::clamp(std::lround(w / q), min_side, max_side),
                       std::clamp(std::lround(h / q), min_side, max_side));
  }
  const auto total_area = [&] {
    long a = 0;
    for (const auto& [w, h] : sides) a += w * h;
    return static_cast<double>(a) * q * q;
  };
  while (total_area() > kAreaCap * canvas_area) {
    auto largest = std::max_element(sides.begin(), sides.end(),
                                    [](const auto& a, const auto& b) { return a.first * a.second < b.first * b.second; });
    if (largest->first >= largest->second && largest->first > min_side) {
      --largest->first;
    } else {
      --largest->second;
    }
  }
  for (int i = 0; i < spec.k_macros; ++i) {
    nl.macros.push_back({fmt::format("m{}", i), sides[i].first * q, sides[i].second * q, true});
  }

  // Boundary pads act as fixed I/O for the nets.
  if (spec.n_nets > 0) {
    const int pads = 2 + spec.k_macros / 4;
    const long slots_x = static_cast<long>(std::floor(W / q)) - 1;
    const long slots_y = static_cast<long>(std::floor(H / q)) - 1;
    for (int i = 0; i < pads; ++i) {
      Terminal t{fmt::format("t{}", i), 0.0, 0.0, q, q};
      switch (rng.below(4)) {
        case 0: t.x = 0.0; t.y = rng.below(slots_y + 1) * q; break;
        case 1: t.x = slots_x * q; t.y = rng.below(slots_y + 1) * q; break;
        case 2: t.x = rng.below(slots_x + 1) * q; t.y = 0.0; break;
        default: t.x = rng.below(slots_x + 1) * q; t.y = slots_y * q; break;
      }
      nl.terminals.push_back(std::move(t));
    }
  }

  const int owners = nl.num_macros() + static_cast<int>(nl.terminals.size());
  std::vector<int> pool(owners);
  for (int e = 0; e < spec.n_nets; ++e) {
    const int degree = std::min<int>(owners, 2 + static_cast<int>(rng.below(4)));
    std::iota(pool.begin(), pool.end(), 0);
    Net net{fmt::format("n{}", e), {}};
    for (int j = 0; j < degree; ++j) {
      const int pick = j + static_cast<int>(rng.below(owners - j));
      std::swap(pool[j], pool[pick]);
      const int o = pool[j];
      Pin pin;
      if (o < nl.num_macros()) {
        pin.kind = OwnerKind::Macro;
        pin.owner = o;
      } else {
        pin.kind = OwnerKind::Terminal;
        pin.owner = o - nl.num_macros();
      }
      const auto steps = [&](double extent) { return static_cast<std::uint64_t>(std::lround(extent / pin_q)) + 1; };
      pin.dx = rng.below(steps(nl.owner_width(pin))) * pin_q;
      pin.dy = rng.below(steps(nl.owner_height(pin))) * pin_q;
      net.pins.push_back(pin);
    }
    nl.nets.push_back(std::move(net));
  }
  nl.initial.assign(nl.macros.size(), std::nullopt);
  nl.validate();
  return nl;
}

Netlist scale_netlist(const Netlist& netlist, double factor) {
  Netlist out = netlist;
  out.canvas_width *= factor;
  out.canvas_height *= factor;
  out.origin_x *= factor;
  out.origin_y *= factor;
  for (auto& m : out.macros) {
    m.width *= factor;
    m.height *= factor;
  }
  for (auto& t : out.terminals) {
    t.x *= factor;
    t.y *= factor;
    t.width *= factor;
    t.height *= factor;
  }
  for (auto& net : out.nets) {
    for (auto& pin : net.pins) {
      pin.dx *= factor;
      pin.dy *= factor;
    }
  }
  for (auto& p : out.initial) {
    if (p) *p = Point{p->x * factor, p->y * factor};
  }
  return out;
}

void dump_text(std::ostream& os, const Netlist& nl) {
  fmt::print(os, "canvas {} {} origin {} {}\n", nl.canvas_width, nl.canvas_height, nl.origin_x, nl.origin_y);
  for (int m = 0; m < nl.num_macros(); ++m) {
    const auto& mac = nl.macros[m];
    fmt::print(os, "macro {} {} {}", mac.id, mac.width, mac.height);
    if (m < static_cast<int>(nl.initial.size()) && nl.initial[m]) {
      fmt::print(os, " at {} {}", nl.initial[m]->x, nl.initial[m]->y);
    }
    os << '\n';
  }
  for (const auto& t : nl.terminals) fmt::print(os, "terminal {} {} {} {} {}\n", t.id, t.x, t.y, t.width, t.height);
  for (const auto& net : nl.nets) {
    fmt::print(os, "net {} {}\n", net.id, net.pins.size());
    for (const auto& pin : net.pins) fmt::print(os, "  pin {} {} {}\n", nl.owner_id(pin), pin.dx, pin.dy);
  }
}

std::string dump_text(const Netlist& netlist) {
  std::ostringstream ss;
  dump_text(ss, netlist);
  return ss.str();
}

std::uint64_t structural_hash(const Netlist& netlist) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump_text(netlist)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace macroreg
