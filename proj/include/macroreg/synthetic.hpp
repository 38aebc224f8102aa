#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "macroreg/netlist.hpp"

namespace macroreg {

/// Small deterministic PRNG wrapper. Only the raw 64-bit engine output is
/// used so streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Uniform double in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

struct SyntheticSpec {
  std::uint64_t seed = 0;
  int k_macros = 1;
  int n_nets = 0;
  double canvas_width = 1000.0;
  double canvas_height = 1000.0;
};

/// Deterministic desk-scale instance.
///
/// Every length is a multiple of min(W, H) / 256 (at least 1 micron for
/// macro sides), so on a power-of-two-friendly canvas all pin coordinates
/// and their sums are exact in double precision. Total macro area stays at
/// or below half the canvas; each net joins 2-5 distinct owners. Throws
/// InfeasibleAreaBudget when k minimum-size macros already exceed that cap.
Netlist gen_synthetic(const SyntheticSpec& spec);

/// Every length and coordinate multiplied by `factor`.
Netlist scale_netlist(const Netlist& netlist, double factor);

/// Line-oriented plain-text dump used for golden tests.
void dump_text(std::ostream& os, const Netlist& netlist);
std::string dump_text(const Netlist& netlist);

/// FNV-1a over dump_text.
std::uint64_t structural_hash(const Netlist& netlist);

}  // namespace macroreg
