#include <doctest.h>

#include <algorithm>

#include "builders.hpp"
#include "macroreg/error.hpp"
#include "macroreg/geometry.hpp"
#include "macroreg/synthetic.hpp"
#include "oracles.hpp"

using namespace macroreg;

namespace {

bool same_cells(std::vector<GridPos> a, std::vector<GridPos> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

// Occupancy rebuilt from scratch: terminals, then blocking macros.
std::vector<std::int32_t> rebuild(const Netlist& nl, const PlacementState& s) {
  const Canvas& c = s.canvas();
  std::vector<std::int32_t> occ(c.cells(), PlacementState::kFree);
  for (const Terminal& t : nl.terminals) {
    const CellRect r = c.raster(t.x, t.y, t.width, t.height);
    for (int gy = r.y0; gy < r.y1; ++gy)
      for (int gx = r.x0; gx < r.x1; ++gx) occ[c.index({gx, gy})] = PlacementState::kTerminal;
  }
  for (int m = 0; m < s.num_macros(); ++m) {
    const bool blocks = s.mode() == Mode::Place || s.blocking_rule() == Blocking::AllPlaced || s.adjusted(m);
    if (!s.placed(m) || !blocks) continue;
    for (const GridPos& g : footprint(nl.macros[m], *s.position(m), c)) occ[c.index(g)] = m;
  }
  return occ;
}

}  // namespace

TEST_CASE("footprint uses ceiling arithmetic and stays on the grid") {
  const Canvas c(100, 100, 10);
  CHECK(same_cells(footprint({"a", 10, 10}, {0, 0}, c), {{0, 0}}));
  CHECK(same_cells(footprint({"a", 25, 10}, {3, 4}, c), {{3, 4}, {4, 4}, {5, 4}}));
  CHECK_THROWS_AS(footprint({"a", 100, 10}, {1, 0}, c), Error);
  try {
    footprint({"a", 100, 10}, {1, 0}, c);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutOfCanvas);
  }
}

TEST_CASE("canvas bins and index mapping") {
  const Canvas c(1000, 500, 16);
  CHECK(c.bin_w() == 62.5);
  CHECK(c.bin_h() == 31.25);
  CHECK(c.x_of(3) == 187.5);
  CHECK(c.pos(c.index({5, 7})) == GridPos{5, 7});
  CHECK(c.span_of(62.5, 31.26) == Span{1, 2});
}

TEST_CASE("drop, lift and occupancy") {
  const Netlist nl = build::NetlistBuilder(40, 40).macro("a", 20, 20).macro("b", 10, 10).done();
  const Canvas c(40, 40, 4);
  PlacementState s(nl, c, Mode::Place);

  SUBCASE("drop on an empty canvas claims the footprint") {
    s.drop("a", {0, 0});
    int claimed = 0;
    for (auto v : s.occupancy()) claimed += v == 0;
    CHECK(claimed == 4);
    CHECK(s.occupancy()[c.index({1, 1})] == 0);
  }
  SUBCASE("lift then drop at the same cell restores occupancy") {
    s.drop("a", {1, 1});
    const std::vector<std::int32_t> before(s.occupancy().begin(), s.occupancy().end());
    s.lift("a");
    s.drop("a", {1, 1});
    CHECK(std::equal(before.begin(), before.end(), s.occupancy().begin()));
  }
  SUBCASE("dropping onto a blocking macro fails, like the rectangle oracle says") {
    s.drop("a", {0, 0});
    CHECK_FALSE(s.can_drop(1, {1, 1}));
    CHECK_FALSE(oracle::overlap_free(nl, c, oracle::Partial{GridPos{0, 0}, GridPos{1, 1}}));
    try {
      s.drop("b", {1, 1});
      FAIL("expected CellOccupied");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::CellOccupied);
    }
    CHECK(s.can_drop(1, {2, 0}));
  }
  SUBCASE("unknown macro") {
    try {
      s.lift("nope");
      FAIL("expected UnknownMacro");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::UnknownMacro);
    }
  }
}

TEST_CASE("regulate mode: every other placed macro blocks by default") {
  const Netlist nl = build::NetlistBuilder(40, 40).macro("a", 10, 10).macro("b", 10, 10).done();
  const Canvas c(40, 40, 4);
  PlacementState s(nl, c, Mode::Regulate);
  s.seat({{0, 0}, {3, 3}});
  CHECK(s.blocking(0));
  s.lift(1);
  CHECK_FALSE(s.can_drop(1, {0, 0}));
  CHECK(s.can_drop(1, {3, 3}));
  s.drop(1, {2, 2});
  s.lift(0);
  CHECK(s.can_drop(0, {0, 0}));
  CHECK_FALSE(s.can_drop(0, {2, 2}));
}

TEST_CASE("regulate mode with AdjustedOnly: only adjusted macros block") {
  const Netlist nl = build::NetlistBuilder(40, 40).macro("a", 10, 10).macro("b", 10, 10).done();
  const Canvas c(40, 40, 4);
  PlacementState s(nl, c, Mode::Regulate, Blocking::AdjustedOnly);
  s.seat({{0, 0}, {3, 3}});
  CHECK_FALSE(s.blocking(0));
  s.lift(1);
  CHECK(s.can_drop(1, {0, 0}));  // a is not adjusted yet
  s.drop(1, {2, 2});
  CHECK(s.adjusted(1));
  s.lift(0);
  CHECK_FALSE(s.can_drop(0, {2, 2}));
  CHECK(s.previous(0) == GridPos{0, 0});
  CHECK(s.snapshot() == Placement{{0, 0}, {2, 2}});
}

TEST_CASE("random lift/drop cycles keep occupancy equal to a rebuild") {
  const Netlist nl = gen_synthetic({3, 6, 8});
  const Canvas c = canvas_for(nl, 16);
  for (auto [mode, rule] : {std::pair{Mode::Place, Blocking::AllPlaced}, std::pair{Mode::Regulate, Blocking::AllPlaced},
                            std::pair{Mode::Regulate, Blocking::AdjustedOnly}}) {
    Rng rng(11);
    auto start = oracle::random_legal(nl, 16, rng);
    REQUIRE(start);
    PlacementState s(nl, c, mode, rule);
    if (mode == Mode::Regulate) {
      s.seat(*start);
    } else {
      for (int m = 0; m < s.num_macros(); ++m) s.drop(m, (*start)[m]);
    }
    for (int cycle = 0; cycle < 10; ++cycle) {
      const int m = static_cast<int>(rng.below(s.num_macros()));
      s.lift(m);
      std::vector<GridPos> ok;
      for (int i = 0; i < c.cells(); ++i)
        if (s.can_drop(m, c.pos(i))) ok.push_back(c.pos(i));
      REQUIRE_FALSE(ok.empty());
      s.drop(m, ok[rng.below(ok.size())]);
      const auto occ = rebuild(nl, s);
      CHECK(std::equal(occ.begin(), occ.end(), s.occupancy().begin()));
    }
  }
}

TEST_CASE("overlap_free agrees with the pairwise oracle") {
  const Netlist two = build::NetlistBuilder(40, 40).macro("a", 10, 10).macro("b", 10, 10).done();
  const Canvas c(40, 40, 4);
  CHECK(overlap_free(two, c, {{0, 0}, {1, 0}}));
  CHECK_FALSE(overlap_free(two, c, {{0, 0}, {0, 0}}));

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Netlist nl = gen_synthetic({seed, 8, 6});
    Rng rng(seed);
    const auto p = oracle::random_legal(nl, 16, rng);
    REQUIRE(p);
    const Canvas cc = canvas_for(nl, 16);
    CHECK(overlap_free(nl, cc, *p));
    CHECK(oracle::overlap_free(nl, cc, *p));
    // Shove one macro onto another and both must notice.
    Placement bad = *p;
    bad[1] = bad[0];
    CHECK(overlap_free(nl, cc, bad) == oracle::overlap_free(nl, cc, bad));
    CHECK_FALSE(overlap_free(nl, cc, bad));
  }
}

TEST_CASE("snap_to_grid rounds to the nearest cell") {
  const Canvas c(100, 100, 10);
  const std::vector<Point> pts{{0, 0}, {14.9, 25.1}, {95, 0}};
  const Placement p = snap_to_grid(c, pts);
  CHECK(p[0] == GridPos{0, 0});
  CHECK(p[1] == GridPos{1, 3});
  CHECK(p[2].gx == 10);
}
