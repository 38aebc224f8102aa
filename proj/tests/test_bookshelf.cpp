#include <doctest.h>

#include <fstream>
#include <functional>
#include <sstream>

#include "macroreg/bookshelf.hpp"
#include "macroreg/error.hpp"
#include "macroreg/synthetic.hpp"

using namespace macroreg;
namespace fs = std::filesystem;

namespace {

const fs::path kData = MACROREG_TEST_DATA;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("macroreg_test_bookshelf_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

// Minimal bundle without .scl.
fs::path bundle(const fs::path& dir, const std::string& nodes, const std::string& nets, const std::string& pl) {
  write(dir / "b.aux", "RowBasedPlacement : b.nodes b.nets b.pl\n");
  write(dir / "b.nodes", nodes);
  write(dir / "b.nets", nets);
  write(dir / "b.pl", pl);
  return dir / "b.aux";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("hand-written fixture") {
  const Netlist nl = bookshelf::parse_bundle(kData / "tiny.aux");
  CHECK(nl.canvas_width == 100.0);
  CHECK(nl.canvas_height == 100.0);
  CHECK(nl.origin_x == 100.0);
  CHECK(nl.origin_y == 10.0);
  REQUIRE(nl.macros.size() == 2);  // c0 and c1 are standard cells
  CHECK(nl.macros[0].id == "ram0");
  CHECK(nl.terminals.size() == 3);
  REQUIRE(nl.nets.size() == 3);  // n2 only touched standard cells
  CHECK(nl.nets[1].id == "n1");
  CHECK(nl.nets[1].pins.size() == 2);
  // ram0 is 40 x 30; center offset (10, 5) is (30, 20) from its corner.
  CHECK(nl.nets[0].pins[0].dx == 30.0);
  CHECK(nl.nets[0].pins[0].dy == 20.0);
  REQUIRE(nl.initial.size() == 2);
  CHECK(nl.initial[0] == Point{10, 10});
  CHECK(nl.initial[1] == Point{60, 50});
}

TEST_CASE("fixed tall nodes can be freed as macros") {
  const Netlist nl = bookshelf::parse_bundle(kData / "tiny.aux", {true});
  CHECK(nl.macros.size() == 3);
  CHECK(nl.terminals.size() == 2);
}

TEST_CASE("field counts of a two-node bundle") {
  const fs::path dir = scratch("two");
  const auto aux = bundle(dir, "UCLA nodes 1.0\nNumNodes : 2\nNumTerminals : 1\no0 4 4\np0 1 1 terminal\n",
                          "UCLA nets 1.0\nNumNets : 1\nNumPins : 2\nNetDegree : 2 n0\no0 I : 0 0\np0 O : 0 0\n",
                          "UCLA pl 1.0\no0 0 0 : N\np0 10 10 : N /FIXED\n");
  const Netlist nl = bookshelf::parse_bundle(aux);
  CHECK(nl.macros.size() == 1);
  CHECK(nl.terminals.size() == 1);
  CHECK(nl.nets.size() == 1);
}

TEST_CASE("empty net list parses") {
  const fs::path dir = scratch("empty");
  const auto aux = bundle(dir, "UCLA nodes 1.0\nNumNodes : 1\nNumTerminals : 0\no0 4 4\n",
                          "UCLA nets 1.0\nNumNets : 0\nNumPins : 0\n", "UCLA pl 1.0\no0 0 0 : N\n");
  CHECK(bookshelf::parse_bundle(aux).nets.empty());
}

TEST_CASE("errors") {
  const fs::path dir = scratch("errors");
  SUBCASE("unresolved pin owner") {
    const auto aux = bundle(dir, "UCLA nodes 1.0\no0 4 4\n", "UCLA nets 1.0\nNetDegree : 2\no0 I\noX I\n",
                            "UCLA pl 1.0\n");
    try {
      bookshelf::parse_bundle(aux);
      FAIL("expected UnresolvedPinOwner");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::UnresolvedPinOwner);
      CHECK(std::string(e.what()).find("oX") != std::string::npos);
    }
  }
  SUBCASE("malformed line carries file and line number") {
    const auto aux = bundle(dir, "UCLA nodes 1.0\no0 4 four\n", "UCLA nets 1.0\n", "UCLA pl 1.0\n");
    try {
      bookshelf::parse_bundle(aux);
      FAIL("expected MalformedLine");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::MalformedLine);
      CHECK(std::string(e.what()).find("b.nodes:2") != std::string::npos);
    }
  }
  SUBCASE("missing file") {
    CHECK(kind_of([&] { bookshelf::parse_bundle(dir / "nothing.aux"); }) == ErrorKind::MissingFile);
  }
}

TEST_CASE("write_pl maps grid anchors to microns") {
  Netlist nl;
  nl.canvas_width = nl.canvas_height = 100;
  nl.macros.push_back({"m0", 10, 10, true});
  const Canvas c(100, 100, 10);
  const fs::path dir = scratch("pl");
  bookshelf::write_pl(nl, c, {{0, 0}}, dir / "a.pl");
  CHECK(slurp(dir / "a.pl").find("m0 0 0 : N\n") != std::string::npos);
  bookshelf::write_pl(nl, c, {{3, 2}}, dir / "b.pl");
  CHECK(slurp(dir / "b.pl").find("m0 30 20 : N\n") != std::string::npos);
  const auto back = bookshelf::read_pl(nl, dir / "b.pl");
  CHECK(back[0] == Point{30, 20});
}

TEST_CASE("parse . write . parse is the identity on structure") {
  const Netlist fixture = bookshelf::parse_bundle(kData / "tiny.aux");
  const fs::path dir = scratch("rt");
  CHECK(bookshelf::parse_bundle(bookshelf::write_bundle(fixture, dir, "tiny")) == fixture);

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Netlist nl = gen_synthetic({seed, 6, 9});
    nl.initial.assign(nl.macros.size(), std::nullopt);
    nl.initial[0] = Point{0, 0};
    const Netlist once = bookshelf::parse_bundle(bookshelf::write_bundle(nl, dir, "s" + std::to_string(seed)));
    CHECK(once == nl);
  }
}
