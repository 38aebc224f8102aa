#include "macroreg/bookshelf.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_map>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "macroreg/error.hpp"

namespace macroreg::bookshelf {

namespace fs = std::filesystem;

namespace {

using Tokens = std::vector<std::string>;

// Line reader that strips comments, splits ':' into its own token and keeps
// track of line numbers for error messages.
class LineReader {
 public:
  explicit LineReader(const fs::path& path) : path_(path), in_(path) {
    if (!in_) throw Error(ErrorKind::MissingFile, path.string());
  }

  bool next(Tokens& tokens) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::string spaced;
      spaced.reserve(line.size() + 8);
      for (char c : line) {
        if (c == ':') {
          spaced += " : ";
        } else {
          spaced += c;
        }
      }
      std::istringstream ss(spaced);
      tokens.clear();
      for (std::string tok; ss >> tok;) tokens.push_back(std::move(tok));
      if (!tokens.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void malformed(const std::string& why) const {
    throw Error(ErrorKind::MalformedLine, fmt::format("{}:{}: {}", path_.string(), line_no_, why));
  }

  double number(const std::string& tok) const {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
      malformed(fmt::format("expected a number, got '{}'", tok));
    }
    return v;
  }

  int line() const { return line_no_; }

 private:
  fs::path path_;
  std::ifstream in_;
  int line_no_ = 0;
};

bool is_header(const Tokens& t) { return t[0] == "UCLA"; }
bool is_count(const Tokens& t) { return t.size() >= 2 && t[0].rfind("Num", 0) == 0 && t[1] == ":"; }

struct RawNode {
  std::string name;
  double width = 0.0;
  double height = 0.0;
  bool fixed = false;
};

struct RawPin {
  std::string owner;
  double xoff = 0.0;
  double yoff = 0.0;
};

struct RawNet {
  std::string name;
  std::vector<RawPin> pins;
};

struct Rows {
  bool present = false;
  double x0 = std::numeric_limits<double>::max();
  double y0 = std::numeric_limits<double>::max();
  double x1 = std::numeric_limits<double>::lowest();
  double y1 = std::numeric_limits<double>::lowest();
  double min_height = std::numeric_limits<double>::max();
};

struct AuxFiles {
  fs::path nodes, nets, pl, scl;
};

AuxFiles read_aux(const fs::path& aux_path) {
  LineReader reader(aux_path);
  AuxFiles files;
  Tokens t;
  while (reader.next(t)) {
    const auto colon = std::find(t.begin(), t.end(), ":");
    if (colon == t.end()) reader.malformed("expected '<kind> : <files>'");
    for (auto it = colon + 1; it != t.end(); ++it) {
      const fs::path p = aux_path.parent_path() / *it;
      const std::string ext = p.extension().string();
      if (ext == ".nodes") files.nodes = p;
      else if (ext == ".nets") files.nets = p;
      else if (ext == ".pl") files.pl = p;
      else if (ext == ".scl") files.scl = p;
    }
  }
  for (const fs::path* p : {&files.nodes, &files.nets, &files.pl}) {
    if (p->empty()) throw Error(ErrorKind::MissingFile, fmt::format("{} does not list all of .nodes/.nets/.pl", aux_path.string()));
    if (!fs::exists(*p)) throw Error(ErrorKind::MissingFile, p->string());
  }
  if (!files.scl.empty() && !fs::exists(files.scl)) throw Error(ErrorKind::MissingFile, files.scl.string());
  return files;
}

std::vector<RawNode> read_nodes(const fs::path& path) {
  LineReader reader(path);
  std::vector<RawNode> nodes;
  Tokens t;
  while (reader.next(t)) {
    if (is_header(t) || is_count(t)) continue;
    if (t.size() < 3 || t.size() > 4) reader.malformed("expected 'name width height [terminal]'");
    RawNode node{t[0], reader.number(t[1]), reader.number(t[2]), false};
    if (t.size() == 4) {
      if (t[3] != "terminal" && t[3] != "terminal_NI") reader.malformed(fmt::format("unknown attribute '{}'", t[3]));
      node.fixed = true;
    }
    if (node.width < 0.0 || node.height < 0.0) reader.malformed("negative node size");
    nodes.push_back(std::move(node));
  }
  return nodes;
}

std::vector<RawNet> read_nets(const fs::path& path) {
  LineReader reader(path);
  std::vector<RawNet> nets;
  Tokens t;
  std::size_t expected = 0;
  while (reader.next(t)) {
    if (is_header(t) || is_count(t)) continue;
    if (t[0] == "NetDegree") {
      if (expected != 0) reader.malformed("previous net is missing pins");
      if (t.size() < 3 || t[1] != ":") reader.malformed("expected 'NetDegree : d [name]'");
      const double d = reader.number(t[2]);
      if (d < 0 || d != std::floor(d)) reader.malformed("net degree must be a non-negative integer");
      expected = static_cast<std::size_t>(d);
      nets.push_back({t.size() > 3 ? t[3] : fmt::format("net{}", nets.size()), {}});
      continue;
    }
    if (expected == 0) reader.malformed("pin outside a NetDegree block");
    RawPin pin{t[0], 0.0, 0.0};
    const auto colon = std::find(t.begin(), t.end(), ":");
    if (colon != t.end()) {
      if (t.end() - colon != 3) reader.malformed("expected ': xoff yoff'");
      pin.xoff = reader.number(*(colon + 1));
      pin.yoff = reader.number(*(colon + 2));
    } else if (t.size() > 2) {
      reader.malformed("unexpected tokens after pin direction");
    }
    nets.back().pins.push_back(std::move(pin));
    --expected;
  }
  if (expected != 0) reader.malformed("file ends inside a NetDegree block");
  return nets;
}

std::unordered_map<std::string, Point> read_positions(const fs::path& path) {
  LineReader reader(path);
  std::unordered_map<std::string, Point> pos;
  Tokens t;
  while (reader.next(t)) {
    if (is_header(t)) continue;
    if (t.size() < 3) reader.malformed("expected 'name x y : orient'");
    pos[t[0]] = {reader.number(t[1]), reader.number(t[2])};
  }
  return pos;
}

Rows read_scl(const fs::path& path) {
  Rows rows;
  if (path.empty()) return rows;
  LineReader reader(path);
  Tokens t;
  bool in_row = false;
  std::unordered_map<std::string, double> kv;
  while (reader.next(t)) {
    if (is_header(t) || is_count(t)) continue;
    if (t[0] == "CoreRow") {
      in_row = true;
      kv.clear();
      continue;
    }
    if (t[0] == "End") {
      if (!in_row) reader.malformed("End without CoreRow");
      for (const char* key : {"Coordinate", "Height", "SubrowOrigin", "NumSites"}) {
        if (!kv.count(key)) reader.malformed(fmt::format("row without {}", key));
      }
      const double spacing = kv.count("Sitespacing") ? kv["Sitespacing"] : (kv.count("Sitewidth") ? kv["Sitewidth"] : 1.0);
      rows.present = true;
      rows.x0 = std::min(rows.x0, kv["SubrowOrigin"]);
      rows.x1 = std::max(rows.x1, kv["SubrowOrigin"] + kv["NumSites"] * spacing);
      rows.y0 = std::min(rows.y0, kv["Coordinate"]);
      rows.y1 = std::max(rows.y1, kv["Coordinate"] + kv["Height"]);
      rows.min_height = std::min(rows.min_height, kv["Height"]);
      in_row = false;
      continue;
    }
    if (!in_row) reader.malformed(fmt::format("unexpected '{}' outside a row", t[0]));
    // One or more "Key : value" triples per line; non-numeric values
    // (orientation, symmetry) are skipped.
    for (std::size_t i = 0; i + 2 < t.size(); i += 3) {
      if (t[i + 1] != ":") reader.malformed("expected 'Key : value'");
      double v = 0.0;
      const auto& s = t[i + 2];
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec == std::errc() && ptr == s.data() + s.size()) kv[t[i]] = v;
    }
  }
  if (in_row) reader.malformed("unterminated CoreRow");
  return rows;
}

constexpr double kRowEps = 1e-9;

}  // namespace

Netlist parse_bundle(const fs::path& aux_path, const ParseOptions& options) {
  const AuxFiles files = read_aux(aux_path);
  const std::vector<RawNode> nodes = read_nodes(files.nodes);
  const std::vector<RawNet> raw_nets = read_nets(files.nets);
  const auto positions = read_positions(files.pl);
  const Rows rows = read_scl(files.scl);

  Netlist nl;
  // name -> (kind, index); std cells map to kind nullopt.
  struct Ref {
    std::optional<OwnerKind> kind;
    int index = -1;
  };
  std::unordered_map<std::string, Ref> refs;
  refs.reserve(nodes.size());
  const auto is_macro_height = [&](double h) { return !rows.present || h > rows.min_height * (1.0 + kRowEps); };

  for (const RawNode& node : nodes) {
    if (refs.count(node.name)) throw Error(ErrorKind::InvalidNetlist, fmt::format("duplicate node {}", node.name));
    const bool movable = !node.fixed || (options.free_fixed_macros && rows.present && is_macro_height(node.height));
    if (movable) {
      if (!is_macro_height(node.height)) {
        refs[node.name] = {};
        continue;
      }
      refs[node.name] = {OwnerKind::Macro, nl.num_macros()};
      nl.macros.push_back({node.name, node.width, node.height, true});
    } else {
      refs[node.name] = {OwnerKind::Terminal, static_cast<int>(nl.terminals.size())};
      nl.terminals.push_back({node.name, 0.0, 0.0, node.width, node.height});
    }
  }

  if (rows.present) {
    nl.origin_x = rows.x0;
    nl.origin_y = rows.y0;
    nl.canvas_width = rows.x1 - rows.x0;
    nl.canvas_height = rows.y1 - rows.y0;
  } else {
    for (const RawNode& node : nodes) {
      const auto it = positions.find(node.name);
      const auto ref = refs.find(node.name);
      if (it == positions.end() || !ref->second.kind) continue;
      nl.canvas_width = std::max(nl.canvas_width, it->second.x + node.width);
      nl.canvas_height = std::max(nl.canvas_height, it->second.y + node.height);
    }
  }

  for (auto& t : nl.terminals) {
    if (const auto it = positions.find(t.id); it != positions.end()) {
      t.x = it->second.x - nl.origin_x;
      t.y = it->second.y - nl.origin_y;
    }
  }
  nl.initial.assign(nl.macros.size(), std::nullopt);
  for (int m = 0; m < nl.num_macros(); ++m) {
    if (const auto it = positions.find(nl.macros[m].id); it != positions.end()) {
      nl.initial[m] = Point{it->second.x - nl.origin_x, it->second.y - nl.origin_y};
    }
  }

  for (const RawNet& raw : raw_nets) {
    Net net{raw.name, {}};
    for (const RawPin& rp : raw.pins) {
      const auto it = refs.find(rp.owner);
      if (it == refs.end()) throw Error(ErrorKind::UnresolvedPinOwner, rp.owner);
      if (!it->second.kind) continue;
      Pin pin{*it->second.kind, it->second.index, 0.0, 0.0};
      pin.dx = rp.xoff + nl.owner_width(pin) / 2.0;
      pin.dy = rp.yoff + nl.owner_height(pin) / 2.0;
      net.pins.push_back(pin);
    }
    if (net.pins.size() >= 2) nl.nets.push_back(std::move(net));
  }

  nl.validate();
  return nl;
}

std::vector<std::optional<Point>> read_pl(const Netlist& netlist, const fs::path& path) {
  const auto positions = read_positions(path);
  std::vector<std::optional<Point>> out(netlist.macros.size());
  for (int m = 0; m < netlist.num_macros(); ++m) {
    if (const auto it = positions.find(netlist.macros[m].id); it != positions.end()) {
      out[m] = Point{it->second.x - netlist.origin_x, it->second.y - netlist.origin_y};
    }
  }
  return out;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, fmt::format("cannot write {}", path.string()));
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::Io, fmt::format("write failed: {}", path.string()));
}

void write_terminal_lines(std::ostream& os, const Netlist& netlist) {
  for (const auto& t : netlist.terminals) {
    fmt::print(os, "{} {} {} : N /FIXED\n", t.id, t.x + netlist.origin_x, t.y + netlist.origin_y);
  }
}

}  // namespace

void write_pl(const Netlist& netlist, const Canvas& canvas, const Placement& placement, const fs::path& path) {
  if (placement.size() != netlist.macros.size()) {
    throw Error(ErrorKind::InvalidInitialPlacement, "placement does not cover every macro");
  }
  auto out = open_out(path);
  out << "UCLA pl 1.0\n\n";
  for (int m = 0; m < netlist.num_macros(); ++m) {
    fmt::print(out, "{} {} {} : N\n", netlist.macros[m].id, canvas.x_of(placement[m].gx) + netlist.origin_x,
               canvas.y_of(placement[m].gy) + netlist.origin_y);
  }
  write_terminal_lines(out, netlist);
  finish(out, path);
}

fs::path write_bundle(const Netlist& netlist, const fs::path& dir, std::string_view name) {
  fs::create_directories(dir);
  const std::string base(name);
  const fs::path aux = dir / (base + ".aux");
  {
    auto out = open_out(aux);
    fmt::print(out, "RowBasedPlacement : {0}.nodes {0}.nets {0}.pl {0}.scl\n", base);
    finish(out, aux);
  }
  {
    const fs::path p = dir / (base + ".nodes");
    auto out = open_out(p);
    out << "UCLA nodes 1.0\n\n";
    fmt::print(out, "NumNodes : {}\nNumTerminals : {}\n\n", netlist.macros.size() + netlist.terminals.size(),
               netlist.terminals.size());
    for (const auto& m : netlist.macros) fmt::print(out, "\t{}\t{}\t{}\n", m.id, m.width, m.height);
    for (const auto& t : netlist.terminals) fmt::print(out, "\t{}\t{}\t{}\tterminal\n", t.id, t.width, t.height);
    finish(out, p);
  }
  {
    const fs::path p = dir / (base + ".nets");
    auto out = open_out(p);
    std::size_t pins = 0;
    for (const auto& net : netlist.nets) pins += net.pins.size();
    out << "UCLA nets 1.0\n\n";
    fmt::print(out, "NumNets : {}\nNumPins : {}\n\n", netlist.nets.size(), pins);
    for (const auto& net : netlist.nets) {
      fmt::print(out, "NetDegree : {} {}\n", net.pins.size(), net.id);
      for (const auto& pin : net.pins) {
        fmt::print(out, "\t{} B : {} {}\n", netlist.owner_id(pin), pin.dx - netlist.owner_width(pin) / 2.0,
                   pin.dy - netlist.owner_height(pin) / 2.0);
      }
    }
    finish(out, p);
  }
  {
    const fs::path p = dir / (base + ".pl");
    auto out = open_out(p);
    out << "UCLA pl 1.0\n\n";
    for (int m = 0; m < netlist.num_macros(); ++m) {
      if (m >= static_cast<int>(netlist.initial.size()) || !netlist.initial[m]) continue;
      fmt::print(out, "{} {} {} : N\n", netlist.macros[m].id, netlist.initial[m]->x + netlist.origin_x,
                 netlist.initial[m]->y + netlist.origin_y);
    }
    write_terminal_lines(out, netlist);
    finish(out, p);
  }
  {
    // Rows tile the canvas; their height is the canvas height halved until
    // it is below the smallest macro, so every macro reads back as a macro.
    double min_macro_h = std::numeric_limits<double>::max();
    for (const auto& m : netlist.macros) min_macro_h = std::min(min_macro_h, m.height);
    int halvings = 0;
    double row_h = netlist.canvas_height;
    while (row_h >= min_macro_h && halvings < 16) {
      row_h /= 2.0;
      ++halvings;
    }
    const int num_rows = 1 << halvings;
    const fs::path p = dir / (base + ".scl");
    auto out = open_out(p);
    out << "UCLA scl 1.0\n\n";
    fmt::print(out, "NumRows : {}\n\n", num_rows);
    for (int r = 0; r < num_rows; ++r) {
      fmt::print(out,
                 "CoreRow Horizontal\n  Coordinate : {}\n  Height : {}\n  Sitewidth : {}\n  Sitespacing : {}\n"
                 "  Siteorient : 1\n  Sitesymmetry : 1\n  SubrowOrigin : {} NumSites : 1\nEnd\n",
                 netlist.origin_y + r * row_h, row_h, netlist.canvas_width, netlist.canvas_width,
                 netlist.origin_x);
    }
    finish(out, p);
  }
  return aux;
}

}  // namespace macroreg::bookshelf
