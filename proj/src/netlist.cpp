#include "macroreg/netlist.hpp"

#include <cmath>
#include <unordered_set>

#include <fmt/core.h>

#include "macroreg/error.hpp"

namespace macroreg {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::UnresolvedPinOwner: return "UnresolvedPinOwner";
    case ErrorKind::InvalidNetlist: return "InvalidNetlist";
    case ErrorKind::InfeasibleAreaBudget: return "InfeasibleAreaBudget";
    case ErrorKind::OutOfCanvas: return "OutOfCanvas";
    case ErrorKind::CellOccupied: return "CellOccupied";
    case ErrorKind::UnknownMacro: return "UnknownMacro";
    case ErrorKind::UnplacedOwner: return "UnplacedOwner";
    case ErrorKind::NoValidPosition: return "NoValidPosition";
    case ErrorKind::InvalidInitialPlacement: return "InvalidInitialPlacement";
    case ErrorKind::MissingInitial: return "MissingInitial";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::Io: return "IoError";
  }
  return "Unknown";
}

int Netlist::find_macro(std::string_view id) const {
  for (int i = 0; i < num_macros(); ++i) {
    if (macros[i].id == id) return i;
  }
  return -1;
}

std::string_view Netlist::owner_id(const Pin& pin) const {
  return pin.kind == OwnerKind::Macro ? std::string_view(macros[pin.owner].id)
                                      : std::string_view(terminals[pin.owner].id);
}

double Netlist::owner_width(const Pin& pin) const {
  return pin.kind == OwnerKind::Macro ? macros[pin.owner].width : terminals[pin.owner].width;
}

double Netlist::owner_height(const Pin& pin) const {
  return pin.kind == OwnerKind::Macro ? macros[pin.owner].height : terminals[pin.owner].height;
}

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::InvalidNetlist, what); }

// Pin offsets are real-valued; allow rounding slack relative to the owner size.
bool within(double offset, double extent) {
  const double slack = 1e-9 * std::max(1.0, extent);
  return offset >= -slack && offset <= extent + slack;
}

}  // namespace

void Netlist::validate() const {
  if (!(canvas_width > 0.0) || !(canvas_height > 0.0)) {
    invalid(fmt::format("canvas must be positive, got {} x {}", canvas_width, canvas_height));
  }
  std::unordered_set<std::string_view> ids;
  for (const auto& m : macros) {
    if (!(m.width > 0.0) || !(m.height > 0.0)) invalid(fmt::format("macro {} has non-positive size", m.id));
    if (!ids.insert(m.id).second) invalid(fmt::format("duplicate id {}", m.id));
  }
  for (const auto& t : terminals) {
    if (t.width < 0.0 || t.height < 0.0) invalid(fmt::format("terminal {} has negative size", t.id));
    if (!ids.insert(t.id).second) invalid(fmt::format("duplicate id {}", t.id));
  }
  if (!initial.empty() && initial.size() != macros.size()) {
    invalid("initial positions do not cover the macro list");
  }
  for (const auto& net : nets) {
    if (net.pins.empty()) invalid(fmt::format("net {} has no pins", net.id));
    for (const auto& pin : net.pins) {
      const int limit = pin.kind == OwnerKind::Macro ? num_macros() : static_cast<int>(terminals.size());
      if (pin.owner < 0 || pin.owner >= limit) invalid(fmt::format("net {} has a dangling pin", net.id));
      if (!within(pin.dx, owner_width(pin)) || !within(pin.dy, owner_height(pin))) {
        invalid(fmt::format("net {}: pin offset outside owner {}", net.id, owner_id(pin)));
      }
    }
  }
}

}  // namespace macroreg
