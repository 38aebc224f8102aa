#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace macroreg {

enum class ErrorKind {
  MissingFile,
  MalformedLine,
  UnresolvedPinOwner,
  InvalidNetlist,
  InfeasibleAreaBudget,
  OutOfCanvas,
  CellOccupied,
  UnknownMacro,
  UnplacedOwner,
  NoValidPosition,
  InvalidInitialPlacement,
  MissingInitial,
  InvalidConfig,
  ShapeMismatch,
  NonFiniteLoss,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; `kind()` drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace macroreg
