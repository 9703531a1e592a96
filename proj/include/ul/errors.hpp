// Diagnostic codes and the exception type shared by the checkers, the
// evaluator, and the CLI. Codes are stable: corpus golden files match on them.
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ul {

enum class Errc {
  LinearVariableReused = 1,     // E001
  LinearVariableUnused,         // E002
  BranchUsageMismatch,          // E003
  ShareCapturesLinear,          // E004
  CopyOfNonBang,                // E005
  TypeMismatch,                 // E006
  UnboundVariable,              // E007
  NonValueUnderTypeAbstraction, // E008
  BoundaryTypeNotLumped,        // E009
  NonDuplicableLinearInScope,   // E010
  LocationUnused,               // E011
  LocationReused,               // E012
  StoreMismatch,                // E013
  DeadLocationHoldsValue,       // E014
  AliveLocationEmpty,           // E015
  SharedLinearVariable,         // E016
  NotInImage,                   // E017
  ShapeMismatch,                // E018
  NotTypable,                   // E019
  UnboundName,                  // E020
  ParseError,                   // E021
  Uninhabited,                  // E022
};

std::string_view errc_name(Errc c);

// "E001" etc.
std::string errc_code(Errc c);

// Raised by parse, typecheck, elaboration, and conversion entry points.
// `detail` is the human paragraph; `where` is a pretty-printed fragment of the
// smallest enclosing expression (may be empty).
struct Error : std::runtime_error {
  Errc code;
  std::string detail;
  std::string where;

  Error(Errc c, std::string d, std::string w = "");

  // One-line machine-greppable form: "E006 TypeMismatch: <detail>".
  std::string header() const;
};

} // namespace ul
