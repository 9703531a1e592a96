#include "ul/errors.hpp"

#include <array>
#include <cstdio>

namespace ul {

std::string_view errc_name(Errc c) {
  static constexpr std::array<std::string_view, 23> names = {
      "",
      "LinearVariableReused",
      "LinearVariableUnused",
      "BranchUsageMismatch",
      "ShareCapturesLinear",
      "CopyOfNonBang",
      "TypeMismatch",
      "UnboundVariable",
      "NonValueUnderTypeAbstraction",
      "BoundaryTypeNotLumped",
      "NonDuplicableLinearInScope",
      "LocationUnused",
      "LocationReused",
      "StoreMismatch",
      "DeadLocationHoldsValue",
      "AliveLocationEmpty",
      "SharedLinearVariable",
      "NotInImage",
      "ShapeMismatch",
      "NotTypable",
      "UnboundName",
      "ParseError",
      "Uninhabited",
  };
  auto i = static_cast<std::size_t>(c);
  return i < names.size() ? names[i] : "UnknownError";
}

std::string errc_code(Errc c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "E%03d", static_cast<int>(c));
  return buf;
}

Error::Error(Errc c, std::string d, std::string w)
    : std::runtime_error(errc_code(c) + " " + std::string(errc_name(c)) +
                         ": " + d),
      code(c), detail(std::move(d)), where(std::move(w)) {}

std::string Error::header() const {
  return errc_code(code) + " " + std::string(errc_name(code)) + ": " + detail;
}

} // namespace ul
