// Printers for types, terms, stores, and configurations.
//
// Surface terms print in the concrete grammar (docs/syntax.md) and re-parse
// to an alpha-equal term. Internal forms (location literals, lumped values,
// nonempty captured stores) print in a debug notation that is readable but
// not part of the grammar.
#pragma once

#include <string>

#include "ul/ast.hpp"

namespace ul {

std::string pretty(const UTy& t);
std::string pretty(const LTy& t);
std::string pretty(const UEx& e);
std::string pretty(const LEx& e);
std::string pretty(const Store& s);
std::string pretty(const Configuration& c);

} // namespace ul
