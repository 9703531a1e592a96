// Concrete syntax. The grammar is documented in docs/syntax.md; parse errors
// carry line/column and the token set expected at the farthest failure.
//
// A source file is an ordered list of items:
//   def NAME = term          named term, parsed as U and/or L (whichever fit)
//   type NAME(params) = ty   type abbreviation, expanded at use sites
//   main = term              the program entry point (a U term)
//
// Sugar handled here, not in the AST:
//   e @ l                      box (l, e)
//   let p @ l = e in b         unbox first, then match p
//   share e                    share with an empty captured store
//   fix (f : T) x -o e         iso-recursive self-application encoding
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ul/ast.hpp"

namespace ul {

// A named definition. A body that parses in both sorts keeps both readings;
// inlining picks per occurrence.
struct TermDef {
  std::string name;
  UEx u; // may be null
  LEx l; // may be null
};

struct SourceFile {
  std::vector<TermDef> defs; // in source order, abbreviations already expanded
  std::optional<UEx> main;
};

SourceFile parse_file(const std::string& text);

// Whole-string parsers for a single term or type (no defs, no abbreviations).
UEx parse_u(const std::string& text);
LEx parse_l(const std::string& text);
UTy parse_uty(const std::string& text);
LTy parse_lty(const std::string& text);

// Definition inlining. Every def may reference the defs above it; the result
// carries no definition references. Free term variables left over after
// inlining raise UnboundName (free type variables are allowed and behave as
// rigid abstract types).
struct Program {
  std::vector<TermDef> defs;
  std::optional<UEx> main;
};
Program elaborate(const SourceFile& f);

} // namespace ul
