// Functional back-translation: linear terms, stores, and whole configurations
// become pure U expressions with no boundaries and no state. Cells turn into
// the values they hold (unit for an empty cell, a padded pair for a full one),
// new/free into unit plumbing, box/unbox into pair plumbing, share/copy and
// the boundaries erase. The result evaluates in lockstep with the original up
// to a constant factor, which makes it usable as a differential oracle.
//
// Both sorts resolve names through one shared space, so a well-typed program
// never lets a binder of one sort capture a variable of the other; the
// variable mapping is therefore the identity, and the U fragment translates
// to itself. Location variables live in the reserved "loc$N" namespace no
// source identifier can collide with, and every one of them is substituted
// away by the store clauses before a closed translation is returned.
#pragma once

#include <string>

#include "ul/ast.hpp"

namespace ul {

// Total and structural. Bang and Box0 erase to their payload / unit; Box t
// pads to unit * [t]; a lump is its U payload.
UTy funtrans_type(const LTy& t);

// The context is consulted only where the translation must synthesize a type
// (let-pair binders, case arms); closed programs pass an empty one. Input
// must be well typed under `ctx`.
UEx funtrans_expr(const MixedContext& ctx, const UEx& e);
UEx funtrans_expr(const MixedContext& ctx, const LEx& e);
UEx funtrans_expr(const MixedContext& ctx, const Configuration& c);

UEx funtrans_expr(const UEx& e);
UEx funtrans_expr(const LEx& e);
UEx funtrans_expr(const Configuration& c);

// The U variable standing for location l.
std::string location_var(Location l);

// Hole variable for context terms. Not lexable, so it cannot collide with a
// parsed identifier.
extern const std::string hole_name;

// Translating a plugged context equals plugging the translations. `ctx_term`
// is a U expression with U-sort occurrences of `hole_name`; `filler` must be
// closed and well typed.
bool check_compositionality(const UEx& ctx_term, const UEx& filler);

} // namespace ul
