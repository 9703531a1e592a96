// Type checking for both languages.
//
// The L checker is algorithmic: instead of guessing a context split it checks
// a term once and reports which linear variables and store locations the term
// consumed. Sequential composition requires disjoint reports; case branches
// must report identical ones. The internal judgment extends the surface one
// with locations typed by a store typing; a whole configuration checks when
// its term consumes exactly the store's domain.
#pragma once

#include <set>
#include <string>

#include "ul/ast.hpp"

namespace ul {

struct UsageReport {
  std::set<std::string> consumed_vars;
  std::set<Location> consumed_locs;

  bool operator==(const UsageReport&) const = default;
};

struct LResult {
  LTy type;
  UsageReport usage;
};

// Disjoint union for sequential composition. Overlap raises
// LinearVariableReused / LocationReused.
UsageReport merge_usage(const UsageReport& a, const UsageReport& b);

// Join of usages from independent derivations. Variables in both reports
// would have to be duplicable in ctx, and reported variables never are, so
// overlap raises SharedLinearVariable (locations likewise LocationReused).
UsageReport ctxjoin(const MixedContext& ctx, const UsageReport& a, const UsageReport& b);

UTy typecheck_u(const MixedContext& ctx, const UEx& e);

// Rejects internal forms (location literals, lumped values, nonempty captured
// stores), then checks against an empty store typing.
LResult typecheck_l_surface(const MixedContext& ctx, const LEx& e);

// Internal judgment: `styping` types the ambient store; the report says which
// of its locations the term consumes. Exact consumption of a store's domain
// is enforced where a store is actually attached (shares, boundaries,
// configurations), not here.
LResult typecheck_l_internal(const MixedContext& ctx, const StoreTyping& styping, const LEx& e);

// Checks a captured store against its carried typing: domains agree, empty
// slots are Dead, full slots check against their Alive entry (whose context
// must be duplicable-only).
void validate_store(const Store& store, const StoreTyping& styping);

// Canonical store typing: Dead(1) for empty slots, Alive with an empty
// context for full ones.
StoreTyping infer_store_typing(const Store& store);

// Infers the store typing and requires the term to consume exactly the
// store's domain.
LResult typecheck_config(const MixedContext& ctx, const Configuration& c);

} // namespace ul
