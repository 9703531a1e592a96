// Type compatibility between the two languages and the value conversions the
// boundaries perform at run time.
//
// compat(env, tau, t) is syntax-directed on t. A U type is compatible with a
// lump of itself and with bang types whose shape it mirrors; Box and ! layers
// on the L side are invisible from the U side. recover_u is its partial
// functional inverse: the unique U type compatible with t, when t is in the
// image of the embedding.
#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ul/ast.hpp"

namespace ul {

// Pairs of (U type variable, L type variable) related by recursive-type
// descent. Each variable appears in at most one pair.
struct CompatEnv {
  std::vector<std::pair<std::string, std::string>> pairs;

  // nullptr when absent.
  const std::pair<std::string, std::string>* find_u(const std::string& a) const;
  const std::pair<std::string, std::string>* find_l(const std::string& b) const;
  CompatEnv with(const std::string& a, const std::string& b) const;
};

bool compat(const CompatEnv& env, const UTy& tau, const LTy& t);

// The unique tau with compat({}, tau, t), if any. Memoized.
std::optional<UTy> recover_u(const LTy& t);

// Convert a closed U value to an L value at type t (t must be in the image of
// the embedding: a lump or a bang). Box layers allocate cells from `locs`.
// Raises ShapeMismatch when the value does not fit the type.
LEx u_to_l(const UEx& v, const LTy& t, LocSupply& locs);

// Convert an L value at lump or bang type back into a U value. Function types
// convert to wrapper terms that re-enter the L value through the boundary;
// first-order data converts structurally.
UEx l_to_u(const LEx& v, const LTy& t);

} // namespace ul
