#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <optional>
#include <vector>

#include "ul/ast.hpp"
#include "ul/errors.hpp"
#include "ul/parser.hpp"
#include "ul/pretty.hpp"
#include "ul/typecheck.hpp"

using namespace ul;

namespace {

LResult result_of(const std::string& src) {
  return typecheck_l_surface(MixedContext{}, parse_l(src));
}

LTy ltype_of(const std::string& src) { return result_of(src).type; }

std::optional<Errc> code_of_l(const std::string& src) {
  try {
    result_of(src);
  } catch (const Error& err) {
    return err.code;
  }
  return std::nullopt;
}

UsageReport vars(std::vector<std::string> vs) {
  UsageReport u;
  for (auto& v : vs) u.consumed_vars.insert(v);
  return u;
}

} // namespace

TEST_CASE("linear core") {
  CHECK(pretty(ltype_of("()")) == "1");
  CHECK(pretty(ltype_of("fun (x : 1) -o x")) == "1 -o 1");
  CHECK(pretty(ltype_of("fun (x : 1) -o fun (y : Box0) -o (free y, x)")) ==
        "1 -o Box0 -o (1 * 1)");
  CHECK(pretty(ltype_of("fun (p : 1 * (1 -o 1)) -o let (x, f) = p in f x")) ==
        "(1 * (1 -o 1)) -o 1");
  CHECK(pretty(ltype_of("fun (x : 1) -o let () = x in ()")) == "1 -o 1");
  CHECK(pretty(ltype_of("fun (s : 1 + Box0) -o case s of { inl u -> u | inr b -> free b }")) ==
        "(1 + Box0) -o 1");
  CHECK(pretty(ltype_of("inl[1 + Box0] ()")) == "1 + Box0");
  CHECK(pretty(ltype_of("fold[mu a. 1 + Box a] (inl[1 + Box(mu a. 1 + Box a)] ())")) ==
        "mu a. 1 + Box a");
  CHECK(pretty(ltype_of("fun (l : mu a. 1 + Box a) -o unfold l")) ==
        "(mu a. 1 + Box a) -o (1 + Box (mu a. 1 + Box a))");
}

TEST_CASE("store primitives") {
  CHECK(pretty(ltype_of("new ()")) == "Box0");
  CHECK(pretty(ltype_of("free (new ())")) == "1");
  CHECK(pretty(ltype_of("fun (x : 1) -o x @ (new ())")) == "1 -o Box 1");
  CHECK(pretty(ltype_of("fun (b : Box 1) -o let x@c = b in let () = x in free c")) ==
        "Box 1 -o 1");
  CHECK(pretty(ltype_of("fun (b : Box 1) -o unbox b")) == "Box 1 -o (Box0 * 1)");
}

TEST_CASE("swap types at an abstract element type") {
  // The box swap: takes a loaded box and a replacement, returns the box
  // loaded with the replacement and the old contents.
  LTy t = ltype_of("fun (p : Box t * t) -o let (b, y) = p in let x@c = b in (y @ c, x)");
  CHECK(pretty(t) == "(Box t * t) -o (Box t * t)");
}

TEST_CASE("usage reports") {
  MixedContext ctx = MixedContext{}.with_l("x", lt_one()).with_l("d", lt_bang(lt_one()));
  LResult linear = typecheck_l_surface(ctx, parse_l("x"));
  CHECK(linear.usage == vars({"x"}));
  LResult dup = typecheck_l_surface(ctx, parse_l("d"));
  CHECK(dup.usage == vars({}));
  LResult both = typecheck_l_surface(ctx, parse_l("(x, copy d)"));
  CHECK(both.usage == vars({"x"}));
}

TEST_CASE("linearity violations") {
  CHECK(code_of_l("fun (x : 1) -o (x, x)") == Errc::LinearVariableReused);
  CHECK(code_of_l("fun (x : 1) -o ()") == Errc::LinearVariableUnused);
  CHECK(code_of_l("fun (x : 1) -o fun (s : 1 + 1) -o case s of { inl a -> let () = a in x "
                  "| inr b -> b }") == Errc::BranchUsageMismatch);
  CHECK(code_of_l("fun (x : 1) -o share (fun (y : 1) -o let () = x in y)") ==
        Errc::ShareCapturesLinear);
  CHECK(code_of_l("fun (x : 1) -o copy x") == Errc::CopyOfNonBang);
  CHECK(code_of_l("y") == Errc::UnboundVariable);

  // Duplicable variables may be dropped and repeated freely.
  CHECK(code_of_l("fun (d : !1) -o ()") == std::nullopt);
  CHECK(code_of_l("fun (d : !1) -o (copy d, copy d)") == std::nullopt);
  CHECK(code_of_l("fun (d : !(1 -o 1)) -o share (copy d)") == std::nullopt);
}

TEST_CASE("type mismatches") {
  CHECK(code_of_l("fun (x : 1) -o x x") == Errc::TypeMismatch);
  CHECK(code_of_l("fun (x : 1) -o free x") == Errc::TypeMismatch);
  CHECK(code_of_l("fun (x : Box0) -o new (free x) x") == Errc::TypeMismatch);
  CHECK(code_of_l("fun (p : 1 * 1) -o let () = p in ()") == Errc::TypeMismatch);
  CHECK(code_of_l("fun (x : 1) -o case x of { inl a -> a | inr b -> b }") == Errc::TypeMismatch);
}

TEST_CASE("shadowing keeps usage attribution straight") {
  // The inner binder hides the outer one; consuming the inner does not
  // discharge the outer.
  CHECK(code_of_l("fun (x : 1) -o fun (x : 1) -o x") == Errc::LinearVariableUnused);
  CHECK(code_of_l("fun (x : 1) -o (x, fun (x : 1) -o x)") == std::nullopt);
  CHECK(code_of_l("fun (p : 1 * 1) -o let (x, x) = p in x") == Errc::LinearVariableUnused);
  CHECK(pretty(ltype_of("fun (p : (1 * 1) * 1) -o let (x, y) = p in let (x, z) = x in "
                        "((x, z), y)")) == "((1 * 1) * 1) -o ((1 * 1) * 1)");
}

TEST_CASE("share and copy") {
  CHECK(pretty(ltype_of("share ()")) == "!1");
  CHECK(pretty(ltype_of("share (fun (x : 1) -o x)")) == "!(1 -o 1)");
  CHECK(pretty(ltype_of("fun (d : !(1 -o 1)) -o (copy d) ()")) == "!(1 -o 1) -o 1");
  // share of a share nests fine.
  CHECK(pretty(ltype_of("share (share ())")) == "!!1");
}

TEST_CASE("recursion sugar types") {
  CHECK(pretty(ltype_of("fix (f : 1 -o 1) x -o x")) == "1 -o 1");
  // A genuinely recursive function over a linear list of boxes.
  std::string drain =
      "fix (f : (mu a. 1 + Box a) -o 1) l -o"
      "  case unfold l of {"
      "    inl u -> u"
      "  | inr b -> let tl@c = b in let () = free c in (copy f) tl }";
  CHECK(pretty(ltype_of(drain)) == "(mu a. 1 + Box a) -o 1");
}

TEST_CASE("lump operators") {
  CHECK(pretty(ltype_of("fun (x : !1) -o lump[!1] x")) == "!1 -o Lump(unit)");
  CHECK(pretty(ltype_of("fun (x : Lump(unit)) -o unlump[!1] x")) == "Lump(unit) -o !1");
  CHECK(pretty(ltype_of("fun (x : Lump(unit -> unit)) -o unlump[!(!1 -o !1)] x")) ==
        "Lump(unit -> unit) -o !(!1 -o !1)");
  CHECK(code_of_l("fun (x : Box0) -o lump[Box0] x") == Errc::NotInImage);
  CHECK(code_of_l("fun (x : 1) -o lump[!1] x") == Errc::TypeMismatch);
  // A lump is linear unless shared.
  CHECK(code_of_l("fun (x : Lump(unit)) -o ()") == Errc::LinearVariableUnused);
}

TEST_CASE("boundaries from the L side") {
  CHECK(pretty(ltype_of("LU { () }")) == "Lump(unit)");
  CHECK(pretty(ltype_of("LU { fun (x : unit) -> x }")) == "Lump(unit -> unit)");
  CHECK(pretty(ltype_of("unlump[!1] (LU { () })")) == "!1");
  // Round through both languages in one term.
  CHECK(pretty(ltype_of("unlump[!1] (LU { UL { share (lump[!1] (share ())) } })")) == "!1");
  // U variables do not leak into L code.
  MixedContext ctx = MixedContext{}.with_u("x", ut_unit());
  try {
    typecheck_l_surface(ctx, parse_l("x"));
    FAIL("expected an unbound variable error");
  } catch (const Error& err) {
    CHECK(err.code == Errc::UnboundVariable);
    CHECK(err.detail.find("U variable") != std::string::npos);
  }
}

TEST_CASE("ctxjoin") {
  MixedContext ctx = MixedContext{}.with_l("x", lt_one()).with_l("y", lt_one());
  UsageReport x = vars({"x"}), y = vars({"y"});
  UsageReport xy = ctxjoin(ctx, x, y);
  CHECK(xy == vars({"x", "y"}));
  CHECK_THROWS_AS(ctxjoin(ctx, x, x), Error);
  try {
    ctxjoin(ctx, xy, y);
    FAIL("expected a sharing error");
  } catch (const Error& err) {
    CHECK(err.code == Errc::SharedLinearVariable);
  }

  UsageReport l1, l2;
  l1.consumed_locs = {1, 2};
  l2.consumed_locs = {2};
  CHECK_THROWS_AS(ctxjoin(ctx, l1, l2), Error);
}

TEST_CASE("ctxjoin is commutative and associative where defined") {
  MixedContext ctx = MixedContext{}.with_l("x", lt_one()).with_l("y", lt_one()).with_l(
      "z", lt_one());
  std::vector<std::string> names = {"x", "y", "z"};
  std::vector<UsageReport> subsets;
  for (int mask = 0; mask < 8; ++mask) {
    UsageReport u;
    for (int i = 0; i < 3; ++i)
      if (mask & (1 << i)) u.consumed_vars.insert(names[i]);
    subsets.push_back(u);
  }
  auto try_join = [&](const UsageReport& a, const UsageReport& b) -> std::optional<UsageReport> {
    try {
      return ctxjoin(ctx, a, b);
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  for (const auto& a : subsets)
    for (const auto& b : subsets) {
      CHECK(try_join(a, b) == try_join(b, a));
      for (const auto& c : subsets) {
        auto ab = try_join(a, b);
        auto bc = try_join(b, c);
        auto left = ab ? try_join(*ab, c) : std::nullopt;
        auto right = bc ? try_join(a, *bc) : std::nullopt;
        CHECK(left == right);
      }
    }
}

TEST_CASE("internal judgment: locations") {
  // A dead cell types as an empty box.
  Store dead = Store{};
  dead.slots[0] = nullptr;
  StoreTyping sig = infer_store_typing(dead);
  REQUIRE(sig.entries.size() == 1);
  CHECK(std::holds_alternative<STDead>(sig.entries.at(0)->v));
  CHECK(pretty(std::get<STDead>(sig.entries.at(0)->v).type) == "1");

  LResult r = typecheck_l_internal(MixedContext{}, sig, l_loc(0));
  CHECK(pretty(r.type) == "Box0");
  CHECK(r.usage.consumed_locs == std::set<Location>{0});

  // A full cell types as a loaded box.
  Store alive = Store{};
  alive.slots[0] = slot_full(Store{}, l_unit());
  StoreTyping sig2 = infer_store_typing(alive);
  REQUIRE(std::holds_alternative<STAlive>(sig2.entries.at(0)->v));
  CHECK(pretty(std::get<STAlive>(sig2.entries.at(0)->v).type) == "1");
  LResult r2 = typecheck_l_internal(MixedContext{}, sig2, l_loc(0));
  CHECK(pretty(r2.type) == "Box 1");

  // Locations outside the typing are store mismatches.
  try {
    typecheck_l_internal(MixedContext{}, sig, l_loc(7));
    FAIL("expected a store mismatch");
  } catch (const Error& err) {
    CHECK(err.code == Errc::StoreMismatch);
  }
}

TEST_CASE("configurations consume their store exactly") {
  Store dead = Store{};
  dead.slots[0] = nullptr;

  // <{0 -> e}, free #0> checks at 1.
  LResult ok = typecheck_config(MixedContext{}, Configuration{dead, l_free(l_loc(0))});
  CHECK(pretty(ok.type) == "1");

  // Ignoring the cell leaks it.
  try {
    typecheck_config(MixedContext{}, Configuration{dead, l_unit()});
    FAIL("expected a leak error");
  } catch (const Error& err) {
    CHECK(err.code == Errc::LocationUnused);
  }

  // Consuming it twice is caught by the disjoint merge.
  try {
    typecheck_config(MixedContext{},
                     Configuration{dead, l_pair(l_free(l_loc(0)), l_free(l_loc(0)))});
    FAIL("expected a reuse error");
  } catch (const Error& err) {
    CHECK(err.code == Errc::LocationReused);
  }
}

TEST_CASE("internal shares own their store") {
  Store dead = Store{};
  dead.slots[3] = nullptr;
  StoreTyping sig = StoreTyping{};
  sig.entries[3] = st_dead(lt_one());

  // share {3 -> e}; {3 : Dead 1} (free #3) : !1, no ambient usage.
  LEx sh = l_share(dead, sig, l_free(l_loc(3)));
  LResult r = typecheck_l_internal(MixedContext{}, StoreTyping{}, sh);
  CHECK(pretty(r.type) == "!1");
  CHECK(r.usage == UsageReport{});

  // The body must consume the captured store.
  try {
    typecheck_l_internal(MixedContext{}, StoreTyping{}, l_share(dead, sig, l_unit()));
    FAIL("expected a leak error");
  } catch (const Error& err) {
    CHECK(err.code == Errc::LocationUnused);
  }

  // The body cannot reach ambient cells.
  StoreTyping ambient = StoreTyping{};
  ambient.entries[9] = st_dead(lt_one());
  try {
    typecheck_l_internal(MixedContext{}, ambient,
                         l_share(Store{}, StoreTyping{}, l_free(l_loc(9))));
    FAIL("expected a store mismatch");
  } catch (const Error& err) {
    CHECK(err.code == Errc::StoreMismatch);
  }
}

TEST_CASE("store against typing validation") {
  Store full = Store{};
  full.slots[0] = slot_full(Store{}, l_unit());
  StoreTyping says_dead = StoreTyping{};
  says_dead.entries[0] = st_dead(lt_one());
  try {
    validate_store(full, says_dead);
    FAIL("expected a dead/full clash");
  } catch (const Error& err) {
    CHECK(err.code == Errc::DeadLocationHoldsValue);
  }

  Store empty_cell = Store{};
  empty_cell.slots[0] = nullptr;
  StoreTyping says_alive = StoreTyping{};
  says_alive.entries[0] = st_alive(MixedContext{}, StoreTyping{}, lt_one());
  try {
    validate_store(empty_cell, says_alive);
    FAIL("expected an alive/empty clash");
  } catch (const Error& err) {
    CHECK(err.code == Errc::AliveLocationEmpty);
  }

  // Mismatched domains.
  try {
    validate_store(full, StoreTyping{});
    FAIL("expected a domain mismatch");
  } catch (const Error& err) {
    CHECK(err.code == Errc::StoreMismatch);
  }

  // Typing entry must match the stored value's type.
  StoreTyping wrong_type = StoreTyping{};
  wrong_type.entries[0] = st_alive(MixedContext{}, StoreTyping{}, lt_box0());
  try {
    validate_store(full, wrong_type);
    FAIL("expected a type mismatch");
  } catch (const Error& err) {
    CHECK(err.code == Errc::TypeMismatch);
  }

  // A linear entry in a stored value's context is rejected.
  StoreTyping linear_ctx = StoreTyping{};
  linear_ctx.entries[0] =
      st_alive(MixedContext{}.with_l("x", lt_one()), StoreTyping{}, lt_one());
  try {
    validate_store(full, linear_ctx);
    FAIL("expected a rejection");
  } catch (const Error& err) {
    CHECK(err.code == Errc::NotTypable);
  }
}

TEST_CASE("nested stored values with local stores") {
  // Cell 0 holds a box value #1 whose own cell lives in the slot-local store.
  Store inner_store = Store{};
  inner_store.slots[1] = slot_full(Store{}, l_unit());
  Store outer = Store{};
  outer.slots[0] = slot_full(inner_store, l_loc(1));

  StoreTyping sig = infer_store_typing(outer);
  const auto& alive = std::get<STAlive>(sig.entries.at(0)->v);
  CHECK(pretty(alive.type) == "Box 1");
  CHECK(alive.inner.entries.size() == 1);

  LResult r = typecheck_config(MixedContext{}, Configuration{outer, l_loc(0)});
  CHECK(pretty(r.type) == "Box Box 1");

  // The stored value must consume its local store.
  Store leaky = Store{};
  leaky.slots[0] = slot_full(inner_store, l_unit());
  try {
    infer_store_typing(leaky);
    FAIL("expected a leak error");
  } catch (const Error& err) {
    CHECK(err.code == Errc::LocationUnused);
  }
}

TEST_CASE("surface checker rejects internal forms") {
  CHECK_THROWS_AS(typecheck_l_surface(MixedContext{}, l_loc(0)), Error);
  CHECK_THROWS_AS(typecheck_l_surface(MixedContext{}, l_lump(u_unit())), Error);
  try {
    typecheck_l_surface(MixedContext{}, l_loc(0));
  } catch (const Error& err) {
    CHECK(err.code == Errc::NotTypable);
  }
}

TEST_CASE("surface and internal judgments agree on surface terms") {
  std::vector<std::string> samples = {
      "fun (x : 1) -o x",
      "fun (p : Box t * t) -o let (b, y) = p in let x@c = b in (y @ c, x)",
      "share (fun (x : !1) -o copy x)",
      "fix (f : 1 -o 1) x -o x",
      "fun (s : 1 + Box0) -o case s of { inl u -> u | inr b -> free b }",
      "unlump[!1] (LU { UL { share (lump[!1] (share ())) } })",
  };
  for (const auto& src : samples) {
    CAPTURE(src);
    LEx e = parse_l(src);
    LResult s = typecheck_l_surface(MixedContext{}, e);
    LResult i = typecheck_l_internal(MixedContext{}, StoreTyping{}, e);
    CHECK(alpha_equal(s.type, i.type));
    CHECK(s.usage == i.usage);
  }
}

TEST_CASE("weakening by duplicable context entries") {
  std::vector<std::string> samples = {
      "fun (x : 1) -o x",
      "share (fun (x : !1) -o copy x)",
      "fun (s : 1 + Box0) -o case s of { inl u -> u | inr b -> free b }",
  };
  MixedContext weak = MixedContext{}
                          .with_l("extra", lt_bang(lt_one()))
                          .with_u("more", ut_unit())
                          .with_tyvar("spare");
  for (const auto& src : samples) {
    CAPTURE(src);
    LEx e = parse_l(src);
    LResult bare = typecheck_l_surface(MixedContext{}, e);
    LResult padded = typecheck_l_surface(weak, e);
    CHECK(alpha_equal(bare.type, padded.type));
    CHECK(bare.usage == padded.usage);
  }
}

TEST_CASE("value inversion at bang type") {
  // Closed values of bang type are shares.
  std::vector<std::string> samples = {"share ()", "share (share ())",
                                      "share (fun (x : 1) -o x)"};
  for (const auto& src : samples) {
    LEx v = parse_l(src);
    REQUIRE(is_value_l(v));
    LResult r = typecheck_l_surface(MixedContext{}, v);
    if (std::holds_alternative<LTBang>(r.type->v)) CHECK(std::holds_alternative<LShare>(v->v));
  }
}
