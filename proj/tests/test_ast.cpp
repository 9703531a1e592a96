#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "ul/ast.hpp"
#include "ul/errors.hpp"
#include "ul/pretty.hpp"

using namespace ul;

TEST_CASE("free_vars basics") {
  CHECK(free_vars(l_lam("x", lt_one(), l_var("x"))).empty());
  CHECK(free_vars(l_pair(l_var("x"), l_var("y"))) ==
        std::set<std::string>{"x", "y"});
  CHECK(free_vars(l_letpair("x", "y", l_var("z"),
                            l_pair(l_var("x"), l_var("y")))) ==
        std::set<std::string>{"z"});
  CHECK(free_vars(u_lam("x", ut_unit(), u_var("x"))).empty());
  // A case arm binder only scopes over its own arm.
  auto c = l_case(l_var("s"), "x", l_var("x"), "y", l_var("x"));
  CHECK(free_vars(c) == std::set<std::string>{"s", "x"});
}

TEST_CASE("free_vars crosses boundaries, both sorts share one name space") {
  // fun (x : unit) -> UL { share (lump[Lump(unit)] (LU { x })) }
  auto e = u_lam("x", ut_unit(),
                 u_boundary(l_share(l_lumpop(lt_lump(ut_unit()),
                                             l_boundary(u_var("x"))))));
  CHECK(free_vars(e).empty());
  auto open_body = u_boundary(l_share(l_boundary(u_var("x"))));
  CHECK(free_vars(open_body) == std::set<std::string>{"x"});
}

TEST_CASE("locations_of") {
  CHECK(locations_of(l_loc(3)) == std::set<Location>{3});
  CHECK(locations_of(l_pair(l_loc(1), l_loc(2))) == std::set<Location>{1, 2});

  // Locations under a share are bound by its captured store.
  Store s;
  s.slots[1] = nullptr;
  StoreTyping st;
  st.entries[1] = st_dead(lt_one());
  CHECK(locations_of(l_share(s, st, l_loc(1))).empty());

  Store top;
  top.slots[4] = slot_full(Store{}, l_unit());
  top.slots[9] = nullptr;
  CHECK(locations_of(top) == std::set<Location>{4, 9});
}

TEST_CASE("collect_open_locations sees duplicates and nested stores") {
  std::vector<Location> out;
  collect_open_locations(l_pair(l_loc(1), l_loc(1)), out);
  CHECK(out == std::vector<Location>{1, 1});

  // A slot-local store is open; share internals are not.
  Store inner;
  inner.slots[7] = nullptr;
  Store top;
  top.slots[2] = slot_full(inner, l_loc(7));
  out.clear();
  collect_open_locations(top, out);
  CHECK(std::set<Location>(out.begin(), out.end()) ==
        std::set<Location>{2, 7, 7});
  CHECK(out.size() == 3); // the literal and the inner domain both count

  Store shst;
  shst.slots[5] = nullptr;
  StoreTyping shty;
  shty.entries[5] = st_dead(lt_one());
  out.clear();
  collect_open_locations(l_share(shst, shty, l_loc(5)), out);
  CHECK(out.empty());
}

TEST_CASE("max_location includes share internals") {
  Store shst;
  shst.slots[42] = nullptr;
  StoreTyping shty;
  shty.entries[42] = st_dead(lt_one());
  auto e = l_pair(l_loc(3), l_share(shst, shty, l_loc(42)));
  CHECK(max_location(e) == 42);
  CHECK(max_location(l_unit()) == -1);
}

TEST_CASE("pretty prints the concrete grammar") {
  CHECK(pretty(u_unit()) == "()");
  CHECK(pretty(lt_lolli(lt_var("t1"), lt_var("t2"))) == "t1 -o t2");
  auto boxtt = lt_tensor(lt_box(lt_var("t")), lt_var("t"));
  CHECK(pretty(lt_lolli(boxtt, boxtt)) == "(Box t * t) -o (Box t * t)");
  CHECK(pretty(lt_mu("a", lt_sum(lt_one(), lt_box(lt_var("a"))))) ==
        "mu a. 1 + Box a");
  CHECK(pretty(lt_bang(lt_lump(ut_unit()))) == "!Lump(unit)");
  CHECK(pretty(ut_arr(ut_prod(ut_var("a"), ut_var("b")), ut_unit())) ==
        "(a * b) -> unit");
  CHECK(pretty(u_lam("x", ut_unit(), u_var("x"))) == "fun (x : unit) -> x");
  CHECK(pretty(l_app(l_var("f"), l_var("x"))) == "f x");
  CHECK(pretty(l_free(l_new(l_unit()))) == "free (new ())");
  CHECK(pretty(l_loc(7)) == "#7");
}

TEST_CASE("duplicable holds exactly for bang types") {
  CHECK(duplicable(lt_bang(lt_one())));
  CHECK(duplicable(lt_bang(lt_bang(lt_one()))));
  CHECK_FALSE(duplicable(lt_one()));
  CHECK_FALSE(duplicable(lt_box(lt_bang(lt_one()))));
  CHECK_FALSE(duplicable(lt_lump(ut_unit())));
}

TEST_CASE("substitution: shadowing and capture avoidance") {
  // (fun (x : unit) -> x)[z/x] leaves the body alone.
  auto lam = u_lam("x", ut_unit(), u_var("x"));
  CHECK(alpha_equal(subst_u(lam, "x", u_var("z")), lam));

  // (fun (y : unit) -> (x, y))[y/x] must not capture the payload's y.
  auto e = u_lam("y", ut_unit(), u_pair(u_var("x"), u_var("y")));
  auto got = subst_u(e, "x", u_var("y"));
  auto want = u_lam("w", ut_unit(), u_pair(u_var("y"), u_var("w")));
  CHECK(alpha_equal(got, want));
  CHECK(free_vars(got) == std::set<std::string>{"y"});

  // Same through an L binder.
  auto el = l_lam("y", lt_one(), l_pair(l_var("x"), l_var("y")));
  auto gotl = subst_l(el, "x", l_var("y"));
  CHECK(alpha_equal(gotl, l_lam("w", lt_one(), l_pair(l_var("y"), l_var("w")))));
}

TEST_CASE("subst_name picks the payload by occurrence sort") {
  // The same definition name used from U code and from L code.
  auto e = u_pair(u_var("d"), u_boundary(l_share(l_lumpop(
                                  lt_lump(ut_unit()), l_boundary(u_var("d"))))));
  auto got = subst_name(e, "d", u_unit(), l_unit());
  CHECK(free_vars(got).empty());

  // Missing sort raises.
  auto l_use = l_new(l_var("d"));
  CHECK_THROWS_AS(subst_name(l_use, "d", u_unit(), nullptr), const ul::Error&);
}

namespace {

// Small random untyped terms for the substitution properties. Annotations are
// all `unit`; typedness is irrelevant to binding structure.
UEx random_uterm(std::mt19937_64& rng, int depth) {
  static const char* pool[] = {"a", "b", "c", "x", "y", "z"};
  auto var = [&] { return std::string(pool[rng() % 6]); };
  if (depth <= 0) return (rng() % 2) ? u_var(var()) : u_unit();
  switch (rng() % 7) {
  case 0: return u_var(var());
  case 1: return u_unit();
  case 2: return u_pair(random_uterm(rng, depth - 1), random_uterm(rng, depth - 1));
  case 3: return u_lam(var(), ut_unit(), random_uterm(rng, depth - 1));
  case 4:
    return u_app(random_uterm(rng, depth - 1), random_uterm(rng, depth - 1));
  case 5:
    return u_letunit(random_uterm(rng, depth - 1), random_uterm(rng, depth - 1));
  default:
    return u_case(random_uterm(rng, depth - 1), var(),
                  random_uterm(rng, depth - 1), var(),
                  random_uterm(rng, depth - 1));
  }
}

} // namespace

TEST_CASE("substitution properties on random terms") {
  std::mt19937_64 rng(20260819);
  for (int i = 0; i < 500; ++i) {
    UEx e = random_uterm(rng, 4);
    UEx p = random_uterm(rng, 3);
    std::string x(i % 2 ? "x" : "q"); // q never occurs: exercise the no-op path

    // Identity substitution is alpha-invisible.
    CHECK(alpha_equal(subst_u(e, x, u_var(x)), e));

    // Free variables after substitution.
    auto fe = free_vars(e);
    std::set<std::string> want;
    for (auto& n : fe)
      if (n != x) want.insert(n);
    if (fe.count(x))
      for (auto& n : free_vars(p)) want.insert(n);
    CHECK(free_vars(subst_u(e, x, p)) == want);
  }
}

TEST_CASE("substitution commutes with alpha-renaming") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    UEx e = random_uterm(rng, 4);
    UEx p = random_uterm(rng, 2);
    // Rename every binder by pushing the term through an identity
    // substitution of a fresh payload variable that collides with binders.
    UEx e2 = subst_u(subst_u(e, "x", u_var("tmp'renametest")), "tmp'renametest",
                     u_var("x"));
    REQUIRE(alpha_equal(e, e2));
    CHECK(alpha_equal(subst_u(e, "y", p), subst_u(e2, "y", p)));
  }
}

TEST_CASE("alpha equivalence") {
  CHECK(alpha_equal(u_lam("x", ut_unit(), u_var("x")),
                    u_lam("y", ut_unit(), u_var("y"))));
  CHECK_FALSE(alpha_equal(
      u_lam("x", ut_unit(), u_lam("y", ut_unit(), u_var("x"))),
      u_lam("x", ut_unit(), u_lam("y", ut_unit(), u_var("y")))));
  CHECK(alpha_equal(ut_mu("a", ut_var("a")), ut_mu("b", ut_var("b"))));
  CHECK(alpha_equal(lt_mu("a", lt_lolli(lt_var("a"), lt_one())),
                    lt_mu("b", lt_lolli(lt_var("b"), lt_one()))));
  CHECK_FALSE(alpha_equal(lt_var("a"), lt_var("b")));
  // Free variables compare by name.
  CHECK(alpha_equal(u_var("x"), u_var("x")));
  CHECK_FALSE(alpha_equal(u_var("x"), u_var("y")));
}

TEST_CASE("store join is partial, commutative, associative") {
  auto mk = [](std::initializer_list<std::pair<Location, bool>> dom) {
    Store s;
    for (auto [l, full] : dom)
      s.slots[l] = full ? slot_full(Store{}, l_unit()) : nullptr;
    return s;
  };

  auto a = mk({{0, true}, {1, false}});
  auto b = mk({{2, true}});
  auto c = mk({{3, false}, {4, true}});
  auto overlap = mk({{1, true}});

  CHECK_FALSE(Store::join(a, overlap).has_value());

  auto ab = Store::join(a, b);
  auto ba = Store::join(b, a);
  REQUIRE(ab.has_value());
  REQUIRE(ba.has_value());
  CHECK(alpha_equal(*ab, *ba));

  auto ab_c = Store::join(*ab, c);
  auto bc = Store::join(b, c);
  REQUIRE(bc.has_value());
  auto a_bc = Store::join(a, *bc);
  REQUIRE(ab_c.has_value());
  REQUIRE(a_bc.has_value());
  CHECK(alpha_equal(*ab_c, *a_bc));

  CHECK(ab->domain() == std::set<Location>{0, 1, 2});
}

TEST_CASE("rename_locations is uniform, including share internals") {
  Store shst;
  shst.slots[1] = nullptr;
  StoreTyping shty;
  shty.entries[1] = st_dead(lt_one());
  auto e = l_pair(l_loc(1), l_share(shst, shty, l_loc(1)));
  LocRenaming r{{1, 7}};
  auto e2 = rename_locations(e, r);
  CHECK(locations_of(e2) == std::set<Location>{7});
  CHECK(max_location(e2) == 7);
  // The share's captured domain moved with it.
  auto& sh = std::get<LShare>(std::get<LPair>(e2->v).r->v);
  CHECK(sh.store.domain() == std::set<Location>{7});
  CHECK(sh.styping.domain() == std::set<Location>{7});
}

TEST_CASE("equal_up_to_locations") {
  CHECK(equal_up_to_locations(l_pair(l_loc(1), l_loc(2)),
                              l_pair(l_loc(5), l_loc(9))));
  CHECK_FALSE(equal_up_to_locations(l_pair(l_loc(1), l_loc(1)),
                                    l_pair(l_loc(2), l_loc(3))));
  CHECK_FALSE(equal_up_to_locations(l_pair(l_loc(1), l_loc(2)),
                                    l_pair(l_loc(3), l_loc(3))));
  CHECK(equal_up_to_locations(l_lam("x", lt_one(), l_var("x")),
                              l_lam("y", lt_one(), l_var("y"))));

  // Configurations: the expression traversal fixes the store correspondence.
  Configuration c1, c2;
  c1.store.slots[0] = slot_full(Store{}, l_unit());
  c1.expr = l_loc(0);
  c2.store.slots[8] = slot_full(Store{}, l_unit());
  c2.expr = l_loc(8);
  CHECK(equal_up_to_locations(c1, c2));
  c2.store.slots[8] = nullptr;
  CHECK_FALSE(equal_up_to_locations(c1, c2));
}

TEST_CASE("values and the surface fragment") {
  CHECK(is_value_l(l_share(l_lam("x", lt_one(), l_var("x")))));
  CHECK(is_value_l(l_loc(0)));
  CHECK_FALSE(is_value_l(l_new(l_unit())));
  CHECK(is_value_u(u_tylam("a", u_lam("x", ut_var("a"), u_var("x")))));
  CHECK_FALSE(is_value_u(u_tylam("a", u_app(u_var("f"), u_unit()))));

  CHECK(is_surface_l(l_share(l_unit())));
  CHECK_FALSE(is_surface_l(l_loc(0)));
  Store s;
  s.slots[0] = nullptr;
  StoreTyping st;
  st.entries[0] = st_dead(lt_one());
  CHECK_FALSE(is_surface_l(l_share(s, st, l_loc(0))));
  CHECK(is_surface_u(u_boundary(l_share(l_unit()))));
}

TEST_CASE("mixed context lookup shadows by recency") {
  MixedContext ctx;
  ctx = ctx.with_u("x", ut_unit());
  ctx = ctx.with_l("x", lt_one());
  auto* e = ctx.lookup("x");
  REQUIRE(e != nullptr);
  CHECK(e->kind == MixedContext::Entry::Kind::LVar);
  CHECK(ctx.lookup("nope") == nullptr);
}

TEST_CASE("gensym returns parseable, distinct names") {
  auto a = gensym("x");
  auto b = gensym("x");
  CHECK(a != b);
  CHECK(a.find('\'') != std::string::npos);
  // Renaming a gensym name does not stack suffixes.
  auto c = gensym(a);
  CHECK(c.substr(0, 2) == "x'");
}
