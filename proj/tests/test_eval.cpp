#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "ul/ast.hpp"
#include "ul/errors.hpp"
#include "ul/eval.hpp"
#include "ul/parser.hpp"
#include "ul/pretty.hpp"
#include "ul/typecheck.hpp"

using namespace ul;

namespace {

URunOutcome go_u(const std::string& src, long fuel = 100000) {
  EvalOptions opt;
  opt.fuel = fuel;
  return run_u(parse_u(src), opt);
}

LRunOutcome go_l(const std::string& src, long fuel = 100000) {
  EvalOptions opt;
  opt.fuel = fuel;
  return run_l(Configuration{Store{}, parse_l(src)}, opt);
}

// The cells an expression mentions are exactly the cells its store binds.
// Deeper layers (slots, shares, boundaries) are enforced by re-typing.
bool hygienic(const Configuration& c) {
  return locations_of(c.expr) == c.store.domain();
}

// Step to the end, re-typing every intermediate configuration at the same
// type and checking location hygiene. Returns the final configuration.
Configuration stepped_run(Configuration c, long max_steps = 1000) {
  LocSupply locs = supply_for(c);
  EvalStats stats;
  LTy ty = typecheck_config(MixedContext{}, c).type;
  for (long i = 0; i < max_steps; ++i) {
    LStepResult r = step_l(c, locs, stats);
    if (r.kind == StepKind::Value) return c;
    REQUIRE(r.kind == StepKind::Stepped);
    c = r.config;
    REQUIRE(hygienic(c));
    LResult again = typecheck_config(MixedContext{}, c);
    REQUIRE(alpha_equal(again.type, ty));
  }
  FAIL("ran out of steps");
  return c;
}

} // namespace

TEST_CASE("U core rules reach the expected values") {
  auto value_of = [](const std::string& src) {
    URunOutcome out = go_u(src);
    REQUIRE(out.kind == URunOutcome::Kind::Value);
    return pretty(out.expr);
  };

  CHECK(value_of("(fun (x : unit) -> x) ()") == "()");
  CHECK(value_of("fst ((), ((), ()))") == "()");
  CHECK(value_of("snd ((), ((fun (y : unit) -> y) (), ()))") == "((), ())");
  CHECK(value_of("let () = () in ()") == "()");
  CHECK(value_of("case inl[unit + (unit * unit)] () of { inl x -> x | inr p -> fst p }") ==
        "()");
  CHECK(value_of("case inr[unit + (unit * unit)] ((), ()) of { inl x -> x | inr p -> fst p }") ==
        "()");
  CHECK(value_of("unfold (fold[mu a. unit] ())") == "()");
  CHECK(value_of("(Fun a -> fun (x : a) -> x)[unit] ()") == "()");
}

TEST_CASE("boundary hello world evaluates to unit") {
  UEx e = parse_u("UL { share (lump[Lump(unit)] (LU { () })) }");
  CHECK(pretty(typecheck_u(MixedContext{}, e)) == "unit");

  URunOutcome out = run_u(e);
  REQUIRE(out.kind == URunOutcome::Kind::Value);
  CHECK(alpha_equal(out.expr, parse_u("()")));
  CHECK(out.stats.boundary_crossings == 3); // LU lump, lump[], UL strip
  CHECK(out.stats.rule_fires.count("lu_lump") == 1);
  CHECK(out.stats.rule_fires.count("lump_conv") == 1);
  CHECK(out.stats.rule_fires.count("ul_strip") == 1);
}

TEST_CASE("unlump of a lumped unit becomes the shared unit") {
  LRunOutcome out = go_l("unlump[!1] (LU { () })");
  REQUIRE(out.kind == LRunOutcome::Kind::Value);
  CHECK(out.config.store.empty());
  CHECK(alpha_equal(out.config.expr, parse_l("share ()")));
  CHECK(out.stats.rule_fires.count("unlump_conv") == 1);
}

TEST_CASE("swap runs in place, reusing the given cell") {
  const std::string src =
      "(fun (p : Box !1 * !1) -o let (b, y) = p in let x@c = b in (y @ c, x))"
      "  ((share ()) @ (new ()), share ())";
  Configuration c{Store{}, parse_l(src)};
  CHECK(pretty(typecheck_config(MixedContext{}, c).type) == "Box !1 * !1");

  LRunOutcome out = run_l(c);
  REQUIRE(out.kind == LRunOutcome::Kind::Value);

  // The one cell ever allocated is the one handed back, now holding the
  // other component.
  CHECK(out.stats.new_allocs == 1);
  CHECK(out.stats.frees == 0);
  CHECK(out.stats.copies == 0);
  std::set<Location> dom = out.config.store.domain();
  REQUIRE(dom.size() == 1);
  Location cell = *dom.begin();
  CHECK(alpha_equal(out.config.expr, l_pair(l_loc(cell), parse_l("share ()"))));
  const Slot& slot = out.config.store.slots.at(cell);
  REQUIRE(slot != nullptr);
  CHECK(alpha_equal(slot->value, parse_l("share ()")));

  // Step-count golden, frozen at the first verified run: new, box, beta,
  // letpair, unbox, letpair, box.  Pair completion is a congruence, not a step.
  CHECK(out.steps_used == 7);

  // Every intermediate state re-types at the same type and stays hygienic.
  Configuration final = stepped_run(Configuration{Store{}, parse_l(src)});
  CHECK(alpha_equal(final.expr, out.config.expr));
}

TEST_CASE("stepping shows the store lifecycle the typing mirrors") {
  Configuration c{Store{}, parse_l("(share ()) @ (new ())")};
  LocSupply locs = supply_for(c);
  EvalStats stats;

  LStepResult s1 = step_l(c, locs, stats);
  REQUIRE(s1.kind == StepKind::Stepped);
  CHECK(s1.rule == "l_new");
  StoreTyping t1 = infer_store_typing(s1.config.store);
  REQUIRE(t1.entries.size() == 1);
  CHECK(std::holds_alternative<STDead>(t1.entries.begin()->second->v));

  LStepResult s2 = step_l(s1.config, locs, stats);
  REQUIRE(s2.kind == StepKind::Stepped);
  CHECK(s2.rule == "l_box");
  StoreTyping t2 = infer_store_typing(s2.config.store);
  REQUIRE(t2.entries.size() == 1);
  const auto* alive = std::get_if<STAlive>(&t2.entries.begin()->second->v);
  REQUIRE(alive != nullptr);
  CHECK(pretty(alive->type) == "!1");

  LStepResult s3 = step_l(s2.config, locs, stats);
  CHECK(s3.kind == StepKind::Value);
}

TEST_CASE("copy duplicates pairs, cells, and functions without aliasing") {
  SUBCASE("pair of units") {
    LRunOutcome out = go_l("copy (share ((), ()))");
    REQUIRE(out.kind == LRunOutcome::Kind::Value);
    CHECK(alpha_equal(out.config.expr, parse_l("((), ())")));
    CHECK(out.config.store.empty());
    CHECK(out.stats.copies == 3); // the pair, then each unit
    CHECK(out.stats.rule_fires.at("copy_pair") == 1);
    CHECK(out.stats.rule_fires.at("copy_unit") == 2);
  }

  SUBCASE("dead cell copies to a fresh allocation") {
    Store s;
    s.slots[0] = nullptr;
    StoreTyping st;
    st.entries[0] = st_dead(lt_one());
    Configuration c{Store{}, l_copy(l_share(s, st, l_loc(0)))};
    LRunOutcome out = run_l(c);
    REQUIRE(out.kind == LRunOutcome::Kind::Value);
    CHECK(out.config.store.domain() == std::set<Location>{1});
    CHECK(alpha_equal(out.config.expr, l_loc(1)));
    CHECK(out.stats.new_allocs == 1);
    CHECK(out.stats.rule_fires.at("copy_dead") == 1);
  }

  SUBCASE("alive cell copies cell and contents") {
    Store s;
    s.slots[0] = slot_full(Store{}, parse_l("share ()"));
    StoreTyping st;
    st.entries[0] = st_alive(MixedContext{}, StoreTyping{}, lt_bang(lt_one()));
    Configuration c{Store{}, l_copy(l_share(s, st, l_loc(0)))};
    LRunOutcome out = run_l(c);
    REQUIRE(out.kind == LRunOutcome::Kind::Value);
    CHECK(out.config.store.domain() == std::set<Location>{1});
    const Slot& slot = out.config.store.slots.at(1);
    REQUIRE(slot != nullptr);
    CHECK(alpha_equal(slot->value, parse_l("share ()")));
    CHECK(out.stats.rule_fires.at("copy_alive") == 1);
    CHECK(out.stats.rule_fires.at("copy_share") == 1);
  }

  SUBCASE("un-sharing a function freshens its captured cell") {
    // share({0 -> empty}, fun x -o let () = free #0 in x), applied to ().
    Store s;
    s.slots[0] = nullptr;
    StoreTyping st;
    st.entries[0] = st_dead(lt_one());
    LEx lam = l_lam("x", lt_one(), l_letunit(l_free(l_loc(0)), l_var("x")));
    LEx sh = l_share(s, st, lam);

    Configuration c{Store{}, l_app(l_copy(sh), l_unit())};
    LRunOutcome out = run_l(c);
    REQUIRE(out.kind == LRunOutcome::Kind::Value);
    CHECK(alpha_equal(out.config.expr, l_unit()));
    CHECK(out.config.store.empty());
    CHECK(out.stats.frees == 1);
    CHECK(out.stats.rule_fires.at("copy_lam") == 1);

    // Two copies of the same share get disjoint fresh cells.
    Configuration twice{Store{}, l_pair(l_app(l_copy(sh), l_unit()),
                                        l_app(l_copy(sh), l_unit()))};
    Configuration fin = stepped_run(twice);
    CHECK(alpha_equal(fin.expr, parse_l("((), ())")));
    CHECK(fin.store.empty());
  }
}

TEST_CASE("recursion sugar drives loops through copy and unfold") {
  // Free every cell of a two-element list of units.
  const std::string src =
      "(fix (f : (mu a. 1 + Box a) -o 1) l -o"
      "   case unfold l of {"
      "     inl u -> u"
      "   | inr b -> let tl@c = b in let () = free c in (copy f) tl })"
      " (fold[mu a. 1 + Box a] (inr[1 + Box (mu a. 1 + Box a)]"
      "   ((fold[mu a. 1 + Box a] (inl[1 + Box (mu a. 1 + Box a)] ())) @ (new ()))))";
  Configuration c{Store{}, parse_l(src)};
  CHECK(pretty(typecheck_config(MixedContext{}, c).type) == "1");

  LRunOutcome out = run_l(c);
  REQUIRE(out.kind == LRunOutcome::Kind::Value);
  CHECK(alpha_equal(out.config.expr, l_unit()));
  CHECK(out.config.store.empty());
  CHECK(out.stats.new_allocs == 1);
  CHECK(out.stats.frees == 1);
  CHECK(out.stats.rule_fires.count("l_unfold_fold") == 1);
  CHECK(out.stats.rule_fires.at("copy_lam") >= 1);
}

TEST_CASE("marks toggle phases and attribute counters") {
  SUBCASE("allocation inside a phase is attributed to it") {
    LRunOutcome out = go_l(
        "let () = mark work_begin () in"
        " let (u, c) = ((), new ()) in"
        " let () = u in"
        " let () = mark work_end () in free c");
    REQUIRE(out.kind == LRunOutcome::Kind::Value);
    CHECK(out.stats.new_allocs == 1);
    CHECK(out.stats.phase_new_allocs.at("work") == 1);
    CHECK(out.stats.frees == 1);
    CHECK(out.stats.active_phases.empty());
  }

  SUBCASE("allocation outside any phase is not attributed") {
    LRunOutcome out = go_l(
        "let () = mark work_begin () in"
        " let () = mark work_end () in"
        " free (new ())");
    REQUIRE(out.kind == LRunOutcome::Kind::Value);
    CHECK(out.stats.new_allocs == 1);
    // The phase reports explicitly, and reports zero: a quiet phase is
    // distinguishable from a phase that never ran.
    CHECK(out.stats.phase_new_allocs.at("work") == 0);
  }

  SUBCASE("U pair completions count per enclosing pair") {
    URunOutcome out = go_u(
        "let () = mark p_begin () in (((fun (x : unit) -> x) (), ()), ())");
    REQUIRE(out.kind == URunOutcome::Kind::Value);
    // One step finishes both the inner and the outer pair.
    CHECK(out.stats.u_pair_constructions == 2);
    CHECK(out.stats.phase_u_pairs.at("p") == 2);
  }

  SUBCASE("pairs born as values are not counted") {
    URunOutcome out = go_u("((), ())");
    REQUIRE(out.kind == URunOutcome::Kind::Value);
    CHECK(out.stats.u_pair_constructions == 0);
  }
}

TEST_CASE("fuel runs out on divergence") {
  const std::string omega =
      "(fun (x : mu a. (a -> unit)) -> (unfold x) x)"
      " (fold[mu a. (a -> unit)] (fun (x : mu a. (a -> unit)) -> (unfold x) x))";
  CHECK(pretty(typecheck_u(MixedContext{}, parse_u(omega))) == "unit");
  URunOutcome u = go_u(omega, 50);
  CHECK(u.kind == URunOutcome::Kind::OutOfFuel);
  CHECK(u.steps_used == 50);

  LRunOutcome l = go_l("(fix (f : 1 -o 1) x -o (copy f) x) ()", 100);
  CHECK(l.kind == LRunOutcome::Kind::OutOfFuel);
  CHECK(l.steps_used == 100);
}

TEST_CASE("stuck states carry honest reasons") {
  URunOutcome bad_app = run_u(u_app(u_unit(), u_unit()));
  REQUIRE(bad_app.kind == URunOutcome::Kind::Stuck);
  CHECK(bad_app.stuck.find("application head") != std::string::npos);

  Store full;
  full.slots[0] = slot_full(Store{}, l_unit());
  LRunOutcome bad_free = run_l(Configuration{full, l_free(l_loc(0))});
  REQUIRE(bad_free.kind == LRunOutcome::Kind::Stuck);
  CHECK(bad_free.stuck.find("full cell") != std::string::npos);

  Store dead;
  dead.slots[0] = nullptr;
  LRunOutcome bad_unbox = run_l(Configuration{dead, l_unbox(l_loc(0))});
  REQUIRE(bad_unbox.kind == LRunOutcome::Kind::Stuck);
  CHECK(bad_unbox.stuck.find("empty cell") != std::string::npos);

  LRunOutcome bad_case =
      run_l(Configuration{Store{}, l_case(l_unit(), "x", l_var("x"), "y", l_var("y"))});
  REQUIRE(bad_case.kind == LRunOutcome::Kind::Stuck);
  CHECK(bad_case.stuck.find("non-injection") != std::string::npos);
}

TEST_CASE("mutants break observably") {
  SUBCASE("NoFreshen aliases the cells of two copies") {
    Store s;
    s.slots[0] = nullptr;
    StoreTyping st;
    st.entries[0] = st_dead(lt_one());
    LEx lam = l_lam("x", lt_one(), l_letunit(l_free(l_loc(0)), l_var("x")));
    LEx sh = l_share(s, st, lam);
    // Both copies must be alive at once, or each free hides the aliasing.
    Configuration twice{
        Store{},
        l_letpair("f", "g", l_pair(l_copy(sh), l_copy(sh)),
                  l_pair(l_app(l_var("f"), l_unit()),
                         l_app(l_var("g"), l_unit())))};

    EvalOptions mut;
    mut.mutation = EvalMutation::NoFreshen;
    LocSupply locs = supply_for(twice);
    EvalStats stats;
    Configuration c = twice;
    bool anomaly = false;
    for (int i = 0; i < 100; ++i) {
      LStepResult r = step_l(c, locs, stats, mut);
      if (r.kind == StepKind::Stuck) {
        anomaly = true;
        break;
      }
      if (r.kind == StepKind::Value) break;
      c = r.config;
      if (!hygienic(c)) {
        anomaly = true;
        break;
      }
      try {
        typecheck_config(MixedContext{}, c);
      } catch (const Error&) {
        anomaly = true;  // aliased release consumes one cell twice
        break;
      }
    }
    CHECK(anomaly);

    // The sound evaluator finishes the same program cleanly.
    Configuration fin = stepped_run(twice);
    CHECK(alpha_equal(fin.expr, parse_l("((), ())")));
  }

  SUBCASE("WrongCopySplit produces an ill-typed successor") {
    Store s;
    s.slots[0] = nullptr;
    StoreTyping st;
    st.entries[0] = st_dead(lt_one());
    Configuration c{Store{}, l_copy(l_share(s, st, l_pair(l_unit(), l_loc(0))))};

    EvalOptions mut;
    mut.mutation = EvalMutation::WrongCopySplit;
    LocSupply locs = supply_for(c);
    EvalStats stats;
    LStepResult r = step_l(c, locs, stats, mut);
    REQUIRE(r.kind == StepKind::Stepped);
    CHECK(r.rule == "copy_pair");
    CHECK_THROWS_AS(typecheck_config(MixedContext{}, r.config), Error);

    // The sound split re-types at every step.
    Configuration fin = stepped_run(c);
    CHECK(fin.store.domain().size() == 1);
  }

  SUBCASE("SkipBoundaryConversion leaves the lump unconverted") {
    EvalOptions mut;
    mut.mutation = EvalMutation::SkipBoundaryConversion;
    LRunOutcome out =
        run_l(Configuration{Store{}, parse_l("unlump[!1] (LU { () })")}, mut);
    REQUIRE(out.kind == LRunOutcome::Kind::Value);
    CHECK(std::holds_alternative<LLump>(out.config.expr->v));
    CHECK_FALSE(alpha_equal(out.config.expr, parse_l("share ()")));
  }

  SUBCASE("FoldUnfoldNonCancelling keeps the fold") {
    EvalOptions mut;
    mut.mutation = EvalMutation::FoldUnfoldNonCancelling;
    URunOutcome out = run_u(parse_u("unfold (fold[mu a. unit] ())"), mut);
    REQUIRE(out.kind == URunOutcome::Kind::Value);
    CHECK(alpha_equal(out.expr, parse_u("fold[mu a. unit] ()")));
    URunOutcome sound = go_u("unfold (fold[mu a. unit] ())");
    CHECK(alpha_equal(sound.expr, parse_u("()")));
  }
}

TEST_CASE("traces record one event per step") {
  std::vector<TraceEvent> trace;
  EvalOptions opt;
  opt.trace = &trace;
  URunOutcome out = run_u(parse_u("UL { share (lump[Lump(unit)] (LU { () })) }"), opt);
  REQUIRE(out.kind == URunOutcome::Kind::Value);
  REQUIRE(trace.size() == static_cast<std::size_t>(out.steps_used));

  const auto& names = eval_rule_names();
  for (std::size_t i = 0; i < trace.size(); ++i) {
    CHECK(trace[i].step == static_cast<long>(i));
    CHECK(std::find(names.begin(), names.end(), trace[i].rule) != names.end());
    CHECK_FALSE(trace[i].pos.empty());
  }
}

TEST_CASE("evaluation is deterministic") {
  const std::string src =
      "(fun (p : Box !1 * !1) -o let (b, y) = p in let x@c = b in (y @ c, x))"
      "  ((share ()) @ (new ()), share ())";
  std::vector<TraceEvent> t1, t2;
  EvalOptions o1, o2;
  o1.trace = &t1;
  o2.trace = &t2;
  LRunOutcome r1 = run_l(Configuration{Store{}, parse_l(src)}, o1);
  LRunOutcome r2 = run_l(Configuration{Store{}, parse_l(src)}, o2);
  REQUIRE(r1.kind == LRunOutcome::Kind::Value);
  REQUIRE(t1.size() == t2.size());
  for (std::size_t i = 0; i < t1.size(); ++i) {
    CHECK(t1[i].rule == t2[i].rule);
    CHECK(t1[i].pos == t2[i].pos);
  }
  CHECK(alpha_equal(r1.config.expr, r2.config.expr));
}

TEST_CASE("bang values produced by evaluation are shares") {
  // Value inversion, observed on evaluator output.
  for (const std::string& src : {
           std::string("copy (share (share ()))"),
           std::string("unlump[!1] (LU { () })"),
           std::string("unlump[!(!1 -o !1)] (LU { fun (x : unit) -> x })"),
       }) {
    LRunOutcome out = go_l(src);
    REQUIRE(out.kind == LRunOutcome::Kind::Value);
    CHECK(std::holds_alternative<LShare>(out.config.expr->v));
  }
}
