#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ul/ast.hpp"
#include "ul/errors.hpp"
#include "ul/parser.hpp"
#include "ul/pretty.hpp"

using namespace ul;

TEST_CASE("type precedence") {
  CHECK(alpha_equal(parse_uty("a -> b -> c"),
                    ut_arr(ut_var("a"), ut_arr(ut_var("b"), ut_var("c")))));
  CHECK(alpha_equal(parse_uty("a * b + c -> d"),
                    ut_arr(ut_sum(ut_prod(ut_var("a"), ut_var("b")), ut_var("c")),
                           ut_var("d"))));
  CHECK(alpha_equal(parse_uty("mu a. unit + a"),
                    ut_mu("a", ut_sum(ut_unit(), ut_var("a")))));
  CHECK(alpha_equal(parse_uty("forall a. a -> a"),
                    ut_all("a", ut_arr(ut_var("a"), ut_var("a")))));

  CHECK(alpha_equal(parse_lty("!Box a * b"),
                    lt_tensor(lt_bang(lt_box(lt_var("a"))), lt_var("b"))));
  CHECK(alpha_equal(parse_lty("a -o b -o c"),
                    lt_lolli(lt_var("a"), lt_lolli(lt_var("b"), lt_var("c")))));
  CHECK(alpha_equal(parse_lty("Box0 + 1"), lt_sum(lt_box0(), lt_one())));
  CHECK(alpha_equal(parse_lty("!Lump(unit -> unit)"),
                    lt_bang(lt_lump(ut_arr(ut_unit(), ut_unit())))));
  CHECK(alpha_equal(parse_lty("(Box t * t) -o (Box t * t)"),
                    parse_lty("Box t * t -o Box t * t")));
}

TEST_CASE("term structure") {
  CHECK(alpha_equal(parse_u("fst (x, y)"),
                    u_fst(u_pair(u_var("x"), u_var("y")))));
  CHECK(alpha_equal(parse_u("f x y"),
                    u_app(u_app(u_var("f"), u_var("x")), u_var("y"))));
  CHECK(alpha_equal(parse_u("fst x y"),
                    u_app(u_fst(u_var("x")), u_var("y"))));
  CHECK(alpha_equal(parse_u("f[unit] x"),
                    u_app(u_tyapp(u_var("f"), ut_unit()), u_var("x"))));
  CHECK(alpha_equal(
      parse_u("Fun a -> fun (x : a) -> x"),
      u_tylam("a", u_lam("x", ut_var("a"), u_var("x")))));
  CHECK(alpha_equal(
      parse_u("case s of { inl a -> f a | inr b -> () }"),
      u_case(u_var("s"), "a", u_app(u_var("f"), u_var("a")), "b", u_unit())));
  CHECK(alpha_equal(parse_u("let () = e in ()"),
                    u_letunit(u_var("e"), u_unit())));
  CHECK(alpha_equal(parse_u("UL { share () }"),
                    u_boundary(l_share(l_unit()))));
  CHECK(alpha_equal(parse_l("LU { () }"), l_boundary(u_unit())));
  CHECK(alpha_equal(parse_l("let (x, y) = p in (y, x)"),
                    l_letpair("x", "y", l_var("p"),
                              l_pair(l_var("y"), l_var("x")))));
  CHECK(alpha_equal(parse_l("lump[!1] (share ())"),
                    l_lumpop(lt_bang(lt_one()), l_share(l_unit()))));
  CHECK(alpha_equal(parse_u("mark phase_begin x"),
                    u_mark("phase_begin", u_var("x"))));
}

TEST_CASE("box sugar") {
  // e @ c == box (c, e)
  CHECK(alpha_equal(parse_l("x @ c"),
                    l_box(l_pair(l_var("c"), l_var("x")))));
  // f x@c applies f to the boxed atom
  CHECK(alpha_equal(parse_l("f x @ c"),
                    l_app(l_var("f"), l_box(l_pair(l_var("c"), l_var("x"))))));
  CHECK(alpha_equal(parse_l("let (x, y)@c = e in x"),
                    parse_l("let (c, w) = unbox e in let (x, y) = w in x")));
  CHECK(alpha_equal(parse_l("let x@c = e in x"),
                    parse_l("let (c, x) = unbox e in x")));
}

TEST_CASE("fix expands to the self-application encoding") {
  auto e = parse_l("fix (f : 1 -o 1) x -o (copy f) x");
  // (unfold (copy G)) G with G a share of a fold of a lambda
  auto* app = std::get_if<LApp>(&e->v);
  REQUIRE(app != nullptr);
  auto* unf = std::get_if<LUnfold>(&app->fn->v);
  REQUIRE(unf != nullptr);
  auto* cp = std::get_if<LCopy>(&unf->e->v);
  REQUIRE(cp != nullptr);
  auto* g = std::get_if<LShare>(&cp->e->v);
  REQUIRE(g != nullptr);
  CHECK(std::holds_alternative<LFold>(g->body->v));
  CHECK(alpha_equal(app->arg, cp->e));
  CHECK(free_vars(e).empty());
  CHECK(is_surface_l(e));
}

TEST_CASE("round trip: parse after pretty is alpha-equal") {
  const char* samples[] = {
      "fun (x : unit) -> x",
      "Fun a -> fun (p : a * a) -> (snd p, fst p)",
      "fold[mu a. unit + a] (inr[unit + (mu a. unit + a)] (fold[mu a. unit + a] (inl[unit + (mu a. unit + a)] ())))",
      "let () = f x in case g y of { inl a -> a | inr b -> h b }",
      "UL { share (lump[Lump(unit)] (LU { () })) }",
      "fun (f : forall a. a -> a) -> f[unit] ()",
  };
  for (auto* s : samples) {
    auto e1 = parse_u(s);
    auto e2 = parse_u(pretty(e1));
    CHECK_MESSAGE(alpha_equal(e1, e2), "sample: ", s);
  }
  const char* lsamples[] = {
      "fun (x : 1) -o x",
      "fun (p : Box t * t) -o let (b, v) = p in let (w, c) = unbox b in (v @ c, w)",
      "share (fun (x : !1) -o copy x)",
      "case s of { inl a -> free a | inr b -> b }",
      "fix (f : (mu a. 1 + Box(1 * a)) -o 1) li -o case unfold li of { inl u -> u | inr cell -> let (h, t)@c = cell in let () = free c in let () = h in (copy f) t }",
      "unlump[!1] (LU { x })",
      "new ()",
      "box (c, v)",
      "mark m (f x)",
  };
  for (auto* s : lsamples) {
    auto e1 = parse_l(s);
    auto e2 = parse_l(pretty(e1));
    CHECK_MESSAGE(alpha_equal(e1, e2), "sample: ", s);
  }
}

TEST_CASE("files, defs, and elaboration") {
  auto f = parse_file(R"(
-- a file with both sorts of definitions
def uid = fun (x : unit) -> x
def lid = fun (x : 1) -o x
def both = ()
main = uid (both, uid ())
)");
  REQUIRE(f.defs.size() == 3);
  CHECK(f.defs[0].u != nullptr);
  CHECK(f.defs[0].l == nullptr);
  CHECK(f.defs[1].u == nullptr);
  CHECK(f.defs[1].l != nullptr);
  CHECK(f.defs[2].u != nullptr);
  CHECK(f.defs[2].l != nullptr);
  REQUIRE(f.main.has_value());

  auto prog = elaborate(f);
  REQUIRE(prog.main.has_value());
  CHECK(free_vars(*prog.main).empty());
  CHECK(alpha_equal(*prog.main,
                    parse_u("(fun (x : unit) -> x) ((), (fun (x : unit) -> x) ())")));
}

TEST_CASE("elaboration picks the reading by occurrence sort") {
  auto f = parse_file(R"(
def v = ()
main = let () = v in UL { share (lump[Lump(unit)] (LU { v })) }
)");
  auto prog = elaborate(f);
  REQUIRE(prog.main.has_value());
  CHECK(free_vars(*prog.main).empty());

  // An L-only definition used from U code is an unbound-name error.
  auto bad = parse_file(R"(
def lonly = fun (x : 1) -o x
main = lonly ()
)");
  CHECK_THROWS_WITH_AS(elaborate(bad), doctest::Contains("lonly"),
                       const ul::Error&);
}

TEST_CASE("elaboration inlines through later defs and respects shadowing") {
  auto f = parse_file(R"(
def one = ()
def use = fun (one : unit) -> (one, one)
main = use ()
)");
  auto prog = elaborate(f);
  // The binder `one` inside `use` shadows the definition.
  CHECK(alpha_equal(*prog.main,
                    parse_u("(fun (z : unit) -> (z, z)) ()")));

  auto g = parse_file(R"(
def a = ()
def b = (a, a)
main = (b, a)
)");
  auto pg = elaborate(g);
  CHECK(alpha_equal(*pg.main, parse_u("(((), ()), ())")));
}

TEST_CASE("unbound names are reported") {
  auto f = parse_file("main = missing ()");
  CHECK_THROWS_AS(elaborate(f), const ul::Error&);
  try {
    elaborate(f);
  } catch (const Error& e) {
    CHECK(e.code == Errc::UnboundName);
    CHECK(e.header().find("E020") == 0);
  }
}

TEST_CASE("type abbreviations expand at use sites") {
  auto f = parse_file(R"(
type Pair(a) = a * a
type LL(t) = mu l. 1 + Box(t * l)
def swap = fun (p : Pair(unit)) -> (snd p, fst p)
def nil = fold[LL(!1)] (inl[1 + Box(!1 * (LL(!1)))] ())
main = swap ((), ())
)");
  REQUIRE(f.defs.size() == 2);
  auto& lam = std::get<ULam>(f.defs[0].u->v);
  CHECK(alpha_equal(lam.ann, ut_prod(ut_unit(), ut_unit())));
  auto& fold = std::get<LFold>(f.defs[1].l->v);
  CHECK(alpha_equal(fold.ann,
                    lt_mu("l", lt_sum(lt_one(),
                                      lt_box(lt_tensor(lt_bang(lt_one()),
                                                       lt_var("l")))))));
}

TEST_CASE("parse errors carry position and expectations") {
  try {
    parse_u("fun (x : unit) ->");
    FAIL("should have thrown");
  } catch (const Error& e) {
    CHECK(e.code == Errc::ParseError);
    CHECK(e.detail.find("line 1") != std::string::npos);
    CHECK(e.detail.find("end of input") != std::string::npos);
  }
  try {
    parse_file("def = ()");
    FAIL("should have thrown");
  } catch (const Error& e) {
    CHECK(e.code == Errc::ParseError);
    CHECK(e.detail.find("definition name") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_l("let (x y) = p in x"), const ul::Error&);
  CHECK_THROWS_AS(parse_u("()()("), const ul::Error&);
  CHECK_THROWS_AS(parse_uty("unit -> 1"), const ul::Error&);
}

TEST_CASE("lexer details") {
  // Comments and primes in identifiers.
  CHECK(alpha_equal(parse_u("x' -- trailing comment\n"), u_var("x'")));
  // -o lexes as one token only when not continuing an identifier.
  CHECK(alpha_equal(parse_lty("a -o b"), lt_lolli(lt_var("a"), lt_var("b"))));
  CHECK_THROWS_AS(parse_lty("a-ob"), const ul::Error&); // '-' continues nothing
}

TEST_CASE("main must be a U term and files end cleanly") {
  CHECK_THROWS_AS(parse_file("main = fun (x : 1) -o x"), const ul::Error&);
  CHECK_THROWS_AS(parse_file("def d = () ]"), const ul::Error&);
}
