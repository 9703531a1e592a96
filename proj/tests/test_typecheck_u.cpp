#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <optional>

#include "ul/ast.hpp"
#include "ul/errors.hpp"
#include "ul/parser.hpp"
#include "ul/pretty.hpp"
#include "ul/typecheck.hpp"

using namespace ul;

namespace {

UTy type_of(const std::string& src) { return typecheck_u(MixedContext{}, parse_u(src)); }

std::optional<Errc> code_of_u(const std::string& src) {
  try {
    type_of(src);
  } catch (const Error& err) {
    return err.code;
  }
  return std::nullopt;
}

} // namespace

TEST_CASE("simply typed core") {
  CHECK(pretty(type_of("()")) == "unit");
  CHECK(pretty(type_of("((), ())")) == "unit * unit");
  CHECK(pretty(type_of("fun (x : unit) -> x")) == "unit -> unit");
  CHECK(pretty(type_of("fst ((), fun (x : unit) -> x)")) == "unit");
  CHECK(pretty(type_of("snd ((), fun (x : unit) -> x)")) == "unit -> unit");
  CHECK(pretty(type_of("(fun (x : unit) -> (x, x)) ()")) == "unit * unit");
  CHECK(pretty(type_of("let () = () in ()")) == "unit");
  CHECK(pretty(type_of("inl[unit + (unit -> unit)] ()")) == "unit + (unit -> unit)");
  CHECK(pretty(type_of("case inr[unit + unit] () of { inl a -> a | inr b -> b }")) == "unit");
}

TEST_CASE("recursive and polymorphic types") {
  CHECK(pretty(type_of("fold[mu a. unit + a] (inl[unit + (mu a. unit + a)] ())")) ==
        "mu a. unit + a");
  CHECK(pretty(type_of("fun (n : mu a. unit + a) -> unfold n")) ==
        "(mu a. unit + a) -> (unit + (mu a. unit + a))");
  CHECK(pretty(type_of("Fun a -> fun (x : a) -> x")) == "forall a. a -> a");
  CHECK(pretty(type_of("(Fun a -> fun (x : a) -> x)[unit -> unit]")) ==
        "(unit -> unit) -> unit -> unit");
  CHECK(pretty(type_of("(Fun a -> fun (x : a) -> x)[unit] ()")) == "unit");

  // Annotations only need to agree up to renaming of bound type variables.
  CHECK(pretty(type_of("(fun (n : mu a. unit + a) -> n) (fold[mu b. unit + b] "
                       "(inl[unit + (mu b. unit + b)] ()))")) == "mu a. unit + a");
}

TEST_CASE("value restriction") {
  CHECK(code_of_u("Fun a -> fun (x : a) -> x") == std::nullopt);
  CHECK(code_of_u("Fun a -> (fun (x : unit) -> x) ()") == Errc::NonValueUnderTypeAbstraction);
  // Pairs of values are values, so they stay allowed.
  CHECK(code_of_u("Fun a -> (fun (x : a) -> x, ())") == std::nullopt);
}

TEST_CASE("error cases") {
  CHECK(code_of_u("y") == Errc::UnboundVariable);
  CHECK(code_of_u("() ()") == Errc::TypeMismatch);
  CHECK(code_of_u("fst ()") == Errc::TypeMismatch);
  CHECK(code_of_u("(fun (x : unit -> unit) -> x) ()") == Errc::TypeMismatch);
  CHECK(code_of_u("case () of { inl a -> a | inr b -> b }") == Errc::TypeMismatch);
  CHECK(code_of_u("case inl[unit + unit] () of { inl a -> a | inr b -> (b, b) }") ==
        Errc::TypeMismatch);
  CHECK(code_of_u("unfold ()") == Errc::TypeMismatch);
  CHECK(code_of_u("()[unit]") == Errc::TypeMismatch);
  CHECK(code_of_u("inl[unit] ()") == Errc::TypeMismatch);
}

TEST_CASE("boundary typing") {
  // The hello-world of the two-language setup.
  CHECK(pretty(type_of("UL { share (lump[Lump(unit)] (LU { () })) }")) == "unit");

  // A U variable is visible inside nested boundaries.
  CHECK(pretty(type_of("fun (x : unit) -> UL { share (lump[Lump(unit)] (LU { x })) }")) ==
        "unit -> unit");

  // An L function crosses as its recovered U type.
  CHECK(pretty(type_of("UL { share (lump[!(!1 -o !1)] (share (fun (x : !1) -o x))) }")) ==
        "unit -> unit");

  // An L binder shadows a U binder of the same name inside the boundary.
  CHECK(pretty(type_of("fun (x : unit) -> UL { share (lump[!(!1 -o !1)] (share (fun (x : !1) "
                       "-o x))) }")) == "unit -> unit -> unit");

  // Boundary bodies must come back shared and lumped.
  CHECK(code_of_u("UL { share () }") == Errc::BoundaryTypeNotLumped);
  CHECK(code_of_u("UL { fun (x : Lump(unit)) -o x }") == Errc::BoundaryTypeNotLumped);

  // L variables do not leak into U code.
  CHECK(code_of_u("UL { share (lump[Lump(unit)] (LU { UL { share (lump[Lump(unit)] (LU { z "
                  "})) } })) }") == Errc::UnboundVariable);
}

TEST_CASE("linear variables cannot cross a boundary") {
  // The body consumes x outside any share, so the failure is the boundary's,
  // not share's.
  MixedContext ctx = MixedContext{}.with_l("x", lt_one());
  UEx inner = parse_u("UL { let () = x in share (lump[!1] (share ())) }");
  try {
    typecheck_u(ctx, inner);
    FAIL("expected a boundary error");
  } catch (const Error& err) {
    CHECK(err.code == Errc::NonDuplicableLinearInScope);
    CHECK(err.detail.find("'x'") != std::string::npos);
  }
}

TEST_CASE("marks are transparent") {
  CHECK(pretty(type_of("mark phase_begin (fun (x : unit) -> mark phase_end x)")) ==
        "unit -> unit");
}
