#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ul/ast.hpp"
#include "ul/errors.hpp"
#include "ul/pretty.hpp"
#include "ul/testkit.hpp"
#include "ul/typecheck.hpp"

using namespace ul;

namespace {

template <class... Ts> struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

void collect_kinds(const LEx& e, std::set<std::size_t>& out);

void collect_kinds_u(const UEx& e, std::set<std::size_t>& out) {
  std::visit(
      overloaded{
          [&](const UVar&) {}, [&](const UUnit&) {},
          [&](const UPair& n) { collect_kinds_u(n.l, out); collect_kinds_u(n.r, out); },
          [&](const UFst& n) { collect_kinds_u(n.e, out); },
          [&](const USnd& n) { collect_kinds_u(n.e, out); },
          [&](const ULetUnit& n) { collect_kinds_u(n.rhs, out); collect_kinds_u(n.body, out); },
          [&](const ULam& n) { collect_kinds_u(n.body, out); },
          [&](const UApp& n) { collect_kinds_u(n.fn, out); collect_kinds_u(n.arg, out); },
          [&](const UInj& n) { collect_kinds_u(n.e, out); },
          [&](const UCase& n) {
            collect_kinds_u(n.scrut, out);
            collect_kinds_u(n.lbody, out);
            collect_kinds_u(n.rbody, out);
          },
          [&](const UFold& n) { collect_kinds_u(n.e, out); },
          [&](const UUnfold& n) { collect_kinds_u(n.e, out); },
          [&](const UTyLam& n) { collect_kinds_u(n.body, out); },
          [&](const UTyApp& n) { collect_kinds_u(n.e, out); },
          [&](const UMark& n) { collect_kinds_u(n.e, out); },
          [&](const UBoundary& n) { collect_kinds(n.inner, out); },
      },
      e->v);
}

void collect_kinds(const LEx& e, std::set<std::size_t>& out) {
  out.insert(e->v.index());
  std::visit(
      overloaded{
          [&](const LVar&) {}, [&](const LUnit&) {}, [&](const LLoc&) {},
          [&](const LPair& n) { collect_kinds(n.l, out); collect_kinds(n.r, out); },
          [&](const LLetPair& n) { collect_kinds(n.rhs, out); collect_kinds(n.body, out); },
          [&](const LLetUnit& n) { collect_kinds(n.rhs, out); collect_kinds(n.body, out); },
          [&](const LLam& n) { collect_kinds(n.body, out); },
          [&](const LApp& n) { collect_kinds(n.fn, out); collect_kinds(n.arg, out); },
          [&](const LInj& n) { collect_kinds(n.e, out); },
          [&](const LCase& n) {
            collect_kinds(n.scrut, out);
            collect_kinds(n.lbody, out);
            collect_kinds(n.rbody, out);
          },
          [&](const LFold& n) { collect_kinds(n.e, out); },
          [&](const LUnfold& n) { collect_kinds(n.e, out); },
          [&](const LShare& n) { collect_kinds(n.body, out); },
          [&](const LCopy& n) { collect_kinds(n.e, out); },
          [&](const LNew& n) { collect_kinds(n.e, out); },
          [&](const LFree& n) { collect_kinds(n.e, out); },
          [&](const LBox& n) { collect_kinds(n.e, out); },
          [&](const LUnbox& n) { collect_kinds(n.e, out); },
          [&](const LLump& n) { collect_kinds_u(n.value, out); },
          [&](const LBoundary& n) { collect_kinds_u(n.inner, out); },
          [&](const LLumpOp& n) { collect_kinds(n.e, out); },
          [&](const LUnlumpOp& n) { collect_kinds(n.e, out); },
          [&](const LMark& n) { collect_kinds(n.e, out); },
      },
      e->v);
}

std::size_t kind_of(const LEx& e) { return e->v.index(); }

} // namespace

TEST_CASE("generated U terms typecheck at the requested type") {
  std::vector<UTy> targets = {
      ut_unit(),
      ut_prod(ut_unit(), ut_unit()),
      ut_sum(ut_unit(), ut_unit()),
      ut_arr(ut_unit(), ut_unit()),
      ut_mu("a", ut_sum(ut_unit(), ut_var("a"))),
      ut_all("a", ut_arr(ut_var("a"), ut_var("a"))),
  };
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    for (std::size_t k = 0; k < targets.size(); ++k) {
      UEx e;
      try {
        e = gen_u_term(MixedContext{}, targets[k], 1 + static_cast<int>(seed % 8),
                       seed * 131 + k);
      } catch (const Error& err) {
        REQUIRE(err.code == Errc::Uninhabited);
        continue;
      }
      UTy got = typecheck_u(MixedContext{}, e);
      CAPTURE(pretty(e));
      REQUIRE(alpha_equal(got, targets[k]));
      ++checked;
    }
  }
  CHECK(checked > 250);
}

TEST_CASE("generated configurations typecheck and cover the surface syntax") {
  std::vector<LTy> targets = {
      lt_one(),
      lt_bang(lt_one()),
      lt_box0(),
      lt_box(lt_bang(lt_one())),
      lt_tensor(lt_bang(lt_one()), lt_box(lt_bang(lt_one()))),
      lt_sum(lt_one(), lt_tensor(lt_box0(), lt_one())),
      lt_bang(lt_lolli(lt_bang(lt_one()), lt_bang(lt_one()))),
      lt_lump(ut_unit()),
      lt_bang(lt_lump(ut_sum(ut_unit(), ut_unit()))),
      lt_mu("a", lt_sum(lt_one(), lt_box(lt_tensor(lt_bang(lt_one()), lt_var("a"))))),
  };
  std::set<std::size_t> seen;
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    for (std::size_t k = 0; k < targets.size(); ++k) {
      Configuration c;
      try {
        c = gen_l_config(MixedContext{}, targets[k], 2 + static_cast<int>(seed % 7),
                         seed * 977 + k);
      } catch (const Error& err) {
        REQUIRE(err.code == Errc::Uninhabited);
        continue;
      }
      CAPTURE(pretty(c));
      LResult r = typecheck_config(MixedContext{}, c);
      REQUIRE(alpha_equal(r.type, targets[k]));
      collect_kinds(c.expr, seen);
      ++checked;
    }
  }
  CHECK(checked > 500);

  const std::pair<const char*, LEx> required[] = {
      {"var", l_var("x")},
      {"unit", l_unit()},
      {"pair", l_pair(l_unit(), l_unit())},
      {"letpair", l_letpair("a", "b", l_unit(), l_unit())},
      {"letunit", l_letunit(l_unit(), l_unit())},
      {"lam", l_lam("x", lt_one(), l_unit())},
      {"app", l_app(l_unit(), l_unit())},
      {"inj", l_inj(1, lt_sum(lt_one(), lt_one()), l_unit())},
      {"case", l_case(l_unit(), "a", l_unit(), "b", l_unit())},
      {"fold", l_fold(lt_mu("a", lt_one()), l_unit())},
      {"unfold", l_unfold(l_unit())},
      {"share", l_share(l_unit())},
      {"copy", l_copy(l_unit())},
      {"new", l_new(l_unit())},
      {"free", l_free(l_unit())},
      {"box", l_box(l_unit())},
      {"unbox", l_unbox(l_unit())},
      {"loc", l_loc(0)},
      {"lu boundary", l_boundary(u_unit())},
      {"lump coercion", l_lumpop(lt_bang(lt_one()), l_unit())},
      {"unlump coercion", l_unlumpop(lt_bang(lt_one()), l_unit())},
  };
  for (const auto& [name, ex] : required) {
    CAPTURE(name);
    CHECK(seen.count(kind_of(ex)));
  }
  // Internal forms never come out of the generator.
  CHECK(!seen.count(kind_of(l_lump(u_unit()))));
  CHECK(!seen.count(kind_of(l_mark("m", l_unit()))));
}

TEST_CASE("subject reduction holds on the sound stepper") {
  PropertyReport r = check_subject_reduction(150, 40, 42);
  for (const auto& n : r.notes) { CAPTURE(n); CHECK(false); }
  CHECK(r.failures == 0);
  CHECK(r.samples > 100);
  CHECK(r.property == "subject_reduction");
}

TEST_CASE("direct runs agree with the functional translation") {
  PropertyReport r = check_differential(120, 3000, 43);
  for (const auto& n : r.notes) { CAPTURE(n); CHECK(false); }
  CHECK(r.failures == 0);
  CHECK(r.samples > 80);
}

TEST_CASE("every stepper mutation is caught") {
  PropertyReport r = check_mutation_sanity(80, 44);
  CHECK(r.failures == 0);
  REQUIRE(r.notes.size() == 4);
  for (const auto& n : r.notes) {
    CAPTURE(n);
    CHECK(n.find("NOT caught") == std::string::npos);
  }
}

TEST_CASE("at most one U type is compatible with each L type") {
  PropertyReport r = check_compat_determinism(5);
  for (const auto& n : r.notes) { CAPTURE(n); CHECK(false); }
  CHECK(r.failures == 0);
  CHECK(r.counters.at("l_types") > 100);
  CHECK(r.counters.at("u_types") > 10);
  CHECK(r.counters.at("image_types") > 0);
}

TEST_CASE("boundary conversions round trip on image types") {
  PropertyReport r = check_conversion_roundtrip(60, 12, 45);
  for (const auto& n : r.notes) { CAPTURE(n); CHECK(false); }
  CHECK(r.failures == 0);
  CHECK(r.samples > 40);
}

TEST_CASE("translation commutes with plugging a context") {
  PropertyReport r = check_compositionality_pairs(40, 46);
  for (const auto& n : r.notes) { CAPTURE(n); CHECK(false); }
  CHECK(r.failures == 0);
  CHECK(r.counters.at("contexts_using_hole") > 0);
}

TEST_CASE("every head rule fires across the coverage batch") {
  PropertyReport r = check_rule_coverage(150, 47);
  for (const auto& n : r.notes) { CAPTURE(n); CHECK(false); }
  CHECK(r.failures == 0);
}

TEST_CASE("reports are deterministic in the seed") {
  PropertyReport a = check_subject_reduction(40, 30, 12345);
  PropertyReport b = check_subject_reduction(40, 30, 12345);
  CHECK(a.property == b.property);
  CHECK(a.samples == b.samples);
  CHECK(a.failures == b.failures);
  CHECK(a.skipped == b.skipped);
  CHECK(a.seed == b.seed);
  CHECK(a.notes == b.notes);
  CHECK(a.counters == b.counters);
}

TEST_CASE("empty batches produce empty reports") {
  PropertyReport r = check_subject_reduction(0, 10, 7);
  CHECK(r.samples == 0);
  CHECK(r.failures == 0);
  CHECK(r.skipped == 0);
}

TEST_CASE("report rendering") {
  PropertyReport r = check_subject_reduction(8, 10, 9);
  std::string text = report_text(r);
  CHECK(text.find("subject_reduction") != std::string::npos);
  CHECK(text.find("samples: 8") != std::string::npos);
  std::string json = reports_json({r});
  CHECK(json.find("\"property\"") != std::string::npos);
  CHECK(json.find("\"runtime_ms\"") != std::string::npos);
}

TEST_CASE("uninhabited requests raise the dedicated error") {
  try {
    gen_u_term(MixedContext{}, ut_var("a"), 3, 1);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code == Errc::Uninhabited);
  }
  try {
    gen_l_config(MixedContext{}, lt_var("a"), 3, 2);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code == Errc::Uninhabited);
  }
}
