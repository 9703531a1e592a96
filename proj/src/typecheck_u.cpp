#include <string>

#include "ul/errors.hpp"
#include "ul/pretty.hpp"
#include "ul/typecheck.hpp"

namespace ul {

namespace {

std::string snippet(const UEx& e) {
  std::string s = pretty(e);
  if (s.size() > 60) s = s.substr(0, 57) + "...";
  return s;
}

struct UCheck {
  const MixedContext& ctx;
  const UEx& e;

  UTy go(const UEx& sub) const { return typecheck_u(ctx, sub); }

  UTy operator()(const UVar& n) const {
    const auto* entry = ctx.lookup(n.name);
    if (!entry) throw Error(Errc::UnboundVariable, "'" + n.name + "' is not bound");
    switch (entry->kind) {
      case MixedContext::Entry::Kind::UVar:
        break;
      case MixedContext::Entry::Kind::LVar:
        throw Error(Errc::UnboundVariable, "'" + n.name + "' is an L variable, used in U code");
      case MixedContext::Entry::Kind::UTyVar:
        throw Error(Errc::UnboundVariable, "'" + n.name + "' is a type variable, used as a term");
    }
    return entry->utype;
  }

  UTy operator()(const UUnit&) const { return ut_unit(); }

  UTy operator()(const UPair& n) const { return ut_prod(go(n.l), go(n.r)); }

  UTy operator()(const UFst& n) const {
    UTy t = go(n.e);
    auto* prod = std::get_if<UTProd>(&t->v);
    if (!prod) throw Error(Errc::TypeMismatch, "fst needs a pair, got " + pretty(t), snippet(e));
    return prod->l;
  }

  UTy operator()(const USnd& n) const {
    UTy t = go(n.e);
    auto* prod = std::get_if<UTProd>(&t->v);
    if (!prod) throw Error(Errc::TypeMismatch, "snd needs a pair, got " + pretty(t), snippet(e));
    return prod->r;
  }

  UTy operator()(const ULetUnit& n) const {
    UTy t = go(n.rhs);
    if (!std::holds_alternative<UTUnit>(t->v))
      throw Error(Errc::TypeMismatch, "let () needs a unit, got " + pretty(t), snippet(e));
    return go(n.body);
  }

  UTy operator()(const ULam& n) const {
    return ut_arr(n.ann, typecheck_u(ctx.with_u(n.var, n.ann), n.body));
  }

  UTy operator()(const UApp& n) const {
    UTy f = go(n.fn);
    auto* arr = std::get_if<UTArr>(&f->v);
    if (!arr)
      throw Error(Errc::TypeMismatch, "applied a non-function of type " + pretty(f), snippet(e));
    UTy a = go(n.arg);
    if (!alpha_equal(a, arr->dom))
      throw Error(Errc::TypeMismatch,
                  "argument has type " + pretty(a) + ", expected " + pretty(arr->dom), snippet(e));
    return arr->cod;
  }

  UTy operator()(const UInj& n) const {
    auto* sum = std::get_if<UTSum>(&n.ann->v);
    if (!sum)
      throw Error(Errc::TypeMismatch, "injection annotation " + pretty(n.ann) + " is not a sum",
                  snippet(e));
    UTy t = go(n.e);
    const UTy& want = n.which == 1 ? sum->l : sum->r;
    if (!alpha_equal(t, want))
      throw Error(Errc::TypeMismatch, "injected " + pretty(t) + " into " + pretty(n.ann),
                  snippet(e));
    return n.ann;
  }

  UTy operator()(const UCase& n) const {
    UTy s = go(n.scrut);
    auto* sum = std::get_if<UTSum>(&s->v);
    if (!sum)
      throw Error(Errc::TypeMismatch, "case scrutinee has type " + pretty(s), snippet(e));
    UTy l = typecheck_u(ctx.with_u(n.lvar, sum->l), n.lbody);
    UTy r = typecheck_u(ctx.with_u(n.rvar, sum->r), n.rbody);
    if (!alpha_equal(l, r))
      throw Error(Errc::TypeMismatch, "branches disagree: " + pretty(l) + " vs " + pretty(r),
                  snippet(e));
    return l;
  }

  UTy operator()(const UFold& n) const {
    auto* mu = std::get_if<UTMu>(&n.ann->v);
    if (!mu)
      throw Error(Errc::TypeMismatch, "fold annotation " + pretty(n.ann) + " is not recursive",
                  snippet(e));
    UTy t = go(n.e);
    UTy want = subst_ty(mu->body, mu->var, n.ann);
    if (!alpha_equal(t, want))
      throw Error(Errc::TypeMismatch, "folded " + pretty(t) + ", expected " + pretty(want),
                  snippet(e));
    return n.ann;
  }

  UTy operator()(const UUnfold& n) const {
    UTy t = go(n.e);
    auto* mu = std::get_if<UTMu>(&t->v);
    if (!mu)
      throw Error(Errc::TypeMismatch, "unfolded a non-recursive " + pretty(t), snippet(e));
    return subst_ty(mu->body, mu->var, t);
  }

  UTy operator()(const UTyLam& n) const {
    if (!is_value_u(n.body))
      throw Error(Errc::NonValueUnderTypeAbstraction, snippet(n.body));
    return ut_all(n.var, typecheck_u(ctx.with_tyvar(n.var), n.body));
  }

  UTy operator()(const UTyApp& n) const {
    UTy t = go(n.e);
    auto* all = std::get_if<UTAll>(&t->v);
    if (!all)
      throw Error(Errc::TypeMismatch, "type-applied a non-polymorphic " + pretty(t), snippet(e));
    return subst_ty(all->body, all->var, n.arg);
  }

  UTy operator()(const UMark& n) const { return go(n.e); }

  UTy operator()(const UBoundary& n) const {
    validate_store(n.store, n.styping);
    LResult r = typecheck_l_internal(ctx, n.styping, n.inner);
    if (!r.usage.consumed_vars.empty())
      throw Error(Errc::NonDuplicableLinearInScope,
                  "linear variable '" + *r.usage.consumed_vars.begin() +
                      "' is consumed under a U boundary",
                  snippet(e));
    auto dom = n.store.domain();
    if (r.usage.consumed_locs != dom) {
      for (Location l : dom)
        if (!r.usage.consumed_locs.count(l))
          throw Error(Errc::LocationUnused, "cell #" + std::to_string(l) + " is never consumed",
                      snippet(e));
    }
    auto* bang = std::get_if<LTBang>(&r.type->v);
    const LTLump* lump = bang ? std::get_if<LTLump>(&bang->inner->v) : nullptr;
    if (!lump)
      throw Error(Errc::BoundaryTypeNotLumped, "boundary body has type " + pretty(r.type),
                  snippet(e));
    return lump->inner;
  }
};

} // namespace

UTy typecheck_u(const MixedContext& ctx, const UEx& e) { return std::visit(UCheck{ctx, e}, e->v); }

} // namespace ul
