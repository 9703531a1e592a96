#include <algorithm>
#include <string>

#include "ul/errors.hpp"
#include "ul/interop.hpp"
#include "ul/pretty.hpp"
#include "ul/typecheck.hpp"

namespace ul {

namespace {

std::string snippet(const LEx& e) {
  std::string s = pretty(e);
  if (s.size() > 60) s = s.substr(0, 57) + "...";
  return s;
}

std::string show_usage(const UsageReport& u) {
  std::string out = "{";
  bool first = true;
  for (const auto& v : u.consumed_vars) {
    if (!first) out += ", ";
    out += v;
    first = false;
  }
  for (Location l : u.consumed_locs) {
    if (!first) out += ", ";
    out += "#" + std::to_string(l);
    first = false;
  }
  return out + "}";
}

} // namespace

UsageReport merge_usage(const UsageReport& a, const UsageReport& b) {
  UsageReport out = a;
  for (const auto& v : b.consumed_vars)
    if (!out.consumed_vars.insert(v).second)
      throw Error(Errc::LinearVariableReused, "'" + v + "' is consumed twice");
  for (Location l : b.consumed_locs)
    if (!out.consumed_locs.insert(l).second)
      throw Error(Errc::LocationReused, "cell #" + std::to_string(l) + " is consumed twice");
  return out;
}

UsageReport ctxjoin(const MixedContext& ctx, const UsageReport& a, const UsageReport& b) {
  UsageReport out = a;
  for (const auto& v : b.consumed_vars) {
    if (out.consumed_vars.count(v)) {
      // Only duplicable sharing is joinable, and reported variables are the
      // linear ones by construction.
      const auto* entry = ctx.lookup(v);
      bool dup = entry && entry->kind == MixedContext::Entry::Kind::LVar && duplicable(entry->ltype);
      if (!dup)
        throw Error(Errc::SharedLinearVariable,
                    "'" + v + "' is shared between independent derivations");
    }
    out.consumed_vars.insert(v);
  }
  for (Location l : b.consumed_locs)
    if (!out.consumed_locs.insert(l).second)
      throw Error(Errc::LocationReused,
                  "cell #" + std::to_string(l) + " is shared between independent derivations");
  return out;
}

namespace {

// Checks binder consumption on scope exit and strips the binder from the
// report so outer occurrences of the same name stay attributed correctly.
void release_binder(const std::string& x, const LTy& t, UsageReport& u, const LEx& site) {
  if (!duplicable(t) && !u.consumed_vars.count(x))
    throw Error(Errc::LinearVariableUnused,
                "'" + x + "' : " + pretty(t) + " is never consumed", snippet(site));
  u.consumed_vars.erase(x);
}

LResult check(const MixedContext& ctx, const StoreTyping& styping, const LEx& e);

struct LCheck {
  const MixedContext& ctx;
  const StoreTyping& styping;
  const LEx& e;

  LResult go(const LEx& sub) const { return check(ctx, styping, sub); }

  LResult operator()(const LVar& n) const {
    const auto* entry = ctx.lookup(n.name);
    if (!entry) throw Error(Errc::UnboundVariable, "'" + n.name + "' is not bound");
    switch (entry->kind) {
      case MixedContext::Entry::Kind::LVar:
        break;
      case MixedContext::Entry::Kind::UVar:
        throw Error(Errc::UnboundVariable, "'" + n.name + "' is a U variable, used in L code");
      case MixedContext::Entry::Kind::UTyVar:
        throw Error(Errc::UnboundVariable, "'" + n.name + "' is a type variable, used as a term");
    }
    UsageReport u;
    if (!duplicable(entry->ltype)) u.consumed_vars.insert(n.name);
    return {entry->ltype, u};
  }

  LResult operator()(const LUnit&) const { return {lt_one(), {}}; }

  LResult operator()(const LPair& n) const {
    LResult l = go(n.l), r = go(n.r);
    return {lt_tensor(l.type, r.type), merge_usage(l.usage, r.usage)};
  }

  LResult operator()(const LLetPair& n) const {
    LResult rhs = go(n.rhs);
    auto* prod = std::get_if<LTTensor>(&rhs.type->v);
    if (!prod)
      throw Error(Errc::TypeMismatch, "let (_, _) needs a pair, got " + pretty(rhs.type),
                  snippet(e));
    LResult body = check(ctx.with_l(n.v1, prod->l).with_l(n.v2, prod->r), styping, n.body);
    release_binder(n.v2, prod->r, body.usage, e);
    release_binder(n.v1, prod->l, body.usage, e);
    return {body.type, merge_usage(rhs.usage, body.usage)};
  }

  LResult operator()(const LLetUnit& n) const {
    LResult rhs = go(n.rhs);
    if (!std::holds_alternative<LTOne>(rhs.type->v))
      throw Error(Errc::TypeMismatch, "let () needs a 1, got " + pretty(rhs.type), snippet(e));
    LResult body = go(n.body);
    return {body.type, merge_usage(rhs.usage, body.usage)};
  }

  LResult operator()(const LLam& n) const {
    LResult body = check(ctx.with_l(n.var, n.ann), styping, n.body);
    release_binder(n.var, n.ann, body.usage, e);
    return {lt_lolli(n.ann, body.type), body.usage};
  }

  LResult operator()(const LApp& n) const {
    LResult f = go(n.fn), a = go(n.arg);
    auto* arr = std::get_if<LTLolli>(&f.type->v);
    if (!arr)
      throw Error(Errc::TypeMismatch, "applied a non-function of type " + pretty(f.type),
                  snippet(e));
    if (!alpha_equal(a.type, arr->dom))
      throw Error(Errc::TypeMismatch,
                  "argument has type " + pretty(a.type) + ", expected " + pretty(arr->dom),
                  snippet(e));
    return {arr->cod, merge_usage(f.usage, a.usage)};
  }

  LResult operator()(const LInj& n) const {
    auto* sum = std::get_if<LTSum>(&n.ann->v);
    if (!sum)
      throw Error(Errc::TypeMismatch, "injection annotation " + pretty(n.ann) + " is not a sum",
                  snippet(e));
    LResult arg = go(n.e);
    const LTy& want = n.which == 1 ? sum->l : sum->r;
    if (!alpha_equal(arg.type, want))
      throw Error(Errc::TypeMismatch,
                  "injected " + pretty(arg.type) + " into " + pretty(n.ann), snippet(e));
    return {n.ann, arg.usage};
  }

  LResult operator()(const LCase& n) const {
    LResult s = go(n.scrut);
    auto* sum = std::get_if<LTSum>(&s.type->v);
    if (!sum)
      throw Error(Errc::TypeMismatch, "case scrutinee has type " + pretty(s.type), snippet(e));
    LResult l = check(ctx.with_l(n.lvar, sum->l), styping, n.lbody);
    release_binder(n.lvar, sum->l, l.usage, e);
    LResult r = check(ctx.with_l(n.rvar, sum->r), styping, n.rbody);
    release_binder(n.rvar, sum->r, r.usage, e);
    if (!alpha_equal(l.type, r.type))
      throw Error(Errc::TypeMismatch,
                  "branches disagree: " + pretty(l.type) + " vs " + pretty(r.type), snippet(e));
    if (!(l.usage == r.usage))
      throw Error(Errc::BranchUsageMismatch,
                  "left consumes " + show_usage(l.usage) + ", right consumes " +
                      show_usage(r.usage),
                  snippet(e));
    return {l.type, merge_usage(s.usage, l.usage)};
  }

  LResult operator()(const LFold& n) const {
    auto* mu = std::get_if<LTMu>(&n.ann->v);
    if (!mu)
      throw Error(Errc::TypeMismatch, "fold annotation " + pretty(n.ann) + " is not recursive",
                  snippet(e));
    LResult arg = go(n.e);
    LTy want = subst_ty_l(mu->body, mu->var, n.ann);
    if (!alpha_equal(arg.type, want))
      throw Error(Errc::TypeMismatch,
                  "folded " + pretty(arg.type) + ", expected " + pretty(want), snippet(e));
    return {n.ann, arg.usage};
  }

  LResult operator()(const LUnfold& n) const {
    LResult arg = go(n.e);
    auto* mu = std::get_if<LTMu>(&arg.type->v);
    if (!mu)
      throw Error(Errc::TypeMismatch, "unfolded a non-recursive " + pretty(arg.type), snippet(e));
    return {subst_ty_l(mu->body, mu->var, arg.type), arg.usage};
  }

  LResult operator()(const LShare& n) const {
    validate_store(n.store, n.styping);
    // The captured store is the whole world of the body: ambient locations
    // are invisible, ambient linear variables must stay untouched.
    LResult body = check(ctx, n.styping, n.body);
    if (!body.usage.consumed_vars.empty())
      throw Error(Errc::ShareCapturesLinear,
                  "'" + *body.usage.consumed_vars.begin() + "' is linear but captured by share",
                  snippet(e));
    auto dom = n.store.domain();
    if (body.usage.consumed_locs != dom) {
      for (Location l : dom)
        if (!body.usage.consumed_locs.count(l))
          throw Error(Errc::LocationUnused,
                      "cell #" + std::to_string(l) + " is never consumed", snippet(e));
    }
    return {lt_bang(body.type), {}};
  }

  LResult operator()(const LCopy& n) const {
    LResult arg = go(n.e);
    auto* bang = std::get_if<LTBang>(&arg.type->v);
    if (!bang)
      throw Error(Errc::CopyOfNonBang, "copied a value of type " + pretty(arg.type), snippet(e));
    return {bang->inner, arg.usage};
  }

  LResult operator()(const LNew& n) const {
    LResult arg = go(n.e);
    if (!std::holds_alternative<LTOne>(arg.type->v))
      throw Error(Errc::TypeMismatch, "new needs a 1, got " + pretty(arg.type), snippet(e));
    return {lt_box0(), arg.usage};
  }

  LResult operator()(const LFree& n) const {
    LResult arg = go(n.e);
    if (!std::holds_alternative<LTBox0>(arg.type->v))
      throw Error(Errc::TypeMismatch, "free needs a Box0, got " + pretty(arg.type), snippet(e));
    return {lt_one(), arg.usage};
  }

  LResult operator()(const LBox& n) const {
    LResult arg = go(n.e);
    auto* prod = std::get_if<LTTensor>(&arg.type->v);
    if (!prod || !std::holds_alternative<LTBox0>(prod->l->v))
      throw Error(Errc::TypeMismatch, "box needs a Box0 * t pair, got " + pretty(arg.type),
                  snippet(e));
    return {lt_box(prod->r), arg.usage};
  }

  LResult operator()(const LUnbox& n) const {
    LResult arg = go(n.e);
    auto* box = std::get_if<LTBox>(&arg.type->v);
    if (!box)
      throw Error(Errc::TypeMismatch, "unbox needs a Box, got " + pretty(arg.type), snippet(e));
    return {lt_tensor(lt_box0(), box->inner), arg.usage};
  }

  LResult operator()(const LLoc& n) const {
    auto it = styping.entries.find(n.loc);
    if (it == styping.entries.end())
      throw Error(Errc::StoreMismatch,
                  "cell #" + std::to_string(n.loc) + " is not in the active store typing");
    UsageReport u;
    u.consumed_locs.insert(n.loc);
    if (std::holds_alternative<STDead>(it->second->v)) return {lt_box0(), u};
    return {lt_box(std::get<STAlive>(it->second->v).type), u};
  }

  LResult operator()(const LLump& n) const {
    if (!is_value_u(n.value))
      throw Error(Errc::NotTypable, "lumped term is not a value", snippet(e));
    return {lt_lump(typecheck_u(ctx, n.value)), {}};
  }

  LResult operator()(const LBoundary& n) const {
    return {lt_lump(typecheck_u(ctx, n.inner)), {}};
  }

  LResult operator()(const LLumpOp& n) const {
    auto tau = recover_u(n.ann);
    if (!tau)
      throw Error(Errc::NotInImage, "lump annotation " + pretty(n.ann), snippet(e));
    LResult arg = go(n.e);
    if (!alpha_equal(arg.type, n.ann))
      throw Error(Errc::TypeMismatch,
                  "lump[" + pretty(n.ann) + "] applied to " + pretty(arg.type), snippet(e));
    return {lt_lump(*tau), arg.usage};
  }

  LResult operator()(const LUnlumpOp& n) const {
    auto tau = recover_u(n.ann);
    if (!tau)
      throw Error(Errc::NotInImage, "unlump annotation " + pretty(n.ann), snippet(e));
    LResult arg = go(n.e);
    if (!alpha_equal(arg.type, lt_lump(*tau)))
      throw Error(Errc::TypeMismatch,
                  "unlump[" + pretty(n.ann) + "] applied to " + pretty(arg.type), snippet(e));
    return {n.ann, arg.usage};
  }

  LResult operator()(const LMark& n) const { return go(n.e); }
};

LResult check(const MixedContext& ctx, const StoreTyping& styping, const LEx& e) {
  return std::visit(LCheck{ctx, styping, e}, e->v);
}

} // namespace

LResult typecheck_l_internal(const MixedContext& ctx, const StoreTyping& styping, const LEx& e) {
  return check(ctx, styping, e);
}

LResult typecheck_l_surface(const MixedContext& ctx, const LEx& e) {
  if (!is_surface_l(e))
    throw Error(Errc::NotTypable, "term contains internal forms (locations or lumped values)");
  return check(ctx, StoreTyping{}, e);
}

void validate_store(const Store& store, const StoreTyping& styping) {
  if (store.domain() != styping.domain())
    throw Error(Errc::StoreMismatch, "store and store typing have different domains");
  for (const auto& [loc, slot] : store.slots) {
    const STEntryP& entry = styping.entries.at(loc);
    if (std::holds_alternative<STDead>(entry->v)) {
      if (slot)
        throw Error(Errc::DeadLocationHoldsValue, "cell #" + std::to_string(loc));
      continue;
    }
    const auto& alive = std::get<STAlive>(entry->v);
    if (!slot) throw Error(Errc::AliveLocationEmpty, "cell #" + std::to_string(loc));
    for (const auto& ce : alive.ctx.entries)
      if (ce.kind == MixedContext::Entry::Kind::LVar && !duplicable(ce.ltype))
        throw Error(Errc::NotTypable,
                    "store typing context holds linear variable '" + ce.name + "'");
    if (!is_value_l(slot->value))
      throw Error(Errc::NotTypable, "stored term at #" + std::to_string(loc) + " is not a value");
    validate_store(slot->local, alive.inner);
    LResult r = check(alive.ctx, alive.inner, slot->value);
    if (!alpha_equal(r.type, alive.type))
      throw Error(Errc::TypeMismatch,
                  "cell #" + std::to_string(loc) + " holds " + pretty(r.type) + ", typed as " +
                      pretty(alive.type));
    if (r.usage.consumed_locs != slot->local.domain())
      throw Error(Errc::LocationUnused,
                  "stored value at #" + std::to_string(loc) + " does not consume its local store");
  }
}

StoreTyping infer_store_typing(const Store& store) {
  StoreTyping out = StoreTyping{};
  for (const auto& [loc, slot] : store.slots) {
    if (!slot) {
      out.entries[loc] = st_dead(lt_one());
      continue;
    }
    if (!is_value_l(slot->value))
      throw Error(Errc::NotTypable, "stored term at #" + std::to_string(loc) + " is not a value");
    StoreTyping inner = infer_store_typing(slot->local);
    LResult r = check(MixedContext{}, inner, slot->value);
    if (r.usage.consumed_locs != slot->local.domain())
      throw Error(Errc::LocationUnused,
                  "stored value at #" + std::to_string(loc) + " does not consume its local store");
    out.entries[loc] = st_alive(MixedContext{}, inner, r.type);
  }
  return out;
}

LResult typecheck_config(const MixedContext& ctx, const Configuration& c) {
  StoreTyping styping = infer_store_typing(c.store);
  LResult r = check(ctx, styping, c.expr);
  auto dom = c.store.domain();
  if (r.usage.consumed_locs != dom) {
    for (Location l : dom)
      if (!r.usage.consumed_locs.count(l))
        throw Error(Errc::LocationUnused, "cell #" + std::to_string(l) + " is never consumed");
  }
  return r;
}

} // namespace ul
