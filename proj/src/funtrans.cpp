#include "ul/funtrans.hpp"

#include <set>
#include <stdexcept>
#include <string>

#include "ul/interop.hpp"
#include "ul/typecheck.hpp"

namespace ul {

namespace {

template <class... Ts> struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  if (!avoid.count(base)) return base;
  for (int i = 0;; ++i) {
    std::string c = base + std::to_string(i);
    if (!avoid.count(c)) return c;
  }
}

} // namespace

std::string location_var(Location l) { return "loc$" + std::to_string(l); }

UTy funtrans_type(const LTy& t) {
  return std::visit(
      overloaded{
          [](const LTVar& n) { return ut_var(n.name); },
          [](const LTOne&) { return ut_unit(); },
          [](const LTTensor& n) {
            return ut_prod(funtrans_type(n.l), funtrans_type(n.r));
          },
          [](const LTLolli& n) {
            return ut_arr(funtrans_type(n.dom), funtrans_type(n.cod));
          },
          [](const LTSum& n) {
            return ut_sum(funtrans_type(n.l), funtrans_type(n.r));
          },
          [](const LTMu& n) { return ut_mu(n.var, funtrans_type(n.body)); },
          [](const LTBang& n) { return funtrans_type(n.inner); },
          [](const LTBox& n) {
            return ut_prod(ut_unit(), funtrans_type(n.inner));
          },
          [](const LTBox0&) { return ut_unit(); },
          [](const LTLump& n) { return n.inner; },
      },
      t->v);
}

// --- lump/unlump coercions ---------------------------------------------------
//
// recover_u strips Box layers while the type translation pads them with
// unit * _, so the two sides of a lump differ exactly at Box positions. The
// coercions below bridge them, term-directed by the L type: identity wherever
// no Box occurs, pair padding/stripping at Box, contravariant flip at -o, and
// a fixpoint at mu (one function handling both directions through a sum, so a
// single fix serves types whose variable occurs on either side of an arrow).

namespace {

// What each mu binder in scope coerces through: its two endpoint types and
// the recursive coercions, one per direction. pad goes recover -> translated.
struct CoBind {
  UEx pad, strip;
  UTy rec, tgt;
};
using CoEnv = std::map<std::string, CoBind>;

std::set<std::string> co_keys(const CoEnv& env) {
  std::set<std::string> out;
  for (const auto& [k, v] : env) out.insert(k);
  return out;
}

// True when the coercion at s is the identity: no Box in any compatibility
// position and no variable of an enclosing non-identity mu.
bool co_ident(const LTy& s, std::set<std::string> nonident) {
  return std::visit(
      overloaded{
          [&](const LTVar& n) { return !nonident.count(n.name); },
          [](const LTOne&) { return true; },
          [&](const LTTensor& n) {
            return co_ident(n.l, nonident) && co_ident(n.r, nonident);
          },
          [&](const LTLolli& n) {
            return co_ident(n.dom, nonident) && co_ident(n.cod, nonident);
          },
          [&](const LTSum& n) {
            return co_ident(n.l, nonident) && co_ident(n.r, nonident);
          },
          [&](const LTMu& n) {
            auto inner = nonident;
            inner.erase(n.var);
            return co_ident(n.body, inner);
          },
          [&](const LTBang& n) { return co_ident(n.inner, nonident); },
          [](const LTBox&) { return false; },
          [](const LTBox0&) { return false; },
          [](const LTLump&) { return true; },
      },
      s->v);
}

// Endpoint types with the enclosing mu binders substituted out. A nested mu
// binder is freshened when a substituted type happens to mention its name.
UTy co_end(const LTy& s, const CoEnv& env, bool target) {
  return std::visit(
      overloaded{
          [&](const LTVar& n) {
            auto it = env.find(n.name);
            if (it == env.end()) return ut_var(n.name);
            return target ? it->second.tgt : it->second.rec;
          },
          [](const LTOne&) { return ut_unit(); },
          [&](const LTTensor& n) {
            return ut_prod(co_end(n.l, env, target), co_end(n.r, env, target));
          },
          [&](const LTLolli& n) {
            return ut_arr(co_end(n.dom, env, target), co_end(n.cod, env, target));
          },
          [&](const LTSum& n) {
            return ut_sum(co_end(n.l, env, target), co_end(n.r, env, target));
          },
          [&](const LTMu& n) {
            std::set<std::string> avoid;
            for (const auto& [k, b] : env) {
              for (const auto& v : free_tyvars(b.rec)) avoid.insert(v);
              for (const auto& v : free_tyvars(b.tgt)) avoid.insert(v);
            }
            std::string binder = fresh_name(n.var, avoid);
            CoEnv inner = env;
            inner[n.var] = CoBind{{}, {}, ut_var(binder), ut_var(binder)};
            return ut_mu(binder, co_end(n.body, inner, target));
          },
          [&](const LTBang& n) { return co_end(n.inner, env, target); },
          [&](const LTBox& n) {
            if (!target) return co_end(n.inner, env, target);
            return ut_prod(ut_unit(), co_end(n.inner, env, target));
          },
          [&](const LTBox0&) { return ut_unit(); },
          [&](const LTLump& n) { return n.inner; },
      },
      s->v);
}

// An expression of type tau that loops forever. Placed only in case arms the
// coercion dispatcher never takes.
UEx diverge_at(const UTy& tau) {
  UTy td = ut_mu("dv", ut_arr(ut_var("dv"), tau));
  UEx om = u_lam("w", td, u_app(u_unfold(u_var("w")), u_var("w")));
  return u_app(om, u_fold(td, om));
}

// fix : ((a -> b) -> a -> b) -> a -> b, by self-application through a mu
// type. The recursive reference is eta-expanded so the knot is a value.
UEx ufix(const UTy& a, const UTy& b, const UEx& functional) {
  UTy ab = ut_arr(a, b);
  UTy t0 = ut_mu("fx", ut_arr(ut_var("fx"), ab));
  UEx self = u_lam("a", a,
                   u_app(u_app(u_unfold(u_var("z")), u_var("z")), u_var("a")));
  UEx w = u_lam("z", t0, u_app(functional, self));
  return u_app(w, u_fold(t0, w));
}

UEx co_fn(const LTy& s, const CoEnv& env, bool pad);

// Coerce `arg` at s, skipping the wrapper entirely when it would be the
// identity. pad goes recover -> translated, strip the other way.
UEx co_app(const LTy& s, const CoEnv& env, bool pad, UEx arg) {
  if (co_ident(s, co_keys(env))) return arg;
  return u_app(co_fn(s, env, pad), arg);
}

// The coercion as a function value. All binders here are internal to the
// construction: coercion terms are closed except for enclosing fix variables,
// which get a distinct name per nesting depth.
UEx co_fn(const LTy& s, const CoEnv& env, bool pad) {
  UTy dom = co_end(s, env, !pad);
  UTy cod = co_end(s, env, pad);
  if (co_ident(s, co_keys(env))) return u_lam("x", dom, u_var("x"));
  return std::visit(
      overloaded{
          [&](const LTVar& n) {
            const CoBind& b = env.at(n.name);
            return pad ? b.pad : b.strip;
          },
          [&](const LTTensor& n) {
            return u_lam("p", dom,
                         u_pair(co_app(n.l, env, pad, u_fst(u_var("p"))),
                                co_app(n.r, env, pad, u_snd(u_var("p")))));
          },
          [&](const LTSum& n) {
            return u_lam(
                "s0", dom,
                u_case(u_var("s0"),
                       "xl", u_inj(1, cod, co_app(n.l, env, pad, u_var("xl"))),
                       "xr", u_inj(2, cod, co_app(n.r, env, pad, u_var("xr")))));
          },
          [&](const LTLolli& n) {
            const auto* at = std::get_if<UTArr>(&cod->v);
            if (!at) throw std::logic_error("arrow coercion at a non-arrow");
            return u_lam(
                "f", dom,
                u_lam("x", at->dom,
                      co_app(n.cod, env, pad,
                             u_app(u_var("f"),
                                   co_app(n.dom, env, !pad, u_var("x"))))));
          },
          [&](const LTBang& n) { return co_fn(n.inner, env, pad); },
          [&](const LTBox& n) {
            if (pad)
              return u_lam("x", dom,
                           u_pair(u_unit(),
                                  co_app(n.inner, env, true, u_var("x"))));
            return u_lam("p", dom,
                         co_app(n.inner, env, false, u_snd(u_var("p"))));
          },
          [&](const LTMu& n) {
            UTy r = co_end(s, env, false);
            UTy t = co_end(s, env, true);
            UTy a = ut_sum(r, t);
            UTy b = ut_sum(t, r);
            std::string cv = "go" + std::to_string(env.size());
            CoEnv inner = env;
            inner[n.var] = CoBind{
                u_lam("r", r,
                      u_case(u_app(u_var(cv), u_inj(1, a, u_var("r"))),
                             "y", u_var("y"), "n", diverge_at(t))),
                u_lam("t", t,
                      u_case(u_app(u_var(cv), u_inj(2, a, u_var("t"))),
                             "n", diverge_at(r), "y", u_var("y"))),
                r, t};
            UEx pad_body = co_fn(n.body, inner, true);
            UEx strip_body = co_fn(n.body, inner, false);
            UEx dispatch = u_lam(
                cv, ut_arr(a, b),
                u_lam("s0", a,
                      u_case(u_var("s0"),
                             "xl",
                             u_inj(1, b,
                                   u_fold(t, u_app(pad_body,
                                                   u_unfold(u_var("xl"))))),
                             "xr",
                             u_inj(2, b,
                                   u_fold(r, u_app(strip_body,
                                                   u_unfold(u_var("xr"))))))));
            UEx knot = ufix(a, b, dispatch);
            if (pad)
              return u_lam("r", r,
                           u_case(u_app(knot, u_inj(1, a, u_var("r"))),
                                  "y", u_var("y"), "n", diverge_at(t)));
            return u_lam("t", t,
                         u_case(u_app(knot, u_inj(2, a, u_var("t"))),
                                "n", diverge_at(r), "y", u_var("y")));
          },
          [&](const auto&) -> UEx {
            throw std::logic_error("lump coercion at a type outside the image");
          },
      },
      s->v);
}

// Coercion for unlump[t]: the erased payload at recover_u(t) becomes a value
// of the translated type. lump[t] runs the same construction the other way.
UEx lump_coerce(const LTy& t, UEx e, bool pad) {
  if (std::holds_alternative<LTLump>(t->v)) return e;
  const auto* bang = std::get_if<LTBang>(&t->v);
  if (!bang) throw std::logic_error("lump coercion at a type outside the image");
  return co_app(bang->inner, CoEnv{}, pad, std::move(e));
}

// --- term translation --------------------------------------------------------

// The context and store typing mirror the typing judgment of the term being
// translated; they feed the on-demand type queries at binder-introducing
// eliminations U lacks annotations for.
struct Trans {
  MixedContext ctx;
  StoreTyping sty;

  UEx u(const UEx& e) const {
    return std::visit(
        overloaded{
            [&](const UVar&) { return e; },
            [&](const UUnit&) { return e; },
            [&](const UPair& n) { return u_pair(u(n.l), u(n.r)); },
            [&](const UFst& n) { return u_fst(u(n.e)); },
            [&](const USnd& n) { return u_snd(u(n.e)); },
            [&](const ULetUnit& n) { return u_letunit(u(n.rhs), u(n.body)); },
            [&](const ULam& n) {
              Trans bt{ctx.with_u(n.var, n.ann), sty};
              return u_lam(n.var, n.ann, bt.u(n.body));
            },
            [&](const UApp& n) { return u_app(u(n.fn), u(n.arg)); },
            [&](const UInj& n) { return u_inj(n.which, n.ann, u(n.e)); },
            [&](const UCase& n) {
              UTy st = typecheck_u(ctx, n.scrut);
              const auto* sm = std::get_if<UTSum>(&st->v);
              if (!sm) throw std::logic_error("case scrutinee is not a sum");
              UEx lb = Trans{ctx.with_u(n.lvar, sm->l), sty}.u(n.lbody);
              UEx rb = Trans{ctx.with_u(n.rvar, sm->r), sty}.u(n.rbody);
              return u_case(u(n.scrut), n.lvar, lb, n.rvar, rb);
            },
            [&](const UFold& n) { return u_fold(n.ann, u(n.e)); },
            [&](const UUnfold& n) { return u_unfold(u(n.e)); },
            [&](const UTyLam& n) {
              Trans bt{ctx.with_tyvar(n.var), sty};
              return u_tylam(n.var, bt.u(n.body));
            },
            [&](const UTyApp& n) { return u_tyapp(u(n.e), n.arg); },
            [&](const UMark& n) { return u_mark(n.name, u(n.e)); },
            [&](const UBoundary& n) {
              return config(n.store, n.styping, n.inner);
            },
        },
        e->v);
  }

  UEx l(const LEx& e) const {
    return std::visit(
        overloaded{
            [&](const LVar& n) { return u_var(n.name); },
            [&](const LUnit&) { return u_unit(); },
            [&](const LPair& n) { return u_pair(l(n.l), l(n.r)); },
            [&](const LLetPair& n) {
              LTy rt = typecheck_l_internal(ctx, sty, n.rhs).type;
              const auto* tz = std::get_if<LTTensor>(&rt->v);
              if (!tz)
                throw std::logic_error("let-pair right side is not a tensor");
              UTy t1 = funtrans_type(tz->l), t2 = funtrans_type(tz->r);
              Trans bt{ctx.with_l(n.v1, tz->l).with_l(n.v2, tz->r), sty};
              UEx body = bt.l(n.body);
              std::set<std::string> avoid = free_vars(body);
              avoid.insert(n.v1);
              avoid.insert(n.v2);
              std::string p = fresh_name("p", avoid);
              UEx elim =
                  u_lam(p, ut_prod(t1, t2),
                        u_app(u_app(u_lam(n.v1, t1, u_lam(n.v2, t2, body)),
                                    u_fst(u_var(p))),
                              u_snd(u_var(p))));
              return u_app(elim, l(n.rhs));
            },
            [&](const LLetUnit& n) { return u_letunit(l(n.rhs), l(n.body)); },
            [&](const LLam& n) {
              Trans bt{ctx.with_l(n.var, n.ann), sty};
              return u_lam(n.var, funtrans_type(n.ann), bt.l(n.body));
            },
            [&](const LApp& n) { return u_app(l(n.fn), l(n.arg)); },
            [&](const LInj& n) {
              return u_inj(n.which, funtrans_type(n.ann), l(n.e));
            },
            [&](const LCase& n) {
              LTy st = typecheck_l_internal(ctx, sty, n.scrut).type;
              const auto* sm = std::get_if<LTSum>(&st->v);
              if (!sm) throw std::logic_error("case scrutinee is not a sum");
              UEx lb = Trans{ctx.with_l(n.lvar, sm->l), sty}.l(n.lbody);
              UEx rb = Trans{ctx.with_l(n.rvar, sm->r), sty}.l(n.rbody);
              return u_case(l(n.scrut), n.lvar, lb, n.rvar, rb);
            },
            [&](const LFold& n) {
              return u_fold(funtrans_type(n.ann), l(n.e));
            },
            [&](const LUnfold& n) { return u_unfold(l(n.e)); },
            [&](const LShare& n) {
              return config(n.store, n.styping, n.body);
            },
            [&](const LCopy& n) { return l(n.e); },
            [&](const LNew& n) { return u_letunit(l(n.e), u_unit()); },
            [&](const LFree& n) { return u_letunit(l(n.e), u_unit()); },
            [&](const LBox& n) {
              return u_pair(u_unit(), u_snd(l(n.e)));
            },
            [&](const LUnbox& n) {
              return u_pair(u_unit(), u_snd(l(n.e)));
            },
            [&](const LLoc& n) { return u_var(location_var(n.loc)); },
            [&](const LLump& n) { return u(n.value); },
            [&](const LBoundary& n) { return u(n.inner); },
            [&](const LLumpOp& n) {
              return lump_coerce(n.ann, l(n.e), false);
            },
            [&](const LUnlumpOp& n) {
              return lump_coerce(n.ann, l(n.e), true);
            },
            [&](const LMark& n) { return u_mark(n.name, l(n.e)); },
        },
        e->v);
  }

  // A store-carrying node: translate the term against the carried typing,
  // then substitute each cell's clause for its location variable. The
  // substituted values are closed in location variables, so slot order does
  // not matter.
  UEx config(const Store& store, const StoreTyping& stp, const LEx& e) const {
    UEx body = Trans{ctx, stp}.l(e);
    for (const auto& [loc, slot] : store.slots) {
      UEx repl = u_unit();
      if (slot) {
        auto it = stp.entries.find(loc);
        const STAlive* al = it == stp.entries.end()
                                ? nullptr
                                : std::get_if<STAlive>(&it->second->v);
        MixedContext sctx = al ? al->ctx : MixedContext{};
        StoreTyping slot_sty =
            al ? al->inner : infer_store_typing(slot->local);
        repl = u_pair(u_unit(), Trans{sctx, StoreTyping{}}.config(
                                    slot->local, slot_sty, slot->value));
      }
      body = subst_u(body, location_var(loc), repl);
    }
    return body;
  }
};

} // namespace

UEx funtrans_expr(const MixedContext& ctx, const UEx& e) {
  return Trans{ctx, StoreTyping{}}.u(e);
}

UEx funtrans_expr(const MixedContext& ctx, const LEx& e) {
  return Trans{ctx, StoreTyping{}}.l(e);
}

UEx funtrans_expr(const MixedContext& ctx, const Configuration& c) {
  return Trans{ctx, StoreTyping{}}.config(c.store, infer_store_typing(c.store),
                                          c.expr);
}

UEx funtrans_expr(const UEx& e) { return funtrans_expr(MixedContext{}, e); }
UEx funtrans_expr(const LEx& e) { return funtrans_expr(MixedContext{}, e); }
UEx funtrans_expr(const Configuration& c) {
  return funtrans_expr(MixedContext{}, c);
}

const std::string hole_name = "\xE2\x96\xA1";

bool check_compositionality(const UEx& ctx_term, const UEx& filler) {
  UTy fty = typecheck_u(MixedContext{}, filler);
  UEx whole = funtrans_expr(subst_u(ctx_term, hole_name, filler));
  MixedContext hctx = MixedContext{}.with_u(hole_name, fty);
  UEx parts =
      subst_u(funtrans_expr(hctx, ctx_term), hole_name, funtrans_expr(filler));
  return alpha_equal(whole, parts);
}

} // namespace ul
