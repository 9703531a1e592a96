#include "ul/interop.hpp"

#include <map>
#include <string>

#include "ul/errors.hpp"
#include "ul/pretty.hpp"

namespace ul {

const std::pair<std::string, std::string>* CompatEnv::find_u(const std::string& a) const {
  for (const auto& p : pairs)
    if (p.first == a) return &p;
  return nullptr;
}

const std::pair<std::string, std::string>* CompatEnv::find_l(const std::string& b) const {
  for (const auto& p : pairs)
    if (p.second == b) return &p;
  return nullptr;
}

CompatEnv CompatEnv::with(const std::string& a, const std::string& b) const {
  CompatEnv out = *this;
  // Rebinding either side drops the stale pair; innermost binder wins.
  std::erase_if(out.pairs, [&](const auto& p) { return p.first == a || p.second == b; });
  out.pairs.emplace_back(a, b);
  return out;
}

namespace {

bool bang_headed(const LTy& t) { return std::holds_alternative<LTBang>(t->v); }

// tau ~ !s, dispatched on s.
bool compat_bang(const CompatEnv& env, const UTy& tau, const LTy& s) {
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LTOne>) {
          return std::holds_alternative<UTUnit>(tau->v);
        } else if constexpr (std::is_same_v<T, LTLump>) {
          return alpha_equal(tau, n.inner);
        } else if constexpr (std::is_same_v<T, LTTensor>) {
          auto* p = std::get_if<UTProd>(&tau->v);
          return p && compat_bang(env, p->l, n.l) && compat_bang(env, p->r, n.r);
        } else if constexpr (std::is_same_v<T, LTSum>) {
          auto* p = std::get_if<UTSum>(&tau->v);
          return p && compat_bang(env, p->l, n.l) && compat_bang(env, p->r, n.r);
        } else if constexpr (std::is_same_v<T, LTLolli>) {
          auto* p = std::get_if<UTArr>(&tau->v);
          return p && bang_headed(n.dom) && bang_headed(n.cod) &&
                 compat(env, p->dom, n.dom) && compat(env, p->cod, n.cod);
        } else if constexpr (std::is_same_v<T, LTBang>) {
          // Repeated ! collapses: tau ~ !!s iff tau ~ !s.
          return compat_bang(env, tau, n.inner);
        } else if constexpr (std::is_same_v<T, LTBox>) {
          // Box is an allocation detail, invisible to the U side.
          return compat_bang(env, tau, n.inner);
        } else if constexpr (std::is_same_v<T, LTBox0>) {
          return false;
        } else if constexpr (std::is_same_v<T, LTMu>) {
          auto* p = std::get_if<UTMu>(&tau->v);
          return p && compat_bang(env.with(p->var, n.var), p->body, n.body);
        } else if constexpr (std::is_same_v<T, LTVar>) {
          auto* p = std::get_if<UTVar>(&tau->v);
          const auto* pair = env.find_l(n.name);
          return p && pair && pair->first == p->name;
        } else {
          return false;
        }
      },
      s->v);
}

} // namespace

bool compat(const CompatEnv& env, const UTy& tau, const LTy& t) {
  if (auto* lump = std::get_if<LTLump>(&t->v)) return alpha_equal(tau, lump->inner);
  if (auto* bang = std::get_if<LTBang>(&t->v)) return compat_bang(env, tau, bang->inner);
  return false;
}

namespace {

// L type variable -> U type variable chosen for it (same spelling; the sorts
// keep them apart).
using RecoverEnv = std::map<std::string, std::string>;

// recover for !s, dispatched on s; nullopt when !s is outside the image.
std::optional<UTy> recover_bang(const RecoverEnv& env, const LTy& s) {
  return std::visit(
      [&](const auto& n) -> std::optional<UTy> {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LTOne>) {
          return ut_unit();
        } else if constexpr (std::is_same_v<T, LTLump>) {
          return n.inner;
        } else if constexpr (std::is_same_v<T, LTTensor>) {
          auto l = recover_bang(env, n.l), r = recover_bang(env, n.r);
          if (!l || !r) return std::nullopt;
          return ut_prod(*l, *r);
        } else if constexpr (std::is_same_v<T, LTSum>) {
          auto l = recover_bang(env, n.l), r = recover_bang(env, n.r);
          if (!l || !r) return std::nullopt;
          return ut_sum(*l, *r);
        } else if constexpr (std::is_same_v<T, LTLolli>) {
          if (!bang_headed(n.dom) || !bang_headed(n.cod)) return std::nullopt;
          auto d = recover_bang(env, std::get<LTBang>(n.dom->v).inner);
          auto c = recover_bang(env, std::get<LTBang>(n.cod->v).inner);
          if (!d || !c) return std::nullopt;
          return ut_arr(*d, *c);
        } else if constexpr (std::is_same_v<T, LTBang>) {
          return recover_bang(env, n.inner);
        } else if constexpr (std::is_same_v<T, LTBox>) {
          return recover_bang(env, n.inner);
        } else if constexpr (std::is_same_v<T, LTBox0>) {
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, LTMu>) {
          RecoverEnv inner = env;
          inner[n.var] = n.var;
          auto body = recover_bang(inner, n.body);
          if (!body) return std::nullopt;
          return ut_mu(n.var, *body);
        } else if constexpr (std::is_same_v<T, LTVar>) {
          auto it = env.find(n.name);
          if (it == env.end()) return std::nullopt;
          return ut_var(it->second);
        } else {
          return std::nullopt;
        }
      },
      s->v);
}

} // namespace

std::optional<UTy> recover_u(const LTy& t) {
  static std::map<std::string, std::optional<UTy>> cache;
  std::string key = pretty(t);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::optional<UTy> out;
  if (auto* lump = std::get_if<LTLump>(&t->v))
    out = lump->inner;
  else if (auto* bang = std::get_if<LTBang>(&t->v))
    out = recover_bang({}, bang->inner);
  if (cache.size() < 4096) cache.emplace(key, out);
  return out;
}

namespace {

[[noreturn]] void shape_fail(const std::string& what, const LTy& t) {
  throw Error(Errc::ShapeMismatch, what + " does not fit type " + pretty(t));
}

struct Converted {
  Store store;
  StoreTyping styping;
  LEx value;
};

// Value of type s (consuming the returned store) from a U value v with
// compat(tau_of_v, !s).
Converted u_to_l_inner(const UEx& v, const LTy& s, LocSupply& locs) {
  return std::visit(
      [&](const auto& n) -> Converted {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LTOne>) {
          if (!std::holds_alternative<UUnit>(v->v)) shape_fail(pretty(v), s);
          return {Store{}, StoreTyping{}, l_unit()};
        } else if constexpr (std::is_same_v<T, LTLump>) {
          return {Store{}, StoreTyping{}, l_lump(v)};
        } else if constexpr (std::is_same_v<T, LTTensor>) {
          auto* p = std::get_if<UPair>(&v->v);
          if (!p) shape_fail(pretty(v), s);
          Converted l = u_to_l_inner(p->l, n.l, locs);
          Converted r = u_to_l_inner(p->r, n.r, locs);
          auto st = Store::join(l.store, r.store);
          auto ty = StoreTyping::join(l.styping, r.styping);
          if (!st || !ty) throw Error(Errc::LocationReused, "conversion allocated overlapping cells");
          return {*st, *ty, l_pair(l.value, r.value)};
        } else if constexpr (std::is_same_v<T, LTSum>) {
          auto* i = std::get_if<UInj>(&v->v);
          if (!i) shape_fail(pretty(v), s);
          Converted c = u_to_l_inner(i->e, i->which == 1 ? n.l : n.r, locs);
          c.value = l_inj(i->which, lt_sum(n.l, n.r), c.value);
          return c;
        } else if constexpr (std::is_same_v<T, LTLolli>) {
          // fun (x : s1) -o unlump[s2] (LU { v (UL { share (lump[s1] x) }) })
          std::string x = gensym("arg");
          LEx enter = l_share(l_lumpop(n.dom, l_var(x)));
          UEx call = u_app(v, u_boundary(enter));
          LEx body = l_unlumpop(n.cod, l_boundary(call));
          return {Store{}, StoreTyping{}, l_lam(x, n.dom, body)};
        } else if constexpr (std::is_same_v<T, LTBang>) {
          Converted c = u_to_l_inner(v, n.inner, locs);
          return {Store{}, StoreTyping{},
                  l_share(c.store, c.styping, c.value)};
        } else if constexpr (std::is_same_v<T, LTBox>) {
          Converted c = u_to_l_inner(v, n.inner, locs);
          Location cell = locs.fresh();
          Store st = Store{};
          st.slots[cell] = slot_full(c.store, c.value);
          StoreTyping ty = StoreTyping{};
          ty.entries[cell] = st_alive(MixedContext{}, c.styping, n.inner);
          return {st, ty, l_loc(cell)};
        } else if constexpr (std::is_same_v<T, LTMu>) {
          auto* f = std::get_if<UFold>(&v->v);
          if (!f) shape_fail(pretty(v), s);
          Converted c = u_to_l_inner(f->e, subst_ty_l(n.body, n.var, s), locs);
          c.value = l_fold(s, c.value);
          return c;
        } else {
          shape_fail(pretty(v), s);
        }
      },
      s->v);
}

// U value from an L value w of type s consuming store/styping, with
// compat(result type, !s).
UEx l_to_u_inner(const LEx& w, const Store& store, const StoreTyping& styping, const LTy& s);

// Splits a store between two subvalues by ownership.
std::pair<Converted, Converted> split_store(const LEx& a, const LEx& b, const Store& store,
                                            const StoreTyping& styping) {
  auto la = locations_of(a);
  auto lb = locations_of(b);
  Converted ca{store.restrict_to(la), styping.restrict_to(la), a};
  Converted cb{store.restrict_to(lb), styping.restrict_to(lb), b};
  return {ca, cb};
}

UEx l_to_u_inner(const LEx& w, const Store& store, const StoreTyping& styping, const LTy& s) {
  return std::visit(
      [&](const auto& n) -> UEx {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, LTOne>) {
          if (!std::holds_alternative<LUnit>(w->v)) shape_fail(pretty(w), s);
          return u_unit();
        } else if constexpr (std::is_same_v<T, LTLump>) {
          auto* l = std::get_if<LLump>(&w->v);
          if (!l) shape_fail(pretty(w), s);
          return l->value;
        } else if constexpr (std::is_same_v<T, LTTensor>) {
          auto* p = std::get_if<LPair>(&w->v);
          if (!p) shape_fail(pretty(w), s);
          auto [ca, cb] = split_store(p->l, p->r, store, styping);
          return u_pair(l_to_u_inner(ca.value, ca.store, ca.styping, n.l),
                        l_to_u_inner(cb.value, cb.store, cb.styping, n.r));
        } else if constexpr (std::is_same_v<T, LTSum>) {
          auto* i = std::get_if<LInj>(&w->v);
          if (!i) shape_fail(pretty(w), s);
          auto tau = recover_bang({}, s);
          if (!tau) throw Error(Errc::NotInImage, pretty(s));
          return u_inj(i->which, *tau,
                       l_to_u_inner(i->e, store, styping, i->which == 1 ? n.l : n.r));
        } else if constexpr (std::is_same_v<T, LTLolli>) {
          // fun (x : tau1) ->
          //   UL { share (lump[s2] ((copy (share sigma Sigma w)) (unlump[s1] (LU { x })))) }
          if (!bang_headed(n.dom) || !bang_headed(n.cod))
            throw Error(Errc::NotInImage, pretty(s));
          auto tau1 = recover_u(n.dom);
          if (!tau1) throw Error(Errc::NotInImage, pretty(n.dom));
          std::string x = gensym("arg");
          LEx fn = l_copy(l_share(store, styping, w));
          LEx call = l_app(fn, l_unlumpop(n.dom, l_boundary(u_var(x))));
          UEx body = u_boundary(l_share(l_lumpop(n.cod, call)));
          return u_lam(x, *tau1, body);
        } else if constexpr (std::is_same_v<T, LTBang>) {
          auto* sh = std::get_if<LShare>(&w->v);
          if (!sh) shape_fail(pretty(w), s);
          return l_to_u_inner(sh->body, sh->store, sh->styping, n.inner);
        } else if constexpr (std::is_same_v<T, LTBox>) {
          auto* l = std::get_if<LLoc>(&w->v);
          if (!l) shape_fail(pretty(w), s);
          auto it = store.slots.find(l->loc);
          if (it == store.slots.end() || !it->second)
            throw Error(Errc::AliveLocationEmpty, "cell #" + std::to_string(l->loc));
          auto te = styping.entries.find(l->loc);
          if (te == styping.entries.end() || !std::holds_alternative<STAlive>(te->second->v))
            throw Error(Errc::StoreMismatch, "cell #" + std::to_string(l->loc));
          const auto& alive = std::get<STAlive>(te->second->v);
          return l_to_u_inner(it->second->value, it->second->local, alive.inner, n.inner);
        } else if constexpr (std::is_same_v<T, LTMu>) {
          auto* f = std::get_if<LFold>(&w->v);
          if (!f) shape_fail(pretty(w), s);
          auto tau = recover_bang({}, s);
          if (!tau) throw Error(Errc::NotInImage, pretty(s));
          return u_fold(*tau, l_to_u_inner(f->e, store, styping, subst_ty_l(n.body, n.var, s)));
        } else {
          shape_fail(pretty(w), s);
        }
      },
      s->v);
}

} // namespace

LEx u_to_l(const UEx& v, const LTy& t, LocSupply& locs) {
  if (!is_value_u(v)) throw Error(Errc::ShapeMismatch, "conversion of a non-value");
  if (auto* lump = std::get_if<LTLump>(&t->v)) {
    (void)lump;
    return l_lump(v);
  }
  if (auto* bang = std::get_if<LTBang>(&t->v)) {
    Converted c = u_to_l_inner(v, bang->inner, locs);
    return l_share(c.store, c.styping, c.value);
  }
  throw Error(Errc::NotInImage, pretty(t));
}

UEx l_to_u(const LEx& v, const LTy& t) {
  if (!is_value_l(v)) throw Error(Errc::ShapeMismatch, "conversion of a non-value");
  if (std::holds_alternative<LTLump>(t->v)) {
    auto* l = std::get_if<LLump>(&v->v);
    if (!l) shape_fail(pretty(v), t);
    return l->value;
  }
  if (std::holds_alternative<LTBang>(t->v)) {
    auto* sh = std::get_if<LShare>(&v->v);
    if (!sh) shape_fail(pretty(v), t);
    return l_to_u_inner(sh->body, sh->store, sh->styping, std::get<LTBang>(t->v).inner);
  }
  throw Error(Errc::NotInImage, pretty(t));
}

} // namespace ul
