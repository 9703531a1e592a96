#include "ul/ast.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <stdexcept>

#include "ul/errors.hpp"

namespace ul {

namespace {
template <class... Ts> struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;
} // namespace

std::string gensym(const std::string& base) {
  static std::atomic<std::uint64_t> counter{0};
  // Strip an existing prime suffix so repeated renames do not snowball.
  auto cut = base.find('\'');
  std::string stem = (cut == std::string::npos) ? base : base.substr(0, cut);
  if (stem.empty()) stem = "v";
  return stem + "'" + std::to_string(counter.fetch_add(1));
}

bool duplicable(const LTy& t) { return std::holds_alternative<LTBang>(t->v); }

// ---------------------------------------------------------------------------
// Store / StoreTyping / MixedContext
// ---------------------------------------------------------------------------

std::set<Location> Store::domain() const {
  std::set<Location> d;
  for (auto& [l, _] : slots) d.insert(l);
  return d;
}

std::optional<Store> Store::join(const Store& a, const Store& b) {
  Store out = a;
  for (auto& [l, s] : b.slots)
    if (!out.slots.emplace(l, s).second) return std::nullopt;
  return out;
}

Store Store::restrict_to(const std::set<Location>& ls) const {
  Store out;
  for (auto& [l, s] : slots)
    if (ls.count(l)) out.slots.emplace(l, s);
  return out;
}

Store Store::without(const std::set<Location>& ls) const {
  Store out;
  for (auto& [l, s] : slots)
    if (!ls.count(l)) out.slots.emplace(l, s);
  return out;
}

std::set<Location> StoreTyping::domain() const {
  std::set<Location> d;
  for (auto& [l, _] : entries) d.insert(l);
  return d;
}

std::optional<StoreTyping> StoreTyping::join(const StoreTyping& a,
                                             const StoreTyping& b) {
  StoreTyping out = a;
  for (auto& [l, e] : b.entries)
    if (!out.entries.emplace(l, e).second) return std::nullopt;
  return out;
}

StoreTyping StoreTyping::restrict_to(const std::set<Location>& ls) const {
  StoreTyping out;
  for (auto& [l, e] : entries)
    if (ls.count(l)) out.entries.emplace(l, e);
  return out;
}

MixedContext MixedContext::with_u(const std::string& x, UTy t) const {
  MixedContext c = *this;
  c.entries.push_back({Entry::Kind::UVar, x, std::move(t), nullptr});
  return c;
}

MixedContext MixedContext::with_tyvar(const std::string& a) const {
  MixedContext c = *this;
  c.entries.push_back({Entry::Kind::UTyVar, a, nullptr, nullptr});
  return c;
}

MixedContext MixedContext::with_l(const std::string& x, LTy t) const {
  MixedContext c = *this;
  c.entries.push_back({Entry::Kind::LVar, x, nullptr, std::move(t)});
  return c;
}

const MixedContext::Entry* MixedContext::lookup(const std::string& x) const {
  for (auto it = entries.rbegin(); it != entries.rend(); ++it)
    if (it->name == x) return &*it;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

namespace {
UTy mku(UType t) { return std::make_shared<const UType>(std::move(t)); }
LTy mkl(LType t) { return std::make_shared<const LType>(std::move(t)); }
UEx mkue(UExpr e) { return std::make_shared<const UExpr>(std::move(e)); }
LEx mkle(LExpr e) { return std::make_shared<const LExpr>(std::move(e)); }
} // namespace

UTy ut_var(std::string n) { return mku({UTVar{std::move(n)}}); }
UTy ut_unit() { return mku({UTUnit{}}); }
UTy ut_prod(UTy l, UTy r) { return mku({UTProd{std::move(l), std::move(r)}}); }
UTy ut_arr(UTy d, UTy c) { return mku({UTArr{std::move(d), std::move(c)}}); }
UTy ut_sum(UTy l, UTy r) { return mku({UTSum{std::move(l), std::move(r)}}); }
UTy ut_mu(std::string a, UTy b) { return mku({UTMu{std::move(a), std::move(b)}}); }
UTy ut_all(std::string a, UTy b) { return mku({UTAll{std::move(a), std::move(b)}}); }

LTy lt_var(std::string n) { return mkl({LTVar{std::move(n)}}); }
LTy lt_one() { return mkl({LTOne{}}); }
LTy lt_tensor(LTy l, LTy r) { return mkl({LTTensor{std::move(l), std::move(r)}}); }
LTy lt_lolli(LTy d, LTy c) { return mkl({LTLolli{std::move(d), std::move(c)}}); }
LTy lt_sum(LTy l, LTy r) { return mkl({LTSum{std::move(l), std::move(r)}}); }
LTy lt_mu(std::string a, LTy b) { return mkl({LTMu{std::move(a), std::move(b)}}); }
LTy lt_bang(LTy t) { return mkl({LTBang{std::move(t)}}); }
LTy lt_box(LTy t) { return mkl({LTBox{std::move(t)}}); }
LTy lt_box0() { return mkl({LTBox0{}}); }
LTy lt_lump(UTy t) { return mkl({LTLump{std::move(t)}}); }

UEx u_var(std::string n) { return mkue({UVar{std::move(n)}}); }
UEx u_unit() { return mkue({UUnit{}}); }
UEx u_pair(UEx l, UEx r) { return mkue({UPair{std::move(l), std::move(r)}}); }
UEx u_fst(UEx e) { return mkue({UFst{std::move(e)}}); }
UEx u_snd(UEx e) { return mkue({USnd{std::move(e)}}); }
UEx u_letunit(UEx rhs, UEx body) {
  return mkue({ULetUnit{std::move(rhs), std::move(body)}});
}
UEx u_lam(std::string x, UTy ann, UEx body) {
  return mkue({ULam{std::move(x), std::move(ann), std::move(body)}});
}
UEx u_app(UEx f, UEx a) { return mkue({UApp{std::move(f), std::move(a)}}); }
UEx u_inj(int which, UTy ann, UEx e) {
  return mkue({UInj{which, std::move(ann), std::move(e)}});
}
UEx u_case(UEx s, std::string lx, UEx lb, std::string rx, UEx rb) {
  return mkue({UCase{std::move(s), std::move(lx), std::move(lb), std::move(rx),
                     std::move(rb)}});
}
UEx u_fold(UTy ann, UEx e) { return mkue({UFold{std::move(ann), std::move(e)}}); }
UEx u_unfold(UEx e) { return mkue({UUnfold{std::move(e)}}); }
UEx u_tylam(std::string a, UEx body) {
  return mkue({UTyLam{std::move(a), std::move(body)}});
}
UEx u_tyapp(UEx e, UTy t) { return mkue({UTyApp{std::move(e), std::move(t)}}); }
UEx u_mark(std::string name, UEx e) {
  return mkue({UMark{std::move(name), std::move(e)}});
}
UEx u_boundary(LEx inner) {
  return mkue({UBoundary{Store{}, StoreTyping{}, std::move(inner)}});
}
UEx u_boundary(Store s, StoreTyping st, LEx inner) {
  return mkue({UBoundary{std::move(s), std::move(st), std::move(inner)}});
}

LEx l_var(std::string n) { return mkle({LVar{std::move(n)}}); }
LEx l_unit() { return mkle({LUnit{}}); }
LEx l_pair(LEx l, LEx r) { return mkle({LPair{std::move(l), std::move(r)}}); }
LEx l_letpair(std::string x, std::string y, LEx rhs, LEx body) {
  return mkle({LLetPair{std::move(x), std::move(y), std::move(rhs), std::move(body)}});
}
LEx l_letunit(LEx rhs, LEx body) {
  return mkle({LLetUnit{std::move(rhs), std::move(body)}});
}
LEx l_lam(std::string x, LTy ann, LEx body) {
  return mkle({LLam{std::move(x), std::move(ann), std::move(body)}});
}
LEx l_app(LEx f, LEx a) { return mkle({LApp{std::move(f), std::move(a)}}); }
LEx l_inj(int which, LTy ann, LEx e) {
  return mkle({LInj{which, std::move(ann), std::move(e)}});
}
LEx l_case(LEx s, std::string lx, LEx lb, std::string rx, LEx rb) {
  return mkle({LCase{std::move(s), std::move(lx), std::move(lb), std::move(rx),
                     std::move(rb)}});
}
LEx l_fold(LTy ann, LEx e) { return mkle({LFold{std::move(ann), std::move(e)}}); }
LEx l_unfold(LEx e) { return mkle({LUnfold{std::move(e)}}); }
LEx l_share(LEx body) {
  return mkle({LShare{Store{}, StoreTyping{}, std::move(body)}});
}
LEx l_share(Store s, StoreTyping st, LEx body) {
  return mkle({LShare{std::move(s), std::move(st), std::move(body)}});
}
LEx l_copy(LEx e) { return mkle({LCopy{std::move(e)}}); }
LEx l_new(LEx e) { return mkle({LNew{std::move(e)}}); }
LEx l_free(LEx e) { return mkle({LFree{std::move(e)}}); }
LEx l_box(LEx e) { return mkle({LBox{std::move(e)}}); }
LEx l_unbox(LEx e) { return mkle({LUnbox{std::move(e)}}); }
LEx l_loc(Location l) { return mkle({LLoc{l}}); }
LEx l_lump(UEx v) { return mkle({LLump{std::move(v)}}); }
LEx l_boundary(UEx inner) { return mkle({LBoundary{std::move(inner)}}); }
LEx l_lumpop(LTy ann, LEx e) {
  return mkle({LLumpOp{std::move(ann), std::move(e)}});
}
LEx l_unlumpop(LTy ann, LEx e) {
  return mkle({LUnlumpOp{std::move(ann), std::move(e)}});
}
LEx l_mark(std::string name, LEx e) {
  return mkle({LMark{std::move(name), std::move(e)}});
}

STEntryP st_dead(LTy t) {
  return std::make_shared<const STEntry>(STEntry{STDead{std::move(t)}});
}
STEntryP st_alive(MixedContext ctx, StoreTyping inner, LTy t) {
  return std::make_shared<const STEntry>(
      STEntry{STAlive{std::move(ctx), std::move(inner), std::move(t)}});
}
Slot slot_full(Store local, LEx value) {
  return std::make_shared<const StoreVal>(
      StoreVal{std::move(local), std::move(value)});
}

// ---------------------------------------------------------------------------
// Values and the surface fragment
// ---------------------------------------------------------------------------

bool is_value_u(const UEx& e) {
  return std::visit(
      overloaded{
          [](const UVar&) { return true; },
          [](const UUnit&) { return true; },
          [](const UPair& p) { return is_value_u(p.l) && is_value_u(p.r); },
          [](const ULam&) { return true; },
          [](const UInj& i) { return is_value_u(i.e); },
          [](const UFold& f) { return is_value_u(f.e); },
          [](const UTyLam& t) { return is_value_u(t.body); },
          [](const auto&) { return false; },
      },
      e->v);
}

bool is_value_l(const LEx& e) {
  return std::visit(
      overloaded{
          [](const LVar&) { return true; },
          [](const LUnit&) { return true; },
          [](const LPair& p) { return is_value_l(p.l) && is_value_l(p.r); },
          [](const LLam&) { return true; },
          [](const LInj& i) { return is_value_l(i.e); },
          [](const LFold& f) { return is_value_l(f.e); },
          [](const LLoc&) { return true; },
          [](const LShare& s) { return is_value_l(s.body); },
          [](const LLump& l) { return is_value_u(l.value); },
          [](const auto&) { return false; },
      },
      e->v);
}

bool is_surface_u(const UEx& e) {
  return std::visit(
      overloaded{
          [](const UVar&) { return true; },
          [](const UUnit&) { return true; },
          [](const UPair& p) { return is_surface_u(p.l) && is_surface_u(p.r); },
          [](const UFst& f) { return is_surface_u(f.e); },
          [](const USnd& s) { return is_surface_u(s.e); },
          [](const ULetUnit& l) {
            return is_surface_u(l.rhs) && is_surface_u(l.body);
          },
          [](const ULam& l) { return is_surface_u(l.body); },
          [](const UApp& a) { return is_surface_u(a.fn) && is_surface_u(a.arg); },
          [](const UInj& i) { return is_surface_u(i.e); },
          [](const UCase& c) {
            return is_surface_u(c.scrut) && is_surface_u(c.lbody) &&
                   is_surface_u(c.rbody);
          },
          [](const UFold& f) { return is_surface_u(f.e); },
          [](const UUnfold& u) { return is_surface_u(u.e); },
          [](const UTyLam& t) { return is_surface_u(t.body); },
          [](const UTyApp& t) { return is_surface_u(t.e); },
          [](const UMark& m) { return is_surface_u(m.e); },
          [](const UBoundary& b) {
            return b.store.empty() && b.styping.empty() && is_surface_l(b.inner);
          },
      },
      e->v);
}

bool is_surface_l(const LEx& e) {
  return std::visit(
      overloaded{
          [](const LVar&) { return true; },
          [](const LUnit&) { return true; },
          [](const LPair& p) { return is_surface_l(p.l) && is_surface_l(p.r); },
          [](const LLetPair& l) {
            return is_surface_l(l.rhs) && is_surface_l(l.body);
          },
          [](const LLetUnit& l) {
            return is_surface_l(l.rhs) && is_surface_l(l.body);
          },
          [](const LLam& l) { return is_surface_l(l.body); },
          [](const LApp& a) { return is_surface_l(a.fn) && is_surface_l(a.arg); },
          [](const LInj& i) { return is_surface_l(i.e); },
          [](const LCase& c) {
            return is_surface_l(c.scrut) && is_surface_l(c.lbody) &&
                   is_surface_l(c.rbody);
          },
          [](const LFold& f) { return is_surface_l(f.e); },
          [](const LUnfold& u) { return is_surface_l(u.e); },
          [](const LShare& s) {
            return s.store.empty() && s.styping.empty() && is_surface_l(s.body);
          },
          [](const LCopy& c) { return is_surface_l(c.e); },
          [](const LNew& n) { return is_surface_l(n.e); },
          [](const LFree& f) { return is_surface_l(f.e); },
          [](const LBox& b) { return is_surface_l(b.e); },
          [](const LUnbox& u) { return is_surface_l(u.e); },
          [](const LLoc&) { return false; },
          [](const LLump&) { return false; },
          [](const LBoundary& b) { return is_surface_u(b.inner); },
          [](const LLumpOp& o) { return is_surface_l(o.e); },
          [](const LUnlumpOp& o) { return is_surface_l(o.e); },
          [](const LMark& m) { return is_surface_l(m.e); },
      },
      e->v);
}

// ---------------------------------------------------------------------------
// Free variables
// ---------------------------------------------------------------------------

namespace {

struct Bound {
  std::set<std::string>& bound;
  std::vector<std::string> added;
  Bound(std::set<std::string>& b) : bound(b) {}
  void bind(const std::string& n) {
    if (bound.insert(n).second) added.push_back(n);
  }
  ~Bound() {
    for (auto& n : added) bound.erase(n);
  }
};

void fv_u(const UEx& e, std::set<std::string>& bound, std::set<std::string>& out);
void fv_l(const LEx& e, std::set<std::string>& bound, std::set<std::string>& out);

void fv_store(const Store& s, std::set<std::string>& bound,
              std::set<std::string>& out) {
  for (auto& [_, slot] : s.slots)
    if (slot) {
      fv_store(slot->local, bound, out);
      fv_l(slot->value, bound, out);
    }
}

void fv_u(const UEx& e, std::set<std::string>& bound, std::set<std::string>& out) {
  std::visit(
      overloaded{
          [&](const UVar& v) {
            if (!bound.count(v.name)) out.insert(v.name);
          },
          [&](const UUnit&) {},
          [&](const UPair& p) { fv_u(p.l, bound, out); fv_u(p.r, bound, out); },
          [&](const UFst& f) { fv_u(f.e, bound, out); },
          [&](const USnd& s) { fv_u(s.e, bound, out); },
          [&](const ULetUnit& l) {
            fv_u(l.rhs, bound, out);
            fv_u(l.body, bound, out);
          },
          [&](const ULam& l) {
            Bound b(bound);
            b.bind(l.var);
            fv_u(l.body, bound, out);
          },
          [&](const UApp& a) { fv_u(a.fn, bound, out); fv_u(a.arg, bound, out); },
          [&](const UInj& i) { fv_u(i.e, bound, out); },
          [&](const UCase& c) {
            fv_u(c.scrut, bound, out);
            {
              Bound b(bound);
              b.bind(c.lvar);
              fv_u(c.lbody, bound, out);
            }
            {
              Bound b(bound);
              b.bind(c.rvar);
              fv_u(c.rbody, bound, out);
            }
          },
          [&](const UFold& f) { fv_u(f.e, bound, out); },
          [&](const UUnfold& u) { fv_u(u.e, bound, out); },
          [&](const UTyLam& t) { fv_u(t.body, bound, out); },
          [&](const UTyApp& t) { fv_u(t.e, bound, out); },
          [&](const UMark& m) { fv_u(m.e, bound, out); },
          [&](const UBoundary& b) {
            fv_store(b.store, bound, out);
            fv_l(b.inner, bound, out);
          },
      },
      e->v);
}

void fv_l(const LEx& e, std::set<std::string>& bound, std::set<std::string>& out) {
  std::visit(
      overloaded{
          [&](const LVar& v) {
            if (!bound.count(v.name)) out.insert(v.name);
          },
          [&](const LUnit&) {},
          [&](const LPair& p) { fv_l(p.l, bound, out); fv_l(p.r, bound, out); },
          [&](const LLetPair& l) {
            fv_l(l.rhs, bound, out);
            Bound b(bound);
            b.bind(l.v1);
            b.bind(l.v2);
            fv_l(l.body, bound, out);
          },
          [&](const LLetUnit& l) {
            fv_l(l.rhs, bound, out);
            fv_l(l.body, bound, out);
          },
          [&](const LLam& l) {
            Bound b(bound);
            b.bind(l.var);
            fv_l(l.body, bound, out);
          },
          [&](const LApp& a) { fv_l(a.fn, bound, out); fv_l(a.arg, bound, out); },
          [&](const LInj& i) { fv_l(i.e, bound, out); },
          [&](const LCase& c) {
            fv_l(c.scrut, bound, out);
            {
              Bound b(bound);
              b.bind(c.lvar);
              fv_l(c.lbody, bound, out);
            }
            {
              Bound b(bound);
              b.bind(c.rvar);
              fv_l(c.rbody, bound, out);
            }
          },
          [&](const LFold& f) { fv_l(f.e, bound, out); },
          [&](const LUnfold& u) { fv_l(u.e, bound, out); },
          [&](const LShare& s) {
            fv_store(s.store, bound, out);
            fv_l(s.body, bound, out);
          },
          [&](const LCopy& c) { fv_l(c.e, bound, out); },
          [&](const LNew& n) { fv_l(n.e, bound, out); },
          [&](const LFree& f) { fv_l(f.e, bound, out); },
          [&](const LBox& b) { fv_l(b.e, bound, out); },
          [&](const LUnbox& u) { fv_l(u.e, bound, out); },
          [&](const LLoc&) {},
          [&](const LLump& l) { fv_u(l.value, bound, out); },
          [&](const LBoundary& b) { fv_u(b.inner, bound, out); },
          [&](const LLumpOp& o) { fv_l(o.e, bound, out); },
          [&](const LUnlumpOp& o) { fv_l(o.e, bound, out); },
          [&](const LMark& m) { fv_l(m.e, bound, out); },
      },
      e->v);
}

} // namespace

std::set<std::string> free_vars(const UEx& e) {
  std::set<std::string> bound, out;
  fv_u(e, bound, out);
  return out;
}

std::set<std::string> free_vars(const LEx& e) {
  std::set<std::string> bound, out;
  fv_l(e, bound, out);
  return out;
}

// ---------------------------------------------------------------------------
// Free type variables
// ---------------------------------------------------------------------------

namespace {
void ftv_u(const UTy& t, std::set<std::string>& bound, std::set<std::string>& out);
void ftv_l(const LTy& t, std::set<std::string>& bound, std::set<std::string>& out);

void ftv_u(const UTy& t, std::set<std::string>& bound, std::set<std::string>& out) {
  std::visit(
      overloaded{
          [&](const UTVar& v) {
            if (!bound.count(v.name)) out.insert(v.name);
          },
          [&](const UTUnit&) {},
          [&](const UTProd& p) { ftv_u(p.l, bound, out); ftv_u(p.r, bound, out); },
          [&](const UTArr& a) { ftv_u(a.dom, bound, out); ftv_u(a.cod, bound, out); },
          [&](const UTSum& s) { ftv_u(s.l, bound, out); ftv_u(s.r, bound, out); },
          [&](const UTMu& m) {
            Bound b(bound);
            b.bind(m.var);
            ftv_u(m.body, bound, out);
          },
          [&](const UTAll& a) {
            Bound b(bound);
            b.bind(a.var);
            ftv_u(a.body, bound, out);
          },
      },
      t->v);
}

void ftv_l(const LTy& t, std::set<std::string>& bound, std::set<std::string>& out) {
  std::visit(
      overloaded{
          [&](const LTVar& v) {
            if (!bound.count(v.name)) out.insert(v.name);
          },
          [&](const LTOne&) {},
          [&](const LTTensor& p) { ftv_l(p.l, bound, out); ftv_l(p.r, bound, out); },
          [&](const LTLolli& a) { ftv_l(a.dom, bound, out); ftv_l(a.cod, bound, out); },
          [&](const LTSum& s) { ftv_l(s.l, bound, out); ftv_l(s.r, bound, out); },
          [&](const LTMu& m) {
            Bound b(bound);
            b.bind(m.var);
            ftv_l(m.body, bound, out);
          },
          [&](const LTBang& b2) { ftv_l(b2.inner, bound, out); },
          [&](const LTBox& b2) { ftv_l(b2.inner, bound, out); },
          [&](const LTBox0&) {},
          [&](const LTLump& l) { ftv_u(l.inner, bound, out); },
      },
      t->v);
}
} // namespace

std::set<std::string> free_tyvars(const UTy& t) {
  std::set<std::string> bound, out;
  ftv_u(t, bound, out);
  return out;
}

std::set<std::string> free_tyvars(const LTy& t) {
  std::set<std::string> bound, out;
  ftv_l(t, bound, out);
  return out;
}

// ---------------------------------------------------------------------------
// Locations
// ---------------------------------------------------------------------------

namespace {
void locs_l(const LEx& e, std::set<Location>& out) {
  std::visit(
      overloaded{
          [&](const LLoc& l) { out.insert(l.loc); },
          // Locations under a share are bound by its captured store.
          [&](const LShare&) {},
          // Boundaries own any stores of nested configurations.
          [&](const LBoundary&) {},
          [&](const LLump&) {},
          [&](const LVar&) {},
          [&](const LUnit&) {},
          [&](const LPair& p) { locs_l(p.l, out); locs_l(p.r, out); },
          [&](const LLetPair& l) { locs_l(l.rhs, out); locs_l(l.body, out); },
          [&](const LLetUnit& l) { locs_l(l.rhs, out); locs_l(l.body, out); },
          [&](const LLam& l) { locs_l(l.body, out); },
          [&](const LApp& a) { locs_l(a.fn, out); locs_l(a.arg, out); },
          [&](const LInj& i) { locs_l(i.e, out); },
          [&](const LCase& c) {
            locs_l(c.scrut, out);
            locs_l(c.lbody, out);
            locs_l(c.rbody, out);
          },
          [&](const LFold& f) { locs_l(f.e, out); },
          [&](const LUnfold& u) { locs_l(u.e, out); },
          [&](const LCopy& c) { locs_l(c.e, out); },
          [&](const LNew& n) { locs_l(n.e, out); },
          [&](const LFree& f) { locs_l(f.e, out); },
          [&](const LBox& b) { locs_l(b.e, out); },
          [&](const LUnbox& u) { locs_l(u.e, out); },
          [&](const LLumpOp& o) { locs_l(o.e, out); },
          [&](const LUnlumpOp& o) { locs_l(o.e, out); },
          [&](const LMark& m) { locs_l(m.e, out); },
      },
      e->v);
}
} // namespace

std::set<Location> locations_of(const LEx& e) {
  std::set<Location> out;
  locs_l(e, out);
  return out;
}

std::set<Location> locations_of(const Store& s) { return s.domain(); }

void collect_open_locations(const Store& s, std::vector<Location>& out) {
  for (auto& [l, slot] : s.slots) {
    out.push_back(l);
    if (slot) {
      collect_open_locations(slot->local, out);
      collect_open_locations(slot->value, out);
    }
  }
}

void collect_open_locations(const UEx& e, std::vector<Location>& out) {
  std::visit(
      overloaded{
          [&](const UBoundary& b) {
            collect_open_locations(b.store, out);
            collect_open_locations(b.inner, out);
          },
          [&](const UVar&) {},
          [&](const UUnit&) {},
          [&](const UPair& p) {
            collect_open_locations(p.l, out);
            collect_open_locations(p.r, out);
          },
          [&](const UFst& f) { collect_open_locations(f.e, out); },
          [&](const USnd& s) { collect_open_locations(s.e, out); },
          [&](const ULetUnit& l) {
            collect_open_locations(l.rhs, out);
            collect_open_locations(l.body, out);
          },
          [&](const ULam& l) { collect_open_locations(l.body, out); },
          [&](const UApp& a) {
            collect_open_locations(a.fn, out);
            collect_open_locations(a.arg, out);
          },
          [&](const UInj& i) { collect_open_locations(i.e, out); },
          [&](const UCase& c) {
            collect_open_locations(c.scrut, out);
            collect_open_locations(c.lbody, out);
            collect_open_locations(c.rbody, out);
          },
          [&](const UFold& f) { collect_open_locations(f.e, out); },
          [&](const UUnfold& u) { collect_open_locations(u.e, out); },
          [&](const UTyLam& t) { collect_open_locations(t.body, out); },
          [&](const UTyApp& t) { collect_open_locations(t.e, out); },
          [&](const UMark& m) { collect_open_locations(m.e, out); },
      },
      e->v);
}

void collect_open_locations(const LEx& e, std::vector<Location>& out) {
  std::visit(
      overloaded{
          [&](const LLoc& l) { out.push_back(l.loc); },
          [&](const LShare&) {}, // bound
          [&](const LLump& l) { collect_open_locations(l.value, out); },
          [&](const LBoundary& b) { collect_open_locations(b.inner, out); },
          [&](const LVar&) {},
          [&](const LUnit&) {},
          [&](const LPair& p) {
            collect_open_locations(p.l, out);
            collect_open_locations(p.r, out);
          },
          [&](const LLetPair& l) {
            collect_open_locations(l.rhs, out);
            collect_open_locations(l.body, out);
          },
          [&](const LLetUnit& l) {
            collect_open_locations(l.rhs, out);
            collect_open_locations(l.body, out);
          },
          [&](const LLam& l) { collect_open_locations(l.body, out); },
          [&](const LApp& a) {
            collect_open_locations(a.fn, out);
            collect_open_locations(a.arg, out);
          },
          [&](const LInj& i) { collect_open_locations(i.e, out); },
          [&](const LCase& c) {
            collect_open_locations(c.scrut, out);
            collect_open_locations(c.lbody, out);
            collect_open_locations(c.rbody, out);
          },
          [&](const LFold& f) { collect_open_locations(f.e, out); },
          [&](const LUnfold& u) { collect_open_locations(u.e, out); },
          [&](const LCopy& c) { collect_open_locations(c.e, out); },
          [&](const LNew& n) { collect_open_locations(n.e, out); },
          [&](const LFree& f) { collect_open_locations(f.e, out); },
          [&](const LBox& b) { collect_open_locations(b.e, out); },
          [&](const LUnbox& u) { collect_open_locations(u.e, out); },
          [&](const LLumpOp& o) { collect_open_locations(o.e, out); },
          [&](const LUnlumpOp& o) { collect_open_locations(o.e, out); },
          [&](const LMark& m) { collect_open_locations(m.e, out); },
      },
      e->v);
}

namespace {
void maxloc_u(const UEx& e, Location& m);
void maxloc_l(const LEx& e, Location& m);
void maxloc_store(const Store& s, Location& m) {
  for (auto& [l, slot] : s.slots) {
    m = std::max(m, l);
    if (slot) {
      maxloc_store(slot->local, m);
      maxloc_l(slot->value, m);
    }
  }
}
void maxloc_u(const UEx& e, Location& m) {
  std::visit(
      overloaded{
          [&](const UBoundary& b) { maxloc_store(b.store, m); maxloc_l(b.inner, m); },
          [&](const UPair& p) { maxloc_u(p.l, m); maxloc_u(p.r, m); },
          [&](const UFst& f) { maxloc_u(f.e, m); },
          [&](const USnd& s) { maxloc_u(s.e, m); },
          [&](const ULetUnit& l) { maxloc_u(l.rhs, m); maxloc_u(l.body, m); },
          [&](const ULam& l) { maxloc_u(l.body, m); },
          [&](const UApp& a) { maxloc_u(a.fn, m); maxloc_u(a.arg, m); },
          [&](const UInj& i) { maxloc_u(i.e, m); },
          [&](const UCase& c) {
            maxloc_u(c.scrut, m);
            maxloc_u(c.lbody, m);
            maxloc_u(c.rbody, m);
          },
          [&](const UFold& f) { maxloc_u(f.e, m); },
          [&](const UUnfold& u) { maxloc_u(u.e, m); },
          [&](const UTyLam& t) { maxloc_u(t.body, m); },
          [&](const UTyApp& t) { maxloc_u(t.e, m); },
          [&](const UMark& mk) { maxloc_u(mk.e, m); },
          [&](const auto&) {},
      },
      e->v);
}
void maxloc_l(const LEx& e, Location& m) {
  std::visit(
      overloaded{
          [&](const LLoc& l) { m = std::max(m, l.loc); },
          [&](const LShare& s) { maxloc_store(s.store, m); maxloc_l(s.body, m); },
          [&](const LLump& l) { maxloc_u(l.value, m); },
          [&](const LBoundary& b) { maxloc_u(b.inner, m); },
          [&](const LPair& p) { maxloc_l(p.l, m); maxloc_l(p.r, m); },
          [&](const LLetPair& l) { maxloc_l(l.rhs, m); maxloc_l(l.body, m); },
          [&](const LLetUnit& l) { maxloc_l(l.rhs, m); maxloc_l(l.body, m); },
          [&](const LLam& l) { maxloc_l(l.body, m); },
          [&](const LApp& a) { maxloc_l(a.fn, m); maxloc_l(a.arg, m); },
          [&](const LInj& i) { maxloc_l(i.e, m); },
          [&](const LCase& c) {
            maxloc_l(c.scrut, m);
            maxloc_l(c.lbody, m);
            maxloc_l(c.rbody, m);
          },
          [&](const LFold& f) { maxloc_l(f.e, m); },
          [&](const LUnfold& u) { maxloc_l(u.e, m); },
          [&](const LCopy& c) { maxloc_l(c.e, m); },
          [&](const LNew& n) { maxloc_l(n.e, m); },
          [&](const LFree& f) { maxloc_l(f.e, m); },
          [&](const LBox& b) { maxloc_l(b.e, m); },
          [&](const LUnbox& u) { maxloc_l(u.e, m); },
          [&](const LLumpOp& o) { maxloc_l(o.e, m); },
          [&](const LUnlumpOp& o) { maxloc_l(o.e, m); },
          [&](const LMark& mk) { maxloc_l(mk.e, m); },
          [&](const auto&) {},
      },
      e->v);
}
} // namespace

Location max_location(const UEx& e) {
  Location m = -1;
  maxloc_u(e, m);
  return m;
}

Location max_location(const LEx& e) {
  Location m = -1;
  maxloc_l(e, m);
  return m;
}

// ---------------------------------------------------------------------------
// Substitution
// ---------------------------------------------------------------------------

namespace {

// Dual-sort payload: the same name may stand for a U term at U occurrences
// and an L term at L occurrences (definition inlining uses both).
struct SubstPayload {
  std::string name;
  UEx u; // may be null
  LEx l; // may be null
  std::set<std::string> fv;
  bool strict; // missing sort at an occurrence: throw logic_error vs Error
};

UEx subst_ue(const UEx& e, const SubstPayload& p);
LEx subst_le(const LEx& e, const SubstPayload& p);

Store subst_store(const Store& s, const SubstPayload& p) {
  Store out;
  for (auto& [l, slot] : s.slots) {
    if (!slot) {
      out.slots.emplace(l, nullptr);
    } else {
      out.slots.emplace(l, std::make_shared<const StoreVal>(StoreVal{
                               subst_store(slot->local, p), subst_le(slot->value, p)}));
    }
  }
  return out;
}

// Freshen `var` against the payload when it would capture; returns the
// possibly renamed name and rewrites the bodies through `rename`.
std::string freshen_binder(const std::string& var, const SubstPayload& p,
                           const std::vector<const UEx*>& ubodies,
                           const std::vector<const LEx*>& lbodies,
                           std::vector<UEx>& uout, std::vector<LEx>& lout) {
  if (!p.fv.count(var)) {
    for (auto* b : ubodies) uout.push_back(*b);
    for (auto* b : lbodies) lout.push_back(*b);
    return var;
  }
  std::set<std::string> taken = p.fv;
  for (auto* b : ubodies)
    for (auto& n : free_vars(*b)) taken.insert(n);
  for (auto* b : lbodies)
    for (auto& n : free_vars(*b)) taken.insert(n);
  taken.insert(p.name);
  std::string fresh = gensym(var);
  while (taken.count(fresh)) fresh = gensym(var);
  SubstPayload ren{var, u_var(fresh), l_var(fresh), {fresh}, true};
  for (auto* b : ubodies) uout.push_back(subst_ue(*b, ren));
  for (auto* b : lbodies) lout.push_back(subst_le(*b, ren));
  return fresh;
}

UEx subst_ue(const UEx& e, const SubstPayload& p) {
  return std::visit(
      overloaded{
          [&](const UVar& v) -> UEx {
            if (v.name != p.name) return e;
            if (p.u) return p.u;
            if (p.strict)
              throw std::logic_error("substitution: U occurrence of '" +
                                     p.name + "' but payload is L-sorted");
            throw Error(Errc::UnboundName,
                        "'" + p.name + "' is used as a U term here but its "
                        "definition only parses as an L term");
          },
          [&](const UUnit&) -> UEx { return e; },
          [&](const UPair& n) -> UEx {
            return u_pair(subst_ue(n.l, p), subst_ue(n.r, p));
          },
          [&](const UFst& n) -> UEx { return u_fst(subst_ue(n.e, p)); },
          [&](const USnd& n) -> UEx { return u_snd(subst_ue(n.e, p)); },
          [&](const ULetUnit& n) -> UEx {
            return u_letunit(subst_ue(n.rhs, p), subst_ue(n.body, p));
          },
          [&](const ULam& n) -> UEx {
            if (n.var == p.name) return e;
            std::vector<UEx> u;
            std::vector<LEx> l;
            std::string x = freshen_binder(n.var, p, {&n.body}, {}, u, l);
            return u_lam(x, n.ann, subst_ue(u[0], p));
          },
          [&](const UApp& n) -> UEx {
            return u_app(subst_ue(n.fn, p), subst_ue(n.arg, p));
          },
          [&](const UInj& n) -> UEx {
            return u_inj(n.which, n.ann, subst_ue(n.e, p));
          },
          [&](const UCase& n) -> UEx {
            UEx scrut = subst_ue(n.scrut, p);
            UEx lb = n.lbody, rb = n.rbody;
            std::string lv = n.lvar, rv = n.rvar;
            if (lv != p.name) {
              std::vector<UEx> u;
              std::vector<LEx> l;
              lv = freshen_binder(lv, p, {&n.lbody}, {}, u, l);
              lb = subst_ue(u[0], p);
            }
            if (rv != p.name) {
              std::vector<UEx> u;
              std::vector<LEx> l;
              rv = freshen_binder(rv, p, {&n.rbody}, {}, u, l);
              rb = subst_ue(u[0], p);
            }
            return u_case(scrut, lv, lb, rv, rb);
          },
          [&](const UFold& n) -> UEx { return u_fold(n.ann, subst_ue(n.e, p)); },
          [&](const UUnfold& n) -> UEx { return u_unfold(subst_ue(n.e, p)); },
          [&](const UTyLam& n) -> UEx {
            return u_tylam(n.var, subst_ue(n.body, p));
          },
          [&](const UTyApp& n) -> UEx {
            return u_tyapp(subst_ue(n.e, p), n.arg);
          },
          [&](const UMark& n) -> UEx { return u_mark(n.name, subst_ue(n.e, p)); },
          [&](const UBoundary& n) -> UEx {
            return u_boundary(subst_store(n.store, p), n.styping,
                              subst_le(n.inner, p));
          },
      },
      e->v);
}

LEx subst_le(const LEx& e, const SubstPayload& p) {
  return std::visit(
      overloaded{
          [&](const LVar& v) -> LEx {
            if (v.name != p.name) return e;
            if (p.l) return p.l;
            if (p.strict)
              throw std::logic_error("substitution: L occurrence of '" +
                                     p.name + "' but payload is U-sorted");
            throw Error(Errc::UnboundName,
                        "'" + p.name + "' is used as an L term here but its "
                        "definition only parses as a U term");
          },
          [&](const LUnit&) -> LEx { return e; },
          [&](const LPair& n) -> LEx {
            return l_pair(subst_le(n.l, p), subst_le(n.r, p));
          },
          [&](const LLetPair& n) -> LEx {
            LEx rhs = subst_le(n.rhs, p);
            if (n.v1 == p.name || n.v2 == p.name)
              return l_letpair(n.v1, n.v2, rhs, n.body);
            // Freshen the two binders one at a time.
            std::vector<UEx> u;
            std::vector<LEx> l;
            std::string x = freshen_binder(n.v1, p, {}, {&n.body}, u, l);
            LEx body = l[0];
            u.clear();
            l.clear();
            std::string y = freshen_binder(n.v2, p, {}, {&body}, u, l);
            body = l[0];
            return l_letpair(x, y, rhs, subst_le(body, p));
          },
          [&](const LLetUnit& n) -> LEx {
            return l_letunit(subst_le(n.rhs, p), subst_le(n.body, p));
          },
          [&](const LLam& n) -> LEx {
            if (n.var == p.name) return e;
            std::vector<UEx> u;
            std::vector<LEx> l;
            std::string x = freshen_binder(n.var, p, {}, {&n.body}, u, l);
            return l_lam(x, n.ann, subst_le(l[0], p));
          },
          [&](const LApp& n) -> LEx {
            return l_app(subst_le(n.fn, p), subst_le(n.arg, p));
          },
          [&](const LInj& n) -> LEx {
            return l_inj(n.which, n.ann, subst_le(n.e, p));
          },
          [&](const LCase& n) -> LEx {
            LEx scrut = subst_le(n.scrut, p);
            LEx lb = n.lbody, rb = n.rbody;
            std::string lv = n.lvar, rv = n.rvar;
            if (lv != p.name) {
              std::vector<UEx> u;
              std::vector<LEx> l;
              lv = freshen_binder(lv, p, {}, {&n.lbody}, u, l);
              lb = subst_le(l[0], p);
            }
            if (rv != p.name) {
              std::vector<UEx> u;
              std::vector<LEx> l;
              rv = freshen_binder(rv, p, {}, {&n.rbody}, u, l);
              rb = subst_le(l[0], p);
            }
            return l_case(scrut, lv, lb, rv, rb);
          },
          [&](const LFold& n) -> LEx { return l_fold(n.ann, subst_le(n.e, p)); },
          [&](const LUnfold& n) -> LEx { return l_unfold(subst_le(n.e, p)); },
          [&](const LShare& n) -> LEx {
            return l_share(subst_store(n.store, p), n.styping,
                           subst_le(n.body, p));
          },
          [&](const LCopy& n) -> LEx { return l_copy(subst_le(n.e, p)); },
          [&](const LNew& n) -> LEx { return l_new(subst_le(n.e, p)); },
          [&](const LFree& n) -> LEx { return l_free(subst_le(n.e, p)); },
          [&](const LBox& n) -> LEx { return l_box(subst_le(n.e, p)); },
          [&](const LUnbox& n) -> LEx { return l_unbox(subst_le(n.e, p)); },
          [&](const LLoc&) -> LEx { return e; },
          [&](const LLump& n) -> LEx { return l_lump(subst_ue(n.value, p)); },
          [&](const LBoundary& n) -> LEx {
            return l_boundary(subst_ue(n.inner, p));
          },
          [&](const LLumpOp& n) -> LEx {
            return l_lumpop(n.ann, subst_le(n.e, p));
          },
          [&](const LUnlumpOp& n) -> LEx {
            return l_unlumpop(n.ann, subst_le(n.e, p));
          },
          [&](const LMark& n) -> LEx { return l_mark(n.name, subst_le(n.e, p)); },
      },
      e->v);
}

SubstPayload make_payload(const std::string& x, UEx u, LEx l, bool strict) {
  SubstPayload p{x, std::move(u), std::move(l), {}, strict};
  if (p.u)
    for (auto& n : free_vars(p.u)) p.fv.insert(n);
  if (p.l)
    for (auto& n : free_vars(p.l)) p.fv.insert(n);
  return p;
}

} // namespace

UEx subst_u(const UEx& e, const std::string& x, const UEx& payload) {
  return subst_ue(e, make_payload(x, payload, nullptr, true));
}
UEx subst_u(const UEx& e, const std::string& x, const LEx& payload) {
  return subst_ue(e, make_payload(x, nullptr, payload, true));
}
LEx subst_l(const LEx& e, const std::string& x, const UEx& payload) {
  return subst_le(e, make_payload(x, payload, nullptr, true));
}
LEx subst_l(const LEx& e, const std::string& x, const LEx& payload) {
  return subst_le(e, make_payload(x, nullptr, payload, true));
}

UEx subst_name(const UEx& e, const std::string& x, UEx u, LEx l) {
  return subst_ue(e, make_payload(x, std::move(u), std::move(l), false));
}
LEx subst_name(const LEx& e, const std::string& x, UEx u, LEx l) {
  return subst_le(e, make_payload(x, std::move(u), std::move(l), false));
}

// ---------------------------------------------------------------------------
// Type substitution
// ---------------------------------------------------------------------------

namespace {

// Payload for type-for-type-variable substitution; either sort of type.
struct TySubst {
  std::string name;
  UTy u; // may be null
  LTy l; // may be null
  std::set<std::string> fv;
};

UTy tysub_u(const UTy& t, const TySubst& p);
LTy tysub_l(const LTy& t, const TySubst& p);

std::string freshen_tybinder(const std::string& var, const TySubst& p,
                             const UTy* ubody, const LTy* lbody, UTy& uout,
                             LTy& lout) {
  if (!p.fv.count(var)) {
    if (ubody) uout = *ubody;
    if (lbody) lout = *lbody;
    return var;
  }
  std::set<std::string> taken = p.fv;
  if (ubody)
    for (auto& n : free_tyvars(*ubody)) taken.insert(n);
  if (lbody)
    for (auto& n : free_tyvars(*lbody)) taken.insert(n);
  taken.insert(p.name);
  std::string fresh = gensym(var);
  while (taken.count(fresh)) fresh = gensym(var);
  TySubst ren{var, ut_var(fresh), lt_var(fresh), {fresh}};
  if (ubody) uout = tysub_u(*ubody, ren);
  if (lbody) lout = tysub_l(*lbody, ren);
  return fresh;
}

UTy tysub_u(const UTy& t, const TySubst& p) {
  return std::visit(
      overloaded{
          [&](const UTVar& v) -> UTy {
            if (v.name != p.name) return t;
            if (p.u) return p.u;
            throw std::logic_error("type substitution: U occurrence of '" +
                                   p.name + "' with L-sorted payload");
          },
          [&](const UTUnit&) -> UTy { return t; },
          [&](const UTProd& n) -> UTy {
            return ut_prod(tysub_u(n.l, p), tysub_u(n.r, p));
          },
          [&](const UTArr& n) -> UTy {
            return ut_arr(tysub_u(n.dom, p), tysub_u(n.cod, p));
          },
          [&](const UTSum& n) -> UTy {
            return ut_sum(tysub_u(n.l, p), tysub_u(n.r, p));
          },
          [&](const UTMu& n) -> UTy {
            if (n.var == p.name) return t;
            UTy body;
            LTy dummy;
            std::string a = freshen_tybinder(n.var, p, &n.body, nullptr, body, dummy);
            return ut_mu(a, tysub_u(body, p));
          },
          [&](const UTAll& n) -> UTy {
            if (n.var == p.name) return t;
            UTy body;
            LTy dummy;
            std::string a = freshen_tybinder(n.var, p, &n.body, nullptr, body, dummy);
            return ut_all(a, tysub_u(body, p));
          },
      },
      t->v);
}

LTy tysub_l(const LTy& t, const TySubst& p) {
  return std::visit(
      overloaded{
          [&](const LTVar& v) -> LTy {
            if (v.name != p.name) return t;
            if (p.l) return p.l;
            throw std::logic_error("type substitution: L occurrence of '" +
                                   p.name + "' with U-sorted payload");
          },
          [&](const LTOne&) -> LTy { return t; },
          [&](const LTTensor& n) -> LTy {
            return lt_tensor(tysub_l(n.l, p), tysub_l(n.r, p));
          },
          [&](const LTLolli& n) -> LTy {
            return lt_lolli(tysub_l(n.dom, p), tysub_l(n.cod, p));
          },
          [&](const LTSum& n) -> LTy {
            return lt_sum(tysub_l(n.l, p), tysub_l(n.r, p));
          },
          [&](const LTMu& n) -> LTy {
            if (n.var == p.name) return t;
            UTy dummy;
            LTy body;
            std::string a = freshen_tybinder(n.var, p, nullptr, &n.body, dummy, body);
            return lt_mu(a, tysub_l(body, p));
          },
          [&](const LTBang& n) -> LTy { return lt_bang(tysub_l(n.inner, p)); },
          [&](const LTBox& n) -> LTy { return lt_box(tysub_l(n.inner, p)); },
          [&](const LTBox0&) -> LTy { return t; },
          [&](const LTLump& n) -> LTy { return lt_lump(tysub_u(n.inner, p)); },
      },
      t->v);
}

TySubst make_tysubst(const std::string& a, UTy u, LTy l) {
  TySubst p{a, std::move(u), std::move(l), {}};
  if (p.u)
    for (auto& n : free_tyvars(p.u)) p.fv.insert(n);
  if (p.l)
    for (auto& n : free_tyvars(p.l)) p.fv.insert(n);
  return p;
}

} // namespace

UTy subst_ty(const UTy& t, const std::string& a, const UTy& repl) {
  return tysub_u(t, make_tysubst(a, repl, nullptr));
}
LTy subst_ty(const LTy& t, const std::string& a, const UTy& repl) {
  return tysub_l(t, make_tysubst(a, repl, nullptr));
}
LTy subst_ty_l(const LTy& t, const std::string& a, const LTy& repl) {
  return tysub_l(t, make_tysubst(a, nullptr, repl));
}

namespace {

UEx tysub_ue(const UEx& e, const TySubst& p);
LEx tysub_le(const LEx& e, const TySubst& p);

MixedContext tysub_ctx(const MixedContext& c, const TySubst& p) {
  MixedContext out;
  for (auto en : c.entries) {
    if (en.utype) en.utype = tysub_u(en.utype, p);
    if (en.ltype) en.ltype = tysub_l(en.ltype, p);
    out.entries.push_back(std::move(en));
  }
  return out;
}

StoreTyping tysub_styping(const StoreTyping& s, const TySubst& p) {
  StoreTyping out;
  for (auto& [l, ep] : s.entries) {
    if (auto* d = std::get_if<STDead>(&ep->v)) {
      out.entries.emplace(l, std::make_shared<const STEntry>(
                                 STEntry{STDead{tysub_l(d->type, p)}}));
    } else {
      auto& a = std::get<STAlive>(ep->v);
      out.entries.emplace(
          l, std::make_shared<const STEntry>(STEntry{
                 STAlive{tysub_ctx(a.ctx, p), tysub_styping(a.inner, p),
                         tysub_l(a.type, p)}}));
    }
  }
  return out;
}

Store tysub_store(const Store& s, const TySubst& p) {
  Store out;
  for (auto& [l, slot] : s.slots) {
    if (!slot)
      out.slots.emplace(l, nullptr);
    else
      out.slots.emplace(l, std::make_shared<const StoreVal>(StoreVal{
                               tysub_store(slot->local, p), tysub_le(slot->value, p)}));
  }
  return out;
}

UEx tysub_ue(const UEx& e, const TySubst& p) {
  return std::visit(
      overloaded{
          [&](const UVar&) -> UEx { return e; },
          [&](const UUnit&) -> UEx { return e; },
          [&](const UPair& n) -> UEx {
            return u_pair(tysub_ue(n.l, p), tysub_ue(n.r, p));
          },
          [&](const UFst& n) -> UEx { return u_fst(tysub_ue(n.e, p)); },
          [&](const USnd& n) -> UEx { return u_snd(tysub_ue(n.e, p)); },
          [&](const ULetUnit& n) -> UEx {
            return u_letunit(tysub_ue(n.rhs, p), tysub_ue(n.body, p));
          },
          [&](const ULam& n) -> UEx {
            return u_lam(n.var, tysub_u(n.ann, p), tysub_ue(n.body, p));
          },
          [&](const UApp& n) -> UEx {
            return u_app(tysub_ue(n.fn, p), tysub_ue(n.arg, p));
          },
          [&](const UInj& n) -> UEx {
            return u_inj(n.which, tysub_u(n.ann, p), tysub_ue(n.e, p));
          },
          [&](const UCase& n) -> UEx {
            return u_case(tysub_ue(n.scrut, p), n.lvar, tysub_ue(n.lbody, p),
                          n.rvar, tysub_ue(n.rbody, p));
          },
          [&](const UFold& n) -> UEx {
            return u_fold(tysub_u(n.ann, p), tysub_ue(n.e, p));
          },
          [&](const UUnfold& n) -> UEx { return u_unfold(tysub_ue(n.e, p)); },
          [&](const UTyLam& n) -> UEx {
            if (n.var == p.name) return e;
            if (p.fv.count(n.var)) {
              std::string fresh = gensym(n.var);
              while (p.fv.count(fresh)) fresh = gensym(n.var);
              TySubst ren{n.var, ut_var(fresh), lt_var(fresh), {fresh}};
              return u_tylam(fresh, tysub_ue(tysub_ue(n.body, ren), p));
            }
            return u_tylam(n.var, tysub_ue(n.body, p));
          },
          [&](const UTyApp& n) -> UEx {
            return u_tyapp(tysub_ue(n.e, p), tysub_u(n.arg, p));
          },
          [&](const UMark& n) -> UEx { return u_mark(n.name, tysub_ue(n.e, p)); },
          [&](const UBoundary& n) -> UEx {
            return u_boundary(tysub_store(n.store, p), tysub_styping(n.styping, p),
                              tysub_le(n.inner, p));
          },
      },
      e->v);
}

LEx tysub_le(const LEx& e, const TySubst& p) {
  return std::visit(
      overloaded{
          [&](const LVar&) -> LEx { return e; },
          [&](const LUnit&) -> LEx { return e; },
          [&](const LPair& n) -> LEx {
            return l_pair(tysub_le(n.l, p), tysub_le(n.r, p));
          },
          [&](const LLetPair& n) -> LEx {
            return l_letpair(n.v1, n.v2, tysub_le(n.rhs, p), tysub_le(n.body, p));
          },
          [&](const LLetUnit& n) -> LEx {
            return l_letunit(tysub_le(n.rhs, p), tysub_le(n.body, p));
          },
          [&](const LLam& n) -> LEx {
            return l_lam(n.var, tysub_l(n.ann, p), tysub_le(n.body, p));
          },
          [&](const LApp& n) -> LEx {
            return l_app(tysub_le(n.fn, p), tysub_le(n.arg, p));
          },
          [&](const LInj& n) -> LEx {
            return l_inj(n.which, tysub_l(n.ann, p), tysub_le(n.e, p));
          },
          [&](const LCase& n) -> LEx {
            return l_case(tysub_le(n.scrut, p), n.lvar, tysub_le(n.lbody, p),
                          n.rvar, tysub_le(n.rbody, p));
          },
          [&](const LFold& n) -> LEx {
            return l_fold(tysub_l(n.ann, p), tysub_le(n.e, p));
          },
          [&](const LUnfold& n) -> LEx { return l_unfold(tysub_le(n.e, p)); },
          [&](const LShare& n) -> LEx {
            return l_share(tysub_store(n.store, p), tysub_styping(n.styping, p),
                           tysub_le(n.body, p));
          },
          [&](const LCopy& n) -> LEx { return l_copy(tysub_le(n.e, p)); },
          [&](const LNew& n) -> LEx { return l_new(tysub_le(n.e, p)); },
          [&](const LFree& n) -> LEx { return l_free(tysub_le(n.e, p)); },
          [&](const LBox& n) -> LEx { return l_box(tysub_le(n.e, p)); },
          [&](const LUnbox& n) -> LEx { return l_unbox(tysub_le(n.e, p)); },
          [&](const LLoc&) -> LEx { return e; },
          [&](const LLump& n) -> LEx { return l_lump(tysub_ue(n.value, p)); },
          [&](const LBoundary& n) -> LEx {
            return l_boundary(tysub_ue(n.inner, p));
          },
          [&](const LLumpOp& n) -> LEx {
            return l_lumpop(tysub_l(n.ann, p), tysub_le(n.e, p));
          },
          [&](const LUnlumpOp& n) -> LEx {
            return l_unlumpop(tysub_l(n.ann, p), tysub_le(n.e, p));
          },
          [&](const LMark& n) -> LEx { return l_mark(n.name, tysub_le(n.e, p)); },
      },
      e->v);
}

} // namespace

UEx subst_ty_in_expr(const UEx& e, const std::string& a, const UTy& repl) {
  return tysub_ue(e, make_tysubst(a, repl, nullptr));
}
LEx subst_ty_in_expr(const LEx& e, const std::string& a, const UTy& repl) {
  return tysub_le(e, make_tysubst(a, repl, nullptr));
}

// ---------------------------------------------------------------------------
// Location renaming
// ---------------------------------------------------------------------------

namespace {
Location ren_loc(Location l, const LocRenaming& r) {
  auto it = r.find(l);
  return it == r.end() ? l : it->second;
}

UEx renloc_u(const UEx& e, const LocRenaming& r);

UEx renloc_u(const UEx& e, const LocRenaming& r) {
  return std::visit(
      overloaded{
          [&](const UVar&) -> UEx { return e; },
          [&](const UUnit&) -> UEx { return e; },
          [&](const UPair& n) -> UEx {
            return u_pair(renloc_u(n.l, r), renloc_u(n.r, r));
          },
          [&](const UFst& n) -> UEx { return u_fst(renloc_u(n.e, r)); },
          [&](const USnd& n) -> UEx { return u_snd(renloc_u(n.e, r)); },
          [&](const ULetUnit& n) -> UEx {
            return u_letunit(renloc_u(n.rhs, r), renloc_u(n.body, r));
          },
          [&](const ULam& n) -> UEx {
            return u_lam(n.var, n.ann, renloc_u(n.body, r));
          },
          [&](const UApp& n) -> UEx {
            return u_app(renloc_u(n.fn, r), renloc_u(n.arg, r));
          },
          [&](const UInj& n) -> UEx {
            return u_inj(n.which, n.ann, renloc_u(n.e, r));
          },
          [&](const UCase& n) -> UEx {
            return u_case(renloc_u(n.scrut, r), n.lvar, renloc_u(n.lbody, r),
                          n.rvar, renloc_u(n.rbody, r));
          },
          [&](const UFold& n) -> UEx { return u_fold(n.ann, renloc_u(n.e, r)); },
          [&](const UUnfold& n) -> UEx { return u_unfold(renloc_u(n.e, r)); },
          [&](const UTyLam& n) -> UEx {
            return u_tylam(n.var, renloc_u(n.body, r));
          },
          [&](const UTyApp& n) -> UEx {
            return u_tyapp(renloc_u(n.e, r), n.arg);
          },
          [&](const UMark& n) -> UEx { return u_mark(n.name, renloc_u(n.e, r)); },
          [&](const UBoundary& n) -> UEx {
            return u_boundary(rename_locations(n.store, r),
                              rename_locations(n.styping, r),
                              rename_locations(n.inner, r));
          },
      },
      e->v);
}
} // namespace

LEx rename_locations(const LEx& e, const LocRenaming& r) {
  return std::visit(
      overloaded{
          [&](const LLoc& n) -> LEx { return l_loc(ren_loc(n.loc, r)); },
          [&](const LVar&) -> LEx { return e; },
          [&](const LUnit&) -> LEx { return e; },
          [&](const LPair& n) -> LEx {
            return l_pair(rename_locations(n.l, r), rename_locations(n.r, r));
          },
          [&](const LLetPair& n) -> LEx {
            return l_letpair(n.v1, n.v2, rename_locations(n.rhs, r),
                             rename_locations(n.body, r));
          },
          [&](const LLetUnit& n) -> LEx {
            return l_letunit(rename_locations(n.rhs, r),
                             rename_locations(n.body, r));
          },
          [&](const LLam& n) -> LEx {
            return l_lam(n.var, n.ann, rename_locations(n.body, r));
          },
          [&](const LApp& n) -> LEx {
            return l_app(rename_locations(n.fn, r), rename_locations(n.arg, r));
          },
          [&](const LInj& n) -> LEx {
            return l_inj(n.which, n.ann, rename_locations(n.e, r));
          },
          [&](const LCase& n) -> LEx {
            return l_case(rename_locations(n.scrut, r), n.lvar,
                          rename_locations(n.lbody, r), n.rvar,
                          rename_locations(n.rbody, r));
          },
          [&](const LFold& n) -> LEx {
            return l_fold(n.ann, rename_locations(n.e, r));
          },
          [&](const LUnfold& n) -> LEx {
            return l_unfold(rename_locations(n.e, r));
          },
          [&](const LShare& n) -> LEx {
            return l_share(rename_locations(n.store, r),
                           rename_locations(n.styping, r),
                           rename_locations(n.body, r));
          },
          [&](const LCopy& n) -> LEx { return l_copy(rename_locations(n.e, r)); },
          [&](const LNew& n) -> LEx { return l_new(rename_locations(n.e, r)); },
          [&](const LFree& n) -> LEx { return l_free(rename_locations(n.e, r)); },
          [&](const LBox& n) -> LEx { return l_box(rename_locations(n.e, r)); },
          [&](const LUnbox& n) -> LEx {
            return l_unbox(rename_locations(n.e, r));
          },
          [&](const LLump& n) -> LEx { return l_lump(renloc_u(n.value, r)); },
          [&](const LBoundary& n) -> LEx {
            return l_boundary(renloc_u(n.inner, r));
          },
          [&](const LLumpOp& n) -> LEx {
            return l_lumpop(n.ann, rename_locations(n.e, r));
          },
          [&](const LUnlumpOp& n) -> LEx {
            return l_unlumpop(n.ann, rename_locations(n.e, r));
          },
          [&](const LMark& n) -> LEx {
            return l_mark(n.name, rename_locations(n.e, r));
          },
      },
      e->v);
}

Store rename_locations(const Store& s, const LocRenaming& r) {
  Store out;
  for (auto& [l, slot] : s.slots) {
    Slot ns = nullptr;
    if (slot)
      ns = std::make_shared<const StoreVal>(StoreVal{
          rename_locations(slot->local, r), rename_locations(slot->value, r)});
    out.slots.emplace(ren_loc(l, r), std::move(ns));
  }
  return out;
}

StoreTyping rename_locations(const StoreTyping& s, const LocRenaming& r) {
  StoreTyping out;
  for (auto& [l, ep] : s.entries) {
    STEntryP ne = ep;
    if (auto* a = std::get_if<STAlive>(&ep->v))
      ne = std::make_shared<const STEntry>(
          STEntry{STAlive{a->ctx, rename_locations(a->inner, r), a->type}});
    out.entries.emplace(ren_loc(l, r), std::move(ne));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Alpha-equivalence
// ---------------------------------------------------------------------------

namespace {

// Binder pairings, innermost last. Two variables match when their innermost
// relevant pairing agrees, or when neither is bound and the names are equal.
struct AlphaEnv {
  std::vector<std::pair<std::string, std::string>> pairs;

  bool var_match(const std::string& a, const std::string& b) const {
    for (auto it = pairs.rbegin(); it != pairs.rend(); ++it) {
      bool la = it->first == a, rb = it->second == b;
      if (la || rb) return la && rb;
    }
    return a == b;
  }
  void push(const std::string& a, const std::string& b) {
    pairs.emplace_back(a, b);
  }
  void pop() { pairs.pop_back(); }
};

bool aeq_uty(const UTy& a, const UTy& b, AlphaEnv& env);
bool aeq_lty(const LTy& a, const LTy& b, AlphaEnv& env);

bool aeq_uty(const UTy& a, const UTy& b, AlphaEnv& env) {
  if (a->v.index() != b->v.index()) return false;
  return std::visit(
      overloaded{
          [&](const UTVar& x) {
            return env.var_match(x.name, std::get<UTVar>(b->v).name);
          },
          [&](const UTUnit&) { return true; },
          [&](const UTProd& x) {
            auto& y = std::get<UTProd>(b->v);
            return aeq_uty(x.l, y.l, env) && aeq_uty(x.r, y.r, env);
          },
          [&](const UTArr& x) {
            auto& y = std::get<UTArr>(b->v);
            return aeq_uty(x.dom, y.dom, env) && aeq_uty(x.cod, y.cod, env);
          },
          [&](const UTSum& x) {
            auto& y = std::get<UTSum>(b->v);
            return aeq_uty(x.l, y.l, env) && aeq_uty(x.r, y.r, env);
          },
          [&](const UTMu& x) {
            auto& y = std::get<UTMu>(b->v);
            env.push(x.var, y.var);
            bool ok = aeq_uty(x.body, y.body, env);
            env.pop();
            return ok;
          },
          [&](const UTAll& x) {
            auto& y = std::get<UTAll>(b->v);
            env.push(x.var, y.var);
            bool ok = aeq_uty(x.body, y.body, env);
            env.pop();
            return ok;
          },
      },
      a->v);
}

bool aeq_lty(const LTy& a, const LTy& b, AlphaEnv& env) {
  if (a->v.index() != b->v.index()) return false;
  return std::visit(
      overloaded{
          [&](const LTVar& x) {
            return env.var_match(x.name, std::get<LTVar>(b->v).name);
          },
          [&](const LTOne&) { return true; },
          [&](const LTTensor& x) {
            auto& y = std::get<LTTensor>(b->v);
            return aeq_lty(x.l, y.l, env) && aeq_lty(x.r, y.r, env);
          },
          [&](const LTLolli& x) {
            auto& y = std::get<LTLolli>(b->v);
            return aeq_lty(x.dom, y.dom, env) && aeq_lty(x.cod, y.cod, env);
          },
          [&](const LTSum& x) {
            auto& y = std::get<LTSum>(b->v);
            return aeq_lty(x.l, y.l, env) && aeq_lty(x.r, y.r, env);
          },
          [&](const LTMu& x) {
            auto& y = std::get<LTMu>(b->v);
            env.push(x.var, y.var);
            bool ok = aeq_lty(x.body, y.body, env);
            env.pop();
            return ok;
          },
          [&](const LTBang& x) {
            return aeq_lty(x.inner, std::get<LTBang>(b->v).inner, env);
          },
          [&](const LTBox& x) {
            return aeq_lty(x.inner, std::get<LTBox>(b->v).inner, env);
          },
          [&](const LTBox0&) { return true; },
          [&](const LTLump& x) {
            return aeq_uty(x.inner, std::get<LTLump>(b->v).inner, env);
          },
      },
      a->v);
}

// Location matching policy for the two equality flavours.
struct LocMatch {
  // When set, locations must map through the bijection (built on the fly);
  // otherwise they must be literally equal.
  std::map<Location, Location>* fwd = nullptr;
  std::map<Location, Location>* bwd = nullptr;

  bool match(Location a, Location b) {
    if (!fwd) return a == b;
    auto fit = fwd->find(a);
    auto bit = bwd->find(b);
    if (fit == fwd->end() && bit == bwd->end()) {
      (*fwd)[a] = b;
      (*bwd)[b] = a;
      return true;
    }
    return fit != fwd->end() && bit != bwd->end() && fit->second == b &&
           bit->second == a;
  }
};

bool aeq_u(const UEx& a, const UEx& b, AlphaEnv& tenv, AlphaEnv& tyenv,
           LocMatch& lm);
bool aeq_l(const LEx& a, const LEx& b, AlphaEnv& tenv, AlphaEnv& tyenv,
           LocMatch& lm);

bool aeq_store(const Store& a, const Store& b, AlphaEnv& tenv, AlphaEnv& tyenv,
               LocMatch& lm) {
  if (a.slots.size() != b.slots.size()) return false;
  if (!lm.fwd) {
    // Literal locations: domains must agree pointwise.
    auto it = b.slots.begin();
    for (auto& [l, slot] : a.slots) {
      if (it->first != l) return false;
      const Slot& other = it->second;
      if (!slot != !other) return false;
      if (slot) {
        if (!aeq_l(slot->value, other->value, tenv, tyenv, lm)) return false;
        if (!aeq_store(slot->local, other->local, tenv, tyenv, lm)) return false;
      }
      ++it;
    }
    return true;
  }
  // Bijective locations: resolve each slot of `a` through the mapping, which
  // the owning value's traversal has already established.
  for (auto& [l, slot] : a.slots) {
    auto fit = lm.fwd->find(l);
    if (fit == lm.fwd->end()) return false;
    auto bit = b.slots.find(fit->second);
    if (bit == b.slots.end()) return false;
    const Slot& other = bit->second;
    if (!slot != !other) return false;
    if (slot) {
      if (!aeq_l(slot->value, other->value, tenv, tyenv, lm)) return false;
      if (!aeq_store(slot->local, other->local, tenv, tyenv, lm)) return false;
    }
  }
  return true;
}

bool aeq_u(const UEx& a, const UEx& b, AlphaEnv& tenv, AlphaEnv& tyenv,
           LocMatch& lm) {
  if (a->v.index() != b->v.index()) return false;
  return std::visit(
      overloaded{
          [&](const UVar& x) {
            return tenv.var_match(x.name, std::get<UVar>(b->v).name);
          },
          [&](const UUnit&) { return true; },
          [&](const UPair& x) {
            auto& y = std::get<UPair>(b->v);
            return aeq_u(x.l, y.l, tenv, tyenv, lm) &&
                   aeq_u(x.r, y.r, tenv, tyenv, lm);
          },
          [&](const UFst& x) {
            return aeq_u(x.e, std::get<UFst>(b->v).e, tenv, tyenv, lm);
          },
          [&](const USnd& x) {
            return aeq_u(x.e, std::get<USnd>(b->v).e, tenv, tyenv, lm);
          },
          [&](const ULetUnit& x) {
            auto& y = std::get<ULetUnit>(b->v);
            return aeq_u(x.rhs, y.rhs, tenv, tyenv, lm) &&
                   aeq_u(x.body, y.body, tenv, tyenv, lm);
          },
          [&](const ULam& x) {
            auto& y = std::get<ULam>(b->v);
            if (!aeq_uty(x.ann, y.ann, tyenv)) return false;
            tenv.push(x.var, y.var);
            bool ok = aeq_u(x.body, y.body, tenv, tyenv, lm);
            tenv.pop();
            return ok;
          },
          [&](const UApp& x) {
            auto& y = std::get<UApp>(b->v);
            return aeq_u(x.fn, y.fn, tenv, tyenv, lm) &&
                   aeq_u(x.arg, y.arg, tenv, tyenv, lm);
          },
          [&](const UInj& x) {
            auto& y = std::get<UInj>(b->v);
            return x.which == y.which && aeq_uty(x.ann, y.ann, tyenv) &&
                   aeq_u(x.e, y.e, tenv, tyenv, lm);
          },
          [&](const UCase& x) {
            auto& y = std::get<UCase>(b->v);
            if (!aeq_u(x.scrut, y.scrut, tenv, tyenv, lm)) return false;
            tenv.push(x.lvar, y.lvar);
            bool ok = aeq_u(x.lbody, y.lbody, tenv, tyenv, lm);
            tenv.pop();
            if (!ok) return false;
            tenv.push(x.rvar, y.rvar);
            ok = aeq_u(x.rbody, y.rbody, tenv, tyenv, lm);
            tenv.pop();
            return ok;
          },
          [&](const UFold& x) {
            auto& y = std::get<UFold>(b->v);
            return aeq_uty(x.ann, y.ann, tyenv) &&
                   aeq_u(x.e, y.e, tenv, tyenv, lm);
          },
          [&](const UUnfold& x) {
            return aeq_u(x.e, std::get<UUnfold>(b->v).e, tenv, tyenv, lm);
          },
          [&](const UTyLam& x) {
            auto& y = std::get<UTyLam>(b->v);
            tyenv.push(x.var, y.var);
            bool ok = aeq_u(x.body, y.body, tenv, tyenv, lm);
            tyenv.pop();
            return ok;
          },
          [&](const UTyApp& x) {
            auto& y = std::get<UTyApp>(b->v);
            return aeq_uty(x.arg, y.arg, tyenv) &&
                   aeq_u(x.e, y.e, tenv, tyenv, lm);
          },
          [&](const UMark& x) {
            auto& y = std::get<UMark>(b->v);
            return x.name == y.name && aeq_u(x.e, y.e, tenv, tyenv, lm);
          },
          [&](const UBoundary& x) {
            auto& y = std::get<UBoundary>(b->v);
            // Store typings are determined by the stores; compare the parts
            // with dynamic content.
            return aeq_l(x.inner, y.inner, tenv, tyenv, lm) &&
                   aeq_store(x.store, y.store, tenv, tyenv, lm);
          },
      },
      a->v);
}

bool aeq_l(const LEx& a, const LEx& b, AlphaEnv& tenv, AlphaEnv& tyenv,
           LocMatch& lm) {
  if (a->v.index() != b->v.index()) return false;
  return std::visit(
      overloaded{
          [&](const LVar& x) {
            return tenv.var_match(x.name, std::get<LVar>(b->v).name);
          },
          [&](const LUnit&) { return true; },
          [&](const LPair& x) {
            auto& y = std::get<LPair>(b->v);
            return aeq_l(x.l, y.l, tenv, tyenv, lm) &&
                   aeq_l(x.r, y.r, tenv, tyenv, lm);
          },
          [&](const LLetPair& x) {
            auto& y = std::get<LLetPair>(b->v);
            if (!aeq_l(x.rhs, y.rhs, tenv, tyenv, lm)) return false;
            tenv.push(x.v1, y.v1);
            tenv.push(x.v2, y.v2);
            bool ok = aeq_l(x.body, y.body, tenv, tyenv, lm);
            tenv.pop();
            tenv.pop();
            return ok;
          },
          [&](const LLetUnit& x) {
            auto& y = std::get<LLetUnit>(b->v);
            return aeq_l(x.rhs, y.rhs, tenv, tyenv, lm) &&
                   aeq_l(x.body, y.body, tenv, tyenv, lm);
          },
          [&](const LLam& x) {
            auto& y = std::get<LLam>(b->v);
            if (!aeq_lty(x.ann, y.ann, tyenv)) return false;
            tenv.push(x.var, y.var);
            bool ok = aeq_l(x.body, y.body, tenv, tyenv, lm);
            tenv.pop();
            return ok;
          },
          [&](const LApp& x) {
            auto& y = std::get<LApp>(b->v);
            return aeq_l(x.fn, y.fn, tenv, tyenv, lm) &&
                   aeq_l(x.arg, y.arg, tenv, tyenv, lm);
          },
          [&](const LInj& x) {
            auto& y = std::get<LInj>(b->v);
            return x.which == y.which && aeq_lty(x.ann, y.ann, tyenv) &&
                   aeq_l(x.e, y.e, tenv, tyenv, lm);
          },
          [&](const LCase& x) {
            auto& y = std::get<LCase>(b->v);
            if (!aeq_l(x.scrut, y.scrut, tenv, tyenv, lm)) return false;
            tenv.push(x.lvar, y.lvar);
            bool ok = aeq_l(x.lbody, y.lbody, tenv, tyenv, lm);
            tenv.pop();
            if (!ok) return false;
            tenv.push(x.rvar, y.rvar);
            ok = aeq_l(x.rbody, y.rbody, tenv, tyenv, lm);
            tenv.pop();
            return ok;
          },
          [&](const LFold& x) {
            auto& y = std::get<LFold>(b->v);
            return aeq_lty(x.ann, y.ann, tyenv) &&
                   aeq_l(x.e, y.e, tenv, tyenv, lm);
          },
          [&](const LUnfold& x) {
            return aeq_l(x.e, std::get<LUnfold>(b->v).e, tenv, tyenv, lm);
          },
          [&](const LShare& x) {
            auto& y = std::get<LShare>(b->v);
            return aeq_l(x.body, y.body, tenv, tyenv, lm) &&
                   aeq_store(x.store, y.store, tenv, tyenv, lm);
          },
          [&](const LCopy& x) {
            return aeq_l(x.e, std::get<LCopy>(b->v).e, tenv, tyenv, lm);
          },
          [&](const LNew& x) {
            return aeq_l(x.e, std::get<LNew>(b->v).e, tenv, tyenv, lm);
          },
          [&](const LFree& x) {
            return aeq_l(x.e, std::get<LFree>(b->v).e, tenv, tyenv, lm);
          },
          [&](const LBox& x) {
            return aeq_l(x.e, std::get<LBox>(b->v).e, tenv, tyenv, lm);
          },
          [&](const LUnbox& x) {
            return aeq_l(x.e, std::get<LUnbox>(b->v).e, tenv, tyenv, lm);
          },
          [&](const LLoc& x) {
            return lm.match(x.loc, std::get<LLoc>(b->v).loc);
          },
          [&](const LLump& x) {
            return aeq_u(x.value, std::get<LLump>(b->v).value, tenv, tyenv, lm);
          },
          [&](const LBoundary& x) {
            return aeq_u(x.inner, std::get<LBoundary>(b->v).inner, tenv, tyenv,
                         lm);
          },
          [&](const LLumpOp& x) {
            auto& y = std::get<LLumpOp>(b->v);
            return aeq_lty(x.ann, y.ann, tyenv) &&
                   aeq_l(x.e, y.e, tenv, tyenv, lm);
          },
          [&](const LUnlumpOp& x) {
            auto& y = std::get<LUnlumpOp>(b->v);
            return aeq_lty(x.ann, y.ann, tyenv) &&
                   aeq_l(x.e, y.e, tenv, tyenv, lm);
          },
          [&](const LMark& x) {
            auto& y = std::get<LMark>(b->v);
            return x.name == y.name && aeq_l(x.e, y.e, tenv, tyenv, lm);
          },
      },
      a->v);
}

} // namespace

bool alpha_equal(const UTy& a, const UTy& b) {
  AlphaEnv env;
  return aeq_uty(a, b, env);
}
bool alpha_equal(const LTy& a, const LTy& b) {
  AlphaEnv env;
  return aeq_lty(a, b, env);
}
bool alpha_equal(const UEx& a, const UEx& b) {
  AlphaEnv tenv, tyenv;
  LocMatch lm;
  return aeq_u(a, b, tenv, tyenv, lm);
}
bool alpha_equal(const LEx& a, const LEx& b) {
  AlphaEnv tenv, tyenv;
  LocMatch lm;
  return aeq_l(a, b, tenv, tyenv, lm);
}
bool alpha_equal(const Store& a, const Store& b) {
  AlphaEnv tenv, tyenv;
  LocMatch lm;
  return aeq_store(a, b, tenv, tyenv, lm);
}

bool equal_up_to_locations(const LEx& a, const LEx& b) {
  AlphaEnv tenv, tyenv;
  std::map<Location, Location> fwd, bwd;
  LocMatch lm{&fwd, &bwd};
  return aeq_l(a, b, tenv, tyenv, lm);
}

bool equal_up_to_locations(const Configuration& a, const Configuration& b) {
  AlphaEnv tenv, tyenv;
  std::map<Location, Location> fwd, bwd;
  LocMatch lm{&fwd, &bwd};
  return aeq_l(a.expr, b.expr, tenv, tyenv, lm) &&
         aeq_store(a.store, b.store, tenv, tyenv, lm);
}

} // namespace ul
