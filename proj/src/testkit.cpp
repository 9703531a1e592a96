#include "ul/testkit.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "ul/errors.hpp"
#include "ul/funtrans.hpp"
#include "ul/interop.hpp"
#include "ul/pretty.hpp"
#include "ul/typecheck.hpp"

namespace ul {
namespace {

template <class... Ts> struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

// splitmix64 finalizer; decorrelates per-sample seeds derived from one base.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kSrSalt = 0x5b5bd1a5u;
constexpr std::uint64_t kDiffSalt = 0xd1ffu;
constexpr std::uint64_t kRtSalt = 0x407717u;
constexpr std::uint64_t kCompSalt = 0xc09901u;
constexpr std::uint64_t kCovSalt = 0xc07e6au;

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  std::size_t pick(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng);
  }
  int range(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(eng);
  }
  bool coin() { return pick(2) == 0; }
};

[[noreturn]] void uninhabited(const std::string& what) {
  throw Error(Errc::Uninhabited, what);
}

bool is_uninhabited(const Error& e) { return e.code == Errc::Uninhabited; }

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  long ms() const {
    return static_cast<long>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count());
  }
};

// ---------------------------------------------------------------------------
// Type palettes
// ---------------------------------------------------------------------------

// Binder and domain positions only take types with a destructor, so a linear
// binder can always be consumed. Bare lumps and type variables are excluded.
const std::vector<LTy>& l_domain_palette() {
  static const std::vector<LTy> p = {
      lt_one(),
      lt_bang(lt_one()),
      lt_box0(),
      lt_box(lt_bang(lt_one())),
      lt_tensor(lt_one(), lt_one()),
      lt_sum(lt_one(), lt_one()),
  };
  return p;
}

const std::vector<UTy>& u_domain_palette() {
  static const std::vector<UTy> p = {
      ut_unit(),
      ut_prod(ut_unit(), ut_unit()),
      ut_sum(ut_unit(), ut_unit()),
      ut_arr(ut_unit(), ut_unit()),
  };
  return p;
}

// Configuration result types the metatheory batches cycle through.
const std::vector<LTy>& config_targets() {
  static const std::vector<LTy> p = [] {
    LTy b1 = lt_bang(lt_one());
    return std::vector<LTy>{
        lt_one(),
        b1,
        lt_box0(),
        lt_box(b1),
        lt_tensor(b1, lt_box(b1)),
        lt_sum(lt_one(), lt_tensor(lt_box0(), lt_one())),
        lt_bang(lt_lolli(b1, b1)),
        lt_lump(ut_unit()),
        lt_bang(lt_lump(ut_sum(ut_unit(), ut_unit()))),
        lt_mu("a", lt_sum(lt_one(), lt_box(lt_tensor(b1, lt_var("a"))))),
        lt_box(lt_box(b1)),
        lt_tensor(lt_one(), lt_sum(b1, b1)),
    };
  }();
  return p;
}

// Closed program result types for the differential batches. First order, so
// final values compare structurally.
const std::vector<UTy>& program_targets() {
  static const std::vector<UTy> p = [] {
    UTy u = ut_unit();
    return std::vector<UTy>{
        u,
        ut_prod(u, u),
        ut_sum(u, u),
        ut_prod(ut_sum(u, u), u),
        ut_mu("a", ut_sum(u, ut_var("a"))),
        ut_mu("a", ut_sum(u, ut_prod(u, ut_var("a")))),
    };
  }();
  return p;
}

bool first_order(const UTy& t) {
  return std::visit(
      overloaded{
          [](const UTVar&) { return true; },
          [](const UTUnit&) { return true; },
          [](const UTProd& n) { return first_order(n.l) && first_order(n.r); },
          [](const UTArr&) { return false; },
          [](const UTSum& n) { return first_order(n.l) && first_order(n.r); },
          [](const UTMu& n) { return first_order(n.body); },
          [](const UTAll&) { return false; },
      },
      t->v);
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

// Linear resources the term under construction still has to consume.
struct Obligations {
  std::map<std::string, LTy> vars;
  std::map<Location, STEntryP> locs;

  bool empty() const { return vars.empty() && locs.empty(); }
  std::size_t size() const { return vars.size() + locs.size(); }
};

LTy entry_type(const STEntryP& e) {
  if (std::holds_alternative<STDead>(e->v)) return lt_box0();
  return lt_box(std::get<STAlive>(e->v).type);
}

struct Gen {
  Rng rng;
  int name_ctr = 0;

  explicit Gen(std::uint64_t seed) : rng(seed) {}

  // All binder names come from one monotone counter, so a new binder never
  // shadows an undischarged obligation.
  std::string fresh() { return "v" + std::to_string(name_ctr++); }

  static std::string fresh_tyvar(const std::set<std::string>& avoid) {
    for (int i = 0;; ++i) {
      std::string n = "r" + std::to_string(i);
      if (!avoid.count(n)) return n;
    }
  }

  std::pair<Obligations, Obligations> split(const Obligations& o) {
    Obligations a, b;
    for (const auto& [x, t] : o.vars) (rng.coin() ? a : b).vars.emplace(x, t);
    for (const auto& [l, e] : o.locs) (rng.coin() ? a : b).locs.emplace(l, e);
    return {a, b};
  }

  LTy pick_l_dom() {
    const auto& p = l_domain_palette();
    return p[rng.pick(p.size())];
  }
  UTy pick_u_dom() {
    const auto& p = u_domain_palette();
    return p[rng.pick(p.size())];
  }

  // Innermost unshadowed variables of exactly this type.
  std::vector<std::string> u_witnesses(const MixedContext& ctx, const UTy& tau) {
    std::vector<std::string> out;
    for (const auto& e : ctx.entries)
      if (e.kind == MixedContext::Entry::Kind::UVar && alpha_equal(e.utype, tau) &&
          ctx.lookup(e.name) == &e)
        out.push_back(e.name);
    return out;
  }

  // Duplicable witnesses can be used without entering the obligation set.
  std::vector<std::string> l_dup_witnesses(const MixedContext& ctx, const LTy& t) {
    std::vector<std::string> out;
    if (!duplicable(t)) return out;
    for (const auto& e : ctx.entries)
      if (e.kind == MixedContext::Entry::Kind::LVar && alpha_equal(e.ltype, t) &&
          ctx.lookup(e.name) == &e)
        out.push_back(e.name);
    return out;
  }

  template <class T>
  T attempt(std::vector<std::function<T()>>& moves, const std::string& what) {
    for (int tries = 0; tries < 12 && !moves.empty(); ++tries) {
      std::size_t i = rng.pick(moves.size());
      try {
        return moves[i]();
      } catch (const Error& e) {
        if (!is_uninhabited(e)) throw;
        moves.erase(moves.begin() + static_cast<std::ptrdiff_t>(i));
      }
    }
    uninhabited(what);
  }

  // Smallest inhabitant; always a value; consumes nothing. `depth` bounds mu
  // unrolling, everything else recurses on a smaller type.
  UEx canon_u(const MixedContext& ctx, const UTy& tau, int depth) {
    return std::visit(
        overloaded{
            [&](const UTVar& n) -> UEx {
              auto ws = u_witnesses(ctx, tau);
              if (ws.empty())
                uninhabited("type variable " + n.name + " has no witness in scope");
              return u_var(ws.front());
            },
            [&](const UTUnit&) -> UEx { return u_unit(); },
            [&](const UTProd& n) -> UEx {
              return u_pair(canon_u(ctx, n.l, depth), canon_u(ctx, n.r, depth));
            },
            [&](const UTArr& n) -> UEx {
              std::string x = fresh();
              return u_lam(x, n.dom, canon_u(ctx.with_u(x, n.dom), n.cod, depth));
            },
            [&](const UTSum& n) -> UEx {
              try {
                return u_inj(1, tau, canon_u(ctx, n.l, depth));
              } catch (const Error& e) {
                if (!is_uninhabited(e)) throw;
                return u_inj(2, tau, canon_u(ctx, n.r, depth));
              }
            },
            [&](const UTMu& n) -> UEx {
              if (depth <= 0) uninhabited("no base case within depth: " + pretty(tau));
              return u_fold(tau, canon_u(ctx, subst_ty(n.body, n.var, tau), depth - 1));
            },
            [&](const UTAll& n) -> UEx {
              return u_tylam(n.var, canon_u(ctx.with_tyvar(n.var), n.body, depth));
            },
        },
        tau->v);
  }

  // Smallest closed term; consumes no ambient resources. Not always a value
  // (a Box inhabitant must allocate), which is fine everywhere it is used.
  LEx canon_l(const MixedContext& ctx, const LTy& t, int depth) {
    return std::visit(
        overloaded{
            [&](const LTVar& n) -> LEx {
              uninhabited("type variable " + n.name + " has no duplicable witness");
            },
            [&](const LTOne&) -> LEx { return l_unit(); },
            [&](const LTTensor& n) -> LEx {
              return l_pair(canon_l(ctx, n.l, depth), canon_l(ctx, n.r, depth));
            },
            [&](const LTLolli& n) -> LEx {
              std::string x = fresh();
              MixedContext cx = ctx.with_l(x, n.dom);
              if (duplicable(n.dom)) return l_lam(x, n.dom, canon_l(cx, n.cod, depth));
              if (alpha_equal(n.dom, n.cod)) return l_lam(x, n.dom, l_var(x));
              return l_lam(x, n.dom,
                           l_letunit(sink(cx, l_var(x), n.dom, depth),
                                     canon_l(cx, n.cod, depth)));
            },
            [&](const LTSum& n) -> LEx {
              try {
                return l_inj(1, t, canon_l(ctx, n.l, depth));
              } catch (const Error& e) {
                if (!is_uninhabited(e)) throw;
                return l_inj(2, t, canon_l(ctx, n.r, depth));
              }
            },
            [&](const LTMu& n) -> LEx {
              if (depth <= 0) uninhabited("no base case within depth: " + pretty(t));
              return l_fold(t, canon_l(ctx, subst_ty_l(n.body, n.var, t), depth - 1));
            },
            [&](const LTBang& n) -> LEx { return l_share(canon_l(ctx, n.inner, depth)); },
            [&](const LTBox& n) -> LEx {
              return l_box(l_pair(l_new(l_unit()), canon_l(ctx, n.inner, depth)));
            },
            [&](const LTBox0&) -> LEx { return l_new(l_unit()); },
            [&](const LTLump& n) -> LEx {
              return l_boundary(canon_u(ctx, n.inner, depth));
            },
        },
        t->v);
  }

  // An expression of type 1 that consumes `of` (of type t) along with
  // everything `of` consumes. Fails where t has no destructor.
  LEx sink(const MixedContext& ctx, const LEx& of, const LTy& t, int depth) {
    return std::visit(
        overloaded{
            [&](const LTVar&) -> LEx {
              uninhabited("no destructor for a bare type variable");
            },
            [&](const LTLump&) -> LEx { uninhabited("no destructor for a bare lump"); },
            [&](const LTOne&) -> LEx { return of; },
            [&](const LTTensor& n) -> LEx {
              std::string a = fresh(), b = fresh();
              MixedContext cx = ctx.with_l(a, n.l).with_l(b, n.r);
              return l_letpair(a, b, of,
                               l_letunit(sink(cx, l_var(a), n.l, depth),
                                         sink(cx, l_var(b), n.r, depth)));
            },
            [&](const LTLolli& n) -> LEx {
              return sink(ctx, l_app(of, canon_l(ctx, n.dom, depth)), n.cod, depth);
            },
            [&](const LTSum& n) -> LEx {
              std::string a = fresh(), b = fresh();
              return l_case(of, a, sink(ctx.with_l(a, n.l), l_var(a), n.l, depth), b,
                            sink(ctx.with_l(b, n.r), l_var(b), n.r, depth));
            },
            [&](const LTMu& n) -> LEx {
              if (depth <= 0) uninhabited("mu sinking exhausted");
              return sink(ctx, l_unfold(of), subst_ty_l(n.body, n.var, t), depth - 1);
            },
            [&](const LTBang&) -> LEx {
              // Duplicable values may be dropped, but `of` must still run.
              std::string x = fresh();
              return l_app(l_lam(x, t, l_unit()), of);
            },
            [&](const LTBox& n) -> LEx {
              std::string z = fresh(), y = fresh();
              MixedContext cx = ctx.with_l(z, lt_box0()).with_l(y, n.inner);
              return l_letpair(z, y, l_unbox(of),
                               l_letunit(l_free(l_var(z)),
                                         sink(cx, l_var(y), n.inner, depth)));
            },
            [&](const LTBox0&) -> LEx { return l_free(of); },
        },
        t->v);
  }

  UEx gen_u(const MixedContext& ctx, const UTy& tau, int budget) {
    std::vector<std::function<UEx()>> moves;
    auto add = [&moves](int weight, std::function<UEx()> m) {
      for (int i = 0; i < weight; ++i) moves.push_back(m);
    };

    {
      auto ws = u_witnesses(ctx, tau);
      if (!ws.empty()) {
        std::string x = ws[rng.pick(ws.size())];
        add(3, [x] { return u_var(x); });
      }
    }
    add(1, [&] { return canon_u(ctx, tau, 6); });

    if (budget > 0) {
      std::visit(
          overloaded{
              [&](const UTUnit&) {},
              [&](const UTVar&) {},
              [&](const UTProd& n) {
                add(4, [&, n] {
                  return u_pair(gen_u(ctx, n.l, budget / 2), gen_u(ctx, n.r, budget / 2));
                });
              },
              [&](const UTArr& n) {
                add(4, [&, n] {
                  std::string x = fresh();
                  return u_lam(x, n.dom, gen_u(ctx.with_u(x, n.dom), n.cod, budget - 1));
                });
              },
              [&](const UTSum& n) {
                add(4, [&, n] {
                  int which = rng.coin() ? 1 : 2;
                  try {
                    return u_inj(which, tau,
                                 gen_u(ctx, which == 1 ? n.l : n.r, budget - 1));
                  } catch (const Error& e) {
                    if (!is_uninhabited(e)) throw;
                    which = 3 - which;
                    return u_inj(which, tau,
                                 gen_u(ctx, which == 1 ? n.l : n.r, budget - 1));
                  }
                });
              },
              [&](const UTMu& n) {
                add(4, [&, n] {
                  return u_fold(tau, gen_u(ctx, subst_ty(n.body, n.var, tau), budget - 1));
                });
              },
              [&](const UTAll& n) {
                // Body under the value restriction: canonical inhabitants are
                // always values.
                add(3, [&, n] {
                  return u_tylam(n.var, canon_u(ctx.with_tyvar(n.var), n.body, 6));
                });
              },
          },
          tau->v);

      add(2, [&] {
        UTy dom = pick_u_dom();
        return u_app(gen_u(ctx, ut_arr(dom, tau), budget / 2),
                     gen_u(ctx, dom, budget / 2));
      });
      add(1, [&] {
        UTy other = pick_u_dom();
        if (rng.coin()) return u_fst(gen_u(ctx, ut_prod(tau, other), budget - 1));
        return u_snd(gen_u(ctx, ut_prod(other, tau), budget - 1));
      });
      add(1, [&] {
        return u_letunit(gen_u(ctx, ut_unit(), budget / 2), gen_u(ctx, tau, budget / 2));
      });
      add(2, [&] {
        UTy sl = pick_u_dom(), sr = pick_u_dom();
        UEx scrut = gen_u(ctx, ut_sum(sl, sr), budget / 2);
        std::string a = fresh(), b = fresh();
        return u_case(scrut, a, gen_u(ctx.with_u(a, sl), tau, budget / 2), b,
                      gen_u(ctx.with_u(b, sr), tau, budget / 2));
      });
      add(1, [&] {
        // Unfold at a vacuous mu: mu r.tau with r unused unrolls to tau.
        std::string a = fresh_tyvar(free_tyvars(tau));
        return u_unfold(gen_u(ctx, ut_mu(a, tau), budget - 1));
      });
      add(1, [&] {
        std::string a = fresh_tyvar(free_tyvars(tau));
        return u_tyapp(gen_u(ctx, ut_all(a, tau), budget - 1), ut_unit());
      });
      add(3, [&] {
        return u_boundary(
            gen_l(ctx, StoreTyping{}, lt_bang(lt_lump(tau)), Obligations{}, budget - 1));
      });
      // Apply an in-scope function that lands on tau.
      for (const auto& e : ctx.entries) {
        if (e.kind != MixedContext::Entry::Kind::UVar) continue;
        if (ctx.lookup(e.name) != &e) continue;
        const auto* ar = std::get_if<UTArr>(&e.utype->v);
        if (!ar || !alpha_equal(ar->cod, tau)) continue;
        add(2, [&, name = e.name, dom = ar->dom] {
          return u_app(u_var(name), gen_u(ctx, dom, budget - 1));
        });
      }
    }

    return attempt(moves, "no U inhabitant of " + pretty(tau) + " within budget");
  }

  LEx gen_l(const MixedContext& ctx, const StoreTyping& sty, const LTy& t,
            const Obligations& obl, int budget) {
    std::vector<std::function<LEx()>> moves;
    auto add = [&moves](int weight, std::function<LEx()> m) {
      for (int i = 0; i < weight; ++i) moves.push_back(m);
    };

    if (obl.vars.size() == 1 && obl.locs.empty()) {
      const auto& [x, xt] = *obl.vars.begin();
      if (alpha_equal(xt, t)) {
        std::string name = x;
        add(4, [name] { return l_var(name); });
      }
    }
    if (obl.locs.size() == 1 && obl.vars.empty()) {
      const auto& [loc, entry] = *obl.locs.begin();
      if (alpha_equal(entry_type(entry), t)) {
        Location l = loc;
        add(4, [l] { return l_loc(l); });
      }
    }
    if (obl.empty()) {
      auto ws = l_dup_witnesses(ctx, t);
      if (!ws.empty()) {
        std::string x = ws[rng.pick(ws.size())];
        add(2, [x] { return l_var(x); });
      }
      add(1, [&] { return canon_l(ctx, t, 6); });
    } else {
      // Discharge one obligation into a unit prefix, keep generating. This
      // move never needs budget, so obligations cannot strand.
      add(3, [&] {
        Obligations rest = obl;
        LEx sunk;
        std::size_t k = rng.pick(obl.size());
        if (k < obl.vars.size()) {
          auto it = std::next(obl.vars.begin(),
                              static_cast<std::ptrdiff_t>(k));
          sunk = sink(ctx, l_var(it->first), it->second, 8);
          rest.vars.erase(it->first);
        } else {
          auto it = std::next(obl.locs.begin(),
                              static_cast<std::ptrdiff_t>(k - obl.vars.size()));
          sunk = sink(ctx, l_loc(it->first), entry_type(it->second), 8);
          rest.locs.erase(it->first);
        }
        return l_letunit(sunk, gen_l(ctx, sty, t, rest, std::max(budget - 1, 0)));
      });
    }

    if (budget > 0) {
      std::visit(
          overloaded{
              [&](const LTVar&) {},
              [&](const LTOne&) {
                if (obl.empty()) add(1, [] { return l_unit(); });
              },
              [&](const LTTensor& n) {
                add(4, [&, n] {
                  auto [o1, o2] = split(obl);
                  return l_pair(gen_l(ctx, sty, n.l, o1, budget / 2),
                                gen_l(ctx, sty, n.r, o2, budget / 2));
                });
              },
              [&](const LTLolli& n) {
                add(4, [&, n] {
                  std::string x = fresh();
                  Obligations o = obl;
                  if (!duplicable(n.dom)) o.vars.emplace(x, n.dom);
                  return l_lam(x, n.dom,
                               gen_l(ctx.with_l(x, n.dom), sty, n.cod, o, budget - 1));
                });
              },
              [&](const LTSum& n) {
                add(3, [&, n] {
                  int which = rng.coin() ? 1 : 2;
                  try {
                    return l_inj(which, t,
                                 gen_l(ctx, sty, which == 1 ? n.l : n.r, obl, budget - 1));
                  } catch (const Error& e) {
                    if (!is_uninhabited(e)) throw;
                    which = 3 - which;
                    return l_inj(which, t,
                                 gen_l(ctx, sty, which == 1 ? n.l : n.r, obl, budget - 1));
                  }
                });
              },
              [&](const LTMu& n) {
                add(3, [&, n] {
                  return l_fold(
                      t, gen_l(ctx, sty, subst_ty_l(n.body, n.var, t), obl, budget - 1));
                });
              },
              [&](const LTBang& n) {
                // A share body lives in its own world: no ambient locations,
                // no linear captures.
                if (obl.empty())
                  add(3, [&, n] {
                    return l_share(
                        gen_l(ctx, StoreTyping{}, n.inner, Obligations{}, budget - 1));
                  });
              },
              [&](const LTBox& n) {
                add(3, [&, n] {
                  auto [o1, o2] = split(obl);
                  return l_box(l_pair(gen_l(ctx, sty, lt_box0(), o1, budget / 2),
                                      gen_l(ctx, sty, n.inner, o2, budget / 2)));
                });
              },
              [&](const LTBox0&) {
                add(2, [&] { return l_new(gen_l(ctx, sty, lt_one(), obl, budget - 1)); });
              },
              [&](const LTLump& n) {
                if (obl.empty())
                  add(3, [&, n] { return l_boundary(gen_u(ctx, n.inner, budget - 1)); });
                // Route through the lump coercion; Lump(tau) recovers tau, and
                // !1 recovers unit.
                add(1, [&, n] {
                  LTy src = lt_lump(n.inner);
                  if (std::holds_alternative<UTUnit>(n.inner->v) && rng.coin())
                    src = lt_bang(lt_one());
                  return l_lumpop(src, gen_l(ctx, sty, src, obl, budget - 1));
                });
              },
          },
          t->v);

      if (auto rec = recover_u(t)) {
        add(2, [&, rec] {
          return l_unlumpop(t, gen_l(ctx, sty, lt_lump(*rec), obl, budget - 1));
        });
      }
      add(2, [&] {
        LTy dom = pick_l_dom();
        auto [o1, o2] = split(obl);
        return l_app(gen_l(ctx, sty, lt_lolli(dom, t), o1, budget / 2),
                     gen_l(ctx, sty, dom, o2, budget / 2));
      });
      add(2, [&] {
        LTy s1 = pick_l_dom(), s2 = pick_l_dom();
        auto [o1, o2] = split(obl);
        std::string x = fresh(), y = fresh();
        Obligations ob = o2;
        if (!duplicable(s1)) ob.vars.emplace(x, s1);
        if (!duplicable(s2)) ob.vars.emplace(y, s2);
        return l_letpair(x, y, gen_l(ctx, sty, lt_tensor(s1, s2), o1, budget / 2),
                         gen_l(ctx.with_l(x, s1).with_l(y, s2), sty, t, ob, budget / 2));
      });
      add(1, [&] {
        auto [o1, o2] = split(obl);
        return l_letunit(gen_l(ctx, sty, lt_one(), o1, budget / 2),
                         gen_l(ctx, sty, t, o2, budget / 2));
      });
      add(2, [&] {
        // Both branches discharge the same obligations plus their own binder,
        // so the branch usages join.
        LTy s1 = pick_l_dom(), s2 = pick_l_dom();
        auto [o1, o2] = split(obl);
        LEx scrut = gen_l(ctx, sty, lt_sum(s1, s2), o1, budget / 2);
        std::string a = fresh(), b = fresh();
        Obligations oa = o2, ob = o2;
        if (!duplicable(s1)) oa.vars.emplace(a, s1);
        if (!duplicable(s2)) ob.vars.emplace(b, s2);
        return l_case(scrut, a, gen_l(ctx.with_l(a, s1), sty, t, oa, budget / 2), b,
                      gen_l(ctx.with_l(b, s2), sty, t, ob, budget / 2));
      });
      add(1, [&] {
        std::string a = fresh_tyvar(free_tyvars(t));
        return l_unfold(gen_l(ctx, sty, lt_mu(a, t), obl, budget - 1));
      });
      if (obl.empty()) {
        add(2, [&] {
          return l_copy(gen_l(ctx, sty, lt_bang(t), Obligations{}, budget - 1));
        });
        auto ws = l_dup_witnesses(ctx, lt_bang(t));
        if (!ws.empty()) {
          std::string w = ws[rng.pick(ws.size())];
          add(2, [w] { return l_copy(l_var(w)); });
        }
      }
    }

    return attempt(moves, "no L inhabitant of " + pretty(t) + " within budget");
  }
};

// Seeds a store with dead, full, and nested cells, then generates a term
// obligated to consume all of it. Top cells get small numbers, nested cells
// start at 100; supplies seed past the maximum literal either way.
Configuration gen_l_config_impl(Gen& g, const MixedContext& ctx, const LTy& t,
                                int budget) {
  Store store;
  int cells = g.rng.range(0, 3);
  for (int i = 0; i < cells; ++i) {
    Location l = i;
    switch (g.rng.pick(4)) {
      case 0:
        store.slots[l] = nullptr;
        break;
      case 1:
        store.slots[l] = slot_full(Store{}, l_share(l_unit()));
        break;
      case 2: {
        Store local;
        local.slots[100 + l] = nullptr;
        store.slots[l] = slot_full(local, l_loc(100 + l));
        break;
      }
      case 3: {
        Store local;
        local.slots[100 + l] = slot_full(Store{}, l_share(l_unit()));
        store.slots[l] = slot_full(local, l_loc(100 + l));
        break;
      }
    }
  }
  StoreTyping sty = infer_store_typing(store);
  Obligations obl;
  for (const auto& [l, e] : sty.entries) obl.locs.emplace(l, e);
  LEx expr = g.gen_l(ctx, sty, t, obl, budget);
  return {store, expr};
}

// ---------------------------------------------------------------------------
// Shrinking
// ---------------------------------------------------------------------------

void collect_l(const LEx& e, std::vector<LEx>& subs, std::vector<Configuration>& cfgs);

void collect_l_in_u(const UEx& e, std::vector<LEx>& subs,
                    std::vector<Configuration>& cfgs) {
  std::visit(
      overloaded{
          [&](const UVar&) {}, [&](const UUnit&) {},
          [&](const UPair& n) {
            collect_l_in_u(n.l, subs, cfgs);
            collect_l_in_u(n.r, subs, cfgs);
          },
          [&](const UFst& n) { collect_l_in_u(n.e, subs, cfgs); },
          [&](const USnd& n) { collect_l_in_u(n.e, subs, cfgs); },
          [&](const ULetUnit& n) {
            collect_l_in_u(n.rhs, subs, cfgs);
            collect_l_in_u(n.body, subs, cfgs);
          },
          [&](const ULam& n) { collect_l_in_u(n.body, subs, cfgs); },
          [&](const UApp& n) {
            collect_l_in_u(n.fn, subs, cfgs);
            collect_l_in_u(n.arg, subs, cfgs);
          },
          [&](const UInj& n) { collect_l_in_u(n.e, subs, cfgs); },
          [&](const UCase& n) {
            collect_l_in_u(n.scrut, subs, cfgs);
            collect_l_in_u(n.lbody, subs, cfgs);
            collect_l_in_u(n.rbody, subs, cfgs);
          },
          [&](const UFold& n) { collect_l_in_u(n.e, subs, cfgs); },
          [&](const UUnfold& n) { collect_l_in_u(n.e, subs, cfgs); },
          [&](const UTyLam& n) { collect_l_in_u(n.body, subs, cfgs); },
          [&](const UTyApp& n) { collect_l_in_u(n.e, subs, cfgs); },
          [&](const UMark& n) { collect_l_in_u(n.e, subs, cfgs); },
          [&](const UBoundary& n) {
            cfgs.push_back({n.store, n.inner});
            collect_l(n.inner, subs, cfgs);
          },
      },
      e->v);
}

void collect_l(const LEx& e, std::vector<LEx>& subs, std::vector<Configuration>& cfgs) {
  subs.push_back(e);
  std::visit(
      overloaded{
          [&](const LVar&) {}, [&](const LUnit&) {}, [&](const LLoc&) {},
          [&](const LPair& n) {
            collect_l(n.l, subs, cfgs);
            collect_l(n.r, subs, cfgs);
          },
          [&](const LLetPair& n) {
            collect_l(n.rhs, subs, cfgs);
            collect_l(n.body, subs, cfgs);
          },
          [&](const LLetUnit& n) {
            collect_l(n.rhs, subs, cfgs);
            collect_l(n.body, subs, cfgs);
          },
          [&](const LLam& n) { collect_l(n.body, subs, cfgs); },
          [&](const LApp& n) {
            collect_l(n.fn, subs, cfgs);
            collect_l(n.arg, subs, cfgs);
          },
          [&](const LInj& n) { collect_l(n.e, subs, cfgs); },
          [&](const LCase& n) {
            collect_l(n.scrut, subs, cfgs);
            collect_l(n.lbody, subs, cfgs);
            collect_l(n.rbody, subs, cfgs);
          },
          [&](const LFold& n) { collect_l(n.e, subs, cfgs); },
          [&](const LUnfold& n) { collect_l(n.e, subs, cfgs); },
          [&](const LShare& n) {
            if (!n.store.empty()) cfgs.push_back({n.store, n.body});
            collect_l(n.body, subs, cfgs);
          },
          [&](const LCopy& n) { collect_l(n.e, subs, cfgs); },
          [&](const LNew& n) { collect_l(n.e, subs, cfgs); },
          [&](const LFree& n) { collect_l(n.e, subs, cfgs); },
          [&](const LBox& n) { collect_l(n.e, subs, cfgs); },
          [&](const LUnbox& n) { collect_l(n.e, subs, cfgs); },
          [&](const LLump& n) { collect_l_in_u(n.value, subs, cfgs); },
          [&](const LBoundary& n) { collect_l_in_u(n.inner, subs, cfgs); },
          [&](const LLumpOp& n) { collect_l(n.e, subs, cfgs); },
          [&](const LUnlumpOp& n) { collect_l(n.e, subs, cfgs); },
          [&](const LMark& n) { collect_l(n.e, subs, cfgs); },
      },
      e->v);
}

std::size_t cfg_size(const Configuration& c) {
  return pretty(c.expr).size() + 16 * c.store.slots.size();
}

// Greedy descent to a smallest failing subconfiguration. Candidates that do
// not re-type are skipped, so the result is well typed and still failing.
Configuration shrink_config(const Configuration& bad,
                            const std::function<bool(const Configuration&)>& fails) {
  Configuration cur = bad;
  for (bool improved = true; improved;) {
    improved = false;
    std::vector<LEx> subs;
    std::vector<Configuration> cands;
    collect_l(cur.expr, subs, cands);
    for (const LEx& s : subs) {
      std::set<Location> need = locations_of(s);
      bool covered = true;
      for (Location l : need)
        if (!cur.store.slots.count(l)) covered = false;
      if (covered) cands.push_back({cur.store.restrict_to(need), s});
    }
    std::sort(cands.begin(), cands.end(),
              [](const Configuration& a, const Configuration& b) {
                return cfg_size(a) < cfg_size(b);
              });
    for (Configuration& c : cands) {
      if (cfg_size(c) >= cfg_size(cur)) continue;
      try {
        typecheck_config(MixedContext{}, c);
      } catch (const Error&) {
        continue;
      }
      if (!fails(c)) continue;
      cur = std::move(c);
      improved = true;
      break;
    }
  }
  return cur;
}

void collect_u(const UEx& e, std::vector<UEx>& out);

void collect_u_in_l(const LEx& e, std::vector<UEx>& out) {
  std::visit(
      overloaded{
          [&](const LVar&) {}, [&](const LUnit&) {}, [&](const LLoc&) {},
          [&](const LPair& n) {
            collect_u_in_l(n.l, out);
            collect_u_in_l(n.r, out);
          },
          [&](const LLetPair& n) {
            collect_u_in_l(n.rhs, out);
            collect_u_in_l(n.body, out);
          },
          [&](const LLetUnit& n) {
            collect_u_in_l(n.rhs, out);
            collect_u_in_l(n.body, out);
          },
          [&](const LLam& n) { collect_u_in_l(n.body, out); },
          [&](const LApp& n) {
            collect_u_in_l(n.fn, out);
            collect_u_in_l(n.arg, out);
          },
          [&](const LInj& n) { collect_u_in_l(n.e, out); },
          [&](const LCase& n) {
            collect_u_in_l(n.scrut, out);
            collect_u_in_l(n.lbody, out);
            collect_u_in_l(n.rbody, out);
          },
          [&](const LFold& n) { collect_u_in_l(n.e, out); },
          [&](const LUnfold& n) { collect_u_in_l(n.e, out); },
          [&](const LShare& n) { collect_u_in_l(n.body, out); },
          [&](const LCopy& n) { collect_u_in_l(n.e, out); },
          [&](const LNew& n) { collect_u_in_l(n.e, out); },
          [&](const LFree& n) { collect_u_in_l(n.e, out); },
          [&](const LBox& n) { collect_u_in_l(n.e, out); },
          [&](const LUnbox& n) { collect_u_in_l(n.e, out); },
          [&](const LLump& n) { collect_u(n.value, out); },
          [&](const LBoundary& n) { collect_u(n.inner, out); },
          [&](const LLumpOp& n) { collect_u_in_l(n.e, out); },
          [&](const LUnlumpOp& n) { collect_u_in_l(n.e, out); },
          [&](const LMark& n) { collect_u_in_l(n.e, out); },
      },
      e->v);
}

void collect_u(const UEx& e, std::vector<UEx>& out) {
  out.push_back(e);
  std::visit(
      overloaded{
          [&](const UVar&) {}, [&](const UUnit&) {},
          [&](const UPair& n) {
            collect_u(n.l, out);
            collect_u(n.r, out);
          },
          [&](const UFst& n) { collect_u(n.e, out); },
          [&](const USnd& n) { collect_u(n.e, out); },
          [&](const ULetUnit& n) {
            collect_u(n.rhs, out);
            collect_u(n.body, out);
          },
          [&](const ULam& n) { collect_u(n.body, out); },
          [&](const UApp& n) {
            collect_u(n.fn, out);
            collect_u(n.arg, out);
          },
          [&](const UInj& n) { collect_u(n.e, out); },
          [&](const UCase& n) {
            collect_u(n.scrut, out);
            collect_u(n.lbody, out);
            collect_u(n.rbody, out);
          },
          [&](const UFold& n) { collect_u(n.e, out); },
          [&](const UUnfold& n) { collect_u(n.e, out); },
          [&](const UTyLam& n) { collect_u(n.body, out); },
          [&](const UTyApp& n) { collect_u(n.e, out); },
          [&](const UMark& n) { collect_u(n.e, out); },
          [&](const UBoundary& n) { collect_u_in_l(n.inner, out); },
      },
      e->v);
}

// Closed, well-typed, first-order candidates only; the differential predicate
// compares final values structurally, which needs first-order types.
UEx shrink_u(const UEx& bad, const std::function<bool(const UEx&)>& fails) {
  UEx cur = bad;
  for (bool improved = true; improved;) {
    improved = false;
    std::vector<UEx> cands;
    collect_u(cur, cands);
    std::sort(cands.begin(), cands.end(), [](const UEx& a, const UEx& b) {
      return pretty(a).size() < pretty(b).size();
    });
    for (const UEx& c : cands) {
      if (pretty(c).size() >= pretty(cur).size()) continue;
      if (!free_vars(c).empty()) continue;
      try {
        if (!first_order(typecheck_u(MixedContext{}, c))) continue;
      } catch (const Error&) {
        continue;
      }
      if (!fails(c)) continue;
      cur = c;
      improved = true;
      break;
    }
  }
  return cur;
}

// ---------------------------------------------------------------------------
// Property predicates
// ---------------------------------------------------------------------------

// Steps a well-typed configuration, re-typing after every step. Returns the
// first violation: a stuck state, a type change, a typing failure, or a store
// out of sync with its term.
std::optional<std::string> sr_step_violation(Configuration c, const LTy& t0,
                                             long max_steps, EvalMutation mut,
                                             std::map<std::string, long>* fires) {
  LocSupply locs = supply_for(c);
  EvalStats st;
  EvalOptions opt;
  opt.mutation = mut;
  for (long k = 0; k < max_steps; ++k) {
    LStepResult r = step_l(c, locs, st, opt);
    if (r.kind == StepKind::Value) break;
    if (r.kind == StepKind::Stuck)
      return "stuck after " + std::to_string(k) + " steps: " + r.stuck;
    c = r.config;
    if (locations_of(c.expr) != c.store.domain())
      return "store out of sync after step " + std::to_string(k + 1) + " (" + r.rule + ")";
    try {
      LResult rt = typecheck_config(MixedContext{}, c);
      if (!alpha_equal(rt.type, t0))
        return "type changed after step " + std::to_string(k + 1) + " (" + r.rule +
               "): " + pretty(t0) + " became " + pretty(rt.type);
    } catch (const Error& err) {
      return "step " + std::to_string(k + 1) + " (" + r.rule +
             ") broke typing: " + err.header();
    }
  }
  if (fires)
    for (const auto& [rule, cnt] : st.rule_fires) (*fires)[rule] += cnt;
  return std::nullopt;
}

// Runs a closed U program directly (possibly mutated) and through the
// functional translation (always sound, 10x fuel), then compares outcomes.
// A direct out-of-fuel is inconclusive: copies and boundary bookkeeping have
// no translated counterpart, so no bound runs in that direction.
std::optional<std::string> diff_violation(const UEx& prog, long fuel, EvalMutation mut,
                                          std::map<std::string, long>* fires) {
  EvalOptions dopt;
  dopt.fuel = fuel;
  dopt.mutation = mut;
  URunOutcome direct = run_u(prog, dopt);
  if (fires)
    for (const auto& [rule, cnt] : direct.stats.rule_fires) (*fires)[rule] += cnt;
  UEx oracle_prog;
  try {
    oracle_prog = funtrans_expr(prog);
  } catch (const Error& e) {
    return "translation failed: " + e.header();
  } catch (const std::logic_error& e) {
    return std::string("translation failed: ") + e.what();
  }
  EvalOptions oopt;
  oopt.fuel = fuel * 10;
  URunOutcome oracle = run_u(oracle_prog, oopt);
  using K = URunOutcome::Kind;
  if (direct.kind == K::Stuck) return "direct run stuck: " + direct.stuck;
  if (oracle.kind == K::Stuck) return "oracle run stuck: " + oracle.stuck;
  if (direct.kind == K::Value && oracle.kind == K::Value) {
    if (!alpha_equal(direct.expr, oracle.expr))
      return "final values differ: " + pretty(direct.expr) + " vs " +
             pretty(oracle.expr);
    return std::nullopt;
  }
  if (direct.kind == K::Value && oracle.kind == K::OutOfFuel)
    return "oracle failed to finish within 10x fuel (direct used " +
           std::to_string(direct.steps_used) + " steps)";
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Fixed stress configurations
// ---------------------------------------------------------------------------

// Deterministic configurations aimed at the store disciplines random samples
// reach only occasionally: simultaneous copies of one cell-owning closure,
// copy of a pair that owns a cell, boundary conversion, fold cancellation.
// They are ordinary well-typed configurations; the sound stepper passes them.
Configuration stress_config(int which) {
  switch (which % 4) {
    case 0: {
      LEx lam = l_lam(
          "d", lt_box0(),
          l_lam("x", lt_one(), l_letunit(l_free(l_var("d")), l_var("x"))));
      LEx shterm = l_share(l_app(lam, l_new(l_unit())));
      LTy shty = lt_bang(lt_lolli(lt_one(), lt_one()));
      LEx use = l_lam(
          "s", shty,
          l_letpair("f", "g", l_pair(l_copy(l_var("s")), l_copy(l_var("s"))),
                    l_pair(l_app(l_var("f"), l_unit()), l_app(l_var("g"), l_unit()))));
      return {Store{}, l_app(use, shterm)};
    }
    case 1: {
      LEx sh = l_share(l_pair(l_share(l_unit()),
                              l_box(l_pair(l_new(l_unit()), l_share(l_unit())))));
      return {Store{}, l_copy(sh)};
    }
    case 2:
      return {Store{},
              l_copy(l_unlumpop(lt_bang(lt_one()), l_boundary(u_unit())))};
    default: {
      LTy m = lt_mu("a", lt_sum(lt_one(), lt_var("a")));
      return {Store{}, l_unfold(l_fold(m, l_inj(1, lt_sum(lt_one(), m), l_unit())))};
    }
  }
}

// Closed programs that pin down the rules random batches may miss; between
// them and the generators every rule in eval_rule_names fires.
std::vector<Configuration> coverage_snippets_l() {
  LTy b1 = lt_bang(lt_one());
  LTy s11 = lt_sum(lt_one(), lt_one());
  std::vector<LEx> es = {
      l_copy(l_share(l_new(l_unit()))),
      l_copy(l_share(l_box(l_pair(l_new(l_unit()), l_share(l_unit()))))),
      l_copy(l_share(l_share(l_unit()))),
      l_copy(l_share(l_boundary(u_unit()))),
      l_copy(l_share(l_unit())),
      l_copy(l_share(l_pair(l_unit(), l_unit()))),
      l_copy(l_share(l_inj(1, s11, l_unit()))),
      l_copy(l_share(l_fold(lt_mu("a", lt_one()), l_unit()))),
      l_copy(l_share(l_lam("x", lt_one(), l_var("x")))),
      l_letunit(l_mark("cov_begin", l_unit()), l_mark("cov_end", l_unit())),
      l_unlumpop(b1, l_boundary(u_unit())),
      l_lumpop(b1, l_share(l_unit())),
      l_letunit(l_free(l_new(l_unit())), l_unit()),
      l_letpair("z", "y",
                l_unbox(l_box(l_pair(l_new(l_unit()), l_share(l_unit())))),
                l_letunit(l_free(l_var("z")), l_unit())),
      l_case(l_inj(1, s11, l_unit()), "a", l_var("a"), "b", l_var("b")),
      l_case(l_inj(2, s11, l_unit()), "a", l_var("a"), "b", l_var("b")),
      l_unfold(l_fold(lt_mu("a", lt_one()), l_unit())),
      l_app(l_lam("x", lt_one(), l_var("x")), l_unit()),
  };
  std::vector<Configuration> out;
  out.reserve(es.size());
  for (LEx& e : es) out.push_back({Store{}, std::move(e)});
  return out;
}

std::vector<UEx> coverage_snippets_u() {
  UTy u = ut_unit();
  UTy s = ut_sum(u, u);
  return {
      u_app(u_lam("x", u, u_var("x")), u_unit()),
      u_fst(u_pair(u_unit(), u_unit())),
      u_snd(u_pair(u_unit(), u_unit())),
      u_letunit(u_unit(), u_unit()),
      u_case(u_inj(1, s, u_unit()), "a", u_var("a"), "b", u_var("b")),
      u_case(u_inj(2, s, u_unit()), "a", u_var("a"), "b", u_var("b")),
      u_unfold(u_fold(ut_mu("a", u), u_unit())),
      u_tyapp(u_tylam("a", u_unit()), u),
      u_mark("cov_begin", u_unit()),
      u_boundary(l_share(l_boundary(u_unit()))),
  };
}

const char* mutation_name(EvalMutation m) {
  switch (m) {
    case EvalMutation::None: return "None";
    case EvalMutation::NoFreshen: return "NoFreshen";
    case EvalMutation::WrongCopySplit: return "WrongCopySplit";
    case EvalMutation::SkipBoundaryConversion: return "SkipBoundaryConversion";
    case EvalMutation::FoldUnfoldNonCancelling: return "FoldUnfoldNonCancelling";
  }
  return "?";
}

void note_capped(PropertyReport& rep, std::string note) {
  if (rep.notes.size() < 12) rep.notes.push_back(std::move(note));
}

} // namespace

// ---------------------------------------------------------------------------
// Public generators
// ---------------------------------------------------------------------------

UEx gen_u_term(const MixedContext& ctx, const UTy& tau, int budget,
               std::uint64_t seed) {
  Gen g(seed);
  return g.gen_u(ctx, tau, budget);
}

Configuration gen_l_config(const MixedContext& ctx, const LTy& t, int budget,
                           std::uint64_t seed) {
  Gen g(seed);
  return gen_l_config_impl(g, ctx, t, budget);
}

// ---------------------------------------------------------------------------
// Property drivers
// ---------------------------------------------------------------------------

PropertyReport check_subject_reduction(long n_samples, long max_steps,
                                       std::uint64_t seed, EvalMutation mutation) {
  Stopwatch sw;
  PropertyReport rep;
  rep.property = "subject_reduction";
  rep.seed = seed;
  const auto& targets = config_targets();
  std::map<std::string, long> fires;
  for (long i = 0; i < n_samples; ++i) {
    Configuration cfg;
    if (i % 8 == 7) {
      cfg = stress_config(static_cast<int>(i / 8));
    } else {
      Gen g(mix(seed ^ kSrSalt) ^ mix(static_cast<std::uint64_t>(i)));
      LTy t = targets[static_cast<std::size_t>(i) % targets.size()];
      try {
        cfg = gen_l_config_impl(g, MixedContext{}, t, 3 + static_cast<int>(i % 6));
      } catch (const Error& e) {
        if (!is_uninhabited(e)) throw;
        ++rep.skipped;
        continue;
      }
    }
    LTy t0;
    try {
      t0 = typecheck_config(MixedContext{}, cfg).type;
    } catch (const Error& e) {
      ++rep.samples;
      ++rep.failures;
      note_capped(rep, "sample " + std::to_string(i) +
                           ": generator emitted an ill-typed configuration: " +
                           e.header());
      continue;
    }
    ++rep.samples;
    auto why = sr_step_violation(cfg, t0, max_steps, mutation, &fires);
    if (!why) continue;
    ++rep.failures;
    auto fails = [&](const Configuration& c2) {
      LTy tt;
      try {
        tt = typecheck_config(MixedContext{}, c2).type;
      } catch (const Error&) {
        return false;
      }
      return sr_step_violation(c2, tt, max_steps, mutation, nullptr).has_value();
    };
    Configuration small = shrink_config(cfg, fails);
    note_capped(rep, "sample " + std::to_string(i) + ": " + *why +
                         "; shrunk: " + pretty(small));
  }
  for (const auto& [rule, cnt] : fires) rep.counters["rule:" + rule] = cnt;
  rep.runtime_ms = sw.ms();
  return rep;
}

PropertyReport check_differential(long n_samples, long fuel, std::uint64_t seed,
                                  EvalMutation mutation) {
  Stopwatch sw;
  PropertyReport rep;
  rep.property = "differential";
  rep.seed = seed;
  const auto& targets = program_targets();
  std::map<std::string, long> fires;
  for (long i = 0; i < n_samples; ++i) {
    Gen g(mix(seed ^ kDiffSalt) ^ mix(static_cast<std::uint64_t>(i)));
    UTy tau = targets[static_cast<std::size_t>(i) % targets.size()];
    UEx prog;
    try {
      prog = g.gen_u(MixedContext{}, tau, 4 + static_cast<int>(i % 7));
    } catch (const Error& e) {
      if (!is_uninhabited(e)) throw;
      ++rep.skipped;
      continue;
    }
    try {
      UTy got = typecheck_u(MixedContext{}, prog);
      if (!alpha_equal(got, tau)) {
        ++rep.samples;
        ++rep.failures;
        note_capped(rep, "sample " + std::to_string(i) + ": generator missed the target type: " +
                             pretty(got) + " instead of " + pretty(tau));
        continue;
      }
    } catch (const Error& e) {
      ++rep.samples;
      ++rep.failures;
      note_capped(rep, "sample " + std::to_string(i) +
                           ": generator emitted an ill-typed program: " + e.header());
      continue;
    }
    ++rep.samples;
    auto why = diff_violation(prog, fuel, mutation, &fires);
    if (!why) continue;
    ++rep.failures;
    auto fails = [&](const UEx& p2) {
      return diff_violation(p2, fuel, mutation, nullptr).has_value();
    };
    UEx small = shrink_u(prog, fails);
    note_capped(rep, "sample " + std::to_string(i) + ": " + *why +
                         "; shrunk: " + pretty(small));
  }
  for (const auto& [rule, cnt] : fires) rep.counters["rule:" + rule] = cnt;
  rep.runtime_ms = sw.ms();
  return rep;
}

PropertyReport check_compat_determinism(int max_size) {
  Stopwatch sw;
  PropertyReport rep;
  rep.property = "compat_determinism";
  // Types of exact node count; L leaves 1, Lump(unit), Box0; U leaf unit.
  // A compatible tau never has more nodes than t (bang, Box, and lump layers
  // only shrink the U mirror), so bounding both sides by max_size is
  // exhaustive for the L types enumerated.
  std::vector<std::vector<LTy>> lb(static_cast<std::size_t>(max_size) + 1);
  std::vector<std::vector<UTy>> ub(static_cast<std::size_t>(max_size) + 1);
  if (max_size >= 1) {
    lb[1] = {lt_one(), lt_lump(ut_unit()), lt_box0()};
    ub[1] = {ut_unit()};
  }
  for (int s = 2; s <= max_size; ++s) {
    auto& ls = lb[static_cast<std::size_t>(s)];
    for (const LTy& c : lb[static_cast<std::size_t>(s - 1)]) {
      ls.push_back(lt_bang(c));
      ls.push_back(lt_box(c));
    }
    for (int i = 1; i <= s - 2; ++i)
      for (const LTy& a : lb[static_cast<std::size_t>(i)])
        for (const LTy& b : lb[static_cast<std::size_t>(s - 1 - i)]) {
          ls.push_back(lt_tensor(a, b));
          ls.push_back(lt_lolli(a, b));
          ls.push_back(lt_sum(a, b));
        }
    auto& us = ub[static_cast<std::size_t>(s)];
    for (int i = 1; i <= s - 2; ++i)
      for (const UTy& a : ub[static_cast<std::size_t>(i)])
        for (const UTy& b : ub[static_cast<std::size_t>(s - 1 - i)]) {
          us.push_back(ut_prod(a, b));
          us.push_back(ut_arr(a, b));
          us.push_back(ut_sum(a, b));
        }
  }
  std::vector<UTy> all_u;
  for (const auto& bucket : ub) all_u.insert(all_u.end(), bucket.begin(), bucket.end());
  long images = 0;
  for (const auto& bucket : lb) {
    for (const LTy& t : bucket) {
      ++rep.samples;
      std::optional<UTy> rec = recover_u(t);
      if (rec) ++images;
      int matches = 0;
      UTy found;
      for (const UTy& tau : all_u)
        if (compat(CompatEnv{}, tau, t)) {
          ++matches;
          found = tau;
        }
      bool bad = matches > 1 || (matches == 1 && (!rec || !alpha_equal(*rec, found))) ||
                 (matches == 0 && rec.has_value());
      if (bad) {
        ++rep.failures;
        note_capped(rep, pretty(t) + ": " + std::to_string(matches) +
                             " compatible types, recover_u " +
                             (rec ? pretty(*rec) : std::string("undefined")));
      }
    }
  }
  rep.counters["l_types"] = rep.samples;
  rep.counters["u_types"] = static_cast<long>(all_u.size());
  rep.counters["image_types"] = images;
  rep.runtime_ms = sw.ms();
  return rep;
}

PropertyReport check_conversion_roundtrip(long n_samples, long n_probes,
                                          std::uint64_t seed) {
  Stopwatch sw;
  PropertyReport rep;
  rep.property = "conversion_roundtrip";
  rep.seed = seed;

  LTy b1 = lt_bang(lt_one());
  LTy lu = lt_lump(ut_unit());
  const std::vector<LTy> data_types = {
      b1,
      lt_bang(lu),
      lt_bang(lt_tensor(b1, b1)),
      lt_bang(lt_sum(b1, lu)),
      lt_bang(lt_box(b1)),
      lt_bang(lt_box(lt_box(b1))),
      lt_bang(lt_tensor(lt_box(b1), lt_sum(b1, b1))),
      lt_bang(lt_mu("a", lt_sum(b1, lt_bang(lt_box(lt_var("a")))))),
  };
  for (long i = 0; i < n_samples; ++i) {
    LTy t = data_types[static_cast<std::size_t>(i) % data_types.size()];
    auto rec = recover_u(t);
    if (!rec) {
      ++rep.skipped;
      continue;
    }
    Gen g(mix(seed ^ kRtSalt) ^ mix(static_cast<std::uint64_t>(i)));
    UEx v;
    try {
      UEx prog = g.gen_u(MixedContext{}, *rec, 2 + static_cast<int>(i % 5));
      EvalOptions opt;
      opt.fuel = 20000;
      URunOutcome out = run_u(prog, opt);
      if (out.kind != URunOutcome::Kind::Value) {
        ++rep.skipped;
        continue;
      }
      v = out.expr;
    } catch (const Error& e) {
      if (!is_uninhabited(e)) throw;
      ++rep.skipped;
      continue;
    }
    ++rep.samples;
    try {
      LocSupply ls(0);
      LEx lv = u_to_l(v, t, ls);
      LResult lres = typecheck_l_internal(MixedContext{}, StoreTyping{}, lv);
      if (!alpha_equal(lres.type, t) || !lres.usage.consumed_vars.empty() ||
          !lres.usage.consumed_locs.empty() || !is_value_l(lv)) {
        ++rep.failures;
        note_capped(rep, "conversion produced a bad value at " + pretty(t) + ": " +
                             pretty(lv));
        continue;
      }
      UEx back = l_to_u(lv, t);
      if (!alpha_equal(back, v)) {
        ++rep.failures;
        note_capped(rep, "round trip at " + pretty(t) + " changed " + pretty(v) +
                             " into " + pretty(back));
      }
    } catch (const Error& e) {
      ++rep.failures;
      note_capped(rep, "conversion raised at " + pretty(t) + ": " + e.header());
    }
  }

  const std::vector<LTy> fn_types = {
      lt_bang(lt_lolli(b1, b1)),
      lt_bang(lt_lolli(lt_bang(lu), lt_bang(lt_tensor(b1, b1)))),
      lt_bang(lt_lolli(lt_bang(lt_sum(b1, b1)), b1)),
  };
  for (long i = 0; i < n_probes; ++i) {
    LTy t = fn_types[static_cast<std::size_t>(i) % fn_types.size()];
    auto rec = recover_u(t);
    if (!rec) {
      ++rep.skipped;
      continue;
    }
    const auto* ar = std::get_if<UTArr>(&(*rec)->v);
    if (!ar) {
      ++rep.skipped;
      continue;
    }
    Gen g(mix(seed ^ kRtSalt ^ 0xf00du) ^ mix(static_cast<std::uint64_t>(i)));
    UEx v, arg;
    try {
      EvalOptions opt;
      opt.fuel = 20000;
      URunOutcome fo = run_u(g.gen_u(MixedContext{}, *rec, 3 + static_cast<int>(i % 4)), opt);
      URunOutcome ao = run_u(g.gen_u(MixedContext{}, ar->dom, 2 + static_cast<int>(i % 3)), opt);
      if (fo.kind != URunOutcome::Kind::Value || ao.kind != URunOutcome::Kind::Value) {
        ++rep.skipped;
        continue;
      }
      v = fo.expr;
      arg = ao.expr;
    } catch (const Error& e) {
      if (!is_uninhabited(e)) throw;
      ++rep.skipped;
      continue;
    }
    ++rep.samples;
    try {
      LocSupply ls(0);
      LEx lv = u_to_l(v, t, ls);
      UEx w = l_to_u(lv, t);
      EvalOptions dopt;
      dopt.fuel = 20000;
      URunOutcome direct = run_u(u_app(v, arg), dopt);
      EvalOptions copt;
      copt.fuel = 200000;
      URunOutcome conv = run_u(u_app(w, arg), copt);
      bool ok = direct.kind == conv.kind &&
                (direct.kind != URunOutcome::Kind::Value ||
                 alpha_equal(direct.expr, conv.expr));
      if (!ok) {
        ++rep.failures;
        note_capped(rep, "probe at " + pretty(t) + " with " + pretty(arg) +
                             " disagreed after conversion");
      }
    } catch (const Error& e) {
      ++rep.failures;
      note_capped(rep, "probe raised at " + pretty(t) + ": " + e.header());
    }
  }
  rep.runtime_ms = sw.ms();
  return rep;
}

PropertyReport check_compositionality_pairs(long n_pairs, std::uint64_t seed) {
  Stopwatch sw;
  PropertyReport rep;
  rep.property = "compositionality";
  rep.seed = seed;
  const std::vector<UTy> filler_types = {
      ut_unit(),
      ut_arr(ut_unit(), ut_unit()),
      ut_prod(ut_unit(), ut_unit()),
      ut_sum(ut_unit(), ut_unit()),
  };
  const auto& prog_types = program_targets();
  long with_hole = 0;
  for (long i = 0; i < n_pairs; ++i) {
    Gen g(mix(seed ^ kCompSalt) ^ mix(static_cast<std::uint64_t>(i)));
    UTy tf = filler_types[static_cast<std::size_t>(i) % filler_types.size()];
    UTy tp = prog_types[static_cast<std::size_t>(i) % prog_types.size()];
    UEx ctx_term, filler;
    try {
      ctx_term = g.gen_u(MixedContext{}.with_u(hole_name, tf), tp,
                         4 + static_cast<int>(i % 6));
      filler = g.gen_u(MixedContext{}, tf, 3 + static_cast<int>(i % 4));
    } catch (const Error& e) {
      if (!is_uninhabited(e)) throw;
      ++rep.skipped;
      continue;
    }
    ++rep.samples;
    if (free_vars(ctx_term).count(hole_name)) ++with_hole;
    try {
      if (!check_compositionality(ctx_term, filler)) {
        ++rep.failures;
        note_capped(rep, "sample " + std::to_string(i) +
                             ": plugging and translating do not commute; context " +
                             pretty(ctx_term) + "; filler " + pretty(filler));
      }
    } catch (const Error& e) {
      ++rep.failures;
      note_capped(rep, "sample " + std::to_string(i) + ": raised " + e.header());
    }
  }
  rep.counters["contexts_using_hole"] = with_hole;
  rep.runtime_ms = sw.ms();
  return rep;
}

PropertyReport check_rule_coverage(long n_samples, std::uint64_t seed) {
  Stopwatch sw;
  PropertyReport rep;
  rep.property = "rule_coverage";
  rep.seed = seed;
  std::map<std::string, long> fires;
  auto merge = [&fires](const EvalStats& st) {
    for (const auto& [rule, cnt] : st.rule_fires) fires[rule] += cnt;
  };
  const auto& ltargets = config_targets();
  const auto& utargets = program_targets();
  for (long i = 0; i < n_samples; ++i) {
    Gen g(mix(seed ^ kCovSalt) ^ mix(static_cast<std::uint64_t>(i)));
    try {
      Configuration cfg = gen_l_config_impl(
          g, MixedContext{}, ltargets[static_cast<std::size_t>(i) % ltargets.size()],
          3 + static_cast<int>(i % 6));
      EvalOptions opt;
      opt.fuel = 5000;
      merge(run_l(cfg, opt).stats);
      ++rep.samples;
    } catch (const Error& e) {
      if (!is_uninhabited(e)) throw;
      ++rep.skipped;
    }
    try {
      UEx prog = g.gen_u(MixedContext{},
                         utargets[static_cast<std::size_t>(i) % utargets.size()],
                         4 + static_cast<int>(i % 7));
      EvalOptions opt;
      opt.fuel = 5000;
      merge(run_u(prog, opt).stats);
      ++rep.samples;
    } catch (const Error& e) {
      if (!is_uninhabited(e)) throw;
      ++rep.skipped;
    }
  }
  for (const Configuration& c : coverage_snippets_l()) {
    merge(run_l(c).stats);
    ++rep.samples;
  }
  for (const UEx& e : coverage_snippets_u()) {
    merge(run_u(e).stats);
    ++rep.samples;
  }
  for (const std::string& rule : eval_rule_names()) {
    rep.counters["rule:" + rule] = fires.count(rule) ? fires[rule] : 0;
    if (!fires.count(rule)) {
      ++rep.failures;
      note_capped(rep, "rule never fired: " + rule);
    }
  }
  rep.runtime_ms = sw.ms();
  return rep;
}

PropertyReport check_mutation_sanity(long n_samples, std::uint64_t seed) {
  Stopwatch sw;
  PropertyReport rep;
  rep.property = "mutation_sanity";
  rep.seed = seed;
  const EvalMutation muts[] = {
      EvalMutation::NoFreshen,
      EvalMutation::WrongCopySplit,
      EvalMutation::SkipBoundaryConversion,
      EvalMutation::FoldUnfoldNonCancelling,
  };
  for (EvalMutation m : muts) {
    ++rep.samples;
    PropertyReport sr = check_subject_reduction(n_samples, 50, seed, m);
    if (sr.failures > 0) {
      rep.counters[std::string("caught:") + mutation_name(m)] = sr.failures;
      note_capped(rep, std::string(mutation_name(m)) + ": caught by subject_reduction (" +
                           std::to_string(sr.failures) + " of " +
                           std::to_string(sr.samples) + " samples)");
      continue;
    }
    PropertyReport df = check_differential(n_samples, 20000, seed, m);
    if (df.failures > 0) {
      rep.counters[std::string("caught:") + mutation_name(m)] = df.failures;
      note_capped(rep, std::string(mutation_name(m)) + ": caught by differential (" +
                           std::to_string(df.failures) + " of " +
                           std::to_string(df.samples) + " samples)");
      continue;
    }
    ++rep.failures;
    note_capped(rep, std::string(mutation_name(m)) + ": NOT caught within " +
                         std::to_string(n_samples) + " samples per property");
  }
  rep.runtime_ms = sw.ms();
  return rep;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

std::string report_text(const PropertyReport& r) {
  std::ostringstream os;
  os << "property: " << r.property << "\n"
     << "  samples: " << r.samples << "  failures: " << r.failures
     << "  skipped: " << r.skipped << "\n"
     << "  seed: " << r.seed << "  runtime_ms: " << r.runtime_ms << "\n";
  for (const auto& [k, v] : r.counters) os << "  " << k << ": " << v << "\n";
  for (const auto& n : r.notes) os << "  ! " << n << "\n";
  return os.str();
}

std::string reports_json(const std::vector<PropertyReport>& rs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const PropertyReport& r : rs) {
    nlohmann::json j;
    j["property"] = r.property;
    j["samples"] = r.samples;
    j["failures"] = r.failures;
    j["skipped"] = r.skipped;
    j["seed"] = r.seed;
    j["runtime_ms"] = r.runtime_ms;
    j["notes"] = r.notes;
    j["counters"] = nlohmann::json::object();
    for (const auto& [k, v] : r.counters) j["counters"][k] = v;
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

} // namespace ul
