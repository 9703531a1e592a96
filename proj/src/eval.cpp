#include "ul/eval.hpp"

#include <cassert>
#include <utility>

#include "ul/errors.hpp"
#include "ul/interop.hpp"
#include "ul/pretty.hpp"
#include "ul/typecheck.hpp"

namespace ul {

namespace {

template <class... Ts> struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

std::string snippet(const UEx& e) {
  std::string s = pretty(e);
  if (s.size() > 60) s = s.substr(0, 57) + "...";
  return s;
}

std::string snippet(const LEx& e) {
  std::string s = pretty(e);
  if (s.size() > 60) s = s.substr(0, 57) + "...";
  return s;
}

// Every location literal in a subtree, share- and slot-internal ones
// included. Un-sharing renames this whole set at once.
void all_locs(const UEx& e, std::set<Location>& out);
void all_locs(const LEx& e, std::set<Location>& out);

void all_locs(const Store& s, std::set<Location>& out) {
  for (const auto& [loc, slot] : s.slots) {
    out.insert(loc);
    if (slot) {
      all_locs(slot->local, out);
      all_locs(slot->value, out);
    }
  }
}

void all_locs(const UEx& e, std::set<Location>& out) {
  std::visit(
      overloaded{
          [&](const UVar&) {},
          [&](const UUnit&) {},
          [&](const UPair& n) { all_locs(n.l, out); all_locs(n.r, out); },
          [&](const UFst& n) { all_locs(n.e, out); },
          [&](const USnd& n) { all_locs(n.e, out); },
          [&](const ULetUnit& n) { all_locs(n.rhs, out); all_locs(n.body, out); },
          [&](const ULam& n) { all_locs(n.body, out); },
          [&](const UApp& n) { all_locs(n.fn, out); all_locs(n.arg, out); },
          [&](const UInj& n) { all_locs(n.e, out); },
          [&](const UCase& n) {
            all_locs(n.scrut, out);
            all_locs(n.lbody, out);
            all_locs(n.rbody, out);
          },
          [&](const UFold& n) { all_locs(n.e, out); },
          [&](const UUnfold& n) { all_locs(n.e, out); },
          [&](const UTyLam& n) { all_locs(n.body, out); },
          [&](const UTyApp& n) { all_locs(n.e, out); },
          [&](const UMark& n) { all_locs(n.e, out); },
          [&](const UBoundary& n) { all_locs(n.store, out); all_locs(n.inner, out); },
      },
      e->v);
}

void all_locs(const LEx& e, std::set<Location>& out) {
  std::visit(
      overloaded{
          [&](const LVar&) {},
          [&](const LUnit&) {},
          [&](const LPair& n) { all_locs(n.l, out); all_locs(n.r, out); },
          [&](const LLetPair& n) { all_locs(n.rhs, out); all_locs(n.body, out); },
          [&](const LLetUnit& n) { all_locs(n.rhs, out); all_locs(n.body, out); },
          [&](const LLam& n) { all_locs(n.body, out); },
          [&](const LApp& n) { all_locs(n.fn, out); all_locs(n.arg, out); },
          [&](const LInj& n) { all_locs(n.e, out); },
          [&](const LCase& n) {
            all_locs(n.scrut, out);
            all_locs(n.lbody, out);
            all_locs(n.rbody, out);
          },
          [&](const LFold& n) { all_locs(n.e, out); },
          [&](const LUnfold& n) { all_locs(n.e, out); },
          [&](const LShare& n) { all_locs(n.store, out); all_locs(n.body, out); },
          [&](const LCopy& n) { all_locs(n.e, out); },
          [&](const LNew& n) { all_locs(n.e, out); },
          [&](const LFree& n) { all_locs(n.e, out); },
          [&](const LBox& n) { all_locs(n.e, out); },
          [&](const LUnbox& n) { all_locs(n.e, out); },
          [&](const LLoc& n) { out.insert(n.loc); },
          [&](const LLump& n) { all_locs(n.value, out); },
          [&](const LBoundary& n) { all_locs(n.inner, out); },
          [&](const LLumpOp& n) { all_locs(n.e, out); },
          [&](const LUnlumpOp& n) { all_locs(n.e, out); },
          [&](const LMark& n) { all_locs(n.e, out); },
      },
      e->v);
}

std::size_t open_count(const UEx& e) {
  std::vector<Location> v;
  collect_open_locations(e, v);
  return v.size();
}

std::size_t open_count(const Configuration& c) {
  std::vector<Location> v;
  collect_open_locations(c.store, v);
  collect_open_locations(c.expr, v);
  return v.size();
}

struct Machine {
  LocSupply& locs;
  EvalStats& stats;
  const EvalOptions& opt;

  struct RU { StepKind kind; UEx out; std::string rule, pos, stuck; };
  struct RL { StepKind kind; LEx out; std::string rule, pos, stuck; };

  static RU stuck_u(std::string why) {
    return {StepKind::Stuck, nullptr, {}, {}, std::move(why)};
  }
  static RL stuck_l(std::string why) {
    return {StepKind::Stuck, nullptr, {}, {}, std::move(why)};
  }
  RU fire_u(const char* rule, UEx out) {
    stats.rule_fires[rule]++;
    return {StepKind::Stepped, std::move(out), rule, {}, {}};
  }
  RL fire_l(const char* rule, LEx out) {
    stats.rule_fires[rule]++;
    return {StepKind::Stepped, std::move(out), rule, {}, {}};
  }

  static void add_seg(std::string& pos, const char* seg) {
    pos = pos.empty() ? std::string(seg) : std::string(seg) + "." + pos;
  }

  // Congruence: step a non-value child and rebuild the parent around it.
  template <class F>
  RL into_l(Store& store, const LEx& child, const char* seg, F rebuild) {
    RL r = step_l(store, child);
    assert(r.kind != StepKind::Value);
    add_seg(r.pos, seg);
    if (r.kind == StepKind::Stepped) r.out = rebuild(std::move(r.out));
    return r;
  }
  template <class F>
  RU into_u(const UEx& child, const char* seg, F rebuild) {
    RU r = step_u(child);
    assert(r.kind != StepKind::Value);
    add_seg(r.pos, seg);
    if (r.kind == StepKind::Stepped) r.out = rebuild(std::move(r.out));
    return r;
  }
  template <class F>
  RL into_lu(const UEx& child, const char* seg, F rebuild) {
    RU r = step_u(child);
    assert(r.kind != StepKind::Value);
    RL out{r.kind, nullptr, std::move(r.rule), std::move(r.pos), std::move(r.stuck)};
    add_seg(out.pos, seg);
    if (out.kind == StepKind::Stepped) out.out = rebuild(std::move(r.out));
    return out;
  }

  void bump_new() {
    stats.new_allocs++;
    for (const auto& p : stats.active_phases) stats.phase_new_allocs[p]++;
  }
  void bump_pairs() {
    stats.u_pair_constructions++;
    for (const auto& p : stats.active_phases) stats.phase_u_pairs[p]++;
  }
  void toggle_phase(const std::string& name) {
    static const std::string begin = "_begin", end = "_end";
    if (name.size() > begin.size() && name.ends_with(begin)) {
      std::string phase = name.substr(0, name.size() - begin.size());
      stats.active_phases.insert(phase);
      // A phase that fires no counters still reports zeroes.
      stats.phase_new_allocs[phase];
      stats.phase_u_pairs[phase];
    } else if (name.size() > end.size() && name.ends_with(end)) {
      stats.active_phases.erase(name.substr(0, name.size() - end.size()));
    }
  }

  // Merge a freed-up or freshly renamed region into the ambient store.
  // Collisions cannot happen when freshening is on; the NoFreshen mutant
  // deliberately aliases instead.
  bool release(Store& into, const Store& what) {
    if (auto j = Store::join(into, what)) {
      into = std::move(*j);
      return true;
    }
    if (opt.mutation == EvalMutation::NoFreshen) {
      for (const auto& [l, s] : what.slots) into.slots[l] = s;
      return true;
    }
    return false;
  }

  // The copy family: deep duplication of a share value, one rule per shape
  // of the shared body.
  RL copy_value(Store& store, const LShare& sh) {
    auto cfire = [&](const char* rule, LEx out) {
      stats.copies++;
      return fire_l(rule, std::move(out));
    };
    return std::visit(
        overloaded{
            [&](const LUnit&) -> RL {
              if (!sh.store.empty())
                return stuck_l("copy of () with a nonempty captured store");
              return cfire("copy_unit", l_unit());
            },
            [&](const LPair& p) -> RL {
              Store s1, s2;
              StoreTyping t1, t2;
              if (opt.mutation == EvalMutation::WrongCopySplit) {
                s1 = sh.store;
                t1 = sh.styping;
              } else {
                std::set<Location> left = locations_of(p.l);
                std::set<Location> right = locations_of(p.r);
                std::set<Location> both = left;
                both.insert(right.begin(), right.end());
                if (both != sh.store.domain() ||
                    left.size() + right.size() != both.size())
                  return stuck_l("copy of a pair does not split the captured store");
                s1 = sh.store.restrict_to(left);
                t1 = sh.styping.restrict_to(left);
                s2 = sh.store.restrict_to(right);
                t2 = sh.styping.restrict_to(right);
              }
              return cfire("copy_pair",
                           l_pair(l_copy(l_share(std::move(s1), std::move(t1), p.l)),
                                  l_copy(l_share(std::move(s2), std::move(t2), p.r))));
            },
            [&](const LInj& i) -> RL {
              return cfire("copy_inj",
                           l_inj(i.which, i.ann,
                                 l_copy(l_share(sh.store, sh.styping, i.e))));
            },
            [&](const LFold& f) -> RL {
              return cfire("copy_fold",
                           l_fold(f.ann, l_copy(l_share(sh.store, sh.styping, f.e))));
            },
            [&](const LLam&) -> RL {
              LEx fn = sh.body;
              Store captured = sh.store;
              if (opt.mutation != EvalMutation::NoFreshen) {
                std::set<Location> bound;
                all_locs(captured, bound);
                all_locs(fn, bound);
                LocRenaming ren;
                for (Location l : bound) ren[l] = locs.fresh();
                fn = rename_locations(fn, ren);
                captured = rename_locations(captured, ren);
              }
              if (!release(store, captured))
                return stuck_l("location collision while un-sharing a function");
              return cfire("copy_lam", std::move(fn));
            },
            [&](const LShare&) -> RL {
              // !!t collapses to !t without a deep copy.
              if (!sh.store.empty())
                return stuck_l("copy of a share with a nonempty outer store");
              return cfire("copy_share", sh.body);
            },
            [&](const LLoc& loc) -> RL {
              if (sh.store.domain() != std::set<Location>{loc.loc})
                return stuck_l("copy of a location whose share holds extra cells");
              const Slot& slot = sh.store.slots.at(loc.loc);
              if (!slot) return cfire("copy_dead", l_new(l_unit()));
              auto ty = sh.styping.entries.find(loc.loc);
              const STAlive* alive = ty != sh.styping.entries.end()
                                         ? std::get_if<STAlive>(&ty->second->v)
                                         : nullptr;
              if (!alive)
                return stuck_l("copy of a full cell with no alive typing entry");
              return cfire("copy_alive",
                           l_box(l_pair(l_new(l_unit()),
                                        l_copy(l_share(slot->local, alive->inner,
                                                       slot->value)))));
            },
            [&](const LLump&) -> RL {
              if (!sh.store.empty())
                return stuck_l("copy of a lumped value with a nonempty captured store");
              return cfire("copy_lump", sh.body);
            },
            [&](const LVar& v) -> RL {
              return stuck_l("copy of an open term: '" + v.name + "'");
            },
            [&](const auto&) -> RL {
              return stuck_l("copy of a share whose body is not a value");
            },
        },
        sh.body->v);
  }

  RL step_l(Store& store, const LEx& e) {
    if (is_value_l(e)) return {StepKind::Value, e, {}, {}, {}};
    return std::visit(
        overloaded{
            [&](const LVar& n) -> RL {
              return stuck_l("free variable '" + n.name + "'");
            },
            [&](const LUnit&) -> RL {
              return stuck_l("internal: value form reached the stepper");
            },
            [&](const LLam&) -> RL {
              return stuck_l("internal: value form reached the stepper");
            },
            [&](const LLoc&) -> RL {
              return stuck_l("internal: value form reached the stepper");
            },
            [&](const LLump& n) -> RL {
              return stuck_l("lumped term is not a U value: " + snippet(n.value));
            },
            [&](const LPair& n) -> RL {
              if (!is_value_l(n.l))
                return into_l(store, n.l, "l",
                              [&](LEx x) { return l_pair(std::move(x), n.r); });
              return into_l(store, n.r, "r",
                            [&](LEx x) { return l_pair(n.l, std::move(x)); });
            },
            [&](const LLetPair& n) -> RL {
              if (!is_value_l(n.rhs))
                return into_l(store, n.rhs, "rhs", [&](LEx x) {
                  return l_letpair(n.v1, n.v2, std::move(x), n.body);
                });
              auto* p = std::get_if<LPair>(&n.rhs->v);
              if (!p) return stuck_l("let pair on a non-pair value");
              return fire_l("l_letpair",
                            subst_l(subst_l(n.body, n.v1, p->l), n.v2, p->r));
            },
            [&](const LLetUnit& n) -> RL {
              if (!is_value_l(n.rhs))
                return into_l(store, n.rhs, "rhs", [&](LEx x) {
                  return l_letunit(std::move(x), n.body);
                });
              if (!std::holds_alternative<LUnit>(n.rhs->v))
                return stuck_l("let () on a non-unit value");
              return fire_l("l_letunit", n.body);
            },
            [&](const LApp& n) -> RL {
              if (!is_value_l(n.fn))
                return into_l(store, n.fn, "fn",
                              [&](LEx x) { return l_app(std::move(x), n.arg); });
              if (!is_value_l(n.arg))
                return into_l(store, n.arg, "arg",
                              [&](LEx x) { return l_app(n.fn, std::move(x)); });
              auto* lam = std::get_if<LLam>(&n.fn->v);
              if (!lam)
                return stuck_l("application head is not a function: " + snippet(n.fn));
              return fire_l("l_beta", subst_l(lam->body, lam->var, n.arg));
            },
            [&](const LInj& n) -> RL {
              return into_l(store, n.e, "inj", [&](LEx x) {
                return l_inj(n.which, n.ann, std::move(x));
              });
            },
            [&](const LCase& n) -> RL {
              if (!is_value_l(n.scrut))
                return into_l(store, n.scrut, "scrut", [&](LEx x) {
                  return l_case(std::move(x), n.lvar, n.lbody, n.rvar, n.rbody);
                });
              auto* i = std::get_if<LInj>(&n.scrut->v);
              if (!i) return stuck_l("case on a non-injection value");
              if (i->which == 1)
                return fire_l("l_case_inl", subst_l(n.lbody, n.lvar, i->e));
              return fire_l("l_case_inr", subst_l(n.rbody, n.rvar, i->e));
            },
            [&](const LFold& n) -> RL {
              return into_l(store, n.e, "fold",
                            [&](LEx x) { return l_fold(n.ann, std::move(x)); });
            },
            [&](const LUnfold& n) -> RL {
              if (!is_value_l(n.e))
                return into_l(store, n.e, "unfold",
                              [](LEx x) { return l_unfold(std::move(x)); });
              auto* f = std::get_if<LFold>(&n.e->v);
              if (!f) return stuck_l("unfold of a non-fold value");
              if (opt.mutation == EvalMutation::FoldUnfoldNonCancelling)
                return fire_l("l_unfold_fold", n.e);
              return fire_l("l_unfold_fold", f->e);
            },
            [&](const LShare& n) -> RL {
              // The body runs in the captured store; the typing is
              // recomputed because reduction changes it.
              Store inner = n.store;
              RL r = step_l(inner, n.body);
              add_seg(r.pos, "share");
              if (r.kind != StepKind::Stepped) return r;
              StoreTyping sty;
              try {
                sty = infer_store_typing(inner);
              } catch (const Error& err) {
                return stuck_l("captured store lost its typing: " + err.header());
              }
              r.out = l_share(std::move(inner), std::move(sty), std::move(r.out));
              return r;
            },
            [&](const LCopy& n) -> RL {
              if (!is_value_l(n.e))
                return into_l(store, n.e, "copy",
                              [](LEx x) { return l_copy(std::move(x)); });
              auto* sh = std::get_if<LShare>(&n.e->v);
              if (!sh)
                return stuck_l("copy of a non-share value: " + snippet(n.e));
              return copy_value(store, *sh);
            },
            [&](const LNew& n) -> RL {
              if (!is_value_l(n.e))
                return into_l(store, n.e, "new",
                              [](LEx x) { return l_new(std::move(x)); });
              if (!std::holds_alternative<LUnit>(n.e->v))
                return stuck_l("new of a non-unit value");
              Location cell = locs.fresh();
              store.slots[cell] = nullptr;
              bump_new();
              return fire_l("l_new", l_loc(cell));
            },
            [&](const LFree& n) -> RL {
              if (!is_value_l(n.e))
                return into_l(store, n.e, "free",
                              [](LEx x) { return l_free(std::move(x)); });
              auto* loc = std::get_if<LLoc>(&n.e->v);
              if (!loc) return stuck_l("free of a non-location");
              auto it = store.slots.find(loc->loc);
              if (it == store.slots.end())
                return stuck_l("free of an unknown cell #" + std::to_string(loc->loc));
              if (it->second)
                return stuck_l("free of a full cell #" + std::to_string(loc->loc));
              store.slots.erase(it);
              stats.frees++;
              return fire_l("l_free", l_unit());
            },
            [&](const LBox& n) -> RL {
              if (!is_value_l(n.e))
                return into_l(store, n.e, "box",
                              [](LEx x) { return l_box(std::move(x)); });
              auto* p = std::get_if<LPair>(&n.e->v);
              const LLoc* cell = p ? std::get_if<LLoc>(&p->l->v) : nullptr;
              if (!cell) return stuck_l("box needs an (empty cell, value) pair");
              auto it = store.slots.find(cell->loc);
              if (it == store.slots.end())
                return stuck_l("box into an unknown cell #" + std::to_string(cell->loc));
              if (it->second)
                return stuck_l("box into a full cell #" + std::to_string(cell->loc));
              std::set<Location> owned = locations_of(p->r);
              if (owned.count(cell->loc))
                return stuck_l("box would store a cell inside itself");
              for (Location l : owned)
                if (!store.slots.count(l))
                  return stuck_l("box captures an unknown location #" + std::to_string(l));
              // The stored value takes the cells it owns with it.
              Store local = store.restrict_to(owned);
              store = store.without(owned);
              store.slots[cell->loc] = slot_full(std::move(local), p->r);
              return fire_l("l_box", l_loc(cell->loc));
            },
            [&](const LUnbox& n) -> RL {
              if (!is_value_l(n.e))
                return into_l(store, n.e, "unbox",
                              [](LEx x) { return l_unbox(std::move(x)); });
              auto* loc = std::get_if<LLoc>(&n.e->v);
              if (!loc) return stuck_l("unbox of a non-location");
              auto it = store.slots.find(loc->loc);
              if (it == store.slots.end())
                return stuck_l("unbox of an unknown cell #" + std::to_string(loc->loc));
              if (!it->second)
                return stuck_l("unbox of an empty cell #" + std::to_string(loc->loc));
              Slot slot = it->second;
              it->second = nullptr;
              if (!release(store, slot->local))
                return stuck_l("location collision while unboxing #" +
                               std::to_string(loc->loc));
              return fire_l("l_unbox", l_pair(n.e, slot->value));
            },
            [&](const LBoundary& n) -> RL {
              if (is_value_u(n.inner)) {
                stats.boundary_crossings++;
                return fire_l("lu_lump", l_lump(n.inner));
              }
              return into_lu(n.inner, "lu",
                             [](UEx x) { return l_boundary(std::move(x)); });
            },
            [&](const LLumpOp& n) -> RL {
              if (!is_value_l(n.e))
                return into_l(store, n.e, "lump", [&](LEx x) {
                  return l_lumpop(n.ann, std::move(x));
                });
              UEx u;
              try {
                u = l_to_u(n.e, n.ann);
              } catch (const Error& err) {
                return stuck_l("lump conversion failed: " + err.header());
              }
              stats.boundary_crossings++;
              return fire_l("lump_conv", l_lump(std::move(u)));
            },
            [&](const LUnlumpOp& n) -> RL {
              if (!is_value_l(n.e))
                return into_l(store, n.e, "unlump", [&](LEx x) {
                  return l_unlumpop(n.ann, std::move(x));
                });
              auto* lum = std::get_if<LLump>(&n.e->v);
              if (!lum)
                return stuck_l("unlump of a non-lumped value: " + snippet(n.e));
              stats.boundary_crossings++;
              if (opt.mutation == EvalMutation::SkipBoundaryConversion)
                return fire_l("unlump_conv", n.e);
              LEx v;
              try {
                v = u_to_l(lum->value, n.ann, locs);
              } catch (const Error& err) {
                return stuck_l("unlump conversion failed: " + err.header());
              }
              return fire_l("unlump_conv", std::move(v));
            },
            [&](const LMark& n) -> RL {
              if (!is_value_l(n.e))
                return into_l(store, n.e, "mark", [&](LEx x) {
                  return l_mark(n.name, std::move(x));
                });
              toggle_phase(n.name);
              return fire_l("l_mark", n.e);
            },
        },
        e->v);
  }

  RU step_u(const UEx& e) {
    if (is_value_u(e)) return {StepKind::Value, e, {}, {}, {}};
    return std::visit(
        overloaded{
            [&](const UVar& n) -> RU {
              return stuck_u("free variable '" + n.name + "'");
            },
            [&](const UUnit&) -> RU {
              return stuck_u("internal: value form reached the stepper");
            },
            [&](const ULam&) -> RU {
              return stuck_u("internal: value form reached the stepper");
            },
            [&](const UPair& n) -> RU {
              RU r = !is_value_u(n.l)
                         ? into_u(n.l, "l",
                                  [&](UEx x) { return u_pair(std::move(x), n.r); })
                         : into_u(n.r, "r",
                                  [&](UEx x) { return u_pair(n.l, std::move(x)); });
              if (r.kind == StepKind::Stepped && is_value_u(r.out)) bump_pairs();
              return r;
            },
            [&](const UFst& n) -> RU {
              if (!is_value_u(n.e))
                return into_u(n.e, "fst", [](UEx x) { return u_fst(std::move(x)); });
              auto* p = std::get_if<UPair>(&n.e->v);
              if (!p) return stuck_u("fst of a non-pair value");
              return fire_u("u_fst", p->l);
            },
            [&](const USnd& n) -> RU {
              if (!is_value_u(n.e))
                return into_u(n.e, "snd", [](UEx x) { return u_snd(std::move(x)); });
              auto* p = std::get_if<UPair>(&n.e->v);
              if (!p) return stuck_u("snd of a non-pair value");
              return fire_u("u_snd", p->r);
            },
            [&](const ULetUnit& n) -> RU {
              if (!is_value_u(n.rhs))
                return into_u(n.rhs, "rhs", [&](UEx x) {
                  return u_letunit(std::move(x), n.body);
                });
              if (!std::holds_alternative<UUnit>(n.rhs->v))
                return stuck_u("let () on a non-unit value");
              return fire_u("u_letunit", n.body);
            },
            [&](const UApp& n) -> RU {
              if (!is_value_u(n.fn))
                return into_u(n.fn, "fn",
                              [&](UEx x) { return u_app(std::move(x), n.arg); });
              if (!is_value_u(n.arg))
                return into_u(n.arg, "arg",
                              [&](UEx x) { return u_app(n.fn, std::move(x)); });
              auto* lam = std::get_if<ULam>(&n.fn->v);
              if (!lam)
                return stuck_u("application head is not a function: " + snippet(n.fn));
              return fire_u("u_beta", subst_u(lam->body, lam->var, n.arg));
            },
            [&](const UInj& n) -> RU {
              return into_u(n.e, "inj", [&](UEx x) {
                return u_inj(n.which, n.ann, std::move(x));
              });
            },
            [&](const UCase& n) -> RU {
              if (!is_value_u(n.scrut))
                return into_u(n.scrut, "scrut", [&](UEx x) {
                  return u_case(std::move(x), n.lvar, n.lbody, n.rvar, n.rbody);
                });
              auto* i = std::get_if<UInj>(&n.scrut->v);
              if (!i) return stuck_u("case on a non-injection value");
              if (i->which == 1)
                return fire_u("u_case_inl", subst_u(n.lbody, n.lvar, i->e));
              return fire_u("u_case_inr", subst_u(n.rbody, n.rvar, i->e));
            },
            [&](const UFold& n) -> RU {
              return into_u(n.e, "fold",
                            [&](UEx x) { return u_fold(n.ann, std::move(x)); });
            },
            [&](const UUnfold& n) -> RU {
              if (!is_value_u(n.e))
                return into_u(n.e, "unfold",
                              [](UEx x) { return u_unfold(std::move(x)); });
              auto* f = std::get_if<UFold>(&n.e->v);
              if (!f) return stuck_u("unfold of a non-fold value");
              if (opt.mutation == EvalMutation::FoldUnfoldNonCancelling)
                return fire_u("u_unfold_fold", n.e);
              return fire_u("u_unfold_fold", f->e);
            },
            [&](const UTyLam&) -> RU {
              // A type abstraction is a value only over a value body; the
              // typechecker's value restriction keeps this unreachable.
              return stuck_u("type abstraction over a non-value body");
            },
            [&](const UTyApp& n) -> RU {
              if (!is_value_u(n.e))
                return into_u(n.e, "tyapp", [&](UEx x) {
                  return u_tyapp(std::move(x), n.arg);
                });
              auto* tl = std::get_if<UTyLam>(&n.e->v);
              if (!tl) return stuck_u("type application of a non-type-abstraction");
              return fire_u("u_tyapp", subst_ty_in_expr(tl->body, tl->var, n.arg));
            },
            [&](const UMark& n) -> RU {
              if (!is_value_u(n.e))
                return into_u(n.e, "mark", [&](UEx x) {
                  return u_mark(n.name, std::move(x));
                });
              toggle_phase(n.name);
              return fire_u("u_mark", n.e);
            },
            [&](const UBoundary& n) -> RU {
              if (is_value_l(n.inner)) {
                // UL ∅;∅ { share ⌊v⌋ } strips to v.
                auto* sh = std::get_if<LShare>(&n.inner->v);
                const LLump* lump = (sh && sh->store.empty())
                                        ? std::get_if<LLump>(&sh->body->v)
                                        : nullptr;
                if (!lump || !n.store.empty())
                  return stuck_u("boundary finished in an unexpected state: " +
                                 snippet(e));
                stats.boundary_crossings++;
                return fire_u("ul_strip", lump->value);
              }
              Store bstore = n.store;
              RL r = step_l(bstore, n.inner);
              RU out{r.kind, nullptr, std::move(r.rule), std::move(r.pos),
                     std::move(r.stuck)};
              add_seg(out.pos, "ul");
              if (out.kind != StepKind::Stepped) return out;
              StoreTyping sty;
              try {
                sty = infer_store_typing(bstore);
              } catch (const Error& err) {
                return stuck_u("boundary store lost its typing: " + err.header());
              }
              out.out = u_boundary(std::move(bstore), std::move(sty), std::move(r.out));
              return out;
            },
        },
        e->v);
  }
};

} // namespace

LocSupply supply_for(const UEx& e) { return LocSupply(max_location(e) + 1); }

LocSupply supply_for(const Configuration& c) {
  // max_location scans share internals, so wrapping the store in a
  // throwaway share covers both halves of the configuration.
  return LocSupply(max_location(l_share(c.store, StoreTyping{}, c.expr)) + 1);
}

UStepResult step_u(const UEx& e, LocSupply& locs, EvalStats& stats,
                   const EvalOptions& opt) {
  if (is_value_u(e)) return {StepKind::Value, e, {}, {}, {}};
  Machine m{locs, stats, opt};
  Machine::RU r = m.step_u(e);
  std::string pos = r.pos.empty() ? "top" : std::move(r.pos);
  if (r.kind == StepKind::Stuck)
    return {StepKind::Stuck, e, {}, std::move(pos), std::move(r.stuck)};
  stats.steps++;
  return {StepKind::Stepped, std::move(r.out), std::move(r.rule), std::move(pos), {}};
}

LStepResult step_l(const Configuration& c, LocSupply& locs, EvalStats& stats,
                   const EvalOptions& opt) {
  if (is_value_l(c.expr)) return {StepKind::Value, c, {}, {}, {}};
  Store store = c.store;
  Machine m{locs, stats, opt};
  Machine::RL r = m.step_l(store, c.expr);
  std::string pos = r.pos.empty() ? "top" : std::move(r.pos);
  if (r.kind == StepKind::Stuck)
    return {StepKind::Stuck, c, {}, std::move(pos), std::move(r.stuck)};
  stats.steps++;
  return {StepKind::Stepped, Configuration{std::move(store), std::move(r.out)},
          std::move(r.rule), std::move(pos), {}};
}

URunOutcome run_u(const UEx& e, const EvalOptions& opt) {
  MachineState st{e, opt.fuel, supply_for(e), {}};
  Machine m{st.loc_supply, st.stats, opt};
  while (true) {
    if (is_value_u(st.expr))
      return {URunOutcome::Kind::Value, st.expr, {}, st.stats.steps,
              std::move(st.stats)};
    if (st.fuel <= 0)
      return {URunOutcome::Kind::OutOfFuel, st.expr, {}, st.stats.steps,
              std::move(st.stats)};
    Machine::RU r = m.step_u(st.expr);
    if (r.kind == StepKind::Stuck)
      return {URunOutcome::Kind::Stuck, st.expr, std::move(r.stuck),
              st.stats.steps, std::move(st.stats)};
    st.expr = std::move(r.out);
    st.fuel--;
    if (opt.trace)
      opt.trace->push_back({st.stats.steps, std::move(r.rule),
                            r.pos.empty() ? "top" : std::move(r.pos),
                            open_count(st.expr), st.stats.new_allocs});
    st.stats.steps++;
  }
}

LRunOutcome run_l(Configuration c, const EvalOptions& opt) {
  LocSupply locs = supply_for(c);
  EvalStats stats;
  Machine m{locs, stats, opt};
  long fuel = opt.fuel;
  while (true) {
    if (is_value_l(c.expr))
      return {LRunOutcome::Kind::Value, std::move(c), {}, stats.steps,
              std::move(stats)};
    if (fuel <= 0)
      return {LRunOutcome::Kind::OutOfFuel, std::move(c), {}, stats.steps,
              std::move(stats)};
    Machine::RL r = m.step_l(c.store, c.expr);
    if (r.kind == StepKind::Stuck)
      return {LRunOutcome::Kind::Stuck, std::move(c), std::move(r.stuck),
              stats.steps, std::move(stats)};
    c.expr = std::move(r.out);
    fuel--;
    if (opt.trace)
      opt.trace->push_back({stats.steps, std::move(r.rule),
                            r.pos.empty() ? "top" : std::move(r.pos),
                            open_count(c), stats.new_allocs});
    stats.steps++;
  }
}

const std::vector<std::string>& eval_rule_names() {
  static const std::vector<std::string> names = {
      "u_beta",        "u_fst",        "u_snd",        "u_letunit",
      "u_case_inl",    "u_case_inr",   "u_unfold_fold", "u_tyapp",
      "u_mark",        "ul_strip",     "l_beta",        "l_letpair",
      "l_letunit",     "l_case_inl",   "l_case_inr",    "l_unfold_fold",
      "l_new",         "l_free",       "l_box",         "l_unbox",
      "copy_unit",     "copy_pair",    "copy_inj",      "copy_fold",
      "copy_lam",      "copy_share",   "copy_dead",     "copy_alive",
      "copy_lump",     "lu_lump",      "lump_conv",     "unlump_conv",
      "l_mark",
  };
  return names;
}

} // namespace ul
