// Abstract syntax for the two-language system: the unrestricted language U,
// the linear language L, and the mixed forms that embed each into the other.
// All nodes are immutable and shared; helpers at the bottom build them.
//
// Conventions used throughout:
//   - one namespace for term variables and one for type variables, shared by
//     both languages; a binder of either sort shadows the name everywhere
//     below it, which keeps substitution capture-avoiding with a single rule
//   - locations are integers issued by a LocSupply, never reused within one
//     evaluation
//   - a Store maps locations to slots; a full slot owns the local store of
//     the value it holds, so ownership is visible in the syntax itself
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace ul {

// ---------------------------------------------------------------------------
// Fresh-name and location supplies
// ---------------------------------------------------------------------------

// Global counter behind alpha-renaming; names look like "x'17". The prime is
// a legal identifier character, so printed terms stay parseable.
std::string gensym(const std::string& base);

using Location = std::int64_t;

// Monotone per-evaluation counter. Never hands out the same location twice.
class LocSupply {
public:
  explicit LocSupply(Location first = 0) : next_(first) {}
  Location fresh() { return next_++; }
  Location peek() const { return next_; }
  // Bump past `l` so later allocations stay globally unique.
  void reserve_past(Location l) {
    if (l >= next_) next_ = l + 1;
  }

private:
  Location next_;
};

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

struct UType;
struct LType;
using UTy = std::shared_ptr<const UType>;
using LTy = std::shared_ptr<const LType>;

struct UTVar { std::string name; };
struct UTUnit {};
struct UTProd { UTy l, r; };
struct UTArr { UTy dom, cod; };
struct UTSum { UTy l, r; };
struct UTMu { std::string var; UTy body; };
struct UTAll { std::string var; UTy body; };

struct UType {
  std::variant<UTVar, UTUnit, UTProd, UTArr, UTSum, UTMu, UTAll> v;
};

struct LTVar { std::string name; };
struct LTOne {};
struct LTTensor { LTy l, r; };
struct LTLolli { LTy dom, cod; };
struct LTSum { LTy l, r; };
struct LTMu { std::string var; LTy body; };
struct LTBang { LTy inner; };
struct LTBox { LTy inner; };   // Box t: full cell
struct LTBox0 {};              // Box0: empty cell
struct LTLump { UTy inner; };  // Lump(T): opaque U payload

struct LType {
  std::variant<LTVar, LTOne, LTTensor, LTLolli, LTSum, LTMu, LTBang, LTBox,
               LTBox0, LTLump>
      v;
};

// duplicable(t) holds exactly for !t'.
bool duplicable(const LTy& t);

// ---------------------------------------------------------------------------
// Expressions, stores, store typings (mutually recursive)
// ---------------------------------------------------------------------------

struct UExpr;
struct LExpr;
using UEx = std::shared_ptr<const UExpr>;
using LEx = std::shared_ptr<const LExpr>;

struct StoreVal; // a full slot: value plus the local store it owns

// Slot: null pointer = empty cell, otherwise the held value.
using Slot = std::shared_ptr<const StoreVal>;

struct Store {
  std::map<Location, Slot> slots;

  bool empty() const { return slots.empty(); }
  std::set<Location> domain() const;
  // Disjoint union; returns nullopt on domain overlap.
  static std::optional<Store> join(const Store& a, const Store& b);
  // Restriction to (resp. removal of) a location set.
  Store restrict_to(const std::set<Location>& ls) const;
  Store without(const std::set<Location>& ls) const;
};

struct StoreVal {
  Store local;
  LEx value;
};

struct STEntry;
using STEntryP = std::shared_ptr<const STEntry>;

struct StoreTyping {
  std::map<Location, STEntryP> entries;

  bool empty() const { return entries.empty(); }
  std::set<Location> domain() const;
  static std::optional<StoreTyping> join(const StoreTyping& a,
                                         const StoreTyping& b);
  StoreTyping restrict_to(const std::set<Location>& ls) const;
};

// Mixed typing context: U term vars, U type vars, L term vars. One shared
// name space; pushing any entry shadows older ones of the same name.
struct MixedContext {
  struct Entry {
    enum class Kind { UVar, UTyVar, LVar } kind;
    std::string name;
    UTy utype; // Kind::UVar
    LTy ltype; // Kind::LVar
  };
  std::vector<Entry> entries;

  MixedContext with_u(const std::string& x, UTy t) const;
  MixedContext with_tyvar(const std::string& a) const;
  MixedContext with_l(const std::string& x, LTy t) const;
  // Innermost entry with this name, if any.
  const Entry* lookup(const std::string& x) const;
};

// Store-typing entries. Dead(t): an empty cell. Alive(ctx, inner, t): a cell
// holding a value typed in `ctx` (duplicable entries only in reachable
// states) against inner store typing `inner` at type `t`.
struct STDead { LTy type; };
struct STAlive {
  MixedContext ctx;
  StoreTyping inner;
  LTy type;
};
struct STEntry {
  std::variant<STDead, STAlive> v;
};

// --- U expressions ----------------------------------------------------------

struct UVar { std::string name; };
struct UUnit {};
struct UPair { UEx l, r; };
struct UFst { UEx e; };
struct USnd { UEx e; };
struct ULetUnit { UEx rhs, body; };
struct ULam { std::string var; UTy ann; UEx body; };
struct UApp { UEx fn, arg; };
struct UInj { int which; UTy ann; UEx e; }; // which: 1|2; ann: the full sum
struct UCase {
  UEx scrut;
  std::string lvar; UEx lbody;
  std::string rvar; UEx rbody;
};
struct UFold { UTy ann; UEx e; }; // ann: the full mu type
struct UUnfold { UEx e; };
struct UTyLam { std::string var; UEx body; }; // body must be a value
struct UTyApp { UEx e; UTy arg; };
struct UMark { std::string name; UEx e; }; // inert trace marker
// UL sigma;Sigma e — embeds an L configuration. Surface programs always carry
// empty store and typing.
struct UBoundary {
  Store store;
  StoreTyping styping;
  LEx inner;
};

struct UExpr {
  std::variant<UVar, UUnit, UPair, UFst, USnd, ULetUnit, ULam, UApp, UInj,
               UCase, UFold, UUnfold, UTyLam, UTyApp, UMark, UBoundary>
      v;
};

// --- L expressions ----------------------------------------------------------

struct LVar { std::string name; };
struct LUnit {};
struct LPair { LEx l, r; };
struct LLetPair { std::string v1, v2; LEx rhs, body; };
struct LLetUnit { LEx rhs, body; };
struct LLam { std::string var; LTy ann; LEx body; };
struct LApp { LEx fn, arg; };
struct LInj { int which; LTy ann; LEx e; };
struct LCase {
  LEx scrut;
  std::string lvar; LEx lbody;
  std::string rvar; LEx rbody;
};
struct LFold { LTy ann; LEx e; };
struct LUnfold { LEx e; };
// share sigma;Sigma e — promotion; captures the store the body consumes.
// Surface programs only ever write share(∅,∅,·).
struct LShare {
  Store store;
  StoreTyping styping;
  LEx body;
};
struct LCopy { LEx e; };
struct LNew { LEx e; };
struct LFree { LEx e; };
struct LBox { LEx e; };
struct LUnbox { LEx e; };
struct LLoc { Location loc; };     // internal only
struct LLump { UEx value; };       // internal value: lumped U value
struct LBoundary { UEx inner; };   // LU { e }
struct LLumpOp { LTy ann; LEx e; };   // lump[t] e   : t -o Lump(recover_u t)
struct LUnlumpOp { LTy ann; LEx e; }; // unlump[t] e : Lump(recover_u t) -o t
struct LMark { std::string name; LEx e; }; // inert trace marker

struct LExpr {
  std::variant<LVar, LUnit, LPair, LLetPair, LLetUnit, LLam, LApp, LInj, LCase,
               LFold, LUnfold, LShare, LCopy, LNew, LFree, LBox, LUnbox, LLoc,
               LLump, LBoundary, LLumpOp, LUnlumpOp, LMark>
      v;
};

// A linear term paired with the store it owns: the unit of L reduction and of
// internal typing.
struct Configuration {
  Store store;
  LEx expr;
};

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

UTy ut_var(std::string n);
UTy ut_unit();
UTy ut_prod(UTy l, UTy r);
UTy ut_arr(UTy d, UTy c);
UTy ut_sum(UTy l, UTy r);
UTy ut_mu(std::string a, UTy b);
UTy ut_all(std::string a, UTy b);

LTy lt_var(std::string n);
LTy lt_one();
LTy lt_tensor(LTy l, LTy r);
LTy lt_lolli(LTy d, LTy c);
LTy lt_sum(LTy l, LTy r);
LTy lt_mu(std::string a, LTy b);
LTy lt_bang(LTy t);
LTy lt_box(LTy t);
LTy lt_box0();
LTy lt_lump(UTy t);

UEx u_var(std::string n);
UEx u_unit();
UEx u_pair(UEx l, UEx r);
UEx u_fst(UEx e);
UEx u_snd(UEx e);
UEx u_letunit(UEx rhs, UEx body);
UEx u_lam(std::string x, UTy ann, UEx body);
UEx u_app(UEx f, UEx a);
UEx u_inj(int which, UTy ann, UEx e);
UEx u_case(UEx s, std::string lx, UEx lb, std::string rx, UEx rb);
UEx u_fold(UTy ann, UEx e);
UEx u_unfold(UEx e);
UEx u_tylam(std::string a, UEx body);
UEx u_tyapp(UEx e, UTy t);
UEx u_mark(std::string name, UEx e);
UEx u_boundary(LEx inner); // empty store/typing (surface form)
UEx u_boundary(Store s, StoreTyping st, LEx inner);

LEx l_var(std::string n);
LEx l_unit();
LEx l_pair(LEx l, LEx r);
LEx l_letpair(std::string x, std::string y, LEx rhs, LEx body);
LEx l_letunit(LEx rhs, LEx body);
LEx l_lam(std::string x, LTy ann, LEx body);
LEx l_app(LEx f, LEx a);
LEx l_inj(int which, LTy ann, LEx e);
LEx l_case(LEx s, std::string lx, LEx lb, std::string rx, LEx rb);
LEx l_fold(LTy ann, LEx e);
LEx l_unfold(LEx e);
LEx l_share(LEx body); // empty store/typing (surface form)
LEx l_share(Store s, StoreTyping st, LEx body);
LEx l_copy(LEx e);
LEx l_new(LEx e);
LEx l_free(LEx e);
LEx l_box(LEx e);
LEx l_unbox(LEx e);
LEx l_loc(Location l);
LEx l_lump(UEx v);
LEx l_boundary(UEx inner);
LEx l_lumpop(LTy ann, LEx e);
LEx l_unlumpop(LTy ann, LEx e);
LEx l_mark(std::string name, LEx e);

STEntryP st_dead(LTy t);
STEntryP st_alive(MixedContext ctx, StoreTyping inner, LTy t);
Slot slot_full(Store local, LEx value);

// ---------------------------------------------------------------------------
// Predicates and measurements
// ---------------------------------------------------------------------------

bool is_value_u(const UEx& e);
bool is_value_l(const LEx& e);

// Surface fragment: no locations, every share/UL carries an empty store.
bool is_surface_u(const UEx& e);
bool is_surface_l(const LEx& e);

// Free term variables (both sorts share one name space).
std::set<std::string> free_vars(const UEx& e);
std::set<std::string> free_vars(const LEx& e);

// Free type variables of a type.
std::set<std::string> free_tyvars(const UTy& t);
std::set<std::string> free_tyvars(const LTy& t);

// Locations occurring free: a location literal is free; everything under a
// share's captured store is bound there. For a store, the top-level domain.
std::set<Location> locations_of(const LEx& e);
std::set<Location> locations_of(const Store& s);

// Every location that is "open" in a configuration — store domains at all
// layers (including slot-local stores and UL boundary stores) plus location
// literals in evaluation position — as a vector so duplicates are observable.
// Share-internal locations are bound and excluded. Used by the hygiene check.
void collect_open_locations(const LEx& e, std::vector<Location>& out);
void collect_open_locations(const UEx& e, std::vector<Location>& out);
void collect_open_locations(const Store& s, std::vector<Location>& out);

// Largest location literal anywhere in the term, including inside shares;
// used to seed a LocSupply safely. Returns -1 when there are none.
Location max_location(const UEx& e);
Location max_location(const LEx& e);

// ---------------------------------------------------------------------------
// Substitution (capture-avoiding)
// ---------------------------------------------------------------------------

// Substitute a term value for a term variable. The payload's sort must match
// the sort of the occurrences; a sort clash throws std::logic_error (it
// cannot arise from well-typed programs).
UEx subst_u(const UEx& e, const std::string& x, const UEx& payload);
UEx subst_u(const UEx& e, const std::string& x, const LEx& payload);
LEx subst_l(const LEx& e, const std::string& x, const UEx& payload);
LEx subst_l(const LEx& e, const std::string& x, const LEx& payload);

// Substitute for a name that may stand for a U term at U occurrences and an
// L term at L occurrences (definition inlining). Either payload may be null;
// hitting an occurrence whose sort has no payload raises UnboundName.
UEx subst_name(const UEx& e, const std::string& x, UEx u, LEx l);
LEx subst_name(const LEx& e, const std::string& x, UEx u, LEx l);

// Substitute a type for a type variable, in types and in annotations.
UTy subst_ty(const UTy& t, const std::string& a, const UTy& repl);
LTy subst_ty(const LTy& t, const std::string& a, const UTy& repl);
LTy subst_ty_l(const LTy& t, const std::string& a, const LTy& repl);
UEx subst_ty_in_expr(const UEx& e, const std::string& a, const UTy& repl);
LEx subst_ty_in_expr(const LEx& e, const std::string& a, const UTy& repl);

// Uniform injective renaming of every location literal (including inside
// shares and stores). Keys absent from the map are kept.
using LocRenaming = std::map<Location, Location>;
LEx rename_locations(const LEx& e, const LocRenaming& r);
Store rename_locations(const Store& s, const LocRenaming& r);
StoreTyping rename_locations(const StoreTyping& s, const LocRenaming& r);

// ---------------------------------------------------------------------------
// Alpha-equivalence
// ---------------------------------------------------------------------------

bool alpha_equal(const UTy& a, const UTy& b);
bool alpha_equal(const LTy& a, const LTy& b);
bool alpha_equal(const UEx& a, const UEx& b);
bool alpha_equal(const LEx& a, const LEx& b);
bool alpha_equal(const Store& a, const Store& b);

// Structural equality modulo a consistent renaming of location literals
// (binders still compared up to alpha). Used by the copy-semantics property.
// The configuration overload matches the expressions first, then resolves the
// store slots through the location bijection the expressions established.
bool equal_up_to_locations(const LEx& a, const LEx& b);
bool equal_up_to_locations(const Configuration& a, const Configuration& b);

} // namespace ul
