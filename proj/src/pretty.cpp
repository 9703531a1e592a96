#include "ul/pretty.hpp"

#include <sstream>

namespace ul {

namespace {
template <class... Ts> struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

// ---------------------------------------------------------------------------
// Types. Binary operators parenthesize composite operands, so printed types
// read unambiguously without a precedence table in one's head:
//   (Box t * t) -o (Box t * t)
// ---------------------------------------------------------------------------

void put_uty(std::ostream& os, const UTy& t, bool operand);
void put_lty(std::ostream& os, const LTy& t, bool operand);

bool uty_composite(const UTy& t) {
  return std::holds_alternative<UTProd>(t->v) ||
         std::holds_alternative<UTArr>(t->v) ||
         std::holds_alternative<UTSum>(t->v) ||
         std::holds_alternative<UTMu>(t->v) ||
         std::holds_alternative<UTAll>(t->v);
}

bool lty_composite(const LTy& t) {
  return std::holds_alternative<LTTensor>(t->v) ||
         std::holds_alternative<LTLolli>(t->v) ||
         std::holds_alternative<LTSum>(t->v) ||
         std::holds_alternative<LTMu>(t->v);
}

void put_uty(std::ostream& os, const UTy& t, bool operand) {
  if (operand && uty_composite(t)) {
    os << '(';
    put_uty(os, t, false);
    os << ')';
    return;
  }
  std::visit(
      overloaded{
          [&](const UTVar& x) { os << x.name; },
          [&](const UTUnit&) { os << "unit"; },
          [&](const UTProd& x) {
            put_uty(os, x.l, true);
            os << " * ";
            put_uty(os, x.r, true);
          },
          [&](const UTArr& x) {
            put_uty(os, x.dom, true);
            os << " -> ";
            // Arrows chain to the right without parentheses.
            put_uty(os, x.cod, !std::holds_alternative<UTArr>(x.cod->v));
          },
          [&](const UTSum& x) {
            put_uty(os, x.l, true);
            os << " + ";
            put_uty(os, x.r, true);
          },
          [&](const UTMu& x) {
            os << "mu " << x.var << ". ";
            put_uty(os, x.body, false);
          },
          [&](const UTAll& x) {
            os << "forall " << x.var << ". ";
            put_uty(os, x.body, false);
          },
      },
      t->v);
}

void put_lty(std::ostream& os, const LTy& t, bool operand) {
  if (operand && lty_composite(t)) {
    os << '(';
    put_lty(os, t, false);
    os << ')';
    return;
  }
  std::visit(
      overloaded{
          [&](const LTVar& x) { os << x.name; },
          [&](const LTOne&) { os << '1'; },
          [&](const LTTensor& x) {
            put_lty(os, x.l, true);
            os << " * ";
            put_lty(os, x.r, true);
          },
          [&](const LTLolli& x) {
            put_lty(os, x.dom, true);
            os << " -o ";
            // Arrows chain to the right without parentheses.
            put_lty(os, x.cod, !std::holds_alternative<LTLolli>(x.cod->v));
          },
          [&](const LTSum& x) {
            put_lty(os, x.l, true);
            os << " + ";
            put_lty(os, x.r, true);
          },
          [&](const LTMu& x) {
            os << "mu " << x.var << ". ";
            put_lty(os, x.body, false);
          },
          [&](const LTBang& x) {
            os << '!';
            put_lty(os, x.inner, true);
          },
          [&](const LTBox& x) {
            os << "Box ";
            put_lty(os, x.inner, true);
          },
          [&](const LTBox0&) { os << "Box0"; },
          [&](const LTLump& x) {
            os << "Lump(";
            put_uty(os, x.inner, false);
            os << ')';
          },
      },
      t->v);
}

// ---------------------------------------------------------------------------
// Terms. Three positions matter:
//   Top  — statement position; every form prints bare
//   Head — function position of an application; binder forms need parens
//   Atom — argument position; only atoms print bare
// ---------------------------------------------------------------------------

enum class Pos { Top, Head, Atom };

void put_u(std::ostream& os, const UEx& e, Pos pos);
void put_l(std::ostream& os, const LEx& e, Pos pos);
void put_store(std::ostream& os, const Store& s);

bool u_is_atom(const UEx& e) {
  return std::holds_alternative<UVar>(e->v) ||
         std::holds_alternative<UUnit>(e->v) ||
         std::holds_alternative<UPair>(e->v) ||
         std::holds_alternative<UBoundary>(e->v);
}

bool u_is_low(const UEx& e) {
  return std::holds_alternative<ULam>(e->v) ||
         std::holds_alternative<UTyLam>(e->v) ||
         std::holds_alternative<UCase>(e->v) ||
         std::holds_alternative<ULetUnit>(e->v);
}

bool l_is_atom(const LEx& e) {
  return std::holds_alternative<LVar>(e->v) ||
         std::holds_alternative<LUnit>(e->v) ||
         std::holds_alternative<LPair>(e->v) ||
         std::holds_alternative<LBoundary>(e->v) ||
         std::holds_alternative<LLoc>(e->v) ||
         std::holds_alternative<LLump>(e->v);
}

bool l_is_low(const LEx& e) {
  return std::holds_alternative<LLam>(e->v) ||
         std::holds_alternative<LCase>(e->v) ||
         std::holds_alternative<LLetPair>(e->v) ||
         std::holds_alternative<LLetUnit>(e->v);
}

bool needs_parens_u(const UEx& e, Pos pos) {
  switch (pos) {
  case Pos::Top: return false;
  case Pos::Head: return u_is_low(e);
  case Pos::Atom: return !u_is_atom(e);
  }
  return false;
}

bool needs_parens_l(const LEx& e, Pos pos) {
  switch (pos) {
  case Pos::Top: return false;
  case Pos::Head: return l_is_low(e);
  case Pos::Atom: return !l_is_atom(e);
  }
  return false;
}

void put_u(std::ostream& os, const UEx& e, Pos pos) {
  if (needs_parens_u(e, pos)) {
    os << '(';
    put_u(os, e, Pos::Top);
    os << ')';
    return;
  }
  std::visit(
      overloaded{
          [&](const UVar& x) { os << x.name; },
          [&](const UUnit&) { os << "()"; },
          [&](const UPair& x) {
            os << '(';
            put_u(os, x.l, Pos::Top);
            os << ", ";
            put_u(os, x.r, Pos::Top);
            os << ')';
          },
          [&](const UFst& x) {
            os << "fst ";
            put_u(os, x.e, Pos::Atom);
          },
          [&](const USnd& x) {
            os << "snd ";
            put_u(os, x.e, Pos::Atom);
          },
          [&](const ULetUnit& x) {
            os << "let () = ";
            put_u(os, x.rhs, Pos::Top);
            os << " in ";
            put_u(os, x.body, Pos::Top);
          },
          [&](const ULam& x) {
            os << "fun (" << x.var << " : ";
            put_uty(os, x.ann, false);
            os << ") -> ";
            put_u(os, x.body, Pos::Top);
          },
          [&](const UApp& x) {
            put_u(os, x.fn, Pos::Head);
            os << ' ';
            put_u(os, x.arg, Pos::Atom);
          },
          [&](const UInj& x) {
            os << (x.which == 1 ? "inl[" : "inr[");
            put_uty(os, x.ann, false);
            os << "] ";
            put_u(os, x.e, Pos::Atom);
          },
          [&](const UCase& x) {
            os << "case ";
            put_u(os, x.scrut, Pos::Top);
            os << " of { inl " << x.lvar << " -> ";
            put_u(os, x.lbody, Pos::Top);
            os << " | inr " << x.rvar << " -> ";
            put_u(os, x.rbody, Pos::Top);
            os << " }";
          },
          [&](const UFold& x) {
            os << "fold[";
            put_uty(os, x.ann, false);
            os << "] ";
            put_u(os, x.e, Pos::Atom);
          },
          [&](const UUnfold& x) {
            os << "unfold ";
            put_u(os, x.e, Pos::Atom);
          },
          [&](const UTyLam& x) {
            os << "Fun " << x.var << " -> ";
            put_u(os, x.body, Pos::Top);
          },
          [&](const UTyApp& x) {
            put_u(os, x.e, Pos::Head);
            os << '[';
            put_uty(os, x.arg, false);
            os << ']';
          },
          [&](const UMark& x) {
            os << "mark " << x.name << ' ';
            put_u(os, x.e, Pos::Atom);
          },
          [&](const UBoundary& x) {
            os << "UL ";
            if (!x.store.empty()) {
              put_store(os, x.store);
              os << ' ';
            }
            os << "{ ";
            put_l(os, x.inner, Pos::Top);
            os << " }";
          },
      },
      e->v);
}

void put_l(std::ostream& os, const LEx& e, Pos pos) {
  if (needs_parens_l(e, pos)) {
    os << '(';
    put_l(os, e, Pos::Top);
    os << ')';
    return;
  }
  std::visit(
      overloaded{
          [&](const LVar& x) { os << x.name; },
          [&](const LUnit&) { os << "()"; },
          [&](const LPair& x) {
            os << '(';
            put_l(os, x.l, Pos::Top);
            os << ", ";
            put_l(os, x.r, Pos::Top);
            os << ')';
          },
          [&](const LLetPair& x) {
            os << "let (" << x.v1 << ", " << x.v2 << ") = ";
            put_l(os, x.rhs, Pos::Top);
            os << " in ";
            put_l(os, x.body, Pos::Top);
          },
          [&](const LLetUnit& x) {
            os << "let () = ";
            put_l(os, x.rhs, Pos::Top);
            os << " in ";
            put_l(os, x.body, Pos::Top);
          },
          [&](const LLam& x) {
            os << "fun (" << x.var << " : ";
            put_lty(os, x.ann, false);
            os << ") -o ";
            put_l(os, x.body, Pos::Top);
          },
          [&](const LApp& x) {
            put_l(os, x.fn, Pos::Head);
            os << ' ';
            put_l(os, x.arg, Pos::Atom);
          },
          [&](const LInj& x) {
            os << (x.which == 1 ? "inl[" : "inr[");
            put_lty(os, x.ann, false);
            os << "] ";
            put_l(os, x.e, Pos::Atom);
          },
          [&](const LCase& x) {
            os << "case ";
            put_l(os, x.scrut, Pos::Top);
            os << " of { inl " << x.lvar << " -> ";
            put_l(os, x.lbody, Pos::Top);
            os << " | inr " << x.rvar << " -> ";
            put_l(os, x.rbody, Pos::Top);
            os << " }";
          },
          [&](const LFold& x) {
            os << "fold[";
            put_lty(os, x.ann, false);
            os << "] ";
            put_l(os, x.e, Pos::Atom);
          },
          [&](const LUnfold& x) {
            os << "unfold ";
            put_l(os, x.e, Pos::Atom);
          },
          [&](const LShare& x) {
            os << "share ";
            if (!x.store.empty()) {
              put_store(os, x.store);
              os << ' ';
            }
            put_l(os, x.body, Pos::Atom);
          },
          [&](const LCopy& x) {
            os << "copy ";
            put_l(os, x.e, Pos::Atom);
          },
          [&](const LNew& x) {
            os << "new ";
            put_l(os, x.e, Pos::Atom);
          },
          [&](const LFree& x) {
            os << "free ";
            put_l(os, x.e, Pos::Atom);
          },
          [&](const LBox& x) {
            os << "box ";
            put_l(os, x.e, Pos::Atom);
          },
          [&](const LUnbox& x) {
            os << "unbox ";
            put_l(os, x.e, Pos::Atom);
          },
          [&](const LLoc& x) { os << '#' << x.loc; },
          [&](const LLump& x) {
            os << "Lumped(";
            put_u(os, x.value, Pos::Top);
            os << ')';
          },
          [&](const LBoundary& x) {
            os << "LU { ";
            put_u(os, x.inner, Pos::Top);
            os << " }";
          },
          [&](const LLumpOp& x) {
            os << "lump[";
            put_lty(os, x.ann, false);
            os << "] ";
            put_l(os, x.e, Pos::Atom);
          },
          [&](const LUnlumpOp& x) {
            os << "unlump[";
            put_lty(os, x.ann, false);
            os << "] ";
            put_l(os, x.e, Pos::Atom);
          },
          [&](const LMark& x) {
            os << "mark " << x.name << ' ';
            put_l(os, x.e, Pos::Atom);
          },
      },
      e->v);
}

void put_store(std::ostream& os, const Store& s) {
  os << '{';
  bool first = true;
  for (auto& [l, slot] : s.slots) {
    if (!first) os << ", ";
    first = false;
    os << '#' << l << " |-> ";
    if (!slot) {
      os << '_';
    } else {
      if (!slot->local.empty()) {
        put_store(os, slot->local);
        os << "; ";
      }
      put_l(os, slot->value, Pos::Top);
    }
  }
  os << '}';
}

} // namespace

std::string pretty(const UTy& t) {
  std::ostringstream os;
  put_uty(os, t, false);
  return os.str();
}

std::string pretty(const LTy& t) {
  std::ostringstream os;
  put_lty(os, t, false);
  return os.str();
}

std::string pretty(const UEx& e) {
  std::ostringstream os;
  put_u(os, e, Pos::Top);
  return os.str();
}

std::string pretty(const LEx& e) {
  std::ostringstream os;
  put_l(os, e, Pos::Top);
  return os.str();
}

std::string pretty(const Store& s) {
  std::ostringstream os;
  put_store(os, s);
  return os.str();
}

std::string pretty(const Configuration& c) {
  std::ostringstream os;
  os << '<';
  put_store(os, c.store);
  os << " ; ";
  put_l(os, c.expr, Pos::Top);
  os << '>';
  return os.str();
}

} // namespace ul
