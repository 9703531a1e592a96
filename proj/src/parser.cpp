#include "ul/parser.hpp"

#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "ul/errors.hpp"

namespace ul {

namespace {

enum class Tok {
  Ident, Number, Keyword,
  LParen, RParen, LBrace, RBrace, LBracket, RBracket,
  Comma, Dot, Colon, Equals, Bar, Star, Plus, Bang, At,
  Arrow, Lolli,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int line, col;
};

const std::set<std::string>& keywords() {
  static const std::set<std::string> k = {
      "def", "type", "main", "fun", "Fun", "case", "of", "inl", "inr",
      "fst",  "snd",  "fold", "unfold", "let", "in", "mu", "forall", "unit",
      "share", "copy", "new", "free", "box", "unbox", "lump", "unlump",
      "mark", "fix", "UL", "LU", "Box", "Box0", "Lump"};
  return k;
}

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' ||
         c == '$';
}

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  while (i < src.size()) {
    char c = src[i];
    if (c == '\n') {
      ++i;
      ++line;
      col = 1;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      ++col;
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    int tl = line, tc = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      std::string t = src.substr(i, j - i);
      col += static_cast<int>(j - i);
      i = j;
      out.push_back({keywords().count(t) ? Tok::Keyword : Tok::Ident,
                     std::move(t), tl, tc});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j])))
        ++j;
      std::string t = src.substr(i, j - i);
      col += static_cast<int>(j - i);
      i = j;
      out.push_back({Tok::Number, std::move(t), tl, tc});
      continue;
    }
    if (c == '-') {
      if (i + 1 < src.size() && src[i + 1] == '>') {
        out.push_back({Tok::Arrow, "->", tl, tc});
        i += 2;
        col += 2;
        continue;
      }
      if (i + 1 < src.size() && src[i + 1] == 'o' &&
          (i + 2 >= src.size() || !ident_char(src[i + 2]))) {
        out.push_back({Tok::Lolli, "-o", tl, tc});
        i += 2;
        col += 2;
        continue;
      }
      throw Error(Errc::ParseError, "line " + std::to_string(tl) + ", col " +
                                        std::to_string(tc) + ": stray '-'");
    }
    Tok k;
    switch (c) {
    case '(': k = Tok::LParen; break;
    case ')': k = Tok::RParen; break;
    case '{': k = Tok::LBrace; break;
    case '}': k = Tok::RBrace; break;
    case '[': k = Tok::LBracket; break;
    case ']': k = Tok::RBracket; break;
    case ',': k = Tok::Comma; break;
    case '.': k = Tok::Dot; break;
    case ':': k = Tok::Colon; break;
    case '=': k = Tok::Equals; break;
    case '|': k = Tok::Bar; break;
    case '*': k = Tok::Star; break;
    case '+': k = Tok::Plus; break;
    case '!': k = Tok::Bang; break;
    case '@': k = Tok::At; break;
    default:
      throw Error(Errc::ParseError,
                  "line " + std::to_string(tl) + ", col " + std::to_string(tc) +
                      ": unexpected character '" + std::string(1, c) + "'");
    }
    out.push_back({k, std::string(1, c), tl, tc});
    ++i;
    ++col;
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

// Internal backtracking signal; the parser keeps the farthest failure and the
// token set that was expected there, and raise() renders it as a ParseError.
struct ParseFail {};

struct TypeAbbrev {
  std::vector<std::string> params;
  UTy u; // may be null
  LTy l; // may be null
};

struct Parser {
  std::vector<Token> toks;
  size_t pos = 0;
  std::map<std::string, TypeAbbrev> abbrevs;

  size_t fail_pos = 0;
  std::set<std::string> fail_expected;

  explicit Parser(const std::string& src) : toks(lex(src)) {}

  const Token& peek() const { return toks[pos]; }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_kw(const char* w) const {
    return peek().kind == Tok::Keyword && peek().text == w;
  }
  Token eat() { return toks[pos++]; }

  [[noreturn]] void fail(const std::string& expected) {
    if (pos > fail_pos) {
      fail_pos = pos;
      fail_expected.clear();
    }
    if (pos == fail_pos) fail_expected.insert(expected);
    throw ParseFail{};
  }

  void expect(Tok k, const char* what) {
    if (!at(k)) fail(what);
    ++pos;
  }
  void expect_kw(const char* w) {
    if (!at_kw(w)) fail("'" + std::string(w) + "'");
    ++pos;
  }
  std::string expect_ident(const char* what) {
    if (!at(Tok::Ident)) fail(what);
    return eat().text;
  }

  [[noreturn]] void raise() {
    const Token& t = toks[std::min(fail_pos, toks.size() - 1)];
    std::ostringstream os;
    os << "line " << t.line << ", col " << t.col << ": expected ";
    bool first = true;
    for (auto& e : fail_expected) {
      if (!first) os << " or ";
      os << e;
      first = false;
    }
    if (fail_expected.empty()) os << "a well-formed item";
    os << ", found ";
    if (t.kind == Tok::End)
      os << "end of input";
    else
      os << "'" << t.text << "'";
    throw Error(Errc::ParseError, os.str());
  }

  // ---- types ---------------------------------------------------------------

  UTy expand_abbrev_u(const std::string& n, const TypeAbbrev& a) {
    std::vector<UTy> args;
    if (!a.params.empty()) {
      expect(Tok::LParen, "'(' after the type abbreviation");
      args.push_back(p_uty());
      while (at(Tok::Comma)) {
        ++pos;
        args.push_back(p_uty());
      }
      expect(Tok::RParen, "')'");
    }
    if (!a.u) fail("a type abbreviation with a U reading ('" + n + "' has none)");
    if (args.size() != a.params.size())
      fail("'" + n + "' applied to " + std::to_string(a.params.size()) +
           " arguments");
    UTy t = a.u;
    for (size_t i = 0; i < args.size(); ++i)
      t = subst_ty(t, a.params[i], args[i]);
    return t;
  }

  LTy expand_abbrev_l(const std::string& n, const TypeAbbrev& a) {
    std::vector<LTy> args;
    if (!a.params.empty()) {
      expect(Tok::LParen, "'(' after the type abbreviation");
      args.push_back(p_lty());
      while (at(Tok::Comma)) {
        ++pos;
        args.push_back(p_lty());
      }
      expect(Tok::RParen, "')'");
    }
    if (!a.l) fail("a type abbreviation with an L reading ('" + n + "' has none)");
    if (args.size() != a.params.size())
      fail("'" + n + "' applied to " + std::to_string(a.params.size()) +
           " arguments");
    LTy t = a.l;
    for (size_t i = 0; i < args.size(); ++i)
      t = subst_ty_l(t, a.params[i], args[i]);
    return t;
  }

  UTy p_uty() {
    if (at_kw("mu")) {
      ++pos;
      auto a = expect_ident("a type variable");
      expect(Tok::Dot, "'.'");
      return ut_mu(a, p_uty());
    }
    if (at_kw("forall")) {
      ++pos;
      auto a = expect_ident("a type variable");
      expect(Tok::Dot, "'.'");
      return ut_all(a, p_uty());
    }
    return p_uty_arrow();
  }
  UTy p_uty_arrow() {
    auto l = p_uty_sum();
    if (at(Tok::Arrow)) {
      ++pos;
      return ut_arr(l, p_uty_arrow());
    }
    return l;
  }
  UTy p_uty_sum() {
    auto l = p_uty_prod();
    if (at(Tok::Plus)) {
      ++pos;
      return ut_sum(l, p_uty_sum());
    }
    return l;
  }
  UTy p_uty_prod() {
    auto l = p_uty_atom();
    if (at(Tok::Star)) {
      ++pos;
      return ut_prod(l, p_uty_prod());
    }
    return l;
  }
  UTy p_uty_atom() {
    if (at_kw("unit")) {
      ++pos;
      return ut_unit();
    }
    if (at(Tok::LParen)) {
      ++pos;
      auto t = p_uty();
      expect(Tok::RParen, "')'");
      return t;
    }
    if (at(Tok::Ident)) {
      std::string n = eat().text;
      auto it = abbrevs.find(n);
      if (it != abbrevs.end()) return expand_abbrev_u(n, it->second);
      return ut_var(n);
    }
    fail("a type");
  }

  LTy p_lty() {
    if (at_kw("mu")) {
      ++pos;
      auto a = expect_ident("a type variable");
      expect(Tok::Dot, "'.'");
      return lt_mu(a, p_lty());
    }
    return p_lty_lolli();
  }
  LTy p_lty_lolli() {
    auto l = p_lty_sum();
    if (at(Tok::Lolli)) {
      ++pos;
      return lt_lolli(l, p_lty_lolli());
    }
    return l;
  }
  LTy p_lty_sum() {
    auto l = p_lty_prod();
    if (at(Tok::Plus)) {
      ++pos;
      return lt_sum(l, p_lty_sum());
    }
    return l;
  }
  LTy p_lty_prod() {
    auto l = p_lty_prefix();
    if (at(Tok::Star)) {
      ++pos;
      return lt_tensor(l, p_lty_prod());
    }
    return l;
  }
  LTy p_lty_prefix() {
    if (at(Tok::Bang)) {
      ++pos;
      return lt_bang(p_lty_prefix());
    }
    if (at_kw("Box")) {
      ++pos;
      return lt_box(p_lty_prefix());
    }
    return p_lty_atom();
  }
  LTy p_lty_atom() {
    if (at(Tok::Number)) {
      if (peek().text != "1") fail("the type '1'");
      ++pos;
      return lt_one();
    }
    if (at_kw("Box0")) {
      ++pos;
      return lt_box0();
    }
    if (at_kw("Lump")) {
      ++pos;
      expect(Tok::LParen, "'('");
      auto t = p_uty();
      expect(Tok::RParen, "')'");
      return lt_lump(t);
    }
    if (at(Tok::LParen)) {
      ++pos;
      auto t = p_lty();
      expect(Tok::RParen, "')'");
      return t;
    }
    if (at(Tok::Ident)) {
      std::string n = eat().text;
      auto it = abbrevs.find(n);
      if (it != abbrevs.end()) return expand_abbrev_l(n, it->second);
      return lt_var(n);
    }
    fail("a type");
  }

  // ---- U terms --------------------------------------------------------------

  bool starts_u_atom() const {
    return at(Tok::LParen) || at(Tok::Ident) || at_kw("UL");
  }

  UEx p_u() {
    if (at_kw("fun")) {
      ++pos;
      expect(Tok::LParen, "'('");
      auto x = expect_ident("a variable");
      expect(Tok::Colon, "':'");
      auto t = p_uty();
      expect(Tok::RParen, "')'");
      expect(Tok::Arrow, "'->'");
      return u_lam(x, t, p_u());
    }
    if (at_kw("Fun")) {
      ++pos;
      auto a = expect_ident("a type variable");
      expect(Tok::Arrow, "'->'");
      return u_tylam(a, p_u());
    }
    if (at_kw("case")) {
      ++pos;
      auto s = p_u();
      expect_kw("of");
      expect(Tok::LBrace, "'{'");
      expect_kw("inl");
      auto lx = expect_ident("a variable");
      expect(Tok::Arrow, "'->'");
      auto lb = p_u();
      expect(Tok::Bar, "'|'");
      expect_kw("inr");
      auto rx = expect_ident("a variable");
      expect(Tok::Arrow, "'->'");
      auto rb = p_u();
      expect(Tok::RBrace, "'}'");
      return u_case(s, lx, lb, rx, rb);
    }
    if (at_kw("let")) {
      ++pos;
      expect(Tok::LParen, "'('");
      expect(Tok::RParen, "')'");
      expect(Tok::Equals, "'='");
      auto rhs = p_u();
      expect_kw("in");
      return u_letunit(rhs, p_u());
    }
    return p_u_app();
  }

  UEx p_u_app() {
    UEx head = p_u_head();
    for (;;) {
      if (at(Tok::LBracket)) {
        ++pos;
        auto t = p_uty();
        expect(Tok::RBracket, "']'");
        head = u_tyapp(head, t);
        continue;
      }
      if (starts_u_atom()) {
        head = u_app(head, p_u_atom());
        continue;
      }
      break;
    }
    return head;
  }

  UEx p_u_head() {
    if (at_kw("fst")) {
      ++pos;
      return u_fst(p_u_atom());
    }
    if (at_kw("snd")) {
      ++pos;
      return u_snd(p_u_atom());
    }
    if (at_kw("unfold")) {
      ++pos;
      return u_unfold(p_u_atom());
    }
    if (at_kw("inl") || at_kw("inr")) {
      int w = peek().text == "inl" ? 1 : 2;
      ++pos;
      expect(Tok::LBracket, "'['");
      auto t = p_uty();
      expect(Tok::RBracket, "']'");
      return u_inj(w, t, p_u_atom());
    }
    if (at_kw("fold")) {
      ++pos;
      expect(Tok::LBracket, "'['");
      auto t = p_uty();
      expect(Tok::RBracket, "']'");
      return u_fold(t, p_u_atom());
    }
    if (at_kw("mark")) {
      ++pos;
      auto n = expect_ident("a marker name");
      return u_mark(n, p_u_atom());
    }
    return p_u_atom();
  }

  UEx p_u_atom() {
    if (at(Tok::LParen)) {
      ++pos;
      if (at(Tok::RParen)) {
        ++pos;
        return u_unit();
      }
      auto e = p_u();
      if (at(Tok::Comma)) {
        ++pos;
        auto r = p_u();
        expect(Tok::RParen, "')'");
        return u_pair(e, r);
      }
      expect(Tok::RParen, "')'");
      return e;
    }
    if (at(Tok::Ident)) return u_var(eat().text);
    if (at_kw("UL")) {
      ++pos;
      expect(Tok::LBrace, "'{'");
      auto e = p_l();
      expect(Tok::RBrace, "'}'");
      return u_boundary(e);
    }
    fail("an expression");
  }

  // ---- L terms --------------------------------------------------------------

  bool starts_l_atom() const {
    return at(Tok::LParen) || at(Tok::Ident) || at_kw("LU");
  }

  LEx p_l() {
    if (at_kw("fun")) {
      ++pos;
      expect(Tok::LParen, "'('");
      auto x = expect_ident("a variable");
      expect(Tok::Colon, "':'");
      auto t = p_lty();
      expect(Tok::RParen, "')'");
      expect(Tok::Lolli, "'-o'");
      return l_lam(x, t, p_l());
    }
    if (at_kw("case")) {
      ++pos;
      auto s = p_l();
      expect_kw("of");
      expect(Tok::LBrace, "'{'");
      expect_kw("inl");
      auto lx = expect_ident("a variable");
      expect(Tok::Arrow, "'->'");
      auto lb = p_l();
      expect(Tok::Bar, "'|'");
      expect_kw("inr");
      auto rx = expect_ident("a variable");
      expect(Tok::Arrow, "'->'");
      auto rb = p_l();
      expect(Tok::RBrace, "'}'");
      return l_case(s, lx, lb, rx, rb);
    }
    if (at_kw("let")) return p_l_let();
    if (at_kw("fix")) return p_l_fix();
    return p_l_app();
  }

  LEx p_l_let() {
    ++pos; // let
    if (at(Tok::LParen)) {
      ++pos;
      if (at(Tok::RParen)) {
        ++pos;
        expect(Tok::Equals, "'='");
        auto rhs = p_l();
        expect_kw("in");
        return l_letunit(rhs, p_l());
      }
      auto x = expect_ident("a variable");
      expect(Tok::Comma, "','");
      auto y = expect_ident("a variable");
      expect(Tok::RParen, "')'");
      if (at(Tok::At)) {
        ++pos;
        auto cell = expect_ident("a cell variable");
        expect(Tok::Equals, "'='");
        auto rhs = p_l();
        expect_kw("in");
        auto body = p_l();
        // let (x, y)@c = e in b  ==  let (c, w) = unbox e in let (x, y) = w in b
        auto w = gensym("contents");
        return l_letpair(cell, w, l_unbox(rhs),
                         l_letpair(x, y, l_var(w), body));
      }
      expect(Tok::Equals, "'='");
      auto rhs = p_l();
      expect_kw("in");
      return l_letpair(x, y, rhs, p_l());
    }
    auto x = expect_ident("a pattern");
    expect(Tok::At, "'@'");
    auto cell = expect_ident("a cell variable");
    expect(Tok::Equals, "'='");
    auto rhs = p_l();
    expect_kw("in");
    // let x@c = e in b  ==  let (c, x) = unbox e in b
    return l_letpair(cell, x, l_unbox(rhs), p_l());
  }

  // fix (f : t1 -o t2) x -o body, with f : !(t1 -o t2) in body. Encoded with
  // an iso-recursive self-application type; the shared thunk is eta-expanded
  // so each recursive unrolling happens only when the function is applied.
  LEx p_l_fix() {
    ++pos; // fix
    expect(Tok::LParen, "'('");
    auto f = expect_ident("a function name");
    expect(Tok::Colon, "':'");
    LTy T = p_lty();
    expect(Tok::RParen, "')'");
    auto x = expect_ident("an argument name");
    expect(Tok::Lolli, "'-o'");
    LEx body = p_l();
    auto* ar = std::get_if<LTLolli>(&T->v);
    if (!ar)
      throw Error(Errc::ParseError,
                  "fix annotation must be a function type, got " +
                      std::string("a non-arrow type"));
    LTy t1 = ar->dom;
    std::string rv = gensym("rec");
    LTy R = lt_mu(rv, lt_lolli(lt_bang(lt_var(rv)), T));
    std::string r = gensym("self");
    std::string xe = gensym("eta");
    LEx recall = l_app(l_unfold(l_copy(l_var(r))), l_var(r));
    LEx thunk = l_share(l_lam(xe, t1, l_app(recall, l_var(xe))));
    LEx lam_f = l_lam(f, lt_bang(T), l_lam(x, t1, body));
    LEx G = l_share(l_fold(R, l_lam(r, lt_bang(R), l_app(lam_f, thunk))));
    return l_app(l_unfold(l_copy(G)), G);
  }

  LEx p_l_app() {
    LEx head = p_l_head();
    while (starts_l_atom()) head = l_app(head, p_l_atom());
    return head;
  }

  LEx p_l_head() {
    if (at_kw("unfold")) {
      ++pos;
      return l_unfold(p_l_atom());
    }
    if (at_kw("inl") || at_kw("inr")) {
      int w = peek().text == "inl" ? 1 : 2;
      ++pos;
      expect(Tok::LBracket, "'['");
      auto t = p_lty();
      expect(Tok::RBracket, "']'");
      return l_inj(w, t, p_l_atom());
    }
    if (at_kw("fold")) {
      ++pos;
      expect(Tok::LBracket, "'['");
      auto t = p_lty();
      expect(Tok::RBracket, "']'");
      return l_fold(t, p_l_atom());
    }
    if (at_kw("share")) {
      ++pos;
      return l_share(p_l_atom());
    }
    if (at_kw("copy")) {
      ++pos;
      return l_copy(p_l_atom());
    }
    if (at_kw("new")) {
      ++pos;
      return l_new(p_l_atom());
    }
    if (at_kw("free")) {
      ++pos;
      return l_free(p_l_atom());
    }
    if (at_kw("box")) {
      ++pos;
      return l_box(p_l_atom());
    }
    if (at_kw("unbox")) {
      ++pos;
      return l_unbox(p_l_atom());
    }
    if (at_kw("lump")) {
      ++pos;
      expect(Tok::LBracket, "'['");
      auto t = p_lty();
      expect(Tok::RBracket, "']'");
      return l_lumpop(t, p_l_atom());
    }
    if (at_kw("unlump")) {
      ++pos;
      expect(Tok::LBracket, "'['");
      auto t = p_lty();
      expect(Tok::RBracket, "']'");
      return l_unlumpop(t, p_l_atom());
    }
    if (at_kw("mark")) {
      ++pos;
      auto n = expect_ident("a marker name");
      return l_mark(n, p_l_atom());
    }
    return p_l_atom();
  }

  LEx p_l_atom() {
    LEx base = p_l_atom_core();
    while (at(Tok::At)) {
      ++pos;
      LEx cell = p_l_atom_core();
      // e @ c  ==  box (c, e)
      base = l_box(l_pair(cell, base));
    }
    return base;
  }

  LEx p_l_atom_core() {
    if (at(Tok::LParen)) {
      ++pos;
      if (at(Tok::RParen)) {
        ++pos;
        return l_unit();
      }
      auto e = p_l();
      if (at(Tok::Comma)) {
        ++pos;
        auto r = p_l();
        expect(Tok::RParen, "')'");
        return l_pair(e, r);
      }
      expect(Tok::RParen, "')'");
      return e;
    }
    if (at(Tok::Ident)) return l_var(eat().text);
    if (at_kw("LU")) {
      ++pos;
      expect(Tok::LBrace, "'{'");
      auto e = p_u();
      expect(Tok::RBrace, "'}'");
      return l_boundary(e);
    }
    fail("an expression");
  }

  // ---- items ---------------------------------------------------------------

  bool at_item_boundary() const {
    return at(Tok::End) || at_kw("def") || at_kw("type") || at_kw("main");
  }

  TermDef p_termdef(const std::string& name) {
    size_t start = pos;
    UEx u = nullptr;
    LEx l = nullptr;
    size_t upos = start, lpos = start;
    try {
      auto e = p_u();
      if (at_item_boundary()) {
        u = e;
        upos = pos;
      }
    } catch (ParseFail&) {
    }
    pos = start;
    try {
      auto e = p_l();
      if (at_item_boundary()) {
        l = e;
        lpos = pos;
      }
    } catch (ParseFail&) {
    }
    if (!u && !l) raise();
    // Both readings stop at the next item keyword, so when both succeed they
    // span the same tokens; keep the longer span if they ever disagree.
    if (u && l && upos != lpos) {
      if (upos > lpos)
        l = nullptr;
      else
        u = nullptr;
    }
    pos = u ? upos : lpos;
    return {name, u, l};
  }

  void p_typedef() {
    auto n = expect_ident("a type name");
    TypeAbbrev a;
    if (at(Tok::LParen)) {
      ++pos;
      a.params.push_back(expect_ident("a parameter"));
      while (at(Tok::Comma)) {
        ++pos;
        a.params.push_back(expect_ident("a parameter"));
      }
      expect(Tok::RParen, "')'");
    }
    expect(Tok::Equals, "'='");
    size_t start = pos;
    size_t upos = start, lpos = start;
    try {
      auto t = p_uty();
      if (at_item_boundary()) {
        a.u = t;
        upos = pos;
      }
    } catch (ParseFail&) {
    }
    pos = start;
    try {
      auto t = p_lty();
      if (at_item_boundary()) {
        a.l = t;
        lpos = pos;
      }
    } catch (ParseFail&) {
    }
    if (!a.u && !a.l) raise();
    if (a.u && a.l && upos != lpos) {
      if (upos > lpos)
        a.l = nullptr;
      else
        a.u = nullptr;
    }
    pos = a.u ? upos : lpos;
    abbrevs[n] = std::move(a);
  }

  SourceFile p_file() {
    SourceFile f;
    while (!at(Tok::End)) {
      if (at_kw("def")) {
        ++pos;
        auto n = expect_ident("a definition name");
        expect(Tok::Equals, "'='");
        f.defs.push_back(p_termdef(n));
      } else if (at_kw("type")) {
        ++pos;
        p_typedef();
      } else if (at_kw("main")) {
        ++pos;
        expect(Tok::Equals, "'='");
        auto e = p_u();
        if (!at_item_boundary()) fail("the end of the main item");
        f.main = e;
      } else {
        fail("'def', 'type', or 'main'");
      }
    }
    return f;
  }
};

} // namespace

SourceFile parse_file(const std::string& text) {
  Parser p(text);
  try {
    return p.p_file();
  } catch (ParseFail&) {
    p.raise();
  }
}

UEx parse_u(const std::string& text) {
  Parser p(text);
  try {
    auto e = p.p_u();
    if (!p.at(Tok::End)) p.fail("end of input");
    return e;
  } catch (ParseFail&) {
    p.raise();
  }
}

LEx parse_l(const std::string& text) {
  Parser p(text);
  try {
    auto e = p.p_l();
    if (!p.at(Tok::End)) p.fail("end of input");
    return e;
  } catch (ParseFail&) {
    p.raise();
  }
}

UTy parse_uty(const std::string& text) {
  Parser p(text);
  try {
    auto t = p.p_uty();
    if (!p.at(Tok::End)) p.fail("end of input");
    return t;
  } catch (ParseFail&) {
    p.raise();
  }
}

LTy parse_lty(const std::string& text) {
  Parser p(text);
  try {
    auto t = p.p_lty();
    if (!p.at(Tok::End)) p.fail("end of input");
    return t;
  } catch (ParseFail&) {
    p.raise();
  }
}

namespace {

// Inline the finished definitions into one reading of a body. A reading dies
// (returns null) when it uses a name the other sort owns; the caller decides
// whether any reading survived.
template <class Ex>
Ex inline_defs(Ex body, const std::vector<TermDef>& done,
               std::optional<Error>& saved) {
  if (!body) return nullptr;
  try {
    for (auto it = done.rbegin(); it != done.rend(); ++it)
      body = subst_name(body, it->name, it->u, it->l);
    for (auto& v : free_vars(body))
      throw Error(Errc::UnboundName, "'" + v + "' is not defined");
    return body;
  } catch (const Error& e) {
    if (e.code != Errc::UnboundName) throw;
    if (!saved) saved = e;
    return nullptr;
  }
}

} // namespace

Program elaborate(const SourceFile& f) {
  Program out;
  for (const auto& d : f.defs) {
    std::optional<Error> saved;
    TermDef nd{d.name, inline_defs(d.u, out.defs, saved),
               inline_defs(d.l, out.defs, saved)};
    if (!nd.u && !nd.l) {
      if (saved) throw *saved;
      throw Error(Errc::UnboundName, "definition '" + d.name + "' is empty");
    }
    out.defs.push_back(std::move(nd));
  }
  if (f.main) {
    UEx m = *f.main;
    for (auto it = out.defs.rbegin(); it != out.defs.rend(); ++it)
      m = subst_name(m, it->name, it->u, it->l);
    for (auto& v : free_vars(m))
      throw Error(Errc::UnboundName, "'" + v + "' is not defined");
    out.main = m;
  }
  return out;
}

} // namespace ul
