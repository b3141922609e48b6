#pragma once

#include <cctype>
#include <map>
#include <string>
#include <vector>

#include "fmw/error.hpp"
#include "fmw/formula.hpp"

namespace fmw {

namespace detail {

enum class Tok { Ident, Number, Sym, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

inline std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  static const std::vector<std::string> syms = {"<->", "->", "!=", "(", ")", "[", "]", "{", "}", ",", ".",
                                                ":",   ";",  "=",  "!", "&", "|", "<"};
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < s.size() && s[i] != '\n') ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      out.push_back({Tok::Ident, s.substr(i, j - i), i});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back({Tok::Number, s.substr(i, j - i), i});
      i = j;
      continue;
    }
    bool matched = false;
    for (const auto& sym : syms) {
      if (s.compare(i, sym.size(), sym) == 0) {
        out.push_back({Tok::Sym, sym, i});
        i += sym.size();
        matched = true;
        break;
      }
    }
    if (!matched) throw ParseError(std::string("unexpected character '") + c + "'", i);
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

inline bool is_upper_ident(const std::string& s) { return !s.empty() && std::isupper(static_cast<unsigned char>(s[0])); }
inline bool is_lower_ident(const std::string& s) { return !s.empty() && std::islower(static_cast<unsigned char>(s[0])); }

class Parser {
public:
  explicit Parser(const std::string& text) : toks_(tokenize(text)) {}

  Formula parse_all() {
    Formula f = formula();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return f;
  }

private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at_sym(const std::string& s, std::size_t k = 0) const { return peek(k).kind == Tok::Sym && peek(k).text == s; }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, peek().pos); }
  void expect(const std::string& s) {
    if (!at_sym(s)) fail("expected '" + s + "'" + (peek().kind == Tok::End ? " before end of input" : ", found '" + peek().text + "'"));
    ++pos_;
  }
  bool accept(const std::string& s) {
    if (!at_sym(s)) return false;
    ++pos_;
    return true;
  }

  Formula formula() {
    Formula f = implication();
    while (accept("<->")) f = iff(f, implication());
    return f;
  }
  Formula implication() {
    Formula f = disjunction();
    if (accept("->")) return implies(f, implication());
    return f;
  }
  Formula disjunction() {
    Formula f = conjunction();
    while (accept("|")) f = disj(f, conjunction());
    return f;
  }
  Formula conjunction() {
    Formula f = unary();
    while (accept("&")) f = conj(f, unary());
    return f;
  }

  // Recognizes "E x y . ", "A x .", and the glued forms "Ex." / "Az.".
  bool quantifier_ahead(Kind& kind, std::vector<SymId>& vars) {
    const Token& t = peek();
    if (t.kind != Tok::Ident || t.text.empty() || (t.text[0] != 'E' && t.text[0] != 'A')) return false;
    if (at_sym("(", 1)) return false;
    std::size_t k = 1;
    std::vector<std::string> names;
    if (t.text.size() > 1) {
      if (!is_variable_name(t.text.substr(1))) return false;
      names.push_back(t.text.substr(1));
    }
    while (peek(k).kind == Tok::Ident && is_variable_name(peek(k).text)) names.push_back(peek(k++).text);
    if (names.empty() || !at_sym(".", k)) return false;
    kind = t.text[0] == 'E' ? Kind::Exists : Kind::Forall;
    for (auto& n : names) vars.push_back(intern(n));
    pos_ += k + 1;
    return true;
  }

  Formula unary() {
    if (accept("!")) return neg(unary());
    Kind qk;
    std::vector<SymId> vars;
    if (quantifier_ahead(qk, vars)) {
      Formula body = formula();
      return qk == Kind::Exists ? exists(vars, body) : forall(vars, body);
    }
    return primary();
  }

  Term term() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      if (t.text != "0" && t.text != "1") fail("only the numerals 0 and 1 are terms");
      ++pos_;
      return Term::constant(t.text);
    }
    if (t.kind == Tok::Ident && is_lower_ident(t.text)) {
      ++pos_;
      return is_variable_name(t.text) ? Term::var(t.text) : Term::constant(t.text);
    }
    fail("expected a term");
  }

  Terms term_list() {
    Terms ts{term()};
    while (accept(",")) ts.push_back(term());
    return ts;
  }

  bool term_ahead() const {
    const Token& t = peek();
    return t.kind == Tok::Number || (t.kind == Tok::Ident && is_lower_ident(t.text));
  }

  Formula atom_after_terms(Terms lhs) {
    if (accept("=")) return eq(lhs, paren_or_single_terms(lhs.size()));
    if (accept("!=")) return neg(eq(lhs, paren_or_single_terms(lhs.size())));
    if (lhs.size() == 1 && accept("<")) return rel_checked(intern("<"), {lhs[0], term()}, peek().pos);
    fail("expected '=', '!=' or '<' after term");
  }

  Terms paren_or_single_terms(std::size_t n) {
    if (n == 1) return {term()};
    expect("(");
    Terms ts = term_list();
    expect(")");
    if (ts.size() != n) fail("tuple equality sides have different lengths");
    return ts;
  }

  Formula rel_checked(SymId r, Terms args, std::size_t at) {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      if (it->first == r) {
        if (it->second != args.size())
          throw ParseError("relation variable " + sym_name(r) + " has arity " + std::to_string(it->second) +
                               ", used with " + std::to_string(args.size()) + " arguments",
                           at);
        return rel(r, std::move(args));
      }
    }
    auto [it, fresh] = free_arity_.emplace(r, args.size());
    if (!fresh && it->second != args.size())
      throw ParseError("relation " + sym_name(r) + " used with inconsistent arities", at);
    return rel(r, std::move(args));
  }

  Formula primary() {
    const Token& t = peek();
    if (t.kind == Tok::Ident && (t.text == "T" || t.text == "F") && !at_sym("(", 1)) {
      ++pos_;
      return t.text == "T" ? top() : bottom();
    }
    if (at_sym("[")) return fixpoint();
    if (at_sym("(")) {
      std::size_t save = pos_;
      ++pos_;
      if (term_ahead()) {
        try {
          Terms ts = term_list();
          if (accept(")") && (at_sym("=") || at_sym("!="))) return atom_after_terms(ts);
        } catch (const ParseError&) {
        }
      }
      pos_ = save + 1;
      Formula f = formula();
      expect(")");
      return f;
    }
    if (t.kind == Tok::Ident && is_upper_ident(t.text)) {
      std::size_t at = t.pos;
      SymId r = intern(t.text);
      ++pos_;
      expect("(");
      Terms args = term_list();
      expect(")");
      return rel_checked(r, std::move(args), at);
    }
    if (term_ahead()) {
      Term a = term();
      return atom_after_terms({a});
    }
    if (t.kind == Tok::End) fail("unexpected end of input");
    fail("unexpected '" + t.text + "'");
  }

  std::vector<SymId> var_list() {
    std::vector<SymId> vs;
    do {
      const Token& t = peek();
      if (t.kind != Tok::Ident || !is_variable_name(t.text)) fail("expected a variable");
      vs.push_back(intern(t.text));
      ++pos_;
    } while (accept(","));
    return vs;
  }

  SymId rel_var_name() {
    const Token& t = peek();
    if (t.kind != Tok::Ident || !is_upper_ident(t.text) || t.text == "T" || t.text == "F")
      fail("expected a relation variable");
    ++pos_;
    return intern(t.text);
  }

  FixOp fix_op() {
    const Token& t = peek();
    FixOp op;
    if (t.text == "lfp") op = FixOp::LFP;
    else if (t.text == "ifp") op = FixOp::IFP;
    else if (t.text == "pfp") op = FixOp::PFP;
    else fail("expected lfp, ifp or pfp");
    ++pos_;
    return op;
  }

  Formula fixpoint() {
    std::size_t at = peek().pos;
    expect("[");
    FixOp op = fix_op();
    if (peek().kind == Tok::Ident && peek().text == "sim") {
      ++pos_;
      expect("{");
      std::vector<std::pair<SymId, std::vector<SymId>>> heads;
      std::vector<std::size_t> body_starts;
      // Component heads are needed in scope before the bodies are parsed.
      std::size_t save = pos_;
      int depth = 0;
      bool expect_head = true;
      while (peek().kind != Tok::End) {
        if (depth == 0 && expect_head) {
          SymId r = rel_var_name();
          expect("(");
          auto vs = var_list();
          expect(")");
          expect(":");
          heads.push_back({r, vs});
          body_starts.push_back(pos_);
          expect_head = false;
          continue;
        }
        if (at_sym("(") || at_sym("[") || at_sym("{")) ++depth;
        else if (at_sym(")") || at_sym("]")) --depth;
        else if (at_sym("}")) {
          if (depth == 0) break;
          --depth;
        } else if (depth == 0 && at_sym(";")) expect_head = true;
        ++pos_;
      }
      pos_ = save;
      for (auto& [r, vs] : heads) scopes_.push_back({r, vs.size()});
      std::vector<SimComponent> comps;
      for (std::size_t i = 0; i < heads.size(); ++i) {
        pos_ = body_starts[i];
        Formula body = formula();
        comps.push_back({heads[i].first, heads[i].second, body});
        if (i + 1 < heads.size()) expect(";");
      }
      for (std::size_t i = 0; i < heads.size(); ++i) scopes_.pop_back();
      expect("}");
      if (!(peek().kind == Tok::Ident && peek().text == "select")) fail("expected 'select'");
      ++pos_;
      SymId sel = rel_var_name();
      std::size_t idx = heads.size();
      for (std::size_t i = 0; i < heads.size(); ++i)
        if (heads[i].first == sel) idx = i;
      if (idx == heads.size()) fail("selected relation is not part of the system");
      expect("]");
      expect("(");
      Terms args = term_list();
      expect(")");
      try {
        return sim(op, std::move(comps), idx, std::move(args));
      } catch (const ParseError&) {
        throw;
      } catch (const Error& e) {
        throw ParseError(e.what(), at);
      }
    }
    SymId r = rel_var_name();
    expect("(");
    auto vs = var_list();
    expect(")");
    expect(":");
    scopes_.push_back({r, vs.size()});
    Formula body = formula();
    scopes_.pop_back();
    expect("]");
    expect("(");
    Terms args = term_list();
    expect(")");
    try {
      return fix(op, r, std::move(vs), std::move(body), std::move(args));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.what(), at);
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<std::pair<SymId, std::size_t>> scopes_;
  std::map<SymId, std::size_t> free_arity_;
};

} // namespace detail

/// Parses the ASCII formula syntax; throws ParseError with the byte offset on failure.
inline Formula parse(const std::string& text) { return detail::Parser(text).parse_all(); }

} // namespace fmw
