#ifndef SATKIT_SPECLANG_PARSER_HPP
#define SATKIT_SPECLANG_PARSER_HPP

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "satkit/speclang/ast.hpp"
#include "satkit/speclang/token.hpp"

namespace satkit::spec {

struct ParseError : std::runtime_error {
  int line;
  std::string reason;
  ParseError(int line_, std::string reason_)
      : std::runtime_error("parse error at line " + std::to_string(line_) + ": " + reason_),
        line(line_), reason(std::move(reason_)) {}
};

struct NoQueryError : std::runtime_error {
  NoQueryError() : std::runtime_error("specification contains no solve directive") {}
};

namespace detail {

/// Recursive-descent parser for a single code line.
///
/// Connective precedence follows the host-language reading of the prompts:
/// or < and < not < comparison < additive < multiplicative < unary.
class LineParser {
 public:
  LineParser(std::vector<Token> toks, int line) : toks_(std::move(toks)), line_(line) {}

  Statement parse_statement() {
    Statement st;
    st.line = line_;
    // return <expr>  -- accepted as a solve marker so that straight-line
    // program completions can be replayed through the same pipeline.
    if (at(Tok::Ident) && peek().text == "return") {
      ++pos_;
      bool parens = accept(Tok::LParen);
      st.kind = StmtKind::SolveDirective;
      st.expr = parse_expr();
      if (parens) expect(Tok::RParen, "expected ')'");
      st.label = trailing_label();
      end_of_line();
      return st;
    }
    // name = [A, B, ...]
    if (toks_.size() >= 3 && at(Tok::Ident) && toks_[pos_ + 1].kind == Tok::Assign &&
        toks_[pos_ + 2].kind == Tok::LBracket) {
      st.kind = StmtKind::DomainDecl;
      st.name = peek().text;
      pos_ += 3;
      std::set<std::string> seen;
      while (!accept(Tok::RBracket)) {
        if (!at(Tok::Ident)) fail("domain members must be identifiers");
        if (!seen.insert(peek().text).second)
          fail("duplicate domain member '" + peek().text + "'");
        st.members.push_back(peek().text);
        ++pos_;
        if (!at(Tok::RBracket)) expect(Tok::Comma, "expected ',' or ']'");
      }
      if (st.members.empty()) fail("domain must have at least one member");
      trailing_label();
      end_of_line();
      return st;
    }
    Expr first = parse_expr();
    if (accept(Tok::Assign)) {
      if (first.kind == ExprKind::SymbolRef && at(Tok::Ident) && peek().text == "Variable" &&
          pos_ + 2 < toks_.size() && toks_[pos_ + 1].kind == Tok::LParen &&
          toks_[pos_ + 2].kind == Tok::RParen) {
        pos_ += 3;
        st.kind = StmtKind::VarDecl;
        st.name = first.sym;
        trailing_label();
        end_of_line();
        return st;
      }
      if (first.kind == ExprKind::SymbolRef && at(Tok::Ident) && peek().text == "Function") {
        ++pos_;
        expect(Tok::LParen, "expected '(' after Function");
        std::vector<std::string> sorts;
        while (!accept(Tok::RParen)) {
          if (!at(Tok::Ident)) fail("Function sorts must be identifiers");
          sorts.push_back(peek().text);
          ++pos_;
          if (!at(Tok::RParen)) expect(Tok::Comma, "expected ',' or ')'");
        }
        if (sorts.empty()) fail("Function needs a return sort");
        st.kind = StmtKind::FuncDecl;
        st.name = first.sym;
        st.ret_sort = sorts.back();
        sorts.pop_back();
        st.arg_sorts = std::move(sorts);
        trailing_label();
        end_of_line();
        return st;
      }
      Expr rhs = parse_expr();
      st.kind = StmtKind::Constraint;
      st.expr = Expr::binop(BinOpKind::Eq, std::move(first), std::move(rhs));
      st.expr.line = line_;
      trailing_label();
      end_of_line();
      return st;
    }
    if (first.kind == ExprKind::Call && first.sym == "solve") {
      if (first.args.size() != 1) fail("solve takes exactly one expression");
      st.kind = StmtKind::SolveDirective;
      st.expr = std::move(first.args[0]);
      st.label = trailing_label();
      end_of_line();
      return st;
    }
    st.kind = StmtKind::Constraint;
    st.expr = std::move(first);
    st.expr.line = line_;
    trailing_label();
    end_of_line();
    return st;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  bool at(Tok k) const { return toks_[pos_].kind == k; }
  bool accept(Tok k) {
    if (at(k)) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(Tok k, const std::string& msg) {
    if (!accept(k)) fail(msg);
  }
  [[noreturn]] void fail(const std::string& msg) { throw ParseError(line_, msg); }

  std::string trailing_label() {
    if (!at(Tok::Comment)) return "";
    const std::string& t = peek().text;
    ++pos_;
    // option tag convention: "# (E)"
    size_t a = t.find_first_not_of(" \t");
    if (a == std::string::npos || t[a] != '(') return "";
    size_t b = t.find(')', a);
    if (b == std::string::npos || b != a + 2) return "";
    char c = t[a + 1];
    if (!detail_isalpha(c)) return "";
    if (t.find_first_not_of(" \t", b + 1) != std::string::npos) return "";
    return std::string(1, c);
  }
  static bool detail_isalpha(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  }

  void end_of_line() {
    if (at(Tok::Comment)) ++pos_;
    if (!at(Tok::End)) fail("unexpected trailing tokens");
  }

  Expr parse_expr() { return parse_or(); }

  Expr parse_or() {
    Expr lhs = parse_and();
    while (at(Tok::Ident) && peek().text == "or") {
      ++pos_;
      Expr rhs = parse_and();
      lhs = Expr::logic(LogicKind::Or, {std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  Expr parse_and() {
    Expr lhs = parse_not();
    while (at(Tok::Ident) && peek().text == "and") {
      ++pos_;
      Expr rhs = parse_not();
      lhs = Expr::logic(LogicKind::And, {std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  Expr parse_not() {
    if (at(Tok::Ident) && peek().text == "not") {
      ++pos_;
      return Expr::logic(LogicKind::Not, {parse_not()});
    }
    return parse_cmp();
  }

  Expr parse_cmp() {
    Expr lhs = parse_add();
    auto op = [&]() -> std::optional<BinOpKind> {
      switch (peek().kind) {
        case Tok::Eq: return BinOpKind::Eq;
        case Tok::Ne: return BinOpKind::Ne;
        case Tok::Lt: return BinOpKind::Lt;
        case Tok::Le: return BinOpKind::Le;
        case Tok::Gt: return BinOpKind::Gt;
        case Tok::Ge: return BinOpKind::Ge;
        default: return std::nullopt;
      }
    }();
    if (!op) return lhs;
    ++pos_;
    Expr rhs = parse_add();
    return Expr::binop(*op, std::move(lhs), std::move(rhs));
  }

  Expr parse_add() {
    Expr lhs = parse_mul();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      BinOpKind op = at(Tok::Plus) ? BinOpKind::Add : BinOpKind::Sub;
      ++pos_;
      Expr rhs = parse_mul();
      lhs = Expr::binop(op, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Expr parse_mul() {
    Expr lhs = parse_unary();
    while (at(Tok::Star) || at(Tok::Slash)) {
      BinOpKind op = at(Tok::Star) ? BinOpKind::Mul : BinOpKind::Div;
      ++pos_;
      Expr rhs = parse_unary();
      lhs = Expr::binop(op, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Expr parse_unary() {
    if (accept(Tok::Minus)) {
      Expr inner = parse_unary();
      if (inner.kind == ExprKind::NumLit) {
        inner.num = -inner.num;
        return inner;
      }
      return Expr::binop(BinOpKind::Sub, Expr::number(Rat(0)), std::move(inner));
    }
    if (accept(Tok::Plus)) return parse_unary();
    return parse_primary();
  }

  std::vector<Binder> parse_bracket_binders() {
    expect(Tok::LBracket, "expected '['");
    std::vector<Binder> out;
    while (!accept(Tok::RBracket)) {
      if (!at(Tok::Ident)) fail("binder must be an identifier");
      Binder b;
      b.var = peek().text;
      ++pos_;
      if (accept(Tok::Colon)) {
        if (!at(Tok::Ident)) fail("binder domain must be an identifier");
        b.domain = peek().text;
        ++pos_;
      }
      out.push_back(std::move(b));
      if (!at(Tok::RBracket)) expect(Tok::Comma, "expected ',' or ']'");
    }
    if (out.empty()) fail("binder list is empty");
    return out;
  }

  Expr parse_primary() {
    if (at(Tok::Number)) {
      Expr e = Expr::number(peek().num);
      ++pos_;
      return e;
    }
    if (at(Tok::String)) {
      Expr e = Expr::str(peek().text);
      ++pos_;
      return e;
    }
    if (accept(Tok::LParen)) {
      Expr first = parse_expr();
      if (accept(Tok::Comma)) {
        Expr second = parse_expr();
        expect(Tok::RParen, "expected ')'");
        Expr e;
        e.kind = ExprKind::TuplePair;
        e.args = {std::move(first), std::move(second)};
        return e;
      }
      expect(Tok::RParen, "expected ')'");
      return first;
    }
    if (!at(Tok::Ident)) fail("expected expression");
    std::string name = peek().text;
    ++pos_;
    if (name == "True" || name == "true") return Expr::boolean(true);
    if (name == "False" || name == "false") return Expr::boolean(false);

    if (!at(Tok::LParen)) return Expr::ref(name);

    if (name == "ForAll" || name == "Count") {
      ++pos_;  // '('
      Expr e;
      e.kind = name == "ForAll" ? ExprKind::ForAll : ExprKind::Count;
      e.binders = parse_bracket_binders();
      if (e.kind == ExprKind::Count)
        for (const auto& b : e.binders)
          if (b.domain.empty()) fail("Count binder needs a domain");
      expect(Tok::Comma, "expected ',' after binders");
      e.args.push_back(parse_expr());
      expect(Tok::RParen, "expected ')'");
      return e;
    }
    if (name == "next") {
      ++pos_;  // '('
      Expr e;
      e.kind = ExprKind::NextOf;
      if (at(Tok::LBracket)) {
        e.binders = parse_bracket_binders();
      } else {
        if (!at(Tok::Ident)) fail("next binder must be an identifier");
        Binder b;
        b.var = peek().text;
        ++pos_;
        expect(Tok::Colon, "next binder needs a ':domain'");
        if (!at(Tok::Ident)) fail("next binder domain must be an identifier");
        b.domain = peek().text;
        ++pos_;
        e.binders.push_back(std::move(b));
      }
      if (e.binders.size() != 1 || e.binders[0].domain.empty())
        fail("next takes exactly one 'var:domain' binder");
      expect(Tok::Comma, "expected ',' after binder");
      e.args.push_back(parse_expr());
      expect(Tok::RParen, "expected ')'");
      return e;
    }

    ++pos_;  // '('
    std::vector<Expr> args;
    while (!accept(Tok::RParen)) {
      args.push_back(parse_expr());
      if (!at(Tok::RParen)) expect(Tok::Comma, "expected ',' or ')'");
    }
    if (name == "And" || name == "Or") {
      if (args.size() < 2) fail(name + " takes at least two arguments");
      return Expr::logic(name == "And" ? LogicKind::And : LogicKind::Or, std::move(args));
    }
    if (name == "Not") {
      if (args.size() != 1) fail("Not takes exactly one argument");
      return Expr::logic(LogicKind::Not, std::move(args));
    }
    if (name == "Implies") {
      if (args.size() != 2) fail("Implies takes exactly two arguments");
      return Expr::logic(LogicKind::Implies, std::move(args));
    }
    return Expr::call(name, std::move(args));
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
  int line_;
};

}  // namespace detail

/// Parses a classified document into an AST. Each code line maps to exactly
/// one statement; comments are preserved in order. All lexer failures are
/// reported as ParseError so that callers see a single error type for
/// untrusted input.
inline SpecAst parse_spec(const SpecDocument& doc) {
  SpecAst ast;
  bool saw_anchor = false;  // a Constraint or VarDecl seen so far
  for (const auto& raw : doc.lines) {
    if (raw.is_comment) {
      Statement st;
      st.kind = StmtKind::Comment;
      st.text = raw.text;
      st.line = raw.line_no;
      ast.statements.push_back(std::move(st));
      continue;
    }
    std::vector<Token> toks;
    try {
      toks = tokenize(raw.text);
    } catch (const LexError& e) {
      throw ParseError(raw.line_no, std::string("unrecognized input near '") + e.snippet + "'");
    }
    detail::LineParser p(std::move(toks), raw.line_no);
    Statement st = p.parse_statement();
    if (st.kind == StmtKind::SolveDirective && !saw_anchor)
      throw ParseError(raw.line_no, "solve directive before any constraint or variable");
    if ((st.kind == StmtKind::VarDecl || st.kind == StmtKind::DomainDecl ||
         st.kind == StmtKind::FuncDecl) &&
        st.name.empty())
      throw ParseError(raw.line_no, "declaration needs a name");
    if (st.kind == StmtKind::Constraint || st.kind == StmtKind::VarDecl) saw_anchor = true;
    ast.statements.push_back(std::move(st));
  }
  return ast;
}

inline SpecAst parse_spec_text(const std::string& text) {
  return parse_spec(SpecDocument::from_text(text));
}

/// The formal content of a parsed specification: declarations as metadata,
/// constraints and queries in source order.
struct FormalSpec {
  std::vector<Statement> declarations;           // VarDecl/DomainDecl/FuncDecl
  std::vector<Expr> constraints;
  std::vector<std::pair<Expr, std::string>> queries;  // (expr, option label)
  // Query aliases folded out of the constraint list: `result = e` followed by
  // solve(result) contributes the alias result -> e instead of a constraint.
  std::vector<std::pair<std::string, Expr>> aliases;
};

namespace detail {

inline bool occurs(const Expr& e, const std::string& name) {
  if (e.kind == ExprKind::SymbolRef && e.sym == name) return true;
  for (const auto& a : e.args)
    if (occurs(a, name)) return true;
  return false;
}

}  // namespace detail

inline FormalSpec extract_formal(const SpecAst& ast) {
  FormalSpec out;
  std::vector<Expr> constraints;
  for (const auto& st : ast.statements) {
    switch (st.kind) {
      case StmtKind::Comment:
        break;
      case StmtKind::VarDecl:
      case StmtKind::DomainDecl:
      case StmtKind::FuncDecl:
        out.declarations.push_back(st);
        break;
      case StmtKind::Constraint:
        constraints.push_back(st.expr);
        break;
      case StmtKind::SolveDirective:
        out.queries.emplace_back(st.expr, st.label);
        break;
    }
  }
  if (out.queries.empty()) throw NoQueryError();

  // Fold pure query aliases: a constraint `n = rhs` where n is queried as a
  // bare reference and never used anywhere else is a name for the query, not
  // a constraint on the model.
  std::set<std::string> alias_candidates;
  for (const auto& [q, label] : out.queries)
    if (q.kind == ExprKind::SymbolRef) alias_candidates.insert(q.sym);
  std::vector<bool> drop(constraints.size(), false);
  for (const auto& name : alias_candidates) {
    int def_index = -1;
    int def_count = 0;
    for (size_t i = 0; i < constraints.size(); ++i) {
      const Expr& c = constraints[i];
      if (c.kind == ExprKind::BinOp && c.bin_op == BinOpKind::Eq &&
          c.args[0].kind == ExprKind::SymbolRef && c.args[0].sym == name) {
        ++def_count;
        def_index = static_cast<int>(i);
      }
    }
    if (def_count != 1) continue;
    const Expr& rhs = constraints[def_index].args[1];
    if (detail::occurs(rhs, name)) continue;
    bool used_elsewhere = false;
    for (size_t i = 0; i < constraints.size(); ++i) {
      if (static_cast<int>(i) == def_index) continue;
      if (detail::occurs(constraints[i], name)) used_elsewhere = true;
    }
    for (const auto& [q, label] : out.queries)
      if (!(q.kind == ExprKind::SymbolRef && q.sym == name) && detail::occurs(q, name))
        used_elsewhere = true;
    if (used_elsewhere) continue;
    drop[def_index] = true;
    out.aliases.emplace_back(name, rhs);
  }
  for (size_t i = 0; i < constraints.size(); ++i)
    if (!drop[i]) out.constraints.push_back(std::move(constraints[i]));
  return out;
}

}  // namespace satkit::spec

#endif  // SATKIT_SPECLANG_PARSER_HPP
