#ifndef SATKIT_SPECLANG_AST_HPP
#define SATKIT_SPECLANG_AST_HPP

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "satkit/util/rational.hpp"

namespace satkit::spec {

enum class ExprKind {
  NumLit,
  BoolLit,
  StrLit,
  SymbolRef,
  Call,
  BinOp,
  Logic,
  ForAll,
  Count,
  NextOf,
  TuplePair,
};

enum class BinOpKind { Add, Sub, Mul, Div, Eq, Ne, Lt, Le, Gt, Ge };
enum class LogicKind { And, Or, Not, Implies };

struct Binder {
  std::string var;
  std::string domain;  // empty: the implicit universe of known constants
  bool operator==(const Binder&) const = default;
};

/// One expression node. A single struct (rather than a class hierarchy) keeps
/// the tree a plain value type; `kind` selects which fields are meaningful.
struct Expr {
  ExprKind kind = ExprKind::NumLit;
  Rat num;                    // NumLit
  bool bval = false;          // BoolLit
  std::string sym;            // SymbolRef name / Call callee / StrLit body
  BinOpKind bin_op = BinOpKind::Add;
  LogicKind logic_op = LogicKind::And;
  std::vector<Expr> args;     // Call args, Logic args, BinOp {lhs,rhs},
                              // TuplePair {a,b}, ForAll/Count/NextOf {body}
  std::vector<Binder> binders;
  int line = 0;

  static Expr number(Rat v) {
    Expr e;
    e.kind = ExprKind::NumLit;
    e.num = std::move(v);
    return e;
  }
  static Expr boolean(bool b) {
    Expr e;
    e.kind = ExprKind::BoolLit;
    e.bval = b;
    return e;
  }
  static Expr str(std::string s) {
    Expr e;
    e.kind = ExprKind::StrLit;
    e.sym = std::move(s);
    return e;
  }
  static Expr ref(std::string name) {
    Expr e;
    e.kind = ExprKind::SymbolRef;
    e.sym = std::move(name);
    return e;
  }
  static Expr call(std::string fn, std::vector<Expr> args) {
    Expr e;
    e.kind = ExprKind::Call;
    e.sym = std::move(fn);
    e.args = std::move(args);
    return e;
  }
  static Expr binop(BinOpKind op, Expr lhs, Expr rhs) {
    Expr e;
    e.kind = ExprKind::BinOp;
    e.bin_op = op;
    e.args = {std::move(lhs), std::move(rhs)};
    return e;
  }
  static Expr logic(LogicKind op, std::vector<Expr> args) {
    Expr e;
    e.kind = ExprKind::Logic;
    e.logic_op = op;
    e.args = std::move(args);
    return e;
  }

  bool structurally_equal(const Expr& o) const {
    if (kind != o.kind || sym != o.sym || binders != o.binders) return false;
    if (kind == ExprKind::NumLit && num != o.num) return false;
    if (kind == ExprKind::BoolLit && bval != o.bval) return false;
    if (kind == ExprKind::BinOp && bin_op != o.bin_op) return false;
    if (kind == ExprKind::Logic && logic_op != o.logic_op) return false;
    if (args.size() != o.args.size()) return false;
    for (size_t i = 0; i < args.size(); ++i)
      if (!args[i].structurally_equal(o.args[i])) return false;
    return true;
  }
};

enum class StmtKind { VarDecl, DomainDecl, FuncDecl, Constraint, SolveDirective, Comment };

struct Statement {
  StmtKind kind = StmtKind::Comment;
  std::string name;                    // VarDecl / DomainDecl / FuncDecl
  std::vector<std::string> members;    // DomainDecl
  std::vector<std::string> arg_sorts;  // FuncDecl
  std::string ret_sort;                // FuncDecl
  Expr expr;                           // Constraint / SolveDirective
  std::string label;                   // SolveDirective option tag ("A".."E")
  std::string text;                    // Comment body (no leading '#')
  int line = 0;

  bool structurally_equal(const Statement& o) const {
    return kind == o.kind && name == o.name && members == o.members &&
           arg_sorts == o.arg_sorts && ret_sort == o.ret_sort && label == o.label &&
           text == o.text && expr.structurally_equal(o.expr);
  }
};

struct SpecAst {
  std::vector<Statement> statements;

  bool structurally_equal(const SpecAst& o) const {
    if (statements.size() != o.statements.size()) return false;
    for (size_t i = 0; i < statements.size(); ++i)
      if (!statements[i].structurally_equal(o.statements[i])) return false;
    return true;
  }
};

/// A raw specification document: every physical line classified as either a
/// natural-language comment or a formal code line.
struct RawLine {
  bool is_comment = false;
  std::string text;  // comment body for comments, raw source for code
  int line_no = 0;
};

struct SpecDocument {
  std::vector<RawLine> lines;

  /// Splits text into lines and classifies each one. A line whose first
  /// non-whitespace byte is '#' is a Comment; blank lines count as empty
  /// comments so that the classification partitions the document.
  static SpecDocument from_text(const std::string& text) {
    SpecDocument doc;
    size_t start = 0;
    int line_no = 1;
    auto emit = [&](const std::string& raw) {
      size_t k = raw.find_first_not_of(" \t\r");
      RawLine l;
      l.line_no = line_no++;
      if (k == std::string::npos) {
        l.is_comment = true;
        l.text = "";
      } else if (raw[k] == '#') {
        l.is_comment = true;
        std::string body = raw.substr(k + 1);
        while (!body.empty() && (body.back() == '\r')) body.pop_back();
        l.text = body;
      } else {
        std::string body = raw;
        while (!body.empty() && (body.back() == '\r')) body.pop_back();
        l.text = body;
      }
      doc.lines.push_back(std::move(l));
    };
    for (size_t i = 0; i <= text.size(); ++i) {
      if (i == text.size() || text[i] == '\n') {
        emit(text.substr(start, i - start));
        start = i + 1;
      }
    }
    // A trailing newline does not introduce an extra empty line.
    if (!doc.lines.empty() && !text.empty() && text.back() == '\n' &&
        doc.lines.back().text.empty() && doc.lines.back().is_comment) {
      doc.lines.pop_back();
    }
    return doc;
  }
};

// --- surface-syntax printing -------------------------------------------------

namespace detail {

inline int precedence(const Expr& e) {
  if (e.kind == ExprKind::BinOp) {
    switch (e.bin_op) {
      case BinOpKind::Eq:
      case BinOpKind::Ne:
      case BinOpKind::Lt:
      case BinOpKind::Le:
      case BinOpKind::Gt:
      case BinOpKind::Ge:
        return 1;
      case BinOpKind::Add:
      case BinOpKind::Sub:
        return 2;
      case BinOpKind::Mul:
      case BinOpKind::Div:
        return 3;
    }
  }
  if (e.kind == ExprKind::Logic) return e.logic_op == LogicKind::Not ? 4 : 0;
  return 5;
}

inline const char* binop_text(BinOpKind op) {
  switch (op) {
    case BinOpKind::Add: return "+";
    case BinOpKind::Sub: return "-";
    case BinOpKind::Mul: return "*";
    case BinOpKind::Div: return "/";
    case BinOpKind::Eq: return "==";
    case BinOpKind::Ne: return "!=";
    case BinOpKind::Lt: return "<";
    case BinOpKind::Le: return "<=";
    case BinOpKind::Gt: return ">";
    case BinOpKind::Ge: return ">=";
  }
  return "?";
}

inline const char* logic_name(LogicKind op) {
  switch (op) {
    case LogicKind::And: return "And";
    case LogicKind::Or: return "Or";
    case LogicKind::Not: return "Not";
    case LogicKind::Implies: return "Implies";
  }
  return "?";
}

}  // namespace detail

inline std::string print_expr(const Expr& e) {
  using detail::precedence;
  auto child = [&](const Expr& c, int parent_prec) {
    std::string s = print_expr(c);
    if (precedence(c) < parent_prec) return "(" + s + ")";
    return s;
  };
  switch (e.kind) {
    case ExprKind::NumLit: {
      if (e.num < 0) return "(-" + rat_to_string(-e.num) + ")";
      return rat_to_string(e.num);
    }
    case ExprKind::BoolLit:
      return e.bval ? "True" : "False";
    case ExprKind::StrLit:
      return "'" + e.sym + "'";
    case ExprKind::SymbolRef:
      return e.sym;
    case ExprKind::Call: {
      std::string s = e.sym + "(";
      for (size_t i = 0; i < e.args.size(); ++i) {
        if (i) s += ", ";
        s += print_expr(e.args[i]);
      }
      return s + ")";
    }
    case ExprKind::BinOp: {
      int p = precedence(e);
      return child(e.args[0], p) + " " + detail::binop_text(e.bin_op) + " " +
             child(e.args[1], p + 1);
    }
    case ExprKind::Logic: {
      std::string s = std::string(detail::logic_name(e.logic_op)) + "(";
      for (size_t i = 0; i < e.args.size(); ++i) {
        if (i) s += ", ";
        s += print_expr(e.args[i]);
      }
      return s + ")";
    }
    case ExprKind::ForAll: {
      std::string s = "ForAll([";
      for (size_t i = 0; i < e.binders.size(); ++i) {
        if (i) s += ", ";
        s += e.binders[i].var;
        if (!e.binders[i].domain.empty()) s += ":" + e.binders[i].domain;
      }
      return s + "], " + print_expr(e.args[0]) + ")";
    }
    case ExprKind::Count: {
      std::string s = "Count([";
      for (size_t i = 0; i < e.binders.size(); ++i) {
        if (i) s += ", ";
        s += e.binders[i].var + ":" + e.binders[i].domain;
      }
      return s + "], " + print_expr(e.args[0]) + ")";
    }
    case ExprKind::NextOf:
      return "next(" + e.binders[0].var + ":" + e.binders[0].domain + ", " +
             print_expr(e.args[0]) + ")";
    case ExprKind::TuplePair:
      return "(" + print_expr(e.args[0]) + ", " + print_expr(e.args[1]) + ")";
  }
  return "?";
}

inline std::string print_statement(const Statement& st) {
  switch (st.kind) {
    case StmtKind::VarDecl:
      return st.name + " = Variable()";
    case StmtKind::DomainDecl: {
      std::string s = st.name + " = [";
      for (size_t i = 0; i < st.members.size(); ++i) {
        if (i) s += ", ";
        s += st.members[i];
      }
      return s + "]";
    }
    case StmtKind::FuncDecl: {
      std::string s = st.name + " = Function(";
      for (size_t i = 0; i < st.arg_sorts.size(); ++i) {
        if (i) s += ", ";
        s += st.arg_sorts[i];
      }
      if (!st.arg_sorts.empty()) s += ", ";
      return s + st.ret_sort + ")";
    }
    case StmtKind::Constraint: {
      const Expr& e = st.expr;
      if (e.kind == ExprKind::BinOp && e.bin_op == BinOpKind::Eq)
        return print_expr(e.args[0]) + " = " + print_expr(e.args[1]);
      return print_expr(e);
    }
    case StmtKind::SolveDirective: {
      std::string s = "solve(" + print_expr(st.expr) + ")";
      if (!st.label.empty()) s += " # (" + st.label + ")";
      return s;
    }
    case StmtKind::Comment:
      return st.text.empty() ? "" : "#" + st.text;
  }
  return "";
}

/// Prints an AST back to surface syntax. Reparsing the result yields a
/// structurally identical AST (covered by a property test).
inline std::string print_spec(const SpecAst& ast) {
  std::string out;
  for (const auto& st : ast.statements) {
    out += print_statement(st);
    out += "\n";
  }
  return out;
}

// --- JSON serialization (stable field names, used by --dump-ast) -------------

inline nlohmann::ordered_json expr_to_json(const Expr& e) {
  nlohmann::ordered_json j;
  switch (e.kind) {
    case ExprKind::NumLit:
      j["node"] = "num";
      j["value"] = rat_to_string(e.num);
      break;
    case ExprKind::BoolLit:
      j["node"] = "bool";
      j["value"] = e.bval;
      break;
    case ExprKind::StrLit:
      j["node"] = "str";
      j["value"] = e.sym;
      break;
    case ExprKind::SymbolRef:
      j["node"] = "ref";
      j["name"] = e.sym;
      break;
    case ExprKind::Call:
      j["node"] = "call";
      j["fn"] = e.sym;
      break;
    case ExprKind::BinOp:
      j["node"] = "binop";
      j["op"] = detail::binop_text(e.bin_op);
      break;
    case ExprKind::Logic:
      j["node"] = "logic";
      j["op"] = detail::logic_name(e.logic_op);
      break;
    case ExprKind::ForAll:
      j["node"] = "forall";
      break;
    case ExprKind::Count:
      j["node"] = "count";
      break;
    case ExprKind::NextOf:
      j["node"] = "next";
      break;
    case ExprKind::TuplePair:
      j["node"] = "pair";
      break;
  }
  if (!e.binders.empty()) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& b : e.binders) arr.push_back({{"var", b.var}, {"domain", b.domain}});
    j["binders"] = arr;
  }
  if (!e.args.empty()) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& a : e.args) arr.push_back(expr_to_json(a));
    j["args"] = arr;
  }
  return j;
}

inline Expr expr_from_json(const nlohmann::json& j);

inline std::vector<Expr> args_from_json(const nlohmann::json& j) {
  std::vector<Expr> out;
  if (j.contains("args"))
    for (const auto& a : j["args"]) out.push_back(expr_from_json(a));
  return out;
}

inline Expr expr_from_json(const nlohmann::json& j) {
  const std::string node = j.at("node").get<std::string>();
  Expr e;
  if (node == "num") {
    auto v = parse_rational(j.at("value").get<std::string>());
    if (!v) throw std::runtime_error("bad rational in ast json");
    return Expr::number(*v);
  }
  if (node == "bool") return Expr::boolean(j.at("value").get<bool>());
  if (node == "str") return Expr::str(j.at("value").get<std::string>());
  if (node == "ref") return Expr::ref(j.at("name").get<std::string>());
  if (node == "call") return Expr::call(j.at("fn").get<std::string>(), args_from_json(j));
  auto binders = [&]() {
    std::vector<Binder> out;
    if (j.contains("binders"))
      for (const auto& b : j["binders"])
        out.push_back(Binder{b.at("var").get<std::string>(), b.at("domain").get<std::string>()});
    return out;
  };
  if (node == "binop") {
    const std::string op = j.at("op").get<std::string>();
    static const std::pair<const char*, BinOpKind> ops[] = {
        {"+", BinOpKind::Add}, {"-", BinOpKind::Sub}, {"*", BinOpKind::Mul},
        {"/", BinOpKind::Div}, {"==", BinOpKind::Eq}, {"!=", BinOpKind::Ne},
        {"<", BinOpKind::Lt},  {"<=", BinOpKind::Le}, {">", BinOpKind::Gt},
        {">=", BinOpKind::Ge}};
    for (auto& [t, k] : ops)
      if (op == t) {
        auto a = args_from_json(j);
        return Expr::binop(k, a.at(0), a.at(1));
      }
    throw std::runtime_error("bad binop in ast json");
  }
  if (node == "logic") {
    const std::string op = j.at("op").get<std::string>();
    LogicKind k = op == "And"       ? LogicKind::And
                  : op == "Or"      ? LogicKind::Or
                  : op == "Not"     ? LogicKind::Not
                                    : LogicKind::Implies;
    return Expr::logic(k, args_from_json(j));
  }
  if (node == "forall" || node == "count" || node == "next") {
    e.kind = node == "forall" ? ExprKind::ForAll
             : node == "count" ? ExprKind::Count
                               : ExprKind::NextOf;
    e.binders = binders();
    e.args = args_from_json(j);
    return e;
  }
  if (node == "pair") {
    e.kind = ExprKind::TuplePair;
    e.args = args_from_json(j);
    return e;
  }
  throw std::runtime_error("unknown ast node kind: " + node);
}

inline nlohmann::ordered_json ast_to_json(const SpecAst& ast) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& st : ast.statements) {
    nlohmann::ordered_json j;
    switch (st.kind) {
      case StmtKind::VarDecl:
        j["stmt"] = "var";
        j["name"] = st.name;
        break;
      case StmtKind::DomainDecl:
        j["stmt"] = "domain";
        j["name"] = st.name;
        j["members"] = st.members;
        break;
      case StmtKind::FuncDecl:
        j["stmt"] = "func";
        j["name"] = st.name;
        j["args"] = st.arg_sorts;
        j["ret"] = st.ret_sort;
        break;
      case StmtKind::Constraint:
        j["stmt"] = "constraint";
        j["expr"] = expr_to_json(st.expr);
        break;
      case StmtKind::SolveDirective:
        j["stmt"] = "solve";
        j["expr"] = expr_to_json(st.expr);
        if (!st.label.empty()) j["label"] = st.label;
        break;
      case StmtKind::Comment:
        j["stmt"] = "comment";
        j["text"] = st.text;
        break;
    }
    j["line"] = st.line;
    arr.push_back(std::move(j));
  }
  return nlohmann::ordered_json{{"statements", std::move(arr)}};
}

inline SpecAst ast_from_json(const nlohmann::json& root) {
  SpecAst ast;
  for (const auto& j : root.at("statements")) {
    Statement st;
    const std::string kind = j.at("stmt").get<std::string>();
    st.line = j.value("line", 0);
    if (kind == "var") {
      st.kind = StmtKind::VarDecl;
      st.name = j.at("name").get<std::string>();
    } else if (kind == "domain") {
      st.kind = StmtKind::DomainDecl;
      st.name = j.at("name").get<std::string>();
      st.members = j.at("members").get<std::vector<std::string>>();
    } else if (kind == "func") {
      st.kind = StmtKind::FuncDecl;
      st.name = j.at("name").get<std::string>();
      st.arg_sorts = j.at("args").get<std::vector<std::string>>();
      st.ret_sort = j.at("ret").get<std::string>();
    } else if (kind == "constraint") {
      st.kind = StmtKind::Constraint;
      st.expr = expr_from_json(j.at("expr"));
    } else if (kind == "solve") {
      st.kind = StmtKind::SolveDirective;
      st.expr = expr_from_json(j.at("expr"));
      st.label = j.value("label", "");
    } else if (kind == "comment") {
      st.kind = StmtKind::Comment;
      st.text = j.at("text").get<std::string>();
    } else {
      throw std::runtime_error("unknown statement kind: " + kind);
    }
    ast.statements.push_back(std::move(st));
  }
  return ast;
}

}  // namespace satkit::spec

#endif  // SATKIT_SPECLANG_AST_HPP
