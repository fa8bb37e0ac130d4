#ifndef SATKIT_LOGIC_CANONICAL_HPP
#define SATKIT_LOGIC_CANONICAL_HPP

#include <sstream>
#include <string>
#include <vector>

#include "satkit/logic/core.hpp"

namespace satkit::logic {

// Canonical text form of a SatProblem: an s-expression with deterministic
// ordering (declaration order for enums/vars/funcs, source order for
// asserts). This is the wire format consumed by external solver adapters and
// compared in golden tests.

namespace canon {

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

inline const char* cmp_text(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Le: return "<=";
    case CmpOp::Lt: return "<";
    case CmpOp::Ge: return ">=";
    case CmpOp::Gt: return ">";
  }
  return "?";
}

inline void write_poly(std::ostream& os, const Poly& p, const SatProblem& prob) {
  os << "(poly";
  for (const auto& [m, c] : p.terms()) {
    os << " (" << rat_to_string(c);
    for (VarId v : m.vars) os << " " << quote(prob.vars[v].name);
    os << ")";
  }
  os << ")";
}

inline void write_formula(std::ostream& os, const Formula& f, const SatProblem& prob) {
  using K = Formula::K;
  switch (f.k) {
    case K::True: os << "true"; return;
    case K::False: os << "false"; return;
    case K::BoolVar: os << "(bv " << quote(prob.vars[f.var].name) << ")"; return;
    case K::EnumEq:
      if (f.rhs_is_var) {
        os << "(eeqv " << quote(prob.vars[f.var].name) << " "
           << quote(prob.vars[f.var2].name) << ")";
      } else {
        os << "(eeq " << quote(prob.vars[f.var].name) << " "
           << quote(prob.sym_pool[f.member]) << ")";
      }
      return;
    case K::NumCmp:
      os << "(cmp " << cmp_text(f.op) << " ";
      write_poly(os, f.poly, prob);
      os << ")";
      return;
    case K::And:
    case K::Or:
    case K::Not:
    case K::Implies: {
      const char* tag = f.k == K::And ? "and" : f.k == K::Or ? "or" : f.k == K::Not ? "not" : "imp";
      os << "(" << tag;
      for (const auto& k : f.kids) {
        os << " ";
        write_formula(os, k, prob);
      }
      os << ")";
      return;
    }
    case K::Card:
      os << "(card " << cmp_text(f.op) << " " << f.bound;
      for (const auto& k : f.kids) {
        os << " ";
        write_formula(os, k, prob);
      }
      os << ")";
      return;
  }
}

inline void write_value(std::ostream& os, const Value& v) {
  if (v.is_rat())
    os << "(rat " << rat_to_string(v.as_rat()) << ")";
  else if (v.is_bool())
    os << "(bool " << (v.as_bool() ? "true" : "false") << ")";
  else
    os << "(sym " << quote(v.as_sym()) << ")";
}

}  // namespace canon

inline std::string to_canonical_text(const SatProblem& p) {
  std::ostringstream os;
  os << "(problem\n";
  for (const auto& e : p.enums) {
    os << "  (enum " << canon::quote(e.name) << " (";
    for (size_t i = 0; i < e.members.size(); ++i) {
      if (i) os << " ";
      os << canon::quote(p.sym_pool[e.members[i]]);
    }
    os << "))\n";
  }
  for (const auto& [name, sig] : p.symbols.funcs) {
    os << "  (func " << canon::quote(name) << " (";
    for (size_t i = 0; i < sig.arg_sorts.size(); ++i) {
      if (i) os << " ";
      os << canon::quote(sig.arg_sorts[i]);
    }
    os << ") " << canon::quote(sig.ret_sort) << ")\n";
  }
  for (const auto& v : p.vars) {
    os << "  (var " << canon::quote(v.name) << " ";
    switch (v.sort) {
      case SortKind::Bool: os << "bool"; break;
      case SortKind::Int: os << "int"; break;
      case SortKind::Rat: os << "rat"; break;
      case SortKind::Enum: os << "enum " << canon::quote(p.enums[v.enum_id].name); break;
    }
    os << ")\n";
  }
  for (const auto& f : p.phi) {
    os << "  (assert ";
    canon::write_formula(os, f, p);
    os << ")\n";
  }
  for (const auto& q : p.queries) {
    os << "  (query " << canon::quote(q.label) << " ";
    switch (q.k) {
      case Query::K::Num:
        os << "num ";
        canon::write_poly(os, q.num, p);
        break;
      case Query::K::Enum:
        os << "enum " << canon::quote(p.vars[q.evar].name);
        break;
      case Query::K::Bool:
        os << "bool ";
        canon::write_formula(os, q.form, p);
        break;
    }
    os << ")\n";
  }
  for (const auto& [v, val] : p.eliminated) {
    os << "  (bind " << canon::quote(p.vars[v].name) << " ";
    canon::write_value(os, val);
    os << ")\n";
  }
  os << ")\n";
  return os.str();
}

// --- reader --------------------------------------------------------------------

namespace canon {

struct Sexpr {
  bool is_atom = false;
  std::string atom;  // unquoted text
  bool quoted = false;
  std::vector<Sexpr> kids;
};

struct CanonicalParseError : std::runtime_error {
  explicit CanonicalParseError(const std::string& m)
      : std::runtime_error("canonical form: " + m) {}
};

class SexprReader {
 public:
  explicit SexprReader(const std::string& s) : s_(s) {}

  Sexpr read() {
    skip_ws();
    Sexpr e = read_one();
    skip_ws();
    if (i_ != s_.size()) throw CanonicalParseError("trailing input");
    return e;
  }

 private:
  void skip_ws() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\n' || s_[i_] == '\t' || s_[i_] == '\r'))
      ++i_;
  }
  Sexpr read_one() {
    if (i_ >= s_.size()) throw CanonicalParseError("unexpected end");
    if (s_[i_] == '(') {
      ++i_;
      Sexpr e;
      while (true) {
        skip_ws();
        if (i_ >= s_.size()) throw CanonicalParseError("unbalanced parenthesis");
        if (s_[i_] == ')') {
          ++i_;
          return e;
        }
        e.kids.push_back(read_one());
      }
    }
    if (s_[i_] == '"') {
      ++i_;
      Sexpr e;
      e.is_atom = true;
      e.quoted = true;
      while (i_ < s_.size() && s_[i_] != '"') {
        if (s_[i_] == '\\' && i_ + 1 < s_.size()) ++i_;
        e.atom += s_[i_++];
      }
      if (i_ >= s_.size()) throw CanonicalParseError("unterminated string");
      ++i_;
      return e;
    }
    Sexpr e;
    e.is_atom = true;
    while (i_ < s_.size() && s_[i_] != ' ' && s_[i_] != '\n' && s_[i_] != '\t' &&
           s_[i_] != '\r' && s_[i_] != '(' && s_[i_] != ')')
      e.atom += s_[i_++];
    if (e.atom.empty()) throw CanonicalParseError("empty atom");
    return e;
  }

  const std::string& s_;
  size_t i_ = 0;
};

inline CmpOp cmp_from_text(const std::string& t) {
  if (t == "=") return CmpOp::Eq;
  if (t == "!=") return CmpOp::Ne;
  if (t == "<=") return CmpOp::Le;
  if (t == "<") return CmpOp::Lt;
  if (t == ">=") return CmpOp::Ge;
  if (t == ">") return CmpOp::Gt;
  throw CanonicalParseError("bad comparison op: " + t);
}

inline const std::string& atom(const Sexpr& e) {
  if (!e.is_atom) throw CanonicalParseError("expected atom");
  return e.atom;
}

inline Poly read_poly(const Sexpr& e, const SatProblem& p) {
  if (e.is_atom || e.kids.empty() || atom(e.kids[0]) != "poly")
    throw CanonicalParseError("expected (poly ...)");
  Poly out;
  for (size_t i = 1; i < e.kids.size(); ++i) {
    const Sexpr& t = e.kids[i];
    if (t.is_atom || t.kids.empty()) throw CanonicalParseError("bad poly term");
    auto c = parse_rational(atom(t.kids[0]));
    if (!c) throw CanonicalParseError("bad coefficient");
    Monomial m;
    for (size_t j = 1; j < t.kids.size(); ++j) {
      VarId v = p.find_var(atom(t.kids[j]));
      if (v < 0) throw CanonicalParseError("unknown variable " + atom(t.kids[j]));
      m.vars.push_back(v);
    }
    out.add_term(std::move(m), *c);
  }
  return out;
}

inline Formula read_formula(const Sexpr& e, SatProblem& p) {
  if (e.is_atom) {
    if (e.atom == "true") return Formula::constant(true);
    if (e.atom == "false") return Formula::constant(false);
    throw CanonicalParseError("bad formula atom: " + e.atom);
  }
  if (e.kids.empty()) throw CanonicalParseError("empty formula");
  const std::string& tag = atom(e.kids[0]);
  auto var_of = [&](const Sexpr& s) {
    VarId v = p.find_var(atom(s));
    if (v < 0) throw CanonicalParseError("unknown variable " + atom(s));
    return v;
  };
  if (tag == "bv") return Formula::bool_var(var_of(e.kids.at(1)));
  if (tag == "eeq")
    return Formula::enum_eq(var_of(e.kids.at(1)), p.intern_symbol(atom(e.kids.at(2))));
  if (tag == "eeqv") return Formula::enum_eq_var(var_of(e.kids.at(1)), var_of(e.kids.at(2)));
  if (tag == "cmp")
    return Formula::num_cmp(cmp_from_text(atom(e.kids.at(1))), read_poly(e.kids.at(2), p));
  if (tag == "and" || tag == "or" || tag == "not" || tag == "imp") {
    std::vector<Formula> kids;
    for (size_t i = 1; i < e.kids.size(); ++i) kids.push_back(read_formula(e.kids[i], p));
    if (tag == "and") return Formula::make_and(std::move(kids));
    if (tag == "or") return Formula::make_or(std::move(kids));
    if (tag == "not") {
      if (kids.size() != 1) throw CanonicalParseError("not takes one formula");
      return Formula::make_not(std::move(kids[0]));
    }
    if (kids.size() != 2) throw CanonicalParseError("imp takes two formulas");
    return Formula::make_implies(std::move(kids[0]), std::move(kids[1]));
  }
  if (tag == "card") {
    CmpOp op = cmp_from_text(atom(e.kids.at(1)));
    long bound = std::stol(atom(e.kids.at(2)));
    std::vector<Formula> kids;
    for (size_t i = 3; i < e.kids.size(); ++i) kids.push_back(read_formula(e.kids[i], p));
    return Formula::card(op, bound, std::move(kids));
  }
  throw CanonicalParseError("unknown formula tag: " + tag);
}

inline Value read_value(const Sexpr& e) {
  const std::string& tag = atom(e.kids.at(0));
  if (tag == "rat") {
    auto r = parse_rational(atom(e.kids.at(1)));
    if (!r) throw CanonicalParseError("bad rational");
    return Value(*r);
  }
  if (tag == "bool") return Value(atom(e.kids.at(1)) == "true");
  if (tag == "sym") return Value::sym(atom(e.kids.at(1)));
  throw CanonicalParseError("unknown value tag: " + tag);
}

}  // namespace canon

/// Reads the canonical text form back into a SatProblem. The round trip
/// write -> read -> write is byte-stable.
inline SatProblem from_canonical_text(const std::string& text) {
  using canon::atom;
  using canon::CanonicalParseError;
  canon::Sexpr root = canon::SexprReader(text).read();
  if (root.is_atom || root.kids.empty() || atom(root.kids[0]) != "problem")
    throw CanonicalParseError("expected (problem ...)");
  SatProblem p;
  for (size_t i = 1; i < root.kids.size(); ++i) {
    const canon::Sexpr& e = root.kids[i];
    const std::string& tag = atom(e.kids.at(0));
    if (tag == "enum") {
      EnumInfo info;
      info.name = atom(e.kids.at(1));
      std::vector<std::string> names;
      for (const auto& m : e.kids.at(2).kids) {
        info.members.push_back(p.intern_symbol(atom(m)));
        names.push_back(atom(m));
      }
      p.enums.push_back(info);
      if (info.name.empty() || info.name[0] != '@')
        p.symbols.domains.emplace_back(info.name, names);
    } else if (tag == "func") {
      FuncSig sig;
      for (const auto& a : e.kids.at(2).kids) sig.arg_sorts.push_back(atom(a));
      sig.ret_sort = atom(e.kids.at(3));
      p.symbols.funcs.emplace_back(atom(e.kids.at(1)), std::move(sig));
    } else if (tag == "var") {
      const std::string& name = atom(e.kids.at(1));
      const std::string& sort = atom(e.kids.at(2));
      if (sort == "bool") p.add_var(name, SortKind::Bool);
      else if (sort == "int") p.add_var(name, SortKind::Int);
      else if (sort == "rat") p.add_var(name, SortKind::Rat);
      else if (sort == "enum") {
        int eid = p.find_enum(atom(e.kids.at(3)));
        if (eid < 0) throw CanonicalParseError("unknown enum " + atom(e.kids.at(3)));
        p.add_var(name, SortKind::Enum, eid);
      } else {
        throw CanonicalParseError("unknown sort " + sort);
      }
    } else if (tag == "assert") {
      p.phi.push_back(canon::read_formula(e.kids.at(1), p));
    } else if (tag == "query") {
      Query q;
      q.label = atom(e.kids.at(1));
      const std::string& kind = atom(e.kids.at(2));
      if (kind == "num") {
        q.k = Query::K::Num;
        q.num = canon::read_poly(e.kids.at(3), p);
      } else if (kind == "enum") {
        q.k = Query::K::Enum;
        q.evar = p.find_var(atom(e.kids.at(3)));
        if (q.evar < 0) throw CanonicalParseError("unknown query variable");
      } else if (kind == "bool") {
        q.k = Query::K::Bool;
        q.form = canon::read_formula(e.kids.at(3), p);
      } else {
        throw CanonicalParseError("unknown query kind " + kind);
      }
      p.queries.push_back(std::move(q));
    } else if (tag == "bind") {
      VarId v = p.find_var(atom(e.kids.at(1)));
      if (v < 0) throw CanonicalParseError("unknown bound variable");
      p.eliminated.emplace_back(v, canon::read_value(e.kids.at(2)));
    } else {
      throw CanonicalParseError("unknown section " + tag);
    }
  }
  return p;
}

}  // namespace satkit::logic

#endif  // SATKIT_LOGIC_CANONICAL_HPP
