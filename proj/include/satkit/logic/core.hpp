#ifndef SATKIT_LOGIC_CORE_HPP
#define SATKIT_LOGIC_CORE_HPP

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "satkit/util/rational.hpp"
#include "satkit/util/value.hpp"

namespace satkit::logic {

using VarId = int;

enum class SortKind { Bool, Int, Rat, Enum };

struct Sort {
  SortKind kind = SortKind::Rat;
  std::string enum_name;  // SortKind::Enum
  bool operator==(const Sort&) const = default;
};

/// Name -> sort/signature registry built during lowering. Insertion order is
/// preserved so that derived artifacts (canonical text, reports) are
/// deterministic.
struct FuncSig {
  std::vector<std::string> arg_sorts;  // "bool" | "int" | "rat" | "str" | enum name
  std::string ret_sort;
};

struct SymbolTable {
  std::vector<std::pair<std::string, Sort>> vars;
  std::vector<std::pair<std::string, FuncSig>> funcs;
  std::vector<std::pair<std::string, std::vector<std::string>>> domains;

  const Sort* find_var(const std::string& n) const {
    for (auto& [name, s] : vars)
      if (name == n) return &s;
    return nullptr;
  }
  const FuncSig* find_func(const std::string& n) const {
    for (auto& [name, s] : funcs)
      if (name == n) return &s;
    return nullptr;
  }
  const std::vector<std::string>* find_domain(const std::string& n) const {
    for (auto& [name, m] : domains)
      if (name == n) return &m;
    return nullptr;
  }
  bool name_taken(const std::string& n) const {
    return find_var(n) || find_func(n) || find_domain(n);
  }
};

// --- polynomials --------------------------------------------------------------

/// Product of ground variables, stored sorted with multiplicity.
struct Monomial {
  std::vector<VarId> vars;
  auto operator<=>(const Monomial&) const = default;
  int degree() const { return static_cast<int>(vars.size()); }
};

/// Multivariate polynomial with exact rational coefficients. The empty
/// monomial holds the constant term; zero coefficients are never stored.
class Poly {
 public:
  static Poly constant(Rat c) {
    Poly p;
    if (c != 0) p.t_[Monomial{}] = std::move(c);
    return p;
  }
  static Poly variable(VarId v) {
    Poly p;
    p.t_[Monomial{{v}}] = 1;
    return p;
  }

  const std::map<Monomial, Rat>& terms() const { return t_; }
  bool is_zero() const { return t_.empty(); }
  bool is_constant() const {
    return t_.empty() || (t_.size() == 1 && t_.begin()->first.vars.empty());
  }
  Rat constant_value() const {
    auto it = t_.find(Monomial{});
    return it == t_.end() ? Rat(0) : it->second;
  }
  int degree() const {
    int d = 0;
    for (auto& [m, c] : t_) d = std::max(d, m.degree());
    return d;
  }
  bool is_linear() const { return degree() <= 1; }

  Poly& add_term(Monomial m, Rat c) {
    std::sort(m.vars.begin(), m.vars.end());
    auto it = t_.find(m);
    if (it == t_.end()) {
      if (c != 0) t_.emplace(std::move(m), std::move(c));
    } else {
      it->second += c;
      if (it->second == 0) t_.erase(it);
    }
    return *this;
  }

  friend Poly operator+(const Poly& a, const Poly& b) {
    Poly r = a;
    for (auto& [m, c] : b.t_) r.add_term(m, c);
    return r;
  }
  friend Poly operator-(const Poly& a, const Poly& b) {
    Poly r = a;
    for (auto& [m, c] : b.t_) r.add_term(m, -c);
    return r;
  }
  friend Poly operator*(const Poly& a, const Poly& b) {
    Poly r;
    for (auto& [ma, ca] : a.t_)
      for (auto& [mb, cb] : b.t_) {
        Monomial m;
        m.vars = ma.vars;
        m.vars.insert(m.vars.end(), mb.vars.begin(), mb.vars.end());
        r.add_term(std::move(m), ca * cb);
      }
    return r;
  }
  Poly scaled(const Rat& k) const {
    Poly r;
    if (k == 0) return r;
    for (auto& [m, c] : t_) r.t_[m] = c * k;
    return r;
  }
  Poly negated() const { return scaled(Rat(-1)); }

  Poly substituted(VarId v, const Rat& val) const {
    Poly r;
    for (auto& [m, c] : t_) {
      Rat coef = c;
      Monomial nm;
      for (VarId mv : m.vars) {
        if (mv == v)
          coef *= val;
        else
          nm.vars.push_back(mv);
      }
      r.add_term(std::move(nm), std::move(coef));
    }
    return r;
  }

  Rat eval(const std::function<Rat(VarId)>& get) const {
    Rat sum = 0;
    for (auto& [m, c] : t_) {
      Rat prod = c;
      for (VarId v : m.vars) prod *= get(v);
      sum += prod;
    }
    return sum;
  }

  void collect_vars(std::set<VarId>& out) const {
    for (auto& [m, c] : t_)
      for (VarId v : m.vars) out.insert(v);
  }

  /// Linear-only accessors.
  Rat coeff_of(VarId v) const {
    auto it = t_.find(Monomial{{v}});
    return it == t_.end() ? Rat(0) : it->second;
  }

  auto operator<=>(const Poly&) const = default;

 private:
  std::map<Monomial, Rat> t_;
};

// --- formulas ------------------------------------------------------------------

enum class CmpOp { Eq, Ne, Le, Lt, Ge, Gt };

inline CmpOp negate_cmp(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return CmpOp::Ne;
    case CmpOp::Ne: return CmpOp::Eq;
    case CmpOp::Le: return CmpOp::Gt;
    case CmpOp::Lt: return CmpOp::Ge;
    case CmpOp::Ge: return CmpOp::Lt;
    case CmpOp::Gt: return CmpOp::Le;
  }
  return CmpOp::Eq;
}

inline bool cmp_holds(CmpOp op, const Rat& lhs) {
  switch (op) {
    case CmpOp::Eq: return lhs == 0;
    case CmpOp::Ne: return lhs != 0;
    case CmpOp::Le: return lhs <= 0;
    case CmpOp::Lt: return lhs < 0;
    case CmpOp::Ge: return lhs >= 0;
    case CmpOp::Gt: return lhs > 0;
  }
  return false;
}

inline bool cmp_holds_count(CmpOp op, long count, long bound) {
  switch (op) {
    case CmpOp::Eq: return count == bound;
    case CmpOp::Ne: return count != bound;
    case CmpOp::Le: return count <= bound;
    case CmpOp::Lt: return count < bound;
    case CmpOp::Ge: return count >= bound;
    case CmpOp::Gt: return count > bound;
  }
  return false;
}

/// Normalized logical term: atoms over ground variables plus connectives and
/// cardinality nodes. Quantifiers are gone by construction (grounded during
/// lowering).
struct Formula {
  enum class K { True, False, BoolVar, EnumEq, NumCmp, And, Or, Not, Implies, Card };
  K k = K::True;

  VarId var = -1;        // BoolVar / EnumEq lhs
  bool rhs_is_var = false;
  int member = -1;       // EnumEq rhs symbol id (when !rhs_is_var)
  VarId var2 = -1;       // EnumEq rhs var (when rhs_is_var)

  CmpOp op = CmpOp::Eq;  // NumCmp: poly `op` 0; Card: |true kids| `op` bound
  Poly poly;
  long bound = 0;

  std::vector<Formula> kids;

  static Formula constant(bool b) {
    Formula f;
    f.k = b ? K::True : K::False;
    return f;
  }
  static Formula bool_var(VarId v) {
    Formula f;
    f.k = K::BoolVar;
    f.var = v;
    return f;
  }
  static Formula enum_eq(VarId v, int sym) {
    Formula f;
    f.k = K::EnumEq;
    f.var = v;
    f.member = sym;
    return f;
  }
  static Formula enum_eq_var(VarId v, VarId w) {
    Formula f;
    f.k = K::EnumEq;
    f.var = v;
    f.var2 = w;
    f.rhs_is_var = true;
    return f;
  }
  static Formula num_cmp(CmpOp op, Poly p) {
    Formula f;
    f.k = K::NumCmp;
    f.op = op;
    f.poly = std::move(p);
    return f;
  }
  static Formula make_and(std::vector<Formula> kids) {
    Formula f;
    f.k = K::And;
    f.kids = std::move(kids);
    return f;
  }
  static Formula make_or(std::vector<Formula> kids) {
    Formula f;
    f.k = K::Or;
    f.kids = std::move(kids);
    return f;
  }
  static Formula make_not(Formula g) {
    Formula f;
    f.k = K::Not;
    f.kids.push_back(std::move(g));
    return f;
  }
  static Formula make_implies(Formula a, Formula b) {
    Formula f;
    f.k = K::Implies;
    f.kids.push_back(std::move(a));
    f.kids.push_back(std::move(b));
    return f;
  }
  static Formula card(CmpOp op, long bound, std::vector<Formula> kids) {
    Formula f;
    f.k = K::Card;
    f.op = op;
    f.bound = bound;
    f.kids = std::move(kids);
    return f;
  }

  void collect_vars(std::set<VarId>& out) const {
    if (k == K::BoolVar || k == K::EnumEq) {
      out.insert(var);
      if (rhs_is_var) out.insert(var2);
    }
    if (k == K::NumCmp) poly.collect_vars(out);
    for (const auto& kid : kids) kid.collect_vars(out);
  }
};

// --- theory -------------------------------------------------------------------

/// Which interpreted fragments a problem touches, derived syntactically.
struct Theory {
  bool equality = false;
  bool lin_int = false;
  bool lin_rat = false;
  bool nonlinear = false;
  bool euf_finite = false;
  bool cardinality = false;
  bool grounded_quantifiers = false;

  bool subset_of(const Theory& o) const {
    auto le = [](bool a, bool b) { return !a || b; };
    return le(equality, o.equality) && le(lin_int, o.lin_int) && le(lin_rat, o.lin_rat) &&
           le(nonlinear, o.nonlinear) && le(euf_finite, o.euf_finite) &&
           le(cardinality, o.cardinality) &&
           le(grounded_quantifiers, o.grounded_quantifiers);
  }
  std::string str() const {
    std::string s;
    auto add = [&](bool on, const char* name) {
      if (on) {
        if (!s.empty()) s += "+";
        s += name;
      }
    };
    add(equality, "Equality");
    add(lin_int, "LinIntArith");
    add(lin_rat, "LinRatArith");
    add(nonlinear, "NonlinearArith");
    add(euf_finite, "EUF-Finite");
    add(cardinality, "Cardinality");
    add(grounded_quantifiers, "GroundedQuantifiers");
    return s.empty() ? "Empty" : s;
  }
  bool operator==(const Theory&) const = default;
};

// --- ground problem -------------------------------------------------------------

struct GroundVar {
  std::string name;
  SortKind sort = SortKind::Rat;
  int enum_id = -1;  // index into SatProblem::enums when sort == Enum
};

struct EnumInfo {
  std::string name;
  std::vector<int> members;  // symbol-pool ids, in declaration order
};

struct Query {
  enum class K { Num, Enum, Bool };
  K k = K::Num;
  std::string label;
  Poly num;      // K::Num
  VarId evar = -1;  // K::Enum
  Formula form;  // K::Bool
};

/// The lowered problem triple: formulas, inferred theory, and queries, over a
/// pool of ground variables and interned member symbols.
struct SatProblem {
  SymbolTable symbols;
  std::vector<std::string> sym_pool;
  std::vector<EnumInfo> enums;
  std::vector<GroundVar> vars;
  std::vector<Formula> phi;
  std::vector<Query> queries;
  Theory theory;
  bool grounded_quantifiers = false;
  // Bindings removed by constant propagation, in elimination order.
  std::vector<std::pair<VarId, Value>> eliminated;

  int intern_symbol(const std::string& s) {
    for (size_t i = 0; i < sym_pool.size(); ++i)
      if (sym_pool[i] == s) return static_cast<int>(i);
    sym_pool.push_back(s);
    return static_cast<int>(sym_pool.size()) - 1;
  }
  int find_symbol(const std::string& s) const {
    for (size_t i = 0; i < sym_pool.size(); ++i)
      if (sym_pool[i] == s) return static_cast<int>(i);
    return -1;
  }
  int find_enum(const std::string& name) const {
    for (size_t i = 0; i < enums.size(); ++i)
      if (enums[i].name == name) return static_cast<int>(i);
    return -1;
  }
  VarId find_var(const std::string& name) const {
    for (size_t i = 0; i < vars.size(); ++i)
      if (vars[i].name == name) return static_cast<VarId>(i);
    return -1;
  }
  VarId add_var(std::string name, SortKind sort, int enum_id = -1) {
    vars.push_back(GroundVar{std::move(name), sort, enum_id});
    return static_cast<VarId>(vars.size()) - 1;
  }
};

}  // namespace satkit::logic

#endif  // SATKIT_LOGIC_CORE_HPP
