#ifndef SATKIT_LOGIC_LOWER_HPP
#define SATKIT_LOGIC_LOWER_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "satkit/logic/core.hpp"
#include "satkit/speclang/parser.hpp"

namespace satkit::logic {

enum class LowerErrorKind { Sort, UnknownDomain, Arity, Unsupported };

struct LowerError : std::runtime_error {
  LowerErrorKind kind;
  LowerError(LowerErrorKind k, const std::string& msg)
      : std::runtime_error("lowering error: " + msg), kind(k) {}
};

/// Arithmetic that is undefined in every model (division by a literal zero).
struct EvalError : std::runtime_error {
  explicit EvalError(const std::string& msg) : std::runtime_error("eval error: " + msg) {}
};

struct LowerOptions {
  // Numeric variables default to exact rationals; adapters that know their
  // answers are integral (synthetic integer benchmarks) may flip this.
  bool prefer_int = false;
};

namespace detail {

using spec::Binder;
using spec::BinOpKind;
using spec::Expr;
using spec::ExprKind;
using spec::LogicKind;

/// Numeric term as an exact rational function of polynomials.
struct RatFunc {
  Poly num;
  Poly den = Poly::constant(Rat(1));

  bool den_is_constant() const { return den.is_constant(); }

  void normalize() {
    if (den.is_constant()) {
      Rat d = den.constant_value();
      if (d == 0) throw EvalError("division by zero");
      if (d != 1) {
        num = num.scaled(Rat(1) / d);
        den = Poly::constant(Rat(1));
      }
    }
  }
  static RatFunc constant(Rat c) { return RatFunc{Poly::constant(std::move(c))}; }
  static RatFunc variable(VarId v) { return RatFunc{Poly::variable(v)}; }

  friend RatFunc operator+(const RatFunc& a, const RatFunc& b) {
    RatFunc r{a.num * b.den + b.num * a.den, a.den * b.den};
    r.normalize();
    return r;
  }
  friend RatFunc operator-(const RatFunc& a, const RatFunc& b) {
    RatFunc r{a.num * b.den - b.num * a.den, a.den * b.den};
    r.normalize();
    return r;
  }
  friend RatFunc operator*(const RatFunc& a, const RatFunc& b) {
    RatFunc r{a.num * b.num, a.den * b.den};
    r.normalize();
    return r;
  }
  friend RatFunc operator/(const RatFunc& a, const RatFunc& b) {
    if (b.num.is_constant() && b.num.constant_value() == 0)
      throw EvalError("division by zero");
    RatFunc r{a.num * b.den, a.den * b.num};
    r.normalize();
    return r;
  }
};

class Lowerer {
 public:
  Lowerer(const spec::FormalSpec& fs, LowerOptions opt) : fs_(fs), opt_(opt) {}

  SatProblem run() {
    register_declarations();
    scan_everything();
    resolve_names();
    for (const auto& c : fs_.constraints) p_.phi.push_back(build_constraint(c));
    lower_queries();
    p_.grounded_quantifiers = grounded_;
    p_.theory = infer(p_);
    return std::move(p_);
  }

  /// Syntactic theory scan; total. Also used to re-derive flags after
  /// constant propagation.
  static Theory infer(const SatProblem& p) {
    Theory t;
    t.equality = true;
    for (const auto& v : p.vars) {
      if (v.sort == SortKind::Int) t.lin_int = true;
      if (v.sort == SortKind::Rat) t.lin_rat = true;
    }
    std::function<void(const Formula&)> scan = [&](const Formula& f) {
      if (f.k == Formula::K::NumCmp && f.poly.degree() >= 2) t.nonlinear = true;
      if (f.k == Formula::K::Card) t.cardinality = true;
      for (const auto& kid : f.kids) scan(kid);
    };
    for (const auto& f : p.phi) scan(f);
    for (const auto& q : p.queries) {
      if (q.k == Query::K::Bool) scan(q.form);
      if (q.k == Query::K::Num && q.num.degree() >= 2) t.nonlinear = true;
    }
    for (const auto& [name, sig] : p.symbols.funcs)
      for (const auto& a : sig.arg_sorts)
        if (a != "bool" && a != "int" && a != "rat") t.euf_finite = true;
    t.grounded_quantifiers = p.grounded_quantifiers;
    return t;
  }

 private:
  // ---- declaration intake ----

  static bool builtin_sort(const std::string& s) {
    return s == "bool" || s == "int" || s == "rat" || s == "str";
  }

  void register_declarations() {
    for (const auto& d : fs_.declarations) {
      if (d.kind == spec::StmtKind::DomainDecl) {
        if (p_.find_enum(d.name) >= 0)
          throw LowerError(LowerErrorKind::Sort, "domain redeclared: " + d.name);
        EnumInfo e;
        e.name = d.name;
        for (const auto& m : d.members) {
          int s = p_.intern_symbol(m);
          e.members.push_back(s);
          constants_.insert(m);
        }
        p_.enums.push_back(std::move(e));
        p_.symbols.domains.emplace_back(d.name, d.members);
      }
    }
    for (const auto& d : fs_.declarations) {
      if (d.kind == spec::StmtKind::FuncDecl) {
        FuncSig sig;
        for (const auto& a : d.arg_sorts) sig.arg_sorts.push_back(check_sort_name(a));
        sig.ret_sort = check_sort_name(d.ret_sort);
        p_.symbols.funcs.emplace_back(d.name, std::move(sig));
      } else if (d.kind == spec::StmtKind::VarDecl) {
        declared_vars_.insert(d.name);
      }
    }
  }

  /// Surface sort names: bool/int/rat/str or a declared domain. The string
  /// sort is backed by the implicit "@str" enum of document literals.
  std::string check_sort_name(const std::string& s) {
    if (s == "str") return "@str";
    if (builtin_sort(s)) return s;
    if (p_.find_enum(s) < 0)
      throw LowerError(LowerErrorKind::UnknownDomain, "unknown sort '" + s + "'");
    return s;
  }

  // ---- usage scan -----------------------------------------------------------

  struct NameEvidence {
    bool numeric = false;
    bool boolean = false;
    std::set<std::string> enum_sorts;  // includes "@str"
    bool is_constant_use = false;      // appeared as a call argument
  };

  void note_enum(const std::string& n, const std::string& e) { usage_[n].enum_sorts.insert(e); }

  void scan_everything() {
    for (const auto& c : fs_.constraints) {
      if (c.kind == ExprKind::BinOp && c.bin_op == BinOpKind::Eq &&
          c.args[0].kind == ExprKind::SymbolRef)
        assigned_.insert(c.args[0].sym);
    }
    // Evidence accumulates monotonically; a few rounds let sorts flow through
    // chained equalities like a = b, b = next(...).
    for (int round = 0; round < 3; ++round) {
      for (const auto& c : fs_.constraints) scan_bool(c, {});
      for (const auto& [q, label] : fs_.queries) scan_any(q, {});
      for (const auto& [n, rhs] : fs_.aliases) scan_any(rhs, {});
    }
  }

  bool is_name_var(const std::string& n) const {
    return declared_vars_.count(n) || assigned_.count(n);
  }

  using BindMap = std::map<std::string, std::string>;  // binder var -> domain name

  void scan_ref(const Expr& e, const BindMap& binders, const char* ctx) {
    if (e.kind != ExprKind::SymbolRef) return;
    if (binders.count(e.sym)) return;
    auto& ev = usage_[e.sym];
    if (ctx == std::string("num")) ev.numeric = true;
    if (ctx == std::string("bool")) ev.boolean = true;
  }

  void scan_call(const Expr& e, const BindMap& binders, const char* ret_ctx) {
    auto& fu = func_usage_[e.sym];
    if (fu.arity >= 0 && fu.arity != static_cast<int>(e.args.size()))
      throw LowerError(LowerErrorKind::Arity,
                       "function '" + e.sym + "' used with inconsistent arity");
    fu.arity = static_cast<int>(e.args.size());
    if (ret_ctx == std::string("bool")) fu.bool_ret = true;
    if (ret_ctx == std::string("num")) fu.num_ret = true;
    const FuncSig* sig = p_.symbols.find_func(e.sym);
    for (size_t i = 0; i < e.args.size(); ++i) {
      const Expr& a = e.args[i];
      if (a.kind == ExprKind::SymbolRef && !binders.count(a.sym) && !is_name_var(a.sym)) {
        usage_[a.sym].is_constant_use = true;
        constants_.insert(a.sym);
      } else if (a.kind == ExprKind::SymbolRef && is_name_var(a.sym) && sig &&
                 i < sig->arg_sorts.size() && !builtin_sort(sig->arg_sorts[i])) {
        note_enum(a.sym, sig->arg_sorts[i]);
      } else {
        scan_any(a, binders);
      }
    }
  }

  void scan_num(const Expr& e, const BindMap& binders) {
    switch (e.kind) {
      case ExprKind::NumLit:
        return;
      case ExprKind::SymbolRef:
        scan_ref(e, binders, "num");
        return;
      case ExprKind::Call:
        scan_call(e, binders, "num");
        return;
      case ExprKind::BinOp:
        scan_num(e.args[0], binders);
        scan_num(e.args[1], binders);
        return;
      default:
        scan_any(e, binders);
        return;
    }
  }

  void scan_bool(const Expr& e, const BindMap& binders) {
    switch (e.kind) {
      case ExprKind::Logic:
        for (const auto& a : e.args) scan_bool(a, binders);
        return;
      case ExprKind::ForAll: {
        BindMap b = binders;
        for (const auto& bn : e.binders) b[bn.var] = bn.domain;
        scan_bool(e.args[0], b);
        return;
      }
      case ExprKind::SymbolRef:
        scan_ref(e, binders, "bool");
        return;
      case ExprKind::Call:
        scan_call(e, binders, "bool");
        return;
      case ExprKind::BinOp:
        scan_cmp(e, binders);
        return;
      default:
        scan_any(e, binders);
        return;
    }
  }

  // A side of a comparison is enum-ish if it is a string literal, a known
  // constant, a var with enum evidence, a binder, or a call returning an
  // enum sort.
  bool enumish(const Expr& e, const BindMap& binders) {
    if (e.kind == ExprKind::StrLit) return true;
    if (e.kind == ExprKind::NextOf) return true;
    if (e.kind == ExprKind::SymbolRef) {
      if (binders.count(e.sym)) return true;
      if (!is_name_var(e.sym) && constants_.count(e.sym)) return true;
      auto it = usage_.find(e.sym);
      if (it != usage_.end() && !it->second.enum_sorts.empty()) return true;
      return false;
    }
    if (e.kind == ExprKind::Call) {
      const FuncSig* sig = p_.symbols.find_func(e.sym);
      if (sig) return !builtin_sort(sig->ret_sort);
      auto it = func_usage_.find(e.sym);
      if (it != func_usage_.end() && !it->second.enum_ret.empty()) return true;
    }
    return false;
  }

  std::optional<std::string> enum_sort_of(const Expr& e, const BindMap& binders) {
    if (e.kind == ExprKind::StrLit) return std::string("@str");
    if (e.kind == ExprKind::NextOf) return e.binders[0].domain;
    if (e.kind == ExprKind::SymbolRef) {
      auto b = binders.find(e.sym);
      if (b != binders.end()) return b->second.empty() ? std::string("@universe") : b->second;
      auto it = usage_.find(e.sym);
      if (it != usage_.end() && !it->second.enum_sorts.empty())
        return *it->second.enum_sorts.begin();
      return std::nullopt;
    }
    if (e.kind == ExprKind::Call) {
      const FuncSig* sig = p_.symbols.find_func(e.sym);
      if (sig && !builtin_sort(sig->ret_sort)) return sig->ret_sort;
      auto it = func_usage_.find(e.sym);
      if (it != func_usage_.end() && !it->second.enum_ret.empty())
        return *it->second.enum_ret.begin();
    }
    return std::nullopt;
  }

  void scan_cmp(const Expr& e, const BindMap& binders) {
    const Expr& l = e.args[0];
    const Expr& r = e.args[1];
    if (l.kind == ExprKind::Count || r.kind == ExprKind::Count) {
      const Expr& cnt = l.kind == ExprKind::Count ? l : r;
      const Expr& other = l.kind == ExprKind::Count ? r : l;
      BindMap b = binders;
      for (const auto& bn : cnt.binders) b[bn.var] = bn.domain;
      scan_bool(cnt.args[0], b);
      scan_num(other, binders);
      return;
    }
    if (r.kind == ExprKind::NextOf || l.kind == ExprKind::NextOf) {
      const Expr& nx = r.kind == ExprKind::NextOf ? r : l;
      const Expr& other = r.kind == ExprKind::NextOf ? l : r;
      BindMap b = binders;
      b[nx.binders[0].var] = nx.binders[0].domain;
      scan_bool(nx.args[0], b);
      if (other.kind == ExprKind::SymbolRef && !binders.count(other.sym))
        note_enum(other.sym, nx.binders[0].domain);
      return;
    }
    bool le = enumish(l, binders), re = enumish(r, binders);
    if (le || re) {
      auto sort = enum_sort_of(le ? l : r, binders);
      for (const Expr* side : {&l, &r}) {
        if (side->kind == ExprKind::SymbolRef && !binders.count(side->sym) &&
            is_name_var(side->sym) && sort)
          note_enum(side->sym, *sort);
        else if (side->kind == ExprKind::Call) {
          scan_call(*side, binders, "any");
          if (sort) func_usage_[side->sym].enum_ret.insert(*sort);
        } else if (side->kind == ExprKind::StrLit) {
          str_literals_used_ = true;
        } else if (side->kind == ExprKind::SymbolRef) {
          scan_ref(*side, binders, "any");
        } else {
          scan_any(*side, binders);
        }
      }
      return;
    }
    bool lb = boolish(l), rb = boolish(r);
    if (lb || rb) {
      scan_bool(l, binders);
      scan_bool(r, binders);
      return;
    }
    scan_num(l, binders);
    scan_num(r, binders);
  }

  bool boolish(const Expr& e) {
    if (e.kind == ExprKind::BoolLit || e.kind == ExprKind::Logic) return true;
    if (e.kind == ExprKind::SymbolRef) {
      auto it = usage_.find(e.sym);
      return it != usage_.end() && it->second.boolean;
    }
    if (e.kind == ExprKind::Call) {
      const FuncSig* sig = p_.symbols.find_func(e.sym);
      if (sig) return sig->ret_sort == "bool";
      auto it = func_usage_.find(e.sym);
      return it != func_usage_.end() && it->second.bool_ret;
    }
    return false;
  }

  void scan_any(const Expr& e, const BindMap& binders) {
    switch (e.kind) {
      case ExprKind::StrLit:
        str_literals_used_ = true;
        return;
      case ExprKind::NumLit:
      case ExprKind::BoolLit:
        return;
      case ExprKind::SymbolRef:
        scan_ref(e, binders, "any");
        return;
      case ExprKind::Call:
        scan_call(e, binders, "any");
        return;
      case ExprKind::BinOp:
        if (e.bin_op == BinOpKind::Eq || e.bin_op == BinOpKind::Ne ||
            e.bin_op == BinOpKind::Lt || e.bin_op == BinOpKind::Le ||
            e.bin_op == BinOpKind::Gt || e.bin_op == BinOpKind::Ge) {
          scan_cmp(e, binders);
        } else {
          scan_num(e, binders);
        }
        return;
      case ExprKind::Logic:
      case ExprKind::ForAll:
        scan_bool(e, binders);
        return;
      case ExprKind::Count: {
        BindMap b = binders;
        for (const auto& bn : e.binders) b[bn.var] = bn.domain;
        scan_bool(e.args[0], b);
        return;
      }
      case ExprKind::NextOf: {
        BindMap b = binders;
        b[e.binders[0].var] = e.binders[0].domain;
        scan_bool(e.args[0], b);
        return;
      }
      case ExprKind::TuplePair:
        for (const auto& a : e.args) scan_any(a, binders);
        return;
    }
  }

  // ---- resolution ------------------------------------------------------------

  void resolve_names() {
    // Universe: every constant, in first-occurrence order over declarations
    // then constraints. Declared enum members were interned first already.
    EnumInfo universe;
    universe.name = "@universe";
    std::set<int> in_universe;
    for (size_t i = 0; i < p_.sym_pool.size(); ++i) {
      universe.members.push_back(static_cast<int>(i));
      in_universe.insert(static_cast<int>(i));
    }
    for (const auto& name : constants_order()) {
      int s = p_.intern_symbol(name);
      if (!in_universe.count(s)) {
        universe.members.push_back(s);
        in_universe.insert(s);
      }
    }
    p_.enums.push_back(std::move(universe));

    if (str_literals_used_ || func_ret_mentions("@str")) {
      EnumInfo str_enum;
      str_enum.name = "@str";
      collect_string_literals(str_enum);
      p_.enums.push_back(std::move(str_enum));
    }

    // Implicit function declarations.
    for (auto& [name, fu] : func_usage_) {
      if (p_.symbols.find_func(name)) continue;
      if (name == "Variable" || name == "Function") continue;
      FuncSig sig;
      for (int i = 0; i < fu.arity; ++i) sig.arg_sorts.push_back("@universe");
      if (fu.bool_ret)
        sig.ret_sort = "bool";
      else if (!fu.enum_ret.empty())
        sig.ret_sort = *fu.enum_ret.begin();
      else if (fu.num_ret)
        sig.ret_sort = "rat";
      else
        sig.ret_sort = "bool";
      p_.symbols.funcs.emplace_back(name, std::move(sig));
    }

    // Source-level variables, in a stable order: declared first, then
    // assigned/used names by first evidence.
    std::vector<std::string> names;
    for (const auto& d : fs_.declarations)
      if (d.kind == spec::StmtKind::VarDecl) names.push_back(d.name);
    for (const auto& [n, ev] : usage_) {
      if (constants_.count(n) && !is_name_var(n)) continue;
      if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
    }
    for (const auto& n : names) {
      if (p_.find_var(n) >= 0) continue;
      auto it = usage_.find(n);
      NameEvidence ev = it == usage_.end() ? NameEvidence{} : it->second;
      Sort s;
      if (!ev.enum_sorts.empty()) {
        if (ev.enum_sorts.size() > 1)
          throw LowerError(LowerErrorKind::Sort,
                           "variable '" + n + "' used with conflicting enum sorts");
        if (ev.numeric)
          throw LowerError(LowerErrorKind::Sort,
                           "variable '" + n + "' used both as enum and as number");
        s.kind = SortKind::Enum;
        s.enum_name = *ev.enum_sorts.begin();
        if (p_.find_enum(s.enum_name) < 0)
          throw LowerError(LowerErrorKind::UnknownDomain, "unknown domain '" + s.enum_name + "'");
      } else if (ev.boolean && !ev.numeric) {
        s.kind = SortKind::Bool;
      } else {
        s.kind = opt_.prefer_int ? SortKind::Int : SortKind::Rat;
      }
      p_.symbols.vars.emplace_back(n, s);
      p_.add_var(n, s.kind, s.kind == SortKind::Enum ? p_.find_enum(s.enum_name) : -1);
    }
  }

  std::vector<std::string> constants_order() const {
    std::vector<std::string> out;
    for (const auto& n : constants_)
      out.push_back(n);  // std::set: deterministic (sorted) order
    return out;
  }

  bool func_ret_mentions(const std::string& sort) const {
    for (const auto& [n, sig] : p_.symbols.funcs)
      if (sig.ret_sort == sort) return true;
    for (const auto& [n, fu] : func_usage_)
      if (fu.enum_ret.count(sort)) return true;
    return false;
  }

  void collect_string_literals(EnumInfo& e) {
    std::function<void(const Expr&)> walk = [&](const Expr& x) {
      if (x.kind == ExprKind::StrLit) {
        int s = p_.intern_symbol(x.sym);
        if (std::find(e.members.begin(), e.members.end(), s) == e.members.end())
          e.members.push_back(s);
      }
      for (const auto& a : x.args) walk(a);
    };
    for (const auto& c : fs_.constraints) walk(c);
    for (const auto& [q, l] : fs_.queries) walk(q);
    for (const auto& [n, rhs] : fs_.aliases) walk(rhs);
  }

  // ---- formula construction ---------------------------------------------------

  using GroundMap = std::map<std::string, int>;  // binder var -> symbol id

  int universe_id() { return p_.find_enum("@universe"); }

  const EnumInfo& enum_for_binder(const Binder& b) {
    if (b.domain.empty()) return p_.enums[universe_id()];
    int id = p_.find_enum(b.domain);
    if (id < 0) throw LowerError(LowerErrorKind::UnknownDomain, "unknown domain '" + b.domain + "'");
    return p_.enums[id];
  }

  VarId ground_app(const std::string& fn, const std::vector<int>& arg_syms) {
    const FuncSig* sig = p_.symbols.find_func(fn);
    if (!sig) throw LowerError(LowerErrorKind::Sort, "unknown function '" + fn + "'");
    if (sig->arg_sorts.size() != arg_syms.size())
      throw LowerError(LowerErrorKind::Arity, "arity mismatch calling '" + fn + "'");
    for (size_t i = 0; i < arg_syms.size(); ++i) {
      const std::string& as = sig->arg_sorts[i];
      if (builtin_sort(as)) continue;
      int eid = p_.find_enum(as);
      if (eid < 0) throw LowerError(LowerErrorKind::UnknownDomain, "unknown domain '" + as + "'");
      const auto& mem = p_.enums[eid].members;
      if (as != "@universe" &&
          std::find(mem.begin(), mem.end(), arg_syms[i]) == mem.end())
        throw LowerError(LowerErrorKind::Sort,
                         "'" + p_.sym_pool[arg_syms[i]] + "' is not a member of " + as);
    }
    std::string name = fn + "(";
    for (size_t i = 0; i < arg_syms.size(); ++i) {
      if (i) name += ",";
      name += p_.sym_pool[arg_syms[i]];
    }
    name += ")";
    VarId v = p_.find_var(name);
    if (v >= 0) return v;
    SortKind sk;
    int eid = -1;
    if (sig->ret_sort == "bool") {
      sk = SortKind::Bool;
    } else if (sig->ret_sort == "int") {
      sk = SortKind::Int;
    } else if (sig->ret_sort == "rat") {
      sk = SortKind::Rat;
    } else {
      sk = SortKind::Enum;
      eid = p_.find_enum(sig->ret_sort);
      if (eid < 0)
        throw LowerError(LowerErrorKind::UnknownDomain, "unknown sort '" + sig->ret_sort + "'");
    }
    return p_.add_var(std::move(name), sk, eid);
  }

  /// Finds a func-app argument that refers to an enum-sorted variable; case
  /// splitting over its members turns every application ground.
  const Expr* find_enum_var_arg(const Expr& e, const GroundMap& ground) {
    if (e.kind == ExprKind::Call) {
      for (const auto& a : e.args) {
        if (a.kind == ExprKind::SymbolRef && !ground.count(a.sym)) {
          VarId v = p_.find_var(a.sym);
          if (v >= 0 && p_.vars[v].sort == SortKind::Enum) return &a;
        }
        if (const Expr* r = find_enum_var_arg(a, ground)) return r;
      }
    }
    for (const auto& a : e.args)
      if (const Expr* r = find_enum_var_arg(a, ground)) return r;
    return nullptr;
  }

  static Expr substitute_ref(const Expr& e, const std::string& name, const std::string& repl) {
    Expr out = e;
    if (out.kind == ExprKind::SymbolRef && out.sym == name) {
      out.sym = repl;
      return out;
    }
    for (auto& a : out.args) a = substitute_ref(a, name, repl);
    return out;
  }

  /// Builds an atomic comparison / application after case-splitting all
  /// enum-variable arguments inside it.
  Formula build_atom(const Expr& e, const GroundMap& ground) {
    if (const Expr* ev = find_enum_var_arg(e, ground)) {
      VarId v = p_.find_var(ev->sym);
      const EnumInfo& info = p_.enums[p_.vars[v].enum_id];
      std::vector<Formula> branches;
      for (int sym : info.members) {
        Expr inst = substitute_ref(e, ev->sym, p_.sym_pool[sym]);
        std::vector<Formula> parts;
        parts.push_back(Formula::enum_eq(v, sym));
        parts.push_back(build_atom(inst, ground));
        branches.push_back(Formula::make_and(std::move(parts)));
      }
      return Formula::make_or(std::move(branches));
    }
    return build_atom_ground(e, ground);
  }

  Formula build_atom_ground(const Expr& e, const GroundMap& ground);

  int resolve_constant(const Expr& e, const GroundMap& ground) {
    if (e.kind == ExprKind::StrLit) return p_.intern_symbol(e.sym);
    if (e.kind == ExprKind::SymbolRef) {
      auto g = ground.find(e.sym);
      if (g != ground.end()) return g->second;
      if (constants_.count(e.sym) && !is_name_var(e.sym)) return p_.intern_symbol(e.sym);
    }
    return -1;
  }

  /// -1 when the expr is not an enum-sorted variable reference.
  VarId resolve_enum_var(const Expr& e) {
    if (e.kind != ExprKind::SymbolRef) return -1;
    VarId v = p_.find_var(e.sym);
    if (v >= 0 && p_.vars[v].sort == SortKind::Enum) return v;
    return -1;
  }

  RatFunc build_num(const Expr& e, const GroundMap& ground) {
    switch (e.kind) {
      case ExprKind::NumLit:
        return RatFunc::constant(e.num);
      case ExprKind::SymbolRef: {
        if (ground.count(e.sym))
          throw LowerError(LowerErrorKind::Sort,
                           "enum member '" + e.sym + "' used in arithmetic");
        VarId v = p_.find_var(e.sym);
        if (v < 0)
          throw LowerError(LowerErrorKind::Sort, "'" + e.sym + "' is not a numeric variable");
        if (p_.vars[v].sort != SortKind::Int && p_.vars[v].sort != SortKind::Rat)
          throw LowerError(LowerErrorKind::Sort, "'" + e.sym + "' is not numeric");
        return RatFunc::variable(v);
      }
      case ExprKind::Call: {
        std::vector<int> syms;
        for (const auto& a : e.args) {
          int s = resolve_constant(a, ground);
          if (s < 0)
            throw LowerError(LowerErrorKind::Sort,
                             "argument of '" + e.sym + "' is not a constant");
          syms.push_back(s);
        }
        VarId v = ground_app(e.sym, syms);
        if (p_.vars[v].sort != SortKind::Int && p_.vars[v].sort != SortKind::Rat)
          throw LowerError(LowerErrorKind::Sort, "'" + e.sym + "' does not return a number");
        return RatFunc::variable(v);
      }
      case ExprKind::BinOp:
        switch (e.bin_op) {
          case BinOpKind::Add: return build_num(e.args[0], ground) + build_num(e.args[1], ground);
          case BinOpKind::Sub: return build_num(e.args[0], ground) - build_num(e.args[1], ground);
          case BinOpKind::Mul: return build_num(e.args[0], ground) * build_num(e.args[1], ground);
          case BinOpKind::Div: return build_num(e.args[0], ground) / build_num(e.args[1], ground);
          default:
            throw LowerError(LowerErrorKind::Sort, "comparison used as a number");
        }
      default:
        throw LowerError(LowerErrorKind::Unsupported, "unsupported numeric expression");
    }
  }

  /// p/q `op` 0 as a formula. Symbolic denominators add a nonzero side
  /// condition; order comparisons split on the denominator sign.
  Formula ratfunc_cmp(CmpOp op, const RatFunc& rf) {
    if (rf.den_is_constant()) {
      Rat d = rf.den.constant_value();
      if (d == 0) throw EvalError("division by zero");
      CmpOp effective = op;
      if (d < 0) {
        if (op == CmpOp::Le) effective = CmpOp::Ge;
        else if (op == CmpOp::Lt) effective = CmpOp::Gt;
        else if (op == CmpOp::Ge) effective = CmpOp::Le;
        else if (op == CmpOp::Gt) effective = CmpOp::Lt;
      }
      return make_num_cmp(effective, rf.num);
    }
    Formula den_pos = make_num_cmp(CmpOp::Gt, rf.den);
    Formula den_neg = make_num_cmp(CmpOp::Lt, rf.den);
    Formula den_nonzero = make_num_cmp(CmpOp::Ne, rf.den);
    switch (op) {
      case CmpOp::Eq:
        return Formula::make_and({make_num_cmp(CmpOp::Eq, rf.num), den_nonzero});
      case CmpOp::Ne:
        return Formula::make_and({make_num_cmp(CmpOp::Ne, rf.num), den_nonzero});
      case CmpOp::Le:
        return Formula::make_or({Formula::make_and({den_pos, make_num_cmp(CmpOp::Le, rf.num)}),
                                 Formula::make_and({den_neg, make_num_cmp(CmpOp::Ge, rf.num)})});
      case CmpOp::Lt:
        return Formula::make_or({Formula::make_and({den_pos, make_num_cmp(CmpOp::Lt, rf.num)}),
                                 Formula::make_and({den_neg, make_num_cmp(CmpOp::Gt, rf.num)})});
      case CmpOp::Ge:
        return Formula::make_or({Formula::make_and({den_pos, make_num_cmp(CmpOp::Ge, rf.num)}),
                                 Formula::make_and({den_neg, make_num_cmp(CmpOp::Le, rf.num)})});
      case CmpOp::Gt:
        return Formula::make_or({Formula::make_and({den_pos, make_num_cmp(CmpOp::Gt, rf.num)}),
                                 Formula::make_and({den_neg, make_num_cmp(CmpOp::Lt, rf.num)})});
    }
    throw LowerError(LowerErrorKind::Unsupported, "bad comparison");
  }

  /// Normalizes Ge/Gt to Le/Lt so the solver core sees {Eq, Ne, Le, Lt} only.
  static Formula make_num_cmp(CmpOp op, const Poly& p) {
    if (op == CmpOp::Ge) return Formula::num_cmp(CmpOp::Le, p.negated());
    if (op == CmpOp::Gt) return Formula::num_cmp(CmpOp::Lt, p.negated());
    if (p.is_constant()) return Formula::constant(cmp_holds(op, p.constant_value()));
    return Formula::num_cmp(op, p);
  }

  static CmpOp to_cmp(BinOpKind op) {
    switch (op) {
      case BinOpKind::Eq: return CmpOp::Eq;
      case BinOpKind::Ne: return CmpOp::Ne;
      case BinOpKind::Lt: return CmpOp::Lt;
      case BinOpKind::Le: return CmpOp::Le;
      case BinOpKind::Gt: return CmpOp::Gt;
      case BinOpKind::Ge: return CmpOp::Ge;
      default:
        throw LowerError(LowerErrorKind::Sort, "arithmetic operator used as comparison");
    }
  }

  bool expr_enumish(const Expr& e, const GroundMap& ground) {
    if (e.kind == ExprKind::StrLit) return true;
    if (e.kind == ExprKind::SymbolRef) {
      if (ground.count(e.sym)) return true;
      if (resolve_enum_var(e) >= 0) return true;
      if (constants_.count(e.sym) && !is_name_var(e.sym)) return true;
      return false;
    }
    if (e.kind == ExprKind::Call) {
      const FuncSig* sig = p_.symbols.find_func(e.sym);
      return sig && !builtin_sort(sig->ret_sort);
    }
    return false;
  }

  bool expr_boolish(const Expr& e) {
    if (e.kind == ExprKind::BoolLit || e.kind == ExprKind::Logic ||
        e.kind == ExprKind::ForAll)
      return true;
    if (e.kind == ExprKind::SymbolRef) {
      VarId v = p_.find_var(e.sym);
      return v >= 0 && p_.vars[v].sort == SortKind::Bool;
    }
    if (e.kind == ExprKind::Call) {
      const FuncSig* sig = p_.symbols.find_func(e.sym);
      return sig && sig->ret_sort == "bool";
    }
    if (e.kind == ExprKind::BinOp)
      return e.bin_op == BinOpKind::Eq || e.bin_op == BinOpKind::Ne ||
             e.bin_op == BinOpKind::Lt || e.bin_op == BinOpKind::Le ||
             e.bin_op == BinOpKind::Gt || e.bin_op == BinOpKind::Ge;
    return false;
  }

  Formula build_bool(const Expr& e, const GroundMap& ground) {
    switch (e.kind) {
      case ExprKind::BoolLit:
        return Formula::constant(e.bval);
      case ExprKind::Logic: {
        std::vector<Formula> kids;
        for (const auto& a : e.args) kids.push_back(build_bool(a, ground));
        switch (e.logic_op) {
          case LogicKind::And: return Formula::make_and(std::move(kids));
          case LogicKind::Or: return Formula::make_or(std::move(kids));
          case LogicKind::Not: return Formula::make_not(std::move(kids[0]));
          case LogicKind::Implies:
            return Formula::make_implies(std::move(kids[0]), std::move(kids[1]));
        }
        break;
      }
      case ExprKind::ForAll: {
        grounded_ = true;
        std::vector<Formula> kids;
        ground_binders(e.binders, 0, ground, e.args[0], kids);
        return Formula::make_and(std::move(kids));
      }
      case ExprKind::SymbolRef: {
        if (ground.count(e.sym))
          throw LowerError(LowerErrorKind::Sort, "enum member used as a proposition");
        VarId v = p_.find_var(e.sym);
        if (v < 0 || p_.vars[v].sort != SortKind::Bool)
          throw LowerError(LowerErrorKind::Sort,
                           "'" + e.sym + "' is not a boolean variable");
        return Formula::bool_var(v);
      }
      case ExprKind::Call:
      case ExprKind::BinOp:
        return build_atom(e, ground);
      case ExprKind::Count:
        throw LowerError(LowerErrorKind::Unsupported,
                         "Count must be compared against a constant");
      default:
        throw LowerError(LowerErrorKind::Unsupported, "expression is not a formula");
    }
    throw LowerError(LowerErrorKind::Unsupported, "expression is not a formula");
  }

  void ground_binders(const std::vector<Binder>& binders, size_t i, const GroundMap& ground,
                      const Expr& body, std::vector<Formula>& out) {
    if (i == binders.size()) {
      out.push_back(build_bool(body, ground));
      return;
    }
    const EnumInfo& info = enum_for_binder(binders[i]);
    for (int sym : info.members) {
      GroundMap g = ground;
      g[binders[i].var] = sym;
      ground_binders(binders, i + 1, g, body, out);
    }
  }

  Formula build_constraint(const Expr& e) {
    // v = next(domain, pred): least-index element satisfying pred.
    if (e.kind == ExprKind::BinOp && e.bin_op == BinOpKind::Eq &&
        e.args[0].kind == ExprKind::SymbolRef && e.args[1].kind == ExprKind::NextOf) {
      grounded_ = true;
      const Expr& nx = e.args[1];
      VarId v = resolve_enum_var(e.args[0]);
      if (v < 0)
        throw LowerError(LowerErrorKind::Sort,
                         "'" + e.args[0].sym + "' must be an enum variable");
      const EnumInfo& info = enum_for_binder(nx.binders[0]);
      std::vector<Formula> branches;
      for (size_t i = 0; i < info.members.size(); ++i) {
        GroundMap g;
        g[nx.binders[0].var] = info.members[i];
        std::vector<Formula> parts;
        parts.push_back(Formula::enum_eq(v, info.members[i]));
        parts.push_back(build_bool(nx.args[0], g));
        for (size_t j = 0; j < i; ++j) {
          GroundMap gj;
          gj[nx.binders[0].var] = info.members[j];
          parts.push_back(Formula::make_not(build_bool(nx.args[0], gj)));
        }
        branches.push_back(Formula::make_and(std::move(parts)));
      }
      return Formula::make_or(std::move(branches));
    }
    return build_bool(e, {});
  }

  void lower_queries() {
    int fresh = 0;
    for (const auto& [qe, label] : fs_.queries) {
      Expr q = qe;
      if (q.kind == ExprKind::SymbolRef) {
        for (const auto& [n, rhs] : fs_.aliases)
          if (n == q.sym) {
            q = rhs;
            break;
          }
      }
      Query out;
      out.label = label;
      if (expr_boolish(q)) {
        out.k = Query::K::Bool;
        out.form = build_bool(q, {});
      } else if (VarId v = resolve_enum_var(q); v >= 0) {
        out.k = Query::K::Enum;
        out.evar = v;
      } else if (q.kind == ExprKind::Call && expr_enumish(q, {})) {
        const FuncSig* sig = p_.symbols.find_func(q.sym);
        int eid = p_.find_enum(sig->ret_sort);
        if (eid < 0)
          throw LowerError(LowerErrorKind::UnknownDomain, "unknown sort '" + sig->ret_sort + "'");
        std::string fresh_name = "@query" + std::to_string(fresh++);
        VarId qv = p_.add_var(fresh_name, SortKind::Enum, eid);
        Expr synth = Expr::binop(BinOpKind::Eq, Expr::ref(fresh_name), q);
        p_.phi.push_back(build_atom(synth, {}));
        out.k = Query::K::Enum;
        out.evar = qv;
      } else {
        RatFunc rf = build_num(q, {});
        if (rf.den_is_constant()) {
          rf.normalize();
          out.k = Query::K::Num;
          out.num = rf.num;
        } else {
          std::string fresh_name = "@query" + std::to_string(fresh++);
          VarId qv = p_.add_var(fresh_name, SortKind::Rat, -1);
          Poly defining = Poly::variable(qv) * rf.den - rf.num;
          p_.phi.push_back(Formula::num_cmp(CmpOp::Eq, defining));
          p_.phi.push_back(Formula::num_cmp(CmpOp::Ne, rf.den));
          out.k = Query::K::Num;
          out.num = Poly::variable(qv);
        }
      }
      p_.queries.push_back(std::move(out));
    }
  }

  struct FuncUsage {
    int arity = -1;
    bool bool_ret = false;
    bool num_ret = false;
    std::set<std::string> enum_ret;
  };

  const spec::FormalSpec& fs_;
  LowerOptions opt_;
  SatProblem p_;
  std::set<std::string> assigned_;
  std::set<std::string> declared_vars_;
  std::set<std::string> constants_;
  std::map<std::string, NameEvidence> usage_;
  std::map<std::string, FuncUsage> func_usage_;
  bool str_literals_used_ = false;
  bool grounded_ = false;
};

inline Formula Lowerer::build_atom_ground(const Expr& e, const GroundMap& ground) {
  if (e.kind == ExprKind::Call) {
    std::vector<int> syms;
    for (const auto& a : e.args) {
      int s = resolve_constant(a, ground);
      if (s < 0)
        throw LowerError(LowerErrorKind::Sort, "argument of '" + e.sym + "' is not a constant");
      syms.push_back(s);
    }
    VarId v = ground_app(e.sym, syms);
    if (p_.vars[v].sort != SortKind::Bool)
      throw LowerError(LowerErrorKind::Sort, "'" + e.sym + "' is not a predicate");
    return Formula::bool_var(v);
  }
  if (e.kind != ExprKind::BinOp)
    throw LowerError(LowerErrorKind::Unsupported, "unsupported atom");

  const Expr& l = e.args[0];
  const Expr& r = e.args[1];
  CmpOp op = to_cmp(e.bin_op);

  if (l.kind == ExprKind::Count || r.kind == ExprKind::Count) {
    grounded_ = true;
    const Expr& cnt = l.kind == ExprKind::Count ? l : r;
    const Expr& other = l.kind == ExprKind::Count ? r : l;
    if (l.kind != ExprKind::Count) {
      // k op Count  ==  Count op' k with the comparison mirrored
      if (op == CmpOp::Le) op = CmpOp::Ge;
      else if (op == CmpOp::Lt) op = CmpOp::Gt;
      else if (op == CmpOp::Ge) op = CmpOp::Le;
      else if (op == CmpOp::Gt) op = CmpOp::Lt;
    }
    RatFunc bound = build_num(other, ground);
    bound.normalize();
    if (!bound.num.is_constant())
      throw LowerError(LowerErrorKind::Unsupported,
                       "Count must be compared against a constant");
    Rat b = bound.num.constant_value();
    if (!is_integer(b))
      throw LowerError(LowerErrorKind::Unsupported, "Count bound must be an integer");
    for (const auto& bn : cnt.binders)
      if (bn.domain.empty())
        throw LowerError(LowerErrorKind::UnknownDomain, "Count binder needs a domain");
    std::vector<Formula> kids;
    ground_binders(cnt.binders, 0, ground, cnt.args[0], kids);
    return Formula::card(op, static_cast<long>(rat_floor(b)), std::move(kids));
  }

  bool le = expr_enumish(l, ground), re = expr_enumish(r, ground);
  if (le || re) {
    if (op != CmpOp::Eq && op != CmpOp::Ne)
      throw LowerError(LowerErrorKind::Sort, "enum values only support equality");
    auto resolve_side = [&](const Expr& s) -> std::pair<VarId, int> {
      int sym = resolve_constant(s, ground);
      if (sym >= 0) return {-1, sym};
      VarId v = resolve_enum_var(s);
      if (v >= 0) return {v, -1};
      if (s.kind == ExprKind::Call) {
        std::vector<int> syms;
        for (const auto& a : s.args) {
          int cs = resolve_constant(a, ground);
          if (cs < 0)
            throw LowerError(LowerErrorKind::Sort,
                             "argument of '" + s.sym + "' is not a constant");
          syms.push_back(cs);
        }
        VarId av = ground_app(s.sym, syms);
        if (p_.vars[av].sort != SortKind::Enum)
          throw LowerError(LowerErrorKind::Sort, "'" + s.sym + "' does not return an enum value");
        return {av, -1};
      }
      throw LowerError(LowerErrorKind::Sort, "expression is not an enum value");
    };
    auto [lv, lsym] = resolve_side(l);
    auto [rv, rsym] = resolve_side(r);
    Formula eq;
    if (lv < 0 && rv < 0) {
      eq = Formula::constant(lsym == rsym);
    } else if (lv >= 0 && rv >= 0) {
      eq = Formula::enum_eq_var(lv, rv);
    } else {
      VarId v = lv >= 0 ? lv : rv;
      int sym = lv >= 0 ? rsym : lsym;
      const auto& mem = p_.enums[p_.vars[v].enum_id].members;
      if (std::find(mem.begin(), mem.end(), sym) == mem.end())
        eq = Formula::constant(false);  // symbol outside the variable's domain
      else
        eq = Formula::enum_eq(v, sym);
    }
    return op == CmpOp::Eq ? eq : Formula::make_not(std::move(eq));
  }

  if (expr_boolish(l) || expr_boolish(r)) {
    if (op != CmpOp::Eq && op != CmpOp::Ne)
      throw LowerError(LowerErrorKind::Sort, "booleans only support equality");
    Formula a = build_bool(l, ground);
    Formula b = build_bool(r, ground);
    Formula iff = Formula::make_and(
        {Formula::make_implies(a, b), Formula::make_implies(std::move(b), std::move(a))});
    return op == CmpOp::Eq ? iff : Formula::make_not(std::move(iff));
  }

  RatFunc diff = build_num(l, ground) - build_num(r, ground);
  return ratfunc_cmp(op, diff);
}

}  // namespace detail

using detail::Lowerer;

/// Lowers an extracted specification into the problem triple. All declared
/// and implicit symbols land in the symbol table; quantifiers and list
/// queries are grounded; numeric literals stay exact rationals.
inline SatProblem lower_to_problem(const spec::FormalSpec& fs, const LowerOptions& opt = {}) {
  return Lowerer(fs, opt).run();
}

inline SatProblem lower_spec_text(const std::string& text, const LowerOptions& opt = {}) {
  return lower_to_problem(spec::extract_formal(spec::parse_spec_text(text)), opt);
}

inline Theory infer_theory(const SatProblem& p) { return Lowerer::infer(p); }

}  // namespace satkit::logic

#endif  // SATKIT_LOGIC_LOWER_HPP
