#ifndef SATKIT_SOLVER_ENGINE_HPP
#define SATKIT_SOLVER_ENGINE_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "satkit/logic/core.hpp"
#include "satkit/logic/transform.hpp"
#include "satkit/solver/linear.hpp"
#include "satkit/solver/outcome.hpp"

namespace satkit::solver {

namespace detail {

using logic::Formula;
using logic::SatProblem;
using logic::SortKind;

enum class Tri { T, F, U };

struct EngineError : std::runtime_error {
  explicit EngineError(const std::string& m) : std::runtime_error(m) {}
};

/// Search core: branch on boolean variables, enum variables and numeric-atom
/// truth values with unit-style propagation on the formula tree; at a full
/// propositional assignment, decide the asserted numeric atoms with the
/// linear module (plus univariate rational-root handling for nonlinear
/// equalities). Single-threaded; owns all of its state.
class Engine {
 public:
  Engine(const SatProblem& p, BudgetCtx& budget) : p_(p), budget_(budget) {
    for (size_t v = 0; v < p_.vars.size(); ++v) {
      if (p_.vars[v].sort == SortKind::Int) int_vars_.insert(static_cast<VarId>(v));
    }
  }

  struct Result {
    enum class K { Sat, Unsat };
    K k = K::Unsat;
    std::vector<Value> values;  // per VarId, total, when Sat
  };

  /// Finds a model of p.phi plus `extra`, or reports Unsat. Throws
  /// TimeoutSignal on budget exhaustion and logic::EvalError on unsupported
  /// arithmetic.
  Result find_model(const std::vector<Formula>& extra) {
    State s;
    s.bval.assign(p_.vars.size(), -1);
    s.eval.assign(p_.vars.size(), -1);
    s.excl.assign(p_.vars.size(), {});
    formulas_.clear();
    for (const auto& f : p_.phi) push_formula(logic::simplify(f));
    for (const auto& f : extra) push_formula(logic::simplify(f));
    return search(s);
  }

 private:
  struct AtomKey {
    logic::CmpOp op;
    logic::Poly poly;
    auto operator<=>(const AtomKey&) const = default;
  };

  struct State {
    std::vector<signed char> bval;  // -1 unset, 0, 1
    std::vector<int> eval;          // -1 unset, else symbol id
    std::vector<std::set<int>> excl;
    std::map<AtomKey, bool> atoms;
  };

  void push_formula(Formula f) {
    if (f.k == Formula::K::And) {
      for (auto& k : f.kids) push_formula(std::move(k));
    } else {
      formulas_.push_back(std::move(f));
    }
  }

  /// Scale so the leading coefficient has magnitude one; equalities also fix
  /// the sign, so p=0 and -p=0 share a key.
  static AtomKey normalize(logic::CmpOp op, const logic::Poly& poly) {
    Rat lead;
    for (const auto& [m, c] : poly.terms()) {
      if (!m.vars.empty()) {
        lead = c;
        break;
      }
    }
    if (lead == 0) return {op, poly};
    if (op == logic::CmpOp::Eq || op == logic::CmpOp::Ne)
      return {op, poly.scaled(Rat(1) / lead)};
    Rat mag = lead < 0 ? -lead : lead;
    return {op, poly.scaled(Rat(1) / mag)};
  }

  const std::vector<int>& members_of(VarId v) const {
    return p_.enums[p_.vars[v].enum_id].members;
  }

  Tri eval_formula(const Formula& f, const State& s) const {
    using K = Formula::K;
    switch (f.k) {
      case K::True: return Tri::T;
      case K::False: return Tri::F;
      case K::BoolVar:
        return s.bval[f.var] < 0 ? Tri::U : (s.bval[f.var] ? Tri::T : Tri::F);
      case K::EnumEq: {
        if (!f.rhs_is_var) {
          if (s.eval[f.var] >= 0) return s.eval[f.var] == f.member ? Tri::T : Tri::F;
          if (s.excl[f.var].count(f.member)) return Tri::F;
          return Tri::U;
        }
        if (s.eval[f.var] >= 0 && s.eval[f.var2] >= 0)
          return s.eval[f.var] == s.eval[f.var2] ? Tri::T : Tri::F;
        if (s.eval[f.var] >= 0 && s.excl[f.var2].count(s.eval[f.var])) return Tri::F;
        if (s.eval[f.var2] >= 0 && s.excl[f.var].count(s.eval[f.var2])) return Tri::F;
        return Tri::U;
      }
      case K::NumCmp: {
        if (f.poly.is_constant())
          return logic::cmp_holds(f.op, f.poly.constant_value()) ? Tri::T : Tri::F;
        auto it = s.atoms.find(normalize(f.op, f.poly));
        if (it == s.atoms.end()) return Tri::U;
        return it->second ? Tri::T : Tri::F;
      }
      case K::And: {
        bool unknown = false;
        for (const auto& k : f.kids) {
          Tri t = eval_formula(k, s);
          if (t == Tri::F) return Tri::F;
          if (t == Tri::U) unknown = true;
        }
        return unknown ? Tri::U : Tri::T;
      }
      case K::Or: {
        bool unknown = false;
        for (const auto& k : f.kids) {
          Tri t = eval_formula(k, s);
          if (t == Tri::T) return Tri::T;
          if (t == Tri::U) unknown = true;
        }
        return unknown ? Tri::U : Tri::F;
      }
      case K::Not: {
        Tri t = eval_formula(f.kids[0], s);
        return t == Tri::U ? Tri::U : (t == Tri::T ? Tri::F : Tri::T);
      }
      case K::Implies: {
        Tri a = eval_formula(f.kids[0], s);
        Tri b = eval_formula(f.kids[1], s);
        if (a == Tri::F || b == Tri::T) return Tri::T;
        if (a == Tri::T && b == Tri::F) return Tri::F;
        return Tri::U;
      }
      case K::Card: {
        long t = 0, u = 0;
        for (const auto& k : f.kids) {
          Tri x = eval_formula(k, s);
          if (x == Tri::T) ++t;
          if (x == Tri::U) ++u;
        }
        bool can_hold = false, must_hold = true;
        for (long extra = 0; extra <= u; ++extra) {
          bool h = logic::cmp_holds_count(f.op, t + extra, f.bound);
          can_hold |= h;
          must_hold &= h;
        }
        if (!can_hold) return Tri::F;
        if (must_hold) return Tri::T;
        return Tri::U;
      }
    }
    return Tri::U;
  }

  // force(f, want): make f evaluate to `want`, assigning units where forced.
  // Returns false on conflict; sets `changed` when an assignment was made.
  bool force(const Formula& f, bool want, State& s, bool& changed) {
    using K = Formula::K;
    Tri now = eval_formula(f, s);
    if (now != Tri::U) return (now == Tri::T) == want;
    switch (f.k) {
      case K::BoolVar:
        s.bval[f.var] = want ? 1 : 0;
        changed = true;
        return true;
      case K::EnumEq: {
        if (!f.rhs_is_var) {
          if (want) return assign_enum(f.var, f.member, s, changed);
          return exclude_enum(f.var, f.member, s, changed);
        }
        if (s.eval[f.var] >= 0)
          return want ? assign_enum(f.var2, s.eval[f.var], s, changed)
                      : exclude_enum(f.var2, s.eval[f.var], s, changed);
        if (s.eval[f.var2] >= 0)
          return want ? assign_enum(f.var, s.eval[f.var2], s, changed)
                      : exclude_enum(f.var, s.eval[f.var2], s, changed);
        return true;  // nothing forced yet
      }
      case K::NumCmp: {
        AtomKey key = normalize(f.op, f.poly);
        auto it = s.atoms.find(key);
        if (it != s.atoms.end()) return it->second == want;
        s.atoms.emplace(std::move(key), want);
        changed = true;
        return true;
      }
      case K::Not:
        return force(f.kids[0], !want, s, changed);
      case K::And: {
        if (want) {
          for (const auto& k : f.kids)
            if (!force(k, true, s, changed)) return false;
          return true;
        }
        // And must be false: only forcible when a single kid is undecided.
        const Formula* open = nullptr;
        for (const auto& k : f.kids) {
          Tri t = eval_formula(k, s);
          if (t == Tri::F) return true;
          if (t == Tri::U) {
            if (open) return true;  // more than one open kid: no unit
            open = &k;
          }
        }
        if (!open) return false;  // all true, cannot be false
        return force(*open, false, s, changed);
      }
      case K::Or: {
        if (!want) {
          for (const auto& k : f.kids)
            if (!force(k, false, s, changed)) return false;
          return true;
        }
        const Formula* open = nullptr;
        for (const auto& k : f.kids) {
          Tri t = eval_formula(k, s);
          if (t == Tri::T) return true;
          if (t == Tri::U) {
            if (open) return true;
            open = &k;
          }
        }
        if (!open) return false;
        return force(*open, true, s, changed);
      }
      case K::Implies: {
        if (want) {
          Tri a = eval_formula(f.kids[0], s);
          Tri b = eval_formula(f.kids[1], s);
          if (a == Tri::T) return force(f.kids[1], true, s, changed);
          if (b == Tri::F) return force(f.kids[0], false, s, changed);
          return true;
        }
        return force(f.kids[0], true, s, changed) && force(f.kids[1], false, s, changed);
      }
      case K::Card: {
        logic::CmpOp op = want ? f.op : logic::negate_cmp(f.op);
        long t = 0, u = 0;
        for (const auto& k : f.kids) {
          Tri x = eval_formula(k, s);
          if (x == Tri::T) ++t;
          if (x == Tri::U) ++u;
        }
        // If every open kid must take one polarity for the count to satisfy
        // the comparison, force them.
        bool all_true_ok = logic::cmp_holds_count(op, t + u, f.bound);
        bool all_false_ok = logic::cmp_holds_count(op, t, f.bound);
        bool some_mid_ok = false;
        for (long extra = 1; extra < u; ++extra)
          some_mid_ok |= logic::cmp_holds_count(op, t + extra, f.bound);
        if (!all_true_ok && !all_false_ok && !some_mid_ok) return false;
        if (u == 0) return logic::cmp_holds_count(op, t, f.bound);
        if (all_true_ok && !all_false_ok && !some_mid_ok) {
          for (const auto& k : f.kids)
            if (eval_formula(k, s) == Tri::U && !force(k, true, s, changed)) return false;
          return true;
        }
        if (all_false_ok && !all_true_ok && !some_mid_ok) {
          for (const auto& k : f.kids)
            if (eval_formula(k, s) == Tri::U && !force(k, false, s, changed)) return false;
          return true;
        }
        return true;
      }
      default:
        return true;
    }
  }

  bool assign_enum(VarId v, int sym, State& s, bool& changed) {
    if (s.eval[v] >= 0) return s.eval[v] == sym;
    if (s.excl[v].count(sym)) return false;
    const auto& mem = members_of(v);
    if (std::find(mem.begin(), mem.end(), sym) == mem.end()) return false;
    s.eval[v] = sym;
    changed = true;
    return true;
  }

  bool exclude_enum(VarId v, int sym, State& s, bool& changed) {
    if (s.eval[v] >= 0) return s.eval[v] != sym;
    if (s.excl[v].count(sym)) return true;
    s.excl[v].insert(sym);
    changed = true;
    // one member left: forced
    const auto& mem = members_of(v);
    int last = -1, open = 0;
    for (int m : mem)
      if (!s.excl[v].count(m)) {
        ++open;
        last = m;
      }
    if (open == 0) return false;
    if (open == 1) return assign_enum(v, last, s, changed);
    return true;
  }

  bool propagate(State& s) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& f : formulas_) {
        Tri t = eval_formula(f, s);
        if (t == Tri::F) return false;
        if (t == Tri::T) continue;
        if (!force(f, true, s, changed)) return false;
      }
    }
    return true;
  }

  /// First branchable point in a deterministic traversal of the open
  /// formulas: an unassigned bool/enum variable or an undecided numeric atom.
  struct BranchPoint {
    enum class K { None, Bool, Enum, Atom } k = K::None;
    VarId var = -1;
    AtomKey atom{logic::CmpOp::Eq, logic::Poly()};
  };

  void find_branch(const Formula& f, const State& s, BranchPoint& bp) const {
    if (bp.k != BranchPoint::K::None) return;
    using K = Formula::K;
    if (eval_formula(f, s) != Tri::U) return;
    switch (f.k) {
      case K::BoolVar:
        bp.k = BranchPoint::K::Bool;
        bp.var = f.var;
        return;
      case K::EnumEq:
        if (s.eval[f.var] < 0) {
          bp.k = BranchPoint::K::Enum;
          bp.var = f.var;
          return;
        }
        if (f.rhs_is_var && s.eval[f.var2] < 0) {
          bp.k = BranchPoint::K::Enum;
          bp.var = f.var2;
          return;
        }
        return;
      case K::NumCmp:
        bp.k = BranchPoint::K::Atom;
        bp.atom = normalize(f.op, f.poly);
        return;
      default:
        for (const auto& k : f.kids) {
          find_branch(k, s, bp);
          if (bp.k != BranchPoint::K::None) return;
        }
        return;
    }
  }

  Result search(State s) {
    if (!propagate(s)) return Result{Result::K::Unsat, {}};
    BranchPoint bp;
    for (const auto& f : formulas_) {
      find_branch(f, s, bp);
      if (bp.k != BranchPoint::K::None) break;
    }
    switch (bp.k) {
      case BranchPoint::K::None:
        return theory_check(s);
      case BranchPoint::K::Bool:
        for (int val : {1, 0}) {
          budget_.decision();
          State s2 = s;
          s2.bval[bp.var] = static_cast<signed char>(val);
          Result r = search(std::move(s2));
          if (r.k == Result::K::Sat) return r;
        }
        return Result{Result::K::Unsat, {}};
      case BranchPoint::K::Enum:
        for (int sym : members_of(bp.var)) {
          if (s.excl[bp.var].count(sym)) continue;
          budget_.decision();
          State s2 = s;
          s2.eval[bp.var] = sym;
          Result r = search(std::move(s2));
          if (r.k == Result::K::Sat) return r;
        }
        return Result{Result::K::Unsat, {}};
      case BranchPoint::K::Atom:
        for (bool val : {true, false}) {
          budget_.decision();
          State s2 = s;
          s2.atoms[bp.atom] = val;
          Result r = search(std::move(s2));
          if (r.k == Result::K::Sat) return r;
        }
        return Result{Result::K::Unsat, {}};
    }
    return Result{Result::K::Unsat, {}};
  }

  // ---- theory layer ------------------------------------------------------

  struct TheoryAtom {
    logic::Poly poly;
    logic::CmpOp op;  // Eq, Le, Lt or Ne
  };

  Result theory_check(const State& s) {
    std::vector<TheoryAtom> asserted;
    for (const auto& [key, truth] : s.atoms) {
      logic::CmpOp op = truth ? key.op : logic::negate_cmp(key.op);
      if (op == logic::CmpOp::Ge)
        asserted.push_back({key.poly.negated(), logic::CmpOp::Le});
      else if (op == logic::CmpOp::Gt)
        asserted.push_back({key.poly.negated(), logic::CmpOp::Lt});
      else
        asserted.push_back({key.poly, op});
    }
    auto assign = decide_theory(asserted, 0);
    if (!assign) return Result{Result::K::Unsat, {}};
    Result r;
    r.k = Result::K::Sat;
    r.values.resize(p_.vars.size());
    for (size_t v = 0; v < p_.vars.size(); ++v) {
      switch (p_.vars[v].sort) {
        case SortKind::Bool:
          r.values[v] = Value(s.bval[v] == 1);
          break;
        case SortKind::Enum: {
          int sym = s.eval[v];
          if (sym < 0) {
            for (int m : members_of(static_cast<VarId>(v)))
              if (!s.excl[v].count(m)) {
                sym = m;
                break;
              }
          }
          if (sym < 0) return Result{Result::K::Unsat, {}};
          r.values[v] = Value::sym(p_.sym_pool[sym]);
          break;
        }
        case SortKind::Int:
        case SortKind::Rat: {
          auto it = assign->find(static_cast<VarId>(v));
          r.values[v] = Value(it == assign->end() ? Rat(0) : it->second);
          break;
        }
      }
    }
    // The returned assignment must satisfy every formula; anything else is
    // an internal inconsistency, surfaced loudly.
    for (const auto& f : formulas_)
      if (!eval_full(f, r.values)) throw EngineError("model does not satisfy formulas");
    return r;
  }

  /// Disequalities split into strict branches; univariate nonlinear
  /// equalities resolve by rational-root search; everything else goes to the
  /// linear module.
  std::optional<std::map<VarId, Rat>> decide_theory(std::vector<TheoryAtom> atoms,
                                                    int depth) {
    for (size_t i = 0; i < atoms.size(); ++i) {
      if (atoms[i].op == logic::CmpOp::Ne) {
        TheoryAtom base = atoms[i];
        budget_.decision();
        for (bool less : {true, false}) {
          std::vector<TheoryAtom> branch = atoms;
          branch[i] = {less ? base.poly : base.poly.negated(), logic::CmpOp::Lt};
          if (auto r = decide_theory(std::move(branch), depth + 1)) return r;
        }
        return std::nullopt;
      }
    }
    for (size_t i = 0; i < atoms.size(); ++i) {
      if (atoms[i].poly.degree() < 2) continue;
      if (atoms[i].op != logic::CmpOp::Eq)
        throw logic::EvalError("nonlinear inequality is not supported");
      std::set<VarId> vs;
      atoms[i].poly.collect_vars(vs);
      if (vs.size() != 1)
        throw logic::EvalError("nonlinear arithmetic over several variables");
      VarId v = *vs.begin();
      for (const Rat& root : rational_roots(atoms[i].poly, v)) {
        budget_.decision();
        if (int_vars_.count(v) && !is_integer(root)) continue;
        std::vector<TheoryAtom> branch;
        for (size_t j = 0; j < atoms.size(); ++j) {
          if (j == i) continue;
          branch.push_back({atoms[j].poly.substituted(v, root), atoms[j].op});
        }
        branch.push_back({logic::Poly::variable(v) - logic::Poly::constant(root),
                          logic::CmpOp::Eq});
        if (auto r = decide_theory(std::move(branch), depth + 1)) return r;
      }
      return std::nullopt;
    }
    std::vector<LinConstraint> cs;
    for (auto& a : atoms) {
      // constants were folded during propagation, but substitution in the
      // nonlinear branch can re-create them
      if (a.poly.is_constant()) {
        if (!logic::cmp_holds(a.op, a.poly.constant_value())) return std::nullopt;
        continue;
      }
      cs.push_back({a.poly, a.op});
    }
    detail::LinearArith lin(int_vars_, budget_);
    return lin.solve(cs);
  }

  /// Candidate rational roots of a univariate polynomial, by the rational
  /// root theorem on the scaled integer form. Only exact rational roots are
  /// relevant: variables range over the rationals.
  std::vector<Rat> rational_roots(const logic::Poly& poly, VarId v) const {
    int deg = poly.degree();
    std::vector<Rat> coef(deg + 1, Rat(0));
    for (const auto& [m, c] : poly.terms()) coef[m.vars.size()] += c;
    BigInt lcm = 1;
    for (const auto& c : coef) lcm = lcm / boost::multiprecision::gcd(lcm, rat_den(c)) * rat_den(c);
    std::vector<BigInt> ic;
    for (const auto& c : coef) ic.push_back(rat_num(c) * (lcm / rat_den(c)));
    int low = 0;
    while (low <= deg && ic[low] == 0) ++low;
    std::vector<Rat> roots;
    if (low > 0) roots.push_back(Rat(0));
    if (low > deg) return roots;  // poly identically representable by x^low factor
    BigInt a0 = ic[low], an = ic[deg];
    if (a0 < 0) a0 = -a0;
    if (an < 0) an = -an;
    const BigInt kLimit = BigInt(1000000000000LL);
    if (a0 > kLimit || an > kLimit)
      throw logic::EvalError("nonlinear coefficients too large for root search");
    auto divisors = [](BigInt n) {
      std::vector<BigInt> ds;
      for (BigInt d = 1; d * d <= n; ++d) {
        if (n % d == 0) {
          ds.push_back(d);
          ds.push_back(n / d);
        }
      }
      return ds;
    };
    auto eval_at = [&](const Rat& x) {
      Rat acc = 0;
      for (int k = deg; k >= 0; --k) acc = acc * x + coef[k];
      return acc;
    };
    std::set<Rat> seen;
    for (const BigInt& pnum : divisors(a0))
      for (const BigInt& qden : divisors(an))
        for (int sign : {1, -1}) {
          Rat cand = Rat(pnum * sign, qden);
          if (!seen.insert(cand).second) continue;
          if (eval_at(cand) == 0) roots.push_back(cand);
        }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    return roots;
  }

 public:
  /// Full evaluation under a total assignment (also used by tests).
  bool eval_full(const Formula& f, const std::vector<Value>& vals) const {
    using K = Formula::K;
    switch (f.k) {
      case K::True: return true;
      case K::False: return false;
      case K::BoolVar: return vals[f.var].as_bool();
      case K::EnumEq:
        if (f.rhs_is_var) return vals[f.var].as_sym() == vals[f.var2].as_sym();
        return vals[f.var].as_sym() == p_.sym_pool[f.member];
      case K::NumCmp: {
        Rat lhs = f.poly.eval([&](VarId v) { return vals[v].as_rat(); });
        return logic::cmp_holds(f.op, lhs);
      }
      case K::And:
        for (const auto& k : f.kids)
          if (!eval_full(k, vals)) return false;
        return true;
      case K::Or:
        for (const auto& k : f.kids)
          if (eval_full(k, vals)) return true;
        return false;
      case K::Not: return !eval_full(f.kids[0], vals);
      case K::Implies: return !eval_full(f.kids[0], vals) || eval_full(f.kids[1], vals);
      case K::Card: {
        long t = 0;
        for (const auto& k : f.kids)
          if (eval_full(k, vals)) ++t;
        return logic::cmp_holds_count(f.op, t, f.bound);
      }
    }
    return false;
  }

 private:
  const SatProblem& p_;
  BudgetCtx& budget_;
  std::set<VarId> int_vars_;
  std::vector<Formula> formulas_;
};

}  // namespace detail

}  // namespace satkit::solver

#endif  // SATKIT_SOLVER_ENGINE_HPP
