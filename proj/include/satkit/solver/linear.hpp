#ifndef SATKIT_SOLVER_LINEAR_HPP
#define SATKIT_SOLVER_LINEAR_HPP

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "satkit/logic/core.hpp"
#include "satkit/solver/outcome.hpp"

namespace satkit::solver {

using logic::CmpOp;
using logic::Poly;
using logic::VarId;

struct LinConstraint {
  Poly p;
  CmpOp op;  // Eq, Le or Lt; meaning p op 0
};

namespace detail {

/// Exact linear solver: Gaussian elimination on equalities, Fourier-Motzkin
/// elimination on inequalities, branch-and-bound for integer variables.
/// Produces a concrete satisfying assignment, not just a feasibility verdict.
class LinearArith {
 public:
  LinearArith(std::set<VarId> int_vars, BudgetCtx& budget)
      : int_vars_(std::move(int_vars)), budget_(budget) {}

  std::optional<std::map<VarId, Rat>> solve(const std::vector<LinConstraint>& cs) {
    // Integer variables with no derivable bound get the fallback box; keeps
    // branch-and-bound from descending forever (budget still the backstop).
    return solve_rec(cs, 0);
  }

 private:
  static constexpr long kFallbackBound = 1000000000L;

  std::optional<std::map<VarId, Rat>> solve_rec(std::vector<LinConstraint> cs, int depth) {
    auto relaxed = solve_relaxation(cs);
    if (!relaxed) return std::nullopt;
    // Find the first integer variable with a fractional value.
    for (VarId v : int_vars_) {
      auto it = relaxed->find(v);
      if (it == relaxed->end()) continue;
      if (is_integer(it->second)) continue;
      budget_.decision();
      if (depth == 0 && !bounded_int_vars_added_) {
        // nothing; bounds are added lazily below per branch
      }
      Rat x = it->second;
      BigInt fl = rat_floor(x);
      {
        std::vector<LinConstraint> lo = cs;
        lo.push_back({Poly::variable(v) - Poly::constant(Rat(fl)), CmpOp::Le});
        if (auto r = solve_rec(std::move(lo), depth + 1)) return r;
      }
      {
        std::vector<LinConstraint> hi = cs;
        hi.push_back({Poly::constant(Rat(fl + 1)) - Poly::variable(v), CmpOp::Le});
        return solve_rec(std::move(hi), depth + 1);
      }
    }
    return relaxed;
  }

  struct Bound {
    Poly expr;    // v >= expr or v <= expr, expr over later-eliminated vars
    bool strict;
  };
  struct Elimination {
    VarId v;
    std::vector<Bound> lowers, uppers;
  };
  struct Pivot {
    VarId v;
    Poly expr;  // v = expr
  };

  std::optional<std::map<VarId, Rat>> solve_relaxation(const std::vector<LinConstraint>& cs) {
    std::vector<Pivot> pivots;
    std::vector<LinConstraint> ineqs;
    std::vector<Poly> eqs;
    std::set<VarId> seen_vars;
    for (const auto& c : cs) {
      c.p.collect_vars(seen_vars);
      if (c.op == CmpOp::Eq)
        eqs.push_back(c.p);
      else
        ineqs.push_back(c);
    }

    auto apply_pivots = [&](Poly p) {
      for (const auto& piv : pivots) {
        Rat a = p.coeff_of(piv.v);
        if (a != 0) {
          p.add_term(logic::Monomial{{piv.v}}, -a);
          p = p + piv.expr.scaled(a);
        }
      }
      return p;
    };

    for (Poly eq : eqs) {
      budget_.decision();
      eq = apply_pivots(eq);
      if (eq.is_constant()) {
        if (eq.constant_value() != 0) return std::nullopt;
        continue;
      }
      if (!integral_feasible(eq)) return std::nullopt;
      std::set<VarId> vs;
      eq.collect_vars(vs);
      VarId pivot = *vs.begin();
      Rat a = eq.coeff_of(pivot);
      Poly rest = eq;
      rest.add_term(logic::Monomial{{pivot}}, -a);
      Pivot piv{pivot, rest.scaled(Rat(-1) / a)};
      pivots.push_back(std::move(piv));
    }

    std::vector<LinConstraint> work;
    std::set<VarId> free_vars;
    for (const auto& c : ineqs) {
      Poly p = apply_pivots(c.p);
      if (p.is_constant()) {
        if (!logic::cmp_holds(c.op, p.constant_value())) return std::nullopt;
        continue;
      }
      p.collect_vars(free_vars);
      work.push_back({std::move(p), c.op});
    }

    // Integer variables kept free by the equalities need a finite box for
    // branch-and-bound to terminate.
    for (VarId v : int_vars_) {
      if (!free_vars.count(v) && !seen_vars.count(v)) continue;
      bool pivoted = false;
      for (const auto& piv : pivots)
        if (piv.v == v) pivoted = true;
      if (pivoted) continue;
      free_vars.insert(v);
      work.push_back({Poly::variable(v) - Poly::constant(Rat(kFallbackBound)), CmpOp::Le});
      work.push_back({Poly::constant(Rat(-kFallbackBound)) - Poly::variable(v), CmpOp::Le});
    }

    std::vector<Elimination> elims;
    std::vector<VarId> order(free_vars.begin(), free_vars.end());
    for (VarId v : order) {
      budget_.decision();
      Elimination e;
      e.v = v;
      std::vector<LinConstraint> rest;
      for (auto& c : work) {
        Rat a = c.p.coeff_of(v);
        if (a == 0) {
          rest.push_back(std::move(c));
          continue;
        }
        Poly other = c.p;
        other.add_term(logic::Monomial{{v}}, -a);
        // a*v + other op 0  ->  v <= -other/a (a>0)  or  v >= -other/a (a<0)
        Bound b{other.scaled(Rat(-1) / a), c.op == CmpOp::Lt};
        if (a > 0)
          e.uppers.push_back(std::move(b));
        else
          e.lowers.push_back(std::move(b));
      }
      for (const auto& lo : e.lowers)
        for (const auto& up : e.uppers) {
          Poly diff = lo.expr - up.expr;  // require lo <= up
          bool strict = lo.strict || up.strict;
          if (diff.is_constant()) {
            Rat c = diff.constant_value();
            if (strict ? c >= 0 : c > 0) return std::nullopt;
          } else {
            rest.push_back({std::move(diff), strict ? CmpOp::Lt : CmpOp::Le});
          }
        }
      work = std::move(rest);
      elims.push_back(std::move(e));
    }
    for (const auto& c : work) {
      // fully projected; only constants can remain
      if (!c.p.is_constant()) return std::nullopt;
      if (!logic::cmp_holds(c.op, c.p.constant_value())) return std::nullopt;
    }

    std::map<VarId, Rat> assign;
    auto value_of = [&](VarId v) {
      auto it = assign.find(v);
      return it == assign.end() ? Rat(0) : it->second;
    };
    for (auto it = elims.rbegin(); it != elims.rend(); ++it) {
      std::optional<Rat> lo, hi;
      bool lo_strict = false, hi_strict = false;
      for (const auto& b : it->lowers) {
        Rat val = b.expr.eval(value_of);
        if (!lo || val > *lo || (val == *lo && b.strict)) {
          lo = val;
          lo_strict = b.strict;
        }
      }
      for (const auto& b : it->uppers) {
        Rat val = b.expr.eval(value_of);
        if (!hi || val < *hi || (val == *hi && b.strict)) {
          hi = val;
          hi_strict = b.strict;
        }
      }
      assign[it->v] = pick_value(lo, lo_strict, hi, hi_strict);
    }
    for (auto it = pivots.rbegin(); it != pivots.rend(); ++it)
      assign[it->v] = it->expr.eval(value_of);
    return assign;
  }

  /// Deterministic choice inside an interval, preferring 0, then an integer.
  static Rat pick_value(std::optional<Rat> lo, bool lo_strict, std::optional<Rat> hi,
                        bool hi_strict) {
    auto lo_ok = [&](const Rat& x) { return !lo || (lo_strict ? x > *lo : x >= *lo); };
    auto hi_ok = [&](const Rat& x) { return !hi || (hi_strict ? x < *hi : x <= *hi); };
    Rat zero(0);
    if (lo_ok(zero) && hi_ok(zero)) return zero;
    if (lo && !hi) {
      if (!lo_strict && is_integer(*lo)) return *lo;
      return Rat(rat_floor(*lo) + 1);
    }
    if (hi && !lo) {
      if (!hi_strict && is_integer(*hi)) return *hi;
      Rat cand = Rat(rat_ceil(*hi) - 1);
      return cand;
    }
    // both bounds present (the interval is nonempty: FM checked lo<=up)
    Rat cand = Rat(lo_strict ? rat_floor(*lo) + 1 : rat_ceil(*lo));
    if (lo_ok(cand) && hi_ok(cand)) return cand;
    return (*lo + *hi) / 2;
  }

  /// gcd divisibility test for pure-integer equalities; catches rows like
  /// 3x - 3y = 1 that the rational relaxation cannot.
  bool integral_feasible(const Poly& eq) {
    std::set<VarId> vs;
    eq.collect_vars(vs);
    for (VarId v : vs)
      if (!int_vars_.count(v)) return true;
    BigInt lcm = 1;
    for (const auto& [m, c] : eq.terms()) lcm = lcm / boost::multiprecision::gcd(lcm, rat_den(c)) * rat_den(c);
    BigInt g = 0;
    BigInt konst = 0;
    for (const auto& [m, c] : eq.terms()) {
      BigInt ic = rat_num(c) * (lcm / rat_den(c));
      if (m.vars.empty())
        konst = ic;
      else
        g = boost::multiprecision::gcd(g, ic);
    }
    if (g == 0) return konst == 0;
    return konst % g == 0;
  }

  std::set<VarId> int_vars_;
  BudgetCtx& budget_;
  bool bounded_int_vars_added_ = false;
};

}  // namespace detail

}  // namespace satkit::solver

#endif  // SATKIT_SOLVER_LINEAR_HPP
