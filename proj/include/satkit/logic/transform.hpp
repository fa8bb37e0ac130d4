#ifndef SATKIT_LOGIC_TRANSFORM_HPP
#define SATKIT_LOGIC_TRANSFORM_HPP

#include <optional>
#include <string>
#include <vector>

#include "satkit/logic/core.hpp"
#include "satkit/logic/lower.hpp"

namespace satkit::logic {

/// Constant folding over the formula tree. Applied after every substitution
/// round so conflicts surface as a literal False.
inline Formula simplify(const Formula& f) {
  using K = Formula::K;
  switch (f.k) {
    case K::True:
    case K::False:
    case K::BoolVar:
      return f;
    case K::EnumEq:
      if (f.rhs_is_var && f.var == f.var2) return Formula::constant(true);
      return f;
    case K::NumCmp:
      if (f.poly.is_constant())
        return Formula::constant(cmp_holds(f.op, f.poly.constant_value()));
      return f;
    case K::Not: {
      Formula kid = simplify(f.kids[0]);
      if (kid.k == K::True) return Formula::constant(false);
      if (kid.k == K::False) return Formula::constant(true);
      if (kid.k == K::Not) return kid.kids[0];
      return Formula::make_not(std::move(kid));
    }
    case K::And: {
      std::vector<Formula> kids;
      for (const auto& kf : f.kids) {
        Formula k = simplify(kf);
        if (k.k == K::False) return Formula::constant(false);
        if (k.k == K::True) continue;
        if (k.k == K::And) {
          for (auto& kk : k.kids) kids.push_back(std::move(kk));
        } else {
          kids.push_back(std::move(k));
        }
      }
      if (kids.empty()) return Formula::constant(true);
      if (kids.size() == 1) return kids[0];
      return Formula::make_and(std::move(kids));
    }
    case K::Or: {
      std::vector<Formula> kids;
      for (const auto& kf : f.kids) {
        Formula k = simplify(kf);
        if (k.k == K::True) return Formula::constant(true);
        if (k.k == K::False) continue;
        if (k.k == K::Or) {
          for (auto& kk : k.kids) kids.push_back(std::move(kk));
        } else {
          kids.push_back(std::move(k));
        }
      }
      if (kids.empty()) return Formula::constant(false);
      if (kids.size() == 1) return kids[0];
      return Formula::make_or(std::move(kids));
    }
    case K::Implies: {
      Formula a = simplify(f.kids[0]);
      Formula b = simplify(f.kids[1]);
      if (a.k == K::False || b.k == K::True) return Formula::constant(true);
      if (a.k == K::True) return b;
      if (b.k == K::False) return simplify(Formula::make_not(std::move(a)));
      return Formula::make_implies(std::move(a), std::move(b));
    }
    case K::Card: {
      long bound = f.bound;
      std::vector<Formula> kids;
      for (const auto& kf : f.kids) {
        Formula k = simplify(kf);
        if (k.k == K::True) {
          --bound;
        } else if (k.k != K::False) {
          kids.push_back(std::move(k));
        }
      }
      long n = static_cast<long>(kids.size());
      switch (f.op) {
        case CmpOp::Eq:
          if (bound < 0 || bound > n) return Formula::constant(false);
          if (bound == 0 && n == 0) return Formula::constant(true);
          if (bound == 0) {
            std::vector<Formula> negs;
            for (auto& k : kids) negs.push_back(Formula::make_not(std::move(k)));
            return simplify(Formula::make_and(std::move(negs)));
          }
          if (bound == n) return simplify(Formula::make_and(std::move(kids)));
          break;
        case CmpOp::Ne:
          if (bound < 0 || bound > n) return Formula::constant(true);
          break;
        case CmpOp::Le:
          if (bound >= n) return Formula::constant(true);
          if (bound < 0) return Formula::constant(false);
          if (bound == 0) {
            std::vector<Formula> negs;
            for (auto& k : kids) negs.push_back(Formula::make_not(std::move(k)));
            return simplify(Formula::make_and(std::move(negs)));
          }
          break;
        case CmpOp::Lt:
          if (bound > n) return Formula::constant(true);
          if (bound <= 0) return Formula::constant(false);
          break;
        case CmpOp::Ge:
          if (bound <= 0) return Formula::constant(true);
          if (bound > n) return Formula::constant(false);
          if (bound == n) return simplify(Formula::make_and(std::move(kids)));
          break;
        case CmpOp::Gt:
          if (bound < 0) return Formula::constant(true);
          if (bound >= n) return Formula::constant(false);
          break;
      }
      return Formula::card(f.op, bound, std::move(kids));
    }
  }
  return f;
}

/// Substitutes a concrete value for a variable everywhere in a formula.
inline Formula substitute(const Formula& f, VarId v, const Value& val,
                          const SatProblem& p) {
  using K = Formula::K;
  Formula out = f;
  switch (f.k) {
    case K::BoolVar:
      if (f.var == v) return Formula::constant(val.as_bool());
      return out;
    case K::EnumEq: {
      if (!f.rhs_is_var) {
        if (f.var == v) {
          int sym = p.find_symbol(val.as_sym());
          return Formula::constant(sym == f.member);
        }
        return out;
      }
      if (f.var == v && f.var2 == v) return Formula::constant(true);
      if (f.var == v) {
        int sym = p.find_symbol(val.as_sym());
        return Formula::enum_eq(f.var2, sym);
      }
      if (f.var2 == v) {
        int sym = p.find_symbol(val.as_sym());
        return Formula::enum_eq(f.var, sym);
      }
      return out;
    }
    case K::NumCmp:
      // Only rational bindings can occur inside polynomials.
      if (val.is_rat()) out.poly = f.poly.substituted(v, val.as_rat());
      return out;
    default:
      for (size_t i = 0; i < out.kids.size(); ++i)
        out.kids[i] = substitute(f.kids[i], v, val, p);
      return out;
  }
}

/// Evidence of definite unsatisfiability found during propagation.
struct Conflict {
  std::string var;   // empty when a formula folded to False
  Value a, b;        // the two incompatible bindings, when var is set
  std::string detail;
};

struct PropagateResult {
  SatProblem problem;
  std::optional<Conflict> conflict;
};

/// Fixpoint substitution of unit equalities: a variable equated to a literal
/// is bound, substituted through every formula and query, and recorded in
/// `eliminated`. Model-set preserving on the remaining variables; two
/// incompatible bindings (or a formula folding to False) yield a Conflict.
inline PropagateResult propagate_constants(const SatProblem& input) {
  PropagateResult res;
  SatProblem& p = res.problem;
  p = input;

  // Flatten top-level conjunctions so units are visible.
  {
    std::vector<Formula> flat;
    for (const auto& f : p.phi) {
      Formula s = simplify(f);
      if (s.k == Formula::K::And) {
        for (auto& k : s.kids) flat.push_back(std::move(k));
      } else {
        flat.push_back(std::move(s));
      }
    }
    p.phi = std::move(flat);
  }

  std::vector<std::optional<Value>> bound(p.vars.size());

  auto bind = [&](VarId v, Value val) -> bool {
    if (bound[v]) {
      if (*bound[v] != val) {
        res.conflict = Conflict{p.vars[v].name, *bound[v], val,
                                "variable bound to two distinct literals"};
        return false;
      }
      return true;
    }
    if (p.vars[v].sort == SortKind::Int && val.is_rat() && !is_integer(val.as_rat())) {
      res.conflict = Conflict{p.vars[v].name, val, val,
                              "integer variable bound to a non-integer literal"};
      return false;
    }
    bound[v] = val;
    p.eliminated.emplace_back(v, val);
    return true;
  };

  bool changed = true;
  while (changed && !res.conflict) {
    changed = false;
    std::vector<std::pair<VarId, Value>> units;
    for (const auto& f : p.phi) {
      if (f.k == Formula::K::False) {
        res.conflict = Conflict{"", Value(), Value(), "constraints folded to false"};
        break;
      }
      if (f.k == Formula::K::BoolVar && !bound[f.var]) {
        units.emplace_back(f.var, Value(true));
      } else if (f.k == Formula::K::Not && f.kids[0].k == Formula::K::BoolVar &&
                 !bound[f.kids[0].var]) {
        units.emplace_back(f.kids[0].var, Value(false));
      } else if (f.k == Formula::K::EnumEq && !f.rhs_is_var && !bound[f.var]) {
        units.emplace_back(f.var, Value::sym(p.sym_pool[f.member]));
      } else if (f.k == Formula::K::NumCmp && f.op == CmpOp::Eq && f.poly.is_linear()) {
        std::set<VarId> vs;
        f.poly.collect_vars(vs);
        if (vs.size() == 1) {
          VarId v = *vs.begin();
          if (!bound[v]) {
            Rat a = f.poly.coeff_of(v);
            Rat c = f.poly.constant_value();
            units.emplace_back(v, Value(-c / a));
          }
        }
      }
    }
    if (res.conflict) break;
    for (auto& [v, val] : units) {
      if (bound[v]) {
        if (*bound[v] != val) {
          res.conflict = Conflict{p.vars[v].name, *bound[v], val,
                                  "variable bound to two distinct literals"};
          break;
        }
        continue;
      }
      if (!bind(v, val)) break;
      changed = true;
      for (auto& f : p.phi) f = simplify(substitute(f, v, val, p));
      for (auto& q : p.queries) {
        if (q.k == Query::K::Num && val.is_rat()) q.num = q.num.substituted(v, val.as_rat());
        if (q.k == Query::K::Bool) q.form = simplify(substitute(q.form, v, val, p));
      }
    }
    if (changed) {
      std::vector<Formula> keep;
      for (auto& f : p.phi) {
        if (f.k == Formula::K::True) continue;
        if (f.k == Formula::K::And) {
          for (auto& k : f.kids) keep.push_back(std::move(k));
        } else {
          keep.push_back(std::move(f));
        }
      }
      p.phi = std::move(keep);
    }
  }

  // One more sweep for a plain False that appeared on the last round.
  if (!res.conflict) {
    for (const auto& f : p.phi)
      if (f.k == Formula::K::False) {
        res.conflict = Conflict{"", Value(), Value(), "constraints folded to false"};
        break;
      }
  }

  p.theory = infer_theory(p);
  return res;
}

}  // namespace satkit::logic

#endif  // SATKIT_LOGIC_TRANSFORM_HPP
