#ifndef SATKIT_SOLVER_ENUMERATE_HPP
#define SATKIT_SOLVER_ENUMERATE_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "satkit/logic/core.hpp"
#include "satkit/solver/outcome.hpp"

namespace satkit::solver {

struct UnboundedDomain : std::runtime_error {
  explicit UnboundedDomain(const std::string& var)
      : std::runtime_error("variable '" + var + "' has no finite domain to enumerate") {}
};

struct Enumeration {
  std::vector<std::vector<Value>> models;  // per VarId assignments
  bool complete = true;                    // false when limit or budget cut it off
};

namespace detail {

/// Plain recursive evaluation under a total assignment. Deliberately shares
/// no machinery with the search engine: this is the independent route used
/// as ground truth by the oracle tests.
inline bool enum_eval(const logic::Formula& f, const std::vector<Value>& vals,
                      const logic::SatProblem& p) {
  using K = logic::Formula::K;
  switch (f.k) {
    case K::True: return true;
    case K::False: return false;
    case K::BoolVar: return vals[f.var].as_bool();
    case K::EnumEq:
      if (f.rhs_is_var) return vals[f.var].as_sym() == vals[f.var2].as_sym();
      return vals[f.var].as_sym() == p.sym_pool[f.member];
    case K::NumCmp:
      return logic::cmp_holds(f.op,
                              f.poly.eval([&](logic::VarId v) { return vals[v].as_rat(); }));
    case K::And:
      for (const auto& k : f.kids)
        if (!enum_eval(k, vals, p)) return false;
      return true;
    case K::Or:
      for (const auto& k : f.kids)
        if (enum_eval(k, vals, p)) return true;
      return false;
    case K::Not: return !enum_eval(f.kids[0], vals, p);
    case K::Implies: return !enum_eval(f.kids[0], vals, p) || enum_eval(f.kids[1], vals, p);
    case K::Card: {
      long t = 0;
      for (const auto& k : f.kids)
        if (enum_eval(k, vals, p)) ++t;
      return logic::cmp_holds_count(f.op, t, f.bound);
    }
  }
  return false;
}

}  // namespace detail

/// Exhaustively enumerates models over finite domains: booleans, enums, and
/// integer variables inside caller-provided bounds. Rational variables have
/// no finite domain and raise UnboundedDomain. Models are produced in a
/// deterministic order (variables in id order; False<True, members and
/// integers ascending). Constraints are checked as soon as every variable
/// they mention is assigned, which prunes the crawl without changing its
/// meaning.
inline Enumeration enumerate_models(
    const logic::SatProblem& p, int limit, const Budget& budget,
    const std::map<logic::VarId, std::pair<long, long>>& int_bounds = {}) {
  using logic::SortKind;
  Enumeration out;
  const size_t n = p.vars.size();

  // A variable eliminated by propagation is fixed to its binding.
  std::map<logic::VarId, Value> fixed;
  for (const auto& [v, val] : p.eliminated) fixed[v] = val;

  for (size_t v = 0; v < n; ++v) {
    SortKind s = p.vars[v].sort;
    if ((s == SortKind::Int || s == SortKind::Rat) && !fixed.count(static_cast<int>(v)) &&
        !int_bounds.count(static_cast<int>(v))) {
      if (s == SortKind::Rat) throw UnboundedDomain(p.vars[v].name);
      throw UnboundedDomain(p.vars[v].name);
    }
  }

  // For each constraint, the highest variable id it mentions; check it once
  // that variable is assigned.
  std::vector<std::vector<const logic::Formula*>> due(n + 1);
  for (const auto& f : p.phi) {
    std::set<logic::VarId> vs;
    f.collect_vars(vs);
    size_t hi = 0;
    for (logic::VarId v : vs) hi = std::max(hi, static_cast<size_t>(v) + 1);
    due[hi].push_back(&f);
  }

  detail::BudgetCtx ctx(budget);
  std::vector<Value> vals(n);
  std::function<bool(size_t)> rec = [&](size_t idx) -> bool {
    try {
      ctx.decision();
    } catch (const detail::TimeoutSignal&) {
      out.complete = false;
      return false;
    }
    for (const auto* f : due[idx])
      if (!detail::enum_eval(*f, vals, p)) return true;  // prune, keep going
    if (idx == n) {
      out.models.push_back(vals);
      if (limit > 0 && static_cast<int>(out.models.size()) >= limit) {
        out.complete = false;
        return false;
      }
      return true;
    }
    auto it = fixed.find(static_cast<int>(idx));
    if (it != fixed.end()) {
      vals[idx] = it->second;
      return rec(idx + 1);
    }
    switch (p.vars[idx].sort) {
      case SortKind::Bool:
        for (bool b : {false, true}) {
          vals[idx] = Value(b);
          if (!rec(idx + 1)) return false;
        }
        return true;
      case SortKind::Enum:
        for (int sym : p.enums[p.vars[idx].enum_id].members) {
          vals[idx] = Value::sym(p.sym_pool[sym]);
          if (!rec(idx + 1)) return false;
        }
        return true;
      case SortKind::Int:
      case SortKind::Rat: {
        auto [lo, hi] = int_bounds.at(static_cast<int>(idx));
        for (long x = lo; x <= hi; ++x) {
          vals[idx] = Value(Rat(x));
          if (!rec(idx + 1)) return false;
        }
        return true;
      }
    }
    return true;
  };
  rec(0);
  return out;
}

/// Query value under a full assignment.
inline Value eval_query_on(const logic::SatProblem& p, const logic::Query& q,
                           const std::vector<Value>& vals) {
  switch (q.k) {
    case logic::Query::K::Num:
      return Value(q.num.eval([&](logic::VarId v) { return vals[v].as_rat(); }));
    case logic::Query::K::Enum:
      return vals[q.evar];
    case logic::Query::K::Bool:
      return Value(detail::enum_eval(q.form, vals, p));
  }
  return Value();
}

/// Oracle-style classification of a problem from its enumerated model set.
struct OracleVerdict {
  enum class K { Answer, Unsat, Ambig } k = K::Unsat;
  Value value;                 // Answer
  std::vector<Value> values;   // distinct query values seen
  bool complete = true;
};

inline OracleVerdict classify_by_enumeration(
    const logic::SatProblem& p, const Budget& budget,
    const std::map<logic::VarId, std::pair<long, long>>& int_bounds = {}, int limit = 0) {
  Enumeration e = enumerate_models(p, limit, budget, int_bounds);
  OracleVerdict v;
  v.complete = e.complete;
  if (e.models.empty()) {
    v.k = OracleVerdict::K::Unsat;
    return v;
  }
  for (const auto& m : e.models) {
    Value q = eval_query_on(p, p.queries.at(0), m);
    bool seen = false;
    for (const auto& w : v.values) seen |= (w == q);
    if (!seen) v.values.push_back(q);
  }
  if (v.values.size() == 1) {
    v.k = OracleVerdict::K::Answer;
    v.value = v.values[0];
  } else {
    v.k = OracleVerdict::K::Ambig;
  }
  return v;
}

}  // namespace satkit::solver

#endif  // SATKIT_SOLVER_ENUMERATE_HPP
