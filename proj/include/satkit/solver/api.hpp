#ifndef SATKIT_SOLVER_API_HPP
#define SATKIT_SOLVER_API_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "satkit/logic/canonical.hpp"
#include "satkit/logic/transform.hpp"
#include "satkit/solver/engine.hpp"
#include "satkit/solver/outcome.hpp"

namespace satkit::solver {

namespace detail {

/// Total named assignment: engine values overridden by propagation bindings.
inline std::vector<Value> merge_eliminated(const logic::SatProblem& p,
                                           std::vector<Value> vals) {
  for (const auto& [v, val] : p.eliminated) vals[v] = val;
  return vals;
}

inline std::map<std::string, Value> named_model(const logic::SatProblem& p,
                                                const std::vector<Value>& vals) {
  std::map<std::string, Value> out;
  for (size_t v = 0; v < p.vars.size(); ++v) out[p.vars[v].name] = vals[v];
  return out;
}

inline Value query_value(const logic::SatProblem& p, const logic::Query& q,
                         const std::vector<Value>& vals, const Engine& eng) {
  switch (q.k) {
    case logic::Query::K::Num:
      return Value(q.num.eval([&](logic::VarId v) { return vals[v].as_rat(); }));
    case logic::Query::K::Enum:
      return vals[q.evar];
    case logic::Query::K::Bool:
      return Value(eng.eval_full(q.form, vals));
  }
  return Value();
}

/// Q != a as a formula over the propagated problem.
inline logic::Formula negate_query_value(const logic::SatProblem& p, const logic::Query& q,
                                         const Value& a) {
  using logic::Formula;
  Formula f;
  switch (q.k) {
    case logic::Query::K::Num:
      f = Formula::num_cmp(logic::CmpOp::Ne, q.num - logic::Poly::constant(a.as_rat()));
      break;
    case logic::Query::K::Enum: {
      int sym = p.find_symbol(a.as_sym());
      f = Formula::make_not(Formula::enum_eq(q.evar, sym));
      break;
    }
    case logic::Query::K::Bool:
      f = a.as_bool() ? Formula::make_not(q.form) : q.form;
      break;
  }
  // Respect bindings made by propagation.
  for (const auto& [v, val] : p.eliminated) f = logic::substitute(f, v, val, p);
  return logic::simplify(f);
}

}  // namespace detail

struct UniquenessResult {
  bool unique = true;
  Value second;  // a witness with a different query value, when !unique
  bool timeout = false;
};

/// Solves phi AND (Q != a): Unsat means the answer is the unique entailed
/// value; a model yields the conflicting query value.
inline UniquenessResult check_uniqueness(const logic::SatProblem& propagated,
                                         const logic::Query& q, const Value& a,
                                         const Budget& budget) {
  UniquenessResult res;
  try {
    detail::BudgetCtx ctx(budget);
    detail::Engine eng(propagated, ctx);
    auto r = eng.find_model({detail::negate_query_value(propagated, q, a)});
    if (r.k == detail::Engine::Result::K::Unsat) {
      res.unique = true;
      return res;
    }
    auto full = detail::merge_eliminated(propagated, std::move(r.values));
    res.unique = false;
    res.second = detail::query_value(propagated, q, full, eng);
    return res;
  } catch (const detail::TimeoutSignal&) {
    res.timeout = true;
    return res;
  }
}

/// Decides a problem: find a model, evaluate the query under it, verify the
/// value is uniquely entailed, and report the feedback taxonomy.
inline SolveOutcome solve_problem(const logic::SatProblem& raw, const Budget& budget) {
  logic::PropagateResult prop;
  try {
    prop = logic::propagate_constants(raw);
  } catch (const logic::EvalError& e) {
    return SolveOutcome::error(ErrorKind::Eval, e.what());
  }
  if (prop.conflict) return SolveOutcome::unsat();
  const logic::SatProblem& p = prop.problem;
  if (p.queries.empty())
    return SolveOutcome::error(ErrorKind::Lowering, "no query to solve");
  try {
    detail::BudgetCtx ctx(budget);
    detail::Engine eng(p, ctx);
    auto r = eng.find_model({});
    if (r.k == detail::Engine::Result::K::Unsat) return SolveOutcome::unsat();
    auto full = detail::merge_eliminated(p, std::move(r.values));
    const logic::Query& q = p.queries.front();
    Value a = detail::query_value(p, q, full, eng);
    UniquenessResult u = check_uniqueness(p, q, a, budget);
    if (u.timeout) return SolveOutcome::timeout();
    if (!u.unique) return SolveOutcome::ambig(a, u.second);
    return SolveOutcome::answer(std::move(a), detail::named_model(p, full));
  } catch (const detail::TimeoutSignal&) {
    return SolveOutcome::timeout();
  } catch (const logic::EvalError& e) {
    return SolveOutcome::error(ErrorKind::Eval, e.what());
  } catch (const detail::EngineError& e) {
    return SolveOutcome::error(ErrorKind::Eval, e.what());
  }
}

enum class Validity { Valid, Invalid, Timeout };

/// Phi entails psi iff phi AND (NOT psi) is unsatisfiable.
inline Validity check_validity(const logic::SatProblem& propagated, const logic::Formula& psi,
                               const Budget& budget) {
  try {
    detail::BudgetCtx ctx(budget);
    detail::Engine eng(propagated, ctx);
    logic::Formula neg = logic::Formula::make_not(psi);
    for (const auto& [v, val] : propagated.eliminated)
      neg = logic::substitute(neg, v, val, propagated);
    auto r = eng.find_model({logic::simplify(neg)});
    return r.k == detail::Engine::Result::K::Unsat ? Validity::Valid : Validity::Invalid;
  } catch (const detail::TimeoutSignal&) {
    return Validity::Timeout;
  }
}

/// Satisfiability of phi alone (no query involved).
enum class SatStatus { Sat, Unsat, Timeout };

inline SatStatus check_sat(const logic::SatProblem& propagated, const Budget& budget) {
  try {
    detail::BudgetCtx ctx(budget);
    detail::Engine eng(propagated, ctx);
    auto r = eng.find_model({});
    return r.k == detail::Engine::Result::K::Sat ? SatStatus::Sat : SatStatus::Unsat;
  } catch (const detail::TimeoutSignal&) {
    return SatStatus::Timeout;
  }
}

/// Per-label verdicts for problems carrying several labeled queries; only
/// boolean queries can be judged valid/invalid.
inline std::map<std::string, Validity> decide_labeled_queries(const logic::SatProblem& raw,
                                                              const Budget& budget) {
  std::map<std::string, Validity> out;
  logic::PropagateResult prop = logic::propagate_constants(raw);
  if (prop.conflict) {
    for (const auto& q : raw.queries) out[q.label] = Validity::Valid;  // vacuous
    return out;
  }
  for (const auto& q : prop.problem.queries) {
    if (q.k != logic::Query::K::Bool) continue;
    out[q.label] = check_validity(prop.problem, q.form, budget);
  }
  return out;
}

}  // namespace satkit::solver

#endif  // SATKIT_SOLVER_API_HPP
