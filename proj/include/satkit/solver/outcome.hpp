#ifndef SATKIT_SOLVER_OUTCOME_HPP
#define SATKIT_SOLVER_OUTCOME_HPP

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include "satkit/util/value.hpp"

namespace satkit::solver {

/// Wall-clock and decision limits. Exceeding either yields Timeout. The
/// decision budget keeps runs deterministic; the wall clock is the backstop.
struct Budget {
  long wall_ms = 10000;
  long max_decisions = 2'000'000;
};

enum class ErrorKind { Parse, Lowering, Eval };

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Lowering: return "lowering";
    case ErrorKind::Eval: return "eval";
  }
  return "?";
}

/// The feedback taxonomy: a unique answer, unsatisfiable constraints, an
/// under-constrained query with at least two witness values, an execution
/// error, or budget exhaustion.
struct SolveOutcome {
  enum class K { Answer, Unsat, Ambig, Error, Timeout };
  K k = K::Error;
  Value value;                         // Answer
  std::map<std::string, Value> model;  // Answer: assignment incl. eliminated vars
  std::vector<Value> witnesses;        // Ambig: >= 2 distinct query values
  ErrorKind error_kind = ErrorKind::Eval;
  std::string message;

  static SolveOutcome answer(Value v, std::map<std::string, Value> m = {}) {
    SolveOutcome o;
    o.k = K::Answer;
    o.value = std::move(v);
    o.model = std::move(m);
    return o;
  }
  static SolveOutcome unsat() {
    SolveOutcome o;
    o.k = K::Unsat;
    return o;
  }
  static SolveOutcome ambig(Value a, Value b) {
    SolveOutcome o;
    o.k = K::Ambig;
    o.witnesses = {std::move(a), std::move(b)};
    return o;
  }
  static SolveOutcome error(ErrorKind kind, std::string msg) {
    SolveOutcome o;
    o.k = K::Error;
    o.error_kind = kind;
    o.message = std::move(msg);
    return o;
  }
  static SolveOutcome timeout() {
    SolveOutcome o;
    o.k = K::Timeout;
    return o;
  }

  bool is_answer() const { return k == K::Answer; }

  std::string kind_name() const {
    switch (k) {
      case K::Answer: return "answer";
      case K::Unsat: return "unsat";
      case K::Ambig: return "ambig";
      case K::Error: return "error";
      case K::Timeout: return "timeout";
    }
    return "?";
  }
};

namespace detail {

struct TimeoutSignal {};

/// Shared countdown for one solve call, threaded through search and theory
/// code. Decisions are the primary, deterministic limit.
class BudgetCtx {
 public:
  explicit BudgetCtx(const Budget& b)
      : deadline_(std::chrono::steady_clock::now() + std::chrono::milliseconds(b.wall_ms)),
        decisions_left_(b.max_decisions) {}

  void decision() {
    if (--decisions_left_ < 0) throw TimeoutSignal{};
    if ((decisions_left_ & 0x3ff) == 0 && std::chrono::steady_clock::now() > deadline_)
      throw TimeoutSignal{};
  }

 private:
  std::chrono::steady_clock::time_point deadline_;
  long decisions_left_;
};

}  // namespace detail

}  // namespace satkit::solver

#endif  // SATKIT_SOLVER_OUTCOME_HPP
