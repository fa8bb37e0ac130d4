#include <gtest/gtest.h>

#include "oracles.hpp"
#include "satkit/solver/api.hpp"

using namespace satkit;
using namespace satkit::solver;
using oracles::GeneratedProblem;

namespace {

// Classification agreement between solve_problem and enumeration ground
// truth; answer values must match exactly.
void check_against_enumeration(const GeneratedProblem& g, const std::string& ctx) {
  Budget budget{20000, 20'000'000};
  auto truth = classify_by_enumeration(g.problem, budget, g.bounds);
  ASSERT_TRUE(truth.complete) << ctx;
  auto out = solve_problem(g.problem, budget);
  switch (truth.k) {
    case OracleVerdict::K::Unsat:
      EXPECT_EQ(out.k, SolveOutcome::K::Unsat) << ctx;
      break;
    case OracleVerdict::K::Answer:
      ASSERT_EQ(out.k, SolveOutcome::K::Answer) << ctx;
      EXPECT_EQ(out.value, truth.value) << ctx;
      break;
    case OracleVerdict::K::Ambig:
      EXPECT_EQ(out.k, SolveOutcome::K::Ambig) << ctx;
      break;
  }
}

}  // namespace

TEST(SolverOracle, LinearIntegerSystemsAgree) {
  std::mt19937_64 rng(1001);
  for (int i = 0; i < 120; ++i) {
    auto g = oracles::gen_int_problem(rng, 3, 12);
    check_against_enumeration(g, "int#" + std::to_string(i));
  }
}

TEST(SolverOracle, WideBoxIntegerSystemsAgree) {
  std::mt19937_64 rng(1002);
  for (int i = 0; i < 25; ++i) {
    auto g = oracles::gen_int_problem(rng, 2, 50);
    check_against_enumeration(g, "int50#" + std::to_string(i));
  }
}

TEST(SolverOracle, BooleanEufProblemsAgree) {
  std::mt19937_64 rng(1003);
  for (int i = 0; i < 150; ++i) {
    auto g = oracles::gen_bool_problem(rng, 12);
    check_against_enumeration(g, "bool#" + std::to_string(i));
  }
}

TEST(SolverOracle, RationalEqualitySystemsAgreeWithDeterminantOracle) {
  std::mt19937_64 rng(1004);
  for (int i = 0; i < 150; ++i) {
    auto g = oracles::gen_rat_eq_problem(rng, 4);
    auto truth = oracles::rat_eq_oracle(g.problem);
    auto out = solve_problem(g.problem, Budget{});
    std::string ctx = "rat#" + std::to_string(i);
    switch (truth.k) {
      case oracles::RatOracleVerdict::K::Unsat:
        EXPECT_EQ(out.k, SolveOutcome::K::Unsat) << ctx;
        break;
      case oracles::RatOracleVerdict::K::Answer:
        ASSERT_EQ(out.k, SolveOutcome::K::Answer) << ctx;
        EXPECT_EQ(out.value, Value(truth.value)) << ctx;
        break;
      case oracles::RatOracleVerdict::K::Ambig:
        EXPECT_EQ(out.k, SolveOutcome::K::Ambig) << ctx;
        break;
    }
  }
}

TEST(SolverOracle, OutcomesDeterministicOnRandomProblems) {
  std::mt19937_64 rng(1005);
  for (int i = 0; i < 30; ++i) {
    auto g = oracles::gen_bool_problem(rng, 10);
    auto a = solve_problem(g.problem, Budget{});
    auto b = solve_problem(g.problem, Budget{});
    EXPECT_EQ(a.k, b.k);
    if (a.k == SolveOutcome::K::Answer) {
      EXPECT_EQ(a.value, b.value);
      EXPECT_EQ(a.model, b.model);
    }
  }
}
