#ifndef SATKIT_TESTS_ORACLES_HPP
#define SATKIT_TESTS_ORACLES_HPP

// Random problem generators plus implementation-independent ground-truth
// oracles for the solver agreement suites.
//
// - Integer and boolean/EUF classes are judged by exhaustive enumeration
//   (satkit::solver::enumerate_models, which shares no machinery with the
//   search engine).
// - Rational equality systems cannot be enumerated; they are judged by a
//   determinant-only oracle (cofactor expansion, minor ranks) that shares no
//   code with the Gaussian elimination path it checks.

#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "satkit/logic/core.hpp"
#include "satkit/logic/lower.hpp"
#include "satkit/solver/enumerate.hpp"

namespace oracles {

using satkit::BigInt;
using satkit::Rat;
using satkit::Value;
using namespace satkit::logic;

struct GeneratedProblem {
  SatProblem problem;
  std::map<VarId, std::pair<long, long>> bounds;  // enumeration box (ints)
};

// ---------- generators ----------------------------------------------------

/// Bounded linear-integer system: every variable carries box constraints in
/// phi, so engine and oracle see the same problem.
inline GeneratedProblem gen_int_problem(std::mt19937_64& rng, int max_vars, long range) {
  GeneratedProblem g;
  SatProblem& p = g.problem;
  int nvars = 2 + static_cast<int>(rng() % (max_vars - 1));
  for (int i = 0; i < nvars; ++i) {
    VarId v = p.add_var("v" + std::to_string(i), SortKind::Int);
    g.bounds[v] = {-range, range};
    Poly pv = Poly::variable(v);
    p.phi.push_back(Formula::num_cmp(CmpOp::Le, pv - Poly::constant(Rat(range))));
    p.phi.push_back(Formula::num_cmp(CmpOp::Le, pv.negated() - Poly::constant(Rat(range))));
  }
  int ncons = 1 + static_cast<int>(rng() % (nvars + 1));
  for (int c = 0; c < ncons; ++c) {
    Poly poly;
    int terms = 1 + static_cast<int>(rng() % nvars);
    for (int t = 0; t < terms; ++t) {
      long coef = static_cast<long>(rng() % 7) - 3;
      if (coef == 0) coef = 1;
      poly = poly + Poly::variable(static_cast<VarId>(rng() % nvars)).scaled(Rat(coef));
    }
    poly = poly + Poly::constant(Rat(static_cast<long>(rng() % 21) - 10));
    switch (rng() % 3) {
      case 0: p.phi.push_back(Formula::num_cmp(CmpOp::Eq, poly)); break;
      case 1: p.phi.push_back(Formula::num_cmp(CmpOp::Le, poly)); break;
      default: p.phi.push_back(Formula::num_cmp(CmpOp::Lt, poly)); break;
    }
  }
  Query q;
  q.k = Query::K::Num;
  q.num = Poly::variable(0);
  if (rng() % 2) q.num = q.num + Poly::variable(static_cast<VarId>(nvars - 1)).scaled(Rat(2));
  p.queries.push_back(std::move(q));
  p.theory = infer_theory(p);
  return g;
}

/// Random boolean/EUF formula set over <= max_atoms ground atoms: boolean
/// variables plus enum variables compared against members.
inline GeneratedProblem gen_bool_problem(std::mt19937_64& rng, int max_atoms) {
  GeneratedProblem g;
  SatProblem& p = g.problem;
  int nbool = 2 + static_cast<int>(rng() % std::max(1, max_atoms - 4));
  int nenum = static_cast<int>(rng() % 3);  // 0..2 enum vars
  for (int i = 0; i < nbool; ++i) p.add_var("b" + std::to_string(i), SortKind::Bool);
  if (nenum > 0) {
    EnumInfo e;
    e.name = "d";
    int members = 3 + static_cast<int>(rng() % 2);
    for (int m = 0; m < members; ++m) e.members.push_back(p.intern_symbol("m" + std::to_string(m)));
    p.enums.push_back(std::move(e));
    for (int i = 0; i < nenum; ++i)
      p.add_var("e" + std::to_string(i), SortKind::Enum, 0);
  }

  std::function<Formula(int)> gen = [&](int depth) -> Formula {
    if (depth <= 0 || rng() % 3 == 0) {
      if (nenum > 0 && rng() % 3 == 0) {
        VarId v = static_cast<VarId>(nbool + (rng() % nenum));
        int sym = p.enums[0].members[rng() % p.enums[0].members.size()];
        Formula f = Formula::enum_eq(v, sym);
        return rng() % 2 ? f : Formula::make_not(std::move(f));
      }
      Formula f = Formula::bool_var(static_cast<VarId>(rng() % nbool));
      return rng() % 2 ? f : Formula::make_not(std::move(f));
    }
    int arity = 2 + static_cast<int>(rng() % 2);
    std::vector<Formula> kids;
    for (int i = 0; i < arity; ++i) kids.push_back(gen(depth - 1));
    switch (rng() % 4) {
      case 0: return Formula::make_and(std::move(kids));
      case 1: return Formula::make_or(std::move(kids));
      case 2: return Formula::make_implies(std::move(kids[0]), std::move(kids[1]));
      default: return Formula::make_not(std::move(kids[0]));
    }
  };
  int nforms = 1 + static_cast<int>(rng() % 4);
  for (int i = 0; i < nforms; ++i) p.phi.push_back(gen(2));
  if (rng() % 2) {
    // one cardinality constraint over a subset of the boolean variables
    std::vector<Formula> kids;
    int width = 2 + static_cast<int>(rng() % std::min(6, nbool));
    for (int i = 0; i < width; ++i)
      kids.push_back(Formula::bool_var(static_cast<VarId>(rng() % nbool)));
    CmpOp ops[] = {CmpOp::Eq, CmpOp::Le, CmpOp::Ge, CmpOp::Lt, CmpOp::Gt, CmpOp::Ne};
    p.phi.push_back(Formula::card(ops[rng() % 6], static_cast<long>(rng() % (width + 1)),
                                  std::move(kids)));
  }
  Query q;
  if (nenum > 0 && rng() % 2) {
    q.k = Query::K::Enum;
    q.evar = static_cast<VarId>(nbool);
  } else {
    q.k = Query::K::Bool;
    q.form = Formula::bool_var(0);
  }
  p.queries.push_back(std::move(q));
  p.theory = infer_theory(p);
  return g;
}

/// Rational linear-equality system with a linear query.
inline GeneratedProblem gen_rat_eq_problem(std::mt19937_64& rng, int max_vars) {
  GeneratedProblem g;
  SatProblem& p = g.problem;
  int nvars = 2 + static_cast<int>(rng() % (max_vars - 1));
  for (int i = 0; i < nvars; ++i) p.add_var("r" + std::to_string(i), SortKind::Rat);
  int ncons = 1 + static_cast<int>(rng() % (nvars + 2));
  for (int c = 0; c < ncons; ++c) {
    Poly poly;
    for (int v = 0; v < nvars; ++v) {
      long coef = static_cast<long>(rng() % 7) - 3;
      if (coef != 0) poly = poly + Poly::variable(v).scaled(Rat(coef));
    }
    poly = poly + Poly::constant(Rat(static_cast<long>(rng() % 21) - 10));
    p.phi.push_back(Formula::num_cmp(CmpOp::Eq, poly));
  }
  Query q;
  q.k = Query::K::Num;
  q.num = Poly::variable(0);
  for (int v = 1; v < nvars; ++v)
    if (rng() % 2) q.num = q.num + Poly::variable(v).scaled(Rat(static_cast<long>(rng() % 3) + 1));
  p.queries.push_back(std::move(q));
  p.theory = infer_theory(p);
  return g;
}

// ---------- determinant oracle for rational equality systems ---------------

inline Rat det(const std::vector<std::vector<Rat>>& m) {
  size_t n = m.size();
  if (n == 0) return Rat(1);
  if (n == 1) return m[0][0];
  Rat sum = 0;
  int sign = 1;
  for (size_t c = 0; c < n; ++c) {
    std::vector<std::vector<Rat>> minor;
    for (size_t r = 1; r < n; ++r) {
      std::vector<Rat> row;
      for (size_t cc = 0; cc < n; ++cc)
        if (cc != c) row.push_back(m[r][cc]);
      minor.push_back(std::move(row));
    }
    sum += Rat(sign) * m[0][c] * det(minor);
    sign = -sign;
  }
  return sum;
}

struct MinorWitness {
  int rank = 0;
  std::vector<size_t> rows, cols;  // a nonsingular rank x rank submatrix
};

inline void combos(size_t n, size_t k, std::vector<std::vector<size_t>>& out) {
  std::vector<size_t> idx(k);
  std::function<void(size_t, size_t)> rec = [&](size_t start, size_t depth) {
    if (depth == k) {
      out.push_back(idx);
      return;
    }
    for (size_t i = start; i < n; ++i) {
      idx[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
}

inline MinorWitness rank_by_minors(const std::vector<std::vector<Rat>>& m) {
  MinorWitness w;
  if (m.empty()) return w;
  size_t rows = m.size(), cols = m[0].size();
  for (size_t k = std::min(rows, cols); k >= 1; --k) {
    std::vector<std::vector<size_t>> rsel, csel;
    combos(rows, k, rsel);
    combos(cols, k, csel);
    for (const auto& rs : rsel)
      for (const auto& cs : csel) {
        std::vector<std::vector<Rat>> sub;
        for (size_t r : rs) {
          std::vector<Rat> row;
          for (size_t c : cs) row.push_back(m[r][c]);
          sub.push_back(std::move(row));
        }
        if (det(sub) != 0) {
          w.rank = static_cast<int>(k);
          w.rows = rs;
          w.cols = cs;
          return w;
        }
      }
  }
  return w;
}

struct RatOracleVerdict {
  enum class K { Answer, Unsat, Ambig } k;
  Rat value;
};

/// Classifies a rational equality system by minor ranks and Cramer's rule:
/// no elimination anywhere. Query uniqueness is a rowspace membership test.
inline RatOracleVerdict rat_eq_oracle(const SatProblem& p) {
  size_t n = p.vars.size();
  std::vector<std::vector<Rat>> A;
  std::vector<Rat> b;
  for (const auto& f : p.phi) {
    if (f.k != Formula::K::NumCmp || f.op != CmpOp::Eq)
      throw std::runtime_error("rat oracle expects equality atoms");
    std::vector<Rat> row(n, Rat(0));
    for (size_t v = 0; v < n; ++v) row[v] = f.poly.coeff_of(static_cast<VarId>(v));
    bool all_zero = true;
    for (const auto& c : row) all_zero &= (c == 0);
    Rat rhs = -f.poly.constant_value();
    if (all_zero) {
      if (rhs != 0) return {RatOracleVerdict::K::Unsat, Rat(0)};
      continue;
    }
    A.push_back(std::move(row));
    b.push_back(rhs);
  }
  const Query& q = p.queries.at(0);
  std::vector<Rat> qrow(n, Rat(0));
  for (size_t v = 0; v < n; ++v) qrow[v] = q.num.coeff_of(static_cast<VarId>(v));
  Rat qconst = q.num.constant_value();

  if (A.empty()) {
    bool qzero = true;
    for (const auto& c : qrow) qzero &= (c == 0);
    if (qzero) return {RatOracleVerdict::K::Answer, qconst};
    return {RatOracleVerdict::K::Ambig, Rat(0)};
  }

  MinorWitness w = rank_by_minors(A);
  std::vector<std::vector<Rat>> Ab = A;
  for (size_t r = 0; r < A.size(); ++r) Ab[r].push_back(b[r]);
  MinorWitness waug = rank_by_minors(Ab);
  if (waug.rank > w.rank) return {RatOracleVerdict::K::Unsat, Rat(0)};

  // Particular solution: free variables at zero, pinned ones by Cramer on
  // the witness submatrix.
  std::vector<Rat> x(n, Rat(0));
  size_t k = w.rows.size();
  std::vector<std::vector<Rat>> sub;
  std::vector<Rat> subb;
  for (size_t r : w.rows) {
    std::vector<Rat> row;
    for (size_t c : w.cols) row.push_back(A[r][c]);
    sub.push_back(std::move(row));
    subb.push_back(b[r]);
  }
  Rat d = det(sub);
  for (size_t j = 0; j < k; ++j) {
    auto m = sub;
    for (size_t r = 0; r < k; ++r) m[r][j] = subb[r];
    x[w.cols[j]] = det(m) / d;
  }

  // Uniqueness of the query value: q's row lies in the rowspace of A.
  std::vector<std::vector<Rat>> Aq = A;
  Aq.push_back(qrow);
  bool unique = rank_by_minors(Aq).rank == w.rank;
  Rat value = qconst;
  for (size_t v = 0; v < n; ++v) value += qrow[v] * x[v];
  if (unique) return {RatOracleVerdict::K::Answer, value};
  return {RatOracleVerdict::K::Ambig, value};
}

}  // namespace oracles

#endif  // SATKIT_TESTS_ORACLES_HPP
