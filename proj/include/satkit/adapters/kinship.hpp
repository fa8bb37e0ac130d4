#ifndef SATKIT_ADAPTERS_KINSHIP_HPP
#define SATKIT_ADAPTERS_KINSHIP_HPP

#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "satkit/logic/lower.hpp"
#include "satkit/solver/outcome.hpp"
#include "satkit/speclang/parser.hpp"

namespace satkit::kin {

/// The closed label enumeration. Composition entries live in a versioned
/// data file; edits to that file are breaking changes.
inline const std::vector<std::pair<std::string, char>>& label_genders() {
  static const std::vector<std::pair<std::string, char>> g = {
      {"mother", 'F'},          {"father", 'M'},
      {"daughter", 'F'},        {"son", 'M'},
      {"sister", 'F'},          {"brother", 'M'},
      {"grandmother", 'F'},     {"grandfather", 'M'},
      {"granddaughter", 'F'},   {"grandson", 'M'},
      {"aunt", 'F'},            {"uncle", 'M'},
      {"niece", 'F'},           {"nephew", 'M'},
      {"wife", 'F'},            {"husband", 'M'},
      {"mother-in-law", 'F'},   {"father-in-law", 'M'},
      {"daughter-in-law", 'F'}, {"son-in-law", 'M'},
      {"sister-in-law", 'F'},   {"brother-in-law", 'M'},
  };
  return g;
}

struct KinTables {
  std::map<std::pair<std::string, std::string>, std::string> compose;
  std::map<std::pair<std::string, char>, std::string> converse;
  std::map<std::string, char> gender;

  bool known(const std::string& label) const { return gender.count(label) > 0; }

  /// Loads composition.tsv and converse.tsv from a directory. Lines are
  /// `r1<TAB>r2<TAB>r3` and `r<TAB>gender<TAB>r'`; '#' starts a comment.
  static KinTables load(const std::string& dir) {
    KinTables t;
    for (const auto& [l, g] : label_genders()) t.gender[l] = g;
    auto read_rows = [](const std::string& path) {
      std::ifstream in(path);
      if (!in) throw std::runtime_error("cannot open kinship table " + path);
      std::vector<std::vector<std::string>> rows;
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cols;
        std::istringstream is(line);
        std::string col;
        while (std::getline(is, col, '\t')) cols.push_back(col);
        if (!cols.empty()) rows.push_back(std::move(cols));
      }
      return rows;
    };
    for (const auto& row : read_rows(dir + "/composition.tsv")) {
      if (row.size() != 3) throw std::runtime_error("bad composition row");
      if (!t.gender.count(row[0]) || !t.gender.count(row[1]) || !t.gender.count(row[2]))
        throw std::runtime_error("unknown label in composition table: " + row[0]);
      t.compose[{row[0], row[1]}] = row[2];
    }
    for (const auto& row : read_rows(dir + "/converse.tsv")) {
      if (row.size() != 3 || row[1].size() != 1) throw std::runtime_error("bad converse row");
      t.converse[{row[0], row[1][0]}] = row[2];
    }
    return t;
  }
};

/// Composition of transitivity steps: r1 relates B to A, r2 relates C to B;
/// the result relates C to A, or nothing when the table has no single-label
/// entry. The optional target gender cross-checks the table's output (the
/// output label always describes the target).
inline std::optional<std::string> compose_kinship(const KinTables& t, const std::string& r1,
                                                  const std::string& r2,
                                                  std::optional<char> gender_of_target = {}) {
  auto it = t.compose.find({r1, r2});
  if (it == t.compose.end()) return std::nullopt;
  if (gender_of_target && t.gender.at(it->second) != *gender_of_target) return std::nullopt;
  return it->second;
}

/// relation(a, b) = (forward, backward): a is b's `forward`, b is a's
/// `backward`.
struct KinEdge {
  std::string a, b;
  std::string forward, backward;
};

struct KinGraph {
  std::vector<KinEdge> edges;

  std::vector<std::string> persons() const {
    std::vector<std::string> out;
    auto add = [&](const std::string& p) {
      for (const auto& q : out)
        if (q == p) return;
      out.push_back(p);
    };
    for (const auto& e : edges) {
      add(e.a);
      add(e.b);
    }
    return out;
  }
  bool has_person(const std::string& p) const {
    for (const auto& e : edges)
      if (e.a == p || e.b == p) return true;
    return false;
  }
};

namespace detail {

/// An edge is internally consistent when its two labels are mutual converses
/// (the converse of a label depends on the gender of the other endpoint,
/// which the other label reveals).
inline bool edge_consistent(const KinTables& t, const KinEdge& e) {
  if (!t.known(e.forward) || !t.known(e.backward)) return false;
  auto conv_f = t.converse.find({e.forward, t.gender.at(e.backward)});
  auto conv_b = t.converse.find({e.backward, t.gender.at(e.forward)});
  if (conv_f == t.converse.end() || conv_b == t.converse.end()) return false;
  return conv_f->second == e.backward && conv_b->second == e.forward;
}

inline bool parallel_edges_conflict(const KinGraph& g) {
  for (size_t i = 0; i < g.edges.size(); ++i)
    for (size_t j = i + 1; j < g.edges.size(); ++j) {
      const KinEdge& x = g.edges[i];
      const KinEdge& y = g.edges[j];
      if (x.a == y.a && x.b == y.b) {
        if (x.forward != y.forward || x.backward != y.backward) return true;
      } else if (x.a == y.b && x.b == y.a) {
        if (x.forward != y.backward || x.backward != y.forward) return true;
      }
    }
  return false;
}

}  // namespace detail

/// Derives the relation of `from` to `to` by composing edge labels along
/// every simple path from `to` to `from`.
///
/// One derived label: Answer. Distinct labels from different paths: Ambig.
/// Paths exist but every composition falls outside the label algebra: Ambig
/// with no witnesses (the relation is under-constrained). Converse-violating
/// edges: Unsat. Unknown or disconnected persons: Error.
inline solver::SolveOutcome solve_kinship_query(const KinTables& t, const KinGraph& g,
                                                const std::string& from,
                                                const std::string& to) {
  using solver::ErrorKind;
  using solver::SolveOutcome;
  if (!g.has_person(from))
    return SolveOutcome::error(ErrorKind::Eval, "unknown person '" + from + "'");
  if (!g.has_person(to))
    return SolveOutcome::error(ErrorKind::Eval, "unknown person '" + to + "'");
  for (const auto& e : g.edges)
    if (!detail::edge_consistent(t, e)) return SolveOutcome::unsat();
  if (detail::parallel_edges_conflict(g)) return SolveOutcome::unsat();
  if (from == to)
    return SolveOutcome::error(ErrorKind::Eval, "relation of a person to themselves");

  // adjacency with the label read as "next person's relation to previous"
  struct Step {
    std::string next;
    std::string label;
  };
  std::map<std::string, std::vector<Step>> adj;
  for (const auto& e : g.edges) {
    adj[e.a].push_back({e.b, e.backward});
    adj[e.b].push_back({e.a, e.forward});
  }

  // Fold state along a path: no step yet, a composed label, or a composition
  // that fell outside the algebra (the path still witnesses connectivity).
  struct Acc {
    enum class K { Start, Defined, Undefined } k = K::Start;
    std::string label;
  };
  std::vector<std::string> defined;
  bool any_path = false;
  long explored = 0;
  std::set<std::string> visited;
  std::function<void(const std::string&, Acc)> dfs = [&](const std::string& at, Acc acc) {
    if (explored > 100000) return;
    if (at == from) {
      any_path = true;
      if (acc.k == Acc::K::Defined) {
        bool seen = false;
        for (const auto& d : defined) seen |= (d == acc.label);
        if (!seen) defined.push_back(acc.label);
      }
      return;
    }
    for (const auto& step : adj[at]) {
      if (visited.count(step.next)) continue;
      ++explored;
      Acc next_acc;
      if (acc.k == Acc::K::Start) {
        next_acc = {Acc::K::Defined, step.label};
      } else if (acc.k == Acc::K::Defined) {
        auto composed = compose_kinship(t, acc.label, step.label);
        next_acc = composed ? Acc{Acc::K::Defined, *composed} : Acc{Acc::K::Undefined, {}};
      } else {
        next_acc = acc;
      }
      visited.insert(step.next);
      dfs(step.next, next_acc);
      visited.erase(step.next);
    }
  };
  visited.insert(to);
  dfs(to, Acc{});
  visited.erase(to);

  if (!any_path)
    return SolveOutcome::error(ErrorKind::Eval,
                               "'" + from + "' and '" + to + "' are not connected");
  if (defined.empty()) {
    SolveOutcome o;
    o.k = SolveOutcome::K::Ambig;
    return o;  // connected but nothing in the algebra pins the relation
  }
  if (defined.size() == 1) return SolveOutcome::answer(Value::sym(defined[0]));
  return SolveOutcome::ambig(Value::sym(defined[0]), Value::sym(defined[1]));
}

/// Extracts a kinship graph and query from a parsed specification. Only
/// `relation(A, B) = (f, b)` constraints and a `solve(relation(X, Y))`
/// query are recognized.
struct KinSpec {
  KinGraph graph;
  std::string from, to;
};

inline KinSpec extract_kin_spec(const spec::SpecAst& ast) {
  using spec::ExprKind;
  auto fail = [](const std::string& m) -> KinSpec {
    throw logic::LowerError(logic::LowerErrorKind::Unsupported, m);
  };
  KinSpec out;
  bool have_query = false;
  for (const auto& st : ast.statements) {
    if (st.kind == spec::StmtKind::Comment) continue;
    if (st.kind == spec::StmtKind::Constraint) {
      const spec::Expr& e = st.expr;
      if (e.kind != ExprKind::BinOp || e.bin_op != spec::BinOpKind::Eq ||
          e.args[0].kind != ExprKind::Call || e.args[0].sym != "relation" ||
          e.args[0].args.size() != 2 || e.args[1].kind != ExprKind::TuplePair)
        return fail("not a kinship relation constraint");
      const spec::Expr& call = e.args[0];
      const spec::Expr& pair = e.args[1];
      if (call.args[0].kind != ExprKind::SymbolRef || call.args[1].kind != ExprKind::SymbolRef ||
          pair.args[0].kind != ExprKind::SymbolRef || pair.args[1].kind != ExprKind::SymbolRef)
        return fail("kinship constraint over non-symbols");
      out.graph.edges.push_back(KinEdge{call.args[0].sym, call.args[1].sym, pair.args[0].sym,
                                        pair.args[1].sym});
      continue;
    }
    if (st.kind == spec::StmtKind::SolveDirective) {
      const spec::Expr& q = st.expr;
      if (q.kind != ExprKind::Call || q.sym != "relation" || q.args.size() != 2 ||
          q.args[0].kind != ExprKind::SymbolRef || q.args[1].kind != ExprKind::SymbolRef)
        return fail("kinship query must be solve(relation(X, Y))");
      out.from = q.args[0].sym;
      out.to = q.args[1].sym;
      have_query = true;
      continue;
    }
    return fail("unexpected statement in kinship specification");
  }
  if (out.graph.edges.empty()) return fail("kinship specification has no relation edges");
  if (!have_query) throw spec::NoQueryError();
  return out;
}

inline bool looks_like_kinship(const spec::SpecAst& ast) {
  for (const auto& st : ast.statements) {
    if (st.kind == spec::StmtKind::Constraint &&
        st.expr.kind == spec::ExprKind::BinOp &&
        st.expr.args[0].kind == spec::ExprKind::Call && st.expr.args[0].sym == "relation")
      return true;
  }
  return false;
}

}  // namespace satkit::kin

#endif  // SATKIT_ADAPTERS_KINSHIP_HPP
