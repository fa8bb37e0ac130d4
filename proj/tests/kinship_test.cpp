#include <gtest/gtest.h>

#include "kin_testlib.hpp"
#include "testutil.hpp"

using namespace satkit;
using namespace satkit::kin;

namespace {

const KinTables& tables() {
  static KinTables t = KinTables::load(testutil::data_path("kinship"));
  return t;
}

solver::SolveOutcome run_fixture(const std::string& name) {
  auto ast = spec::parse_spec_text(testutil::read_fixture_spec(name));
  auto ks = extract_kin_spec(ast);
  return solve_kinship_query(tables(), ks.graph, ks.from, ks.to);
}

}  // namespace

TEST(KinCompose, PaperTransitivitySteps) {
  EXPECT_EQ(compose_kinship(tables(), "daughter", "daughter"), "granddaughter");
  EXPECT_EQ(compose_kinship(tables(), "son", "brother"), "son");
  EXPECT_EQ(compose_kinship(tables(), "daughter", "father"), "husband");
  EXPECT_EQ(compose_kinship(tables(), "son", "daughter"), "granddaughter");
  EXPECT_EQ(compose_kinship(tables(), "granddaughter", "sister"), "granddaughter");
  EXPECT_EQ(compose_kinship(tables(), "father", "brother"), "uncle");
  // the composition that makes the grandfather chain under-constrained
  EXPECT_EQ(compose_kinship(tables(), "uncle", "grandfather"), std::nullopt);
}

TEST(KinCompose, TargetGenderCrossCheck) {
  EXPECT_EQ(compose_kinship(tables(), "daughter", "daughter", 'F'), "granddaughter");
  EXPECT_EQ(compose_kinship(tables(), "daughter", "daughter", 'M'), std::nullopt);
}

TEST(KinCompose, TotalOnUndefinedCells) {
  // every pair either yields a label or cleanly reports no composition
  for (const auto& [r1, g1] : label_genders())
    for (const auto& [r2, g2] : label_genders()) {
      auto r = compose_kinship(tables(), r1, r2);
      if (r) EXPECT_TRUE(tables().known(*r)) << r1 << " " << r2;
    }
}

TEST(KinTables, MatchesPathSemanticsRederivation) {
  int defined = 0;
  for (const auto& [r1, g1] : label_genders())
    for (const auto& [r2, g2] : label_genders()) {
      auto expect = kintest::derive_composition(r1, r2);
      auto it = tables().compose.find({r1, r2});
      if (expect) {
        ++defined;
        ASSERT_NE(it, tables().compose.end()) << r1 << " o " << r2;
        EXPECT_EQ(it->second, *expect) << r1 << " o " << r2;
      } else {
        EXPECT_EQ(it, tables().compose.end()) << r1 << " o " << r2;
      }
    }
  EXPECT_GT(defined, 100);
  EXPECT_EQ(defined, static_cast<int>(tables().compose.size()));
  for (const auto& [r, g] : label_genders())
    for (char og : {'F', 'M'}) {
      auto expect = kintest::derive_converse(r, og);
      auto it = tables().converse.find({r, og});
      ASSERT_TRUE(expect.has_value()) << r;
      ASSERT_NE(it, tables().converse.end()) << r;
      EXPECT_EQ(it->second, *expect) << r << " " << og;
    }
}

TEST(KinTables, ConverseClosureHoldsExhaustively) {
  EXPECT_EQ(kintest::converse_closure_violations(tables()), 0);
}

TEST(KinQuery, DorothyStoryYieldsGranddaughter) {
  auto o = run_fixture("clutrr_dorothy.sat");
  ASSERT_EQ(o.k, solver::SolveOutcome::K::Answer);
  EXPECT_EQ(o.value, Value::sym("granddaughter"));
}

TEST(KinQuery, ConverseViolatingEdgeIsUnsat) {
  EXPECT_EQ(run_fixture("clutrr_arlene_unsat.sat").k, solver::SolveOutcome::K::Unsat);
}

TEST(KinQuery, UndefinedCompositionChainIsAmbig) {
  EXPECT_EQ(run_fixture("clutrr_kirk_ambig.sat").k, solver::SolveOutcome::K::Ambig);
}

TEST(KinQuery, MisparsedBrothersStoryStillAnswersSon) {
  auto o = run_fixture("clutrr_donald.sat");
  ASSERT_EQ(o.k, solver::SolveOutcome::K::Answer);
  EXPECT_EQ(o.value, Value::sym("son"));
}

TEST(KinQuery, PromptExemplarStoryAnswers) {
  auto o = run_fixture("clutrr_teresa.sat");
  EXPECT_EQ(o.k, solver::SolveOutcome::K::Answer);
}

TEST(KinQuery, DirectEdgeAnswersImmediately) {
  KinGraph g;
  g.edges.push_back(KinEdge{"A", "B", "wife", "husband"});
  auto o = solve_kinship_query(tables(), g, "A", "B");
  ASSERT_EQ(o.k, solver::SolveOutcome::K::Answer);
  EXPECT_EQ(o.value, Value::sym("wife"));
}

TEST(KinQuery, UnknownPersonIsError) {
  KinGraph g;
  g.edges.push_back(KinEdge{"A", "B", "wife", "husband"});
  auto o = solve_kinship_query(tables(), g, "A", "Zed");
  EXPECT_EQ(o.k, solver::SolveOutcome::K::Error);
}

TEST(KinQuery, DisconnectedPersonsAreError) {
  KinGraph g;
  g.edges.push_back(KinEdge{"A", "B", "wife", "husband"});
  g.edges.push_back(KinEdge{"C", "D", "sister", "sister"});
  auto o = solve_kinship_query(tables(), g, "A", "D");
  EXPECT_EQ(o.k, solver::SolveOutcome::K::Error);
}

// Path-order soundness on trees: agreement with a test-side oracle that
// enumerates the unique simple path and composes stepwise.
TEST(KinQuery, TreePathsAgreeWithStepwiseOracle) {
  std::mt19937_64 rng(4242);
  std::vector<std::string> labels;
  for (const auto& [l, g] : label_genders()) labels.push_back(l);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    int n = 3 + static_cast<int>(rng() % 4);  // 3..6 persons
    // random tree: node i>0 attaches to a random earlier node
    KinGraph g;
    std::vector<int> parent(n, -1);
    std::vector<std::vector<std::pair<int, std::string>>> adj(n);
    bool ok = true;
    for (int i = 1; i < n && ok; ++i) {
      int p = static_cast<int>(rng() % i);
      std::string fwd = labels[rng() % labels.size()];
      char pg = (rng() % 2) ? 'F' : 'M';
      auto conv = tables().converse.find({fwd, pg});
      if (conv == tables().converse.end()) {
        ok = false;
        break;
      }
      g.edges.push_back(KinEdge{"n" + std::to_string(i), "n" + std::to_string(p), fwd,
                                conv->second});
      adj[i].push_back({p, conv->second});
      adj[p].push_back({i, fwd});
      parent[i] = p;
    }
    if (!ok) continue;
    int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
    if (a == b) continue;
    // oracle: unique tree path from b to a, composing stepwise
    std::vector<int> path;
    {
      std::vector<int> prev(n, -2);
      std::vector<int> queue = {b};
      prev[b] = -1;
      for (size_t qi = 0; qi < queue.size(); ++qi) {
        int at = queue[qi];
        for (auto& [next, lbl] : adj[at])
          if (prev[next] == -2) {
            prev[next] = at;
            queue.push_back(next);
          }
      }
      for (int at = a; at != -1; at = prev[at]) path.push_back(at);
      std::reverse(path.begin(), path.end());  // b .. a
    }
    std::optional<std::string> acc;
    bool undefined = false;
    for (size_t i = 0; i + 1 < path.size(); ++i) {
      std::string step;
      for (auto& [next, lbl] : adj[path[i]])
        if (next == path[i + 1]) step = lbl;
      if (!acc) {
        acc = step;
      } else {
        auto composed = compose_kinship(tables(), *acc, step);
        if (!composed) {
          undefined = true;
          break;
        }
        acc = composed;
      }
    }
    auto o = solve_kinship_query(tables(), g, "n" + std::to_string(a), "n" + std::to_string(b));
    ++checked;
    if (undefined) {
      EXPECT_EQ(o.k, solver::SolveOutcome::K::Ambig);
    } else {
      ASSERT_EQ(o.k, solver::SolveOutcome::K::Answer);
      EXPECT_EQ(o.value, Value::sym(*acc));
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(KinStories, GeneratedChainsMatchGold) {
  std::mt19937_64 rng(20230517);
  int made = 0;
  for (int trial = 0; made < 60 && trial < 500; ++trial) {
    int hops = 2 + static_cast<int>(rng() % 9);  // 2..10
    auto story = kintest::gen_story(rng, tables(), hops, kintest::Story::Kind::Normal);
    if (!story) continue;
    auto o = solve_kinship_query(tables(), story->graph, story->from, story->to);
    ASSERT_EQ(o.k, solver::SolveOutcome::K::Answer) << "hops=" << hops;
    EXPECT_EQ(o.value, Value::sym(story->gold));
    ++made;
  }
  EXPECT_GE(made, 60);
}

TEST(KinStories, InjectedConflictsAreUnsat) {
  std::mt19937_64 rng(77001);
  int made = 0;
  for (int trial = 0; made < 8 && trial < 200; ++trial) {
    auto story = kintest::gen_story(rng, tables(), 3 + static_cast<int>(rng() % 4),
                                    kintest::Story::Kind::Conflict);
    if (!story) continue;
    auto o = solve_kinship_query(tables(), story->graph, story->from, story->to);
    EXPECT_EQ(o.k, solver::SolveOutcome::K::Unsat);
    ++made;
  }
  EXPECT_GE(made, 8);
}

TEST(KinStories, UnderconstrainedChainsAreAmbig) {
  std::mt19937_64 rng(77002);
  int made = 0;
  for (int trial = 0; made < 8 && trial < 200; ++trial) {
    auto story = kintest::gen_story(rng, tables(), 2 + static_cast<int>(rng() % 5),
                                    kintest::Story::Kind::Underconstrained);
    if (!story) continue;
    auto o = solve_kinship_query(tables(), story->graph, story->from, story->to);
    EXPECT_EQ(o.k, solver::SolveOutcome::K::Ambig);
    ++made;
  }
  EXPECT_GE(made, 8);
}
