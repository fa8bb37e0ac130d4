#ifndef SATKIT_TESTS_KIN_TESTLIB_HPP
#define SATKIT_TESTS_KIN_TESTLIB_HPP

// Test-side machinery for the kinship algebra:
//  - an independent re-derivation of the composition/converse tables from
//    path semantics (parent/child/sibling/spouse steps with generic-position
//    collapsing), used to cross-check the shipped data files;
//  - the converse-closure property check;
//  - a seeded story generator that builds chains whose gold label follows
//    from the table itself, plus conflict-injected and under-constrained
//    variants.

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "satkit/adapters/kinship.hpp"

namespace kintest {

using satkit::kin::KinEdge;
using satkit::kin::KinGraph;
using satkit::kin::KinTables;

// ---- path-semantics re-derivation ----------------------------------------

inline const std::map<std::string, std::vector<std::string>>& label_paths() {
  static const std::map<std::string, std::vector<std::string>> p = {
      {"mother", {"U"}},          {"father", {"U"}},
      {"daughter", {"D"}},        {"son", {"D"}},
      {"sister", {"S"}},          {"brother", {"S"}},
      {"grandmother", {"UU"}},    {"grandfather", {"UU"}},
      {"granddaughter", {"DD"}},  {"grandson", {"DD"}},
      {"aunt", {"US"}},           {"uncle", {"US"}},
      {"niece", {"SD"}},          {"nephew", {"SD"}},
      {"wife", {"M"}},            {"husband", {"M"}},
      {"mother-in-law", {"MU"}},  {"father-in-law", {"MU"}},
      {"daughter-in-law", {"DM"}},{"son-in-law", {"DM"}},
      {"sister-in-law", {"MS", "SM"}},
      {"brother-in-law", {"MS", "SM"}},
  };
  return p;
}

inline std::string reduce_path(std::string p) {
  static const std::vector<std::pair<std::string, std::string>> rules = {
      {"SS", "S"}, {"DS", "D"}, {"SU", "U"}, {"DU", "M"},
      {"UD", "S"}, {"MM", ""},  {"UM", "U"}, {"MD", "D"},
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [pat, rep] : rules) {
      size_t i = p.find(pat);
      if (i != std::string::npos) {
        p = p.substr(0, i) + rep + p.substr(i + pat.size());
        changed = true;
        break;
      }
    }
  }
  return p;
}

inline std::optional<std::string> label_for_path(const std::string& path, char gender) {
  for (const auto& [label, paths] : label_paths()) {
    char g = 'F';
    for (const auto& [l, gg] : satkit::kin::label_genders())
      if (l == label) g = gg;
    if (g != gender) continue;
    for (const auto& p : paths)
      if (p == path) return label;
  }
  return std::nullopt;
}

inline std::optional<std::string> derive_composition(const std::string& r1,
                                                     const std::string& r2) {
  char g2 = 'F';
  for (const auto& [l, g] : satkit::kin::label_genders())
    if (l == r2) g2 = g;
  std::set<std::string> results;
  bool any_undefined = false;
  for (const auto& p1 : label_paths().at(r1))
    for (const auto& p2 : label_paths().at(r2)) {
      auto lbl = label_for_path(reduce_path(p1 + p2), g2);
      if (lbl)
        results.insert(*lbl);
      else
        any_undefined = true;
    }
  if (results.size() == 1 && !any_undefined) return *results.begin();
  return std::nullopt;
}

inline std::optional<std::string> derive_converse(const std::string& r, char other_gender) {
  std::set<std::string> results;
  for (const auto& p : label_paths().at(r)) {
    std::string rev;
    for (auto it = p.rbegin(); it != p.rend(); ++it) {
      char c = *it;
      rev += (c == 'U') ? 'D' : (c == 'D') ? 'U' : c;
    }
    auto lbl = label_for_path(reduce_path(rev), other_gender);
    if (!lbl) return std::nullopt;
    results.insert(*lbl);
  }
  if (results.size() == 1) return *results.begin();
  return std::nullopt;
}

// ---- converse closure ------------------------------------------------------

/// compose(r1, r2) = r3 implies compose(conv(r2), conv(r1)) = conv(r3), for
/// both genders of the far endpoint; undefined cells stay undefined under
/// reversal. Returns the number of violations.
inline int converse_closure_violations(const KinTables& t) {
  int bad = 0;
  auto conv = [&](const std::string& r, char g) -> std::optional<std::string> {
    auto it = t.converse.find({r, g});
    if (it == t.converse.end()) return std::nullopt;
    return it->second;
  };
  for (const auto& [r1, g1] : satkit::kin::label_genders()) {
    for (const auto& [r2, g2] : satkit::kin::label_genders()) {
      auto it = t.compose.find({r1, r2});
      for (char gy : {'F', 'M'}) {
        auto c2 = conv(r2, g1);  // far endpoint of r2's converse is the r1 person
        auto c1 = conv(r1, gy);
        if (!c2 || !c1) {
          ++bad;
          continue;
        }
        auto rev = t.compose.find({*c2, *c1});
        if (it == t.compose.end()) {
          if (rev != t.compose.end()) ++bad;  // undefined cells must be symmetric
          continue;
        }
        auto c3 = conv(it->second, gy);
        if (!c3 || rev == t.compose.end() || rev->second != *c3) ++bad;
      }
    }
  }
  return bad;
}

// ---- seeded story generation ------------------------------------------------

struct Story {
  KinGraph graph;
  std::string from, to;
  std::string gold;  // expected label for Normal stories
  enum class Kind { Normal, Conflict, Underconstrained } kind = Kind::Normal;
};

inline char gender_of(const KinTables& t, const std::string& label) {
  return t.gender.at(label);
}

/// Builds a chain story of `hops` edges whose folded label is defined (or,
/// for Underconstrained, undefined exactly at the last step). Edge
/// orientations and the edge order in the graph are shuffled.
inline std::optional<Story> gen_story(std::mt19937_64& rng, const KinTables& t, int hops,
                                      Story::Kind kind) {
  std::vector<std::string> labels;
  for (const auto& [l, g] : satkit::kin::label_genders()) labels.push_back(l);

  std::vector<std::string> chain;  // chain[i] = label of p_{i+1} relative to p_i
  std::string acc;
  for (int i = 0; i < hops; ++i) {
    std::vector<std::string> candidates;
    for (const auto& l : labels) {
      if (i == 0) {
        candidates.push_back(l);
      } else {
        bool defined = t.compose.count({acc, l}) > 0;
        bool want_defined = !(kind == Story::Kind::Underconstrained && i == hops - 1);
        if (defined == want_defined) candidates.push_back(l);
      }
    }
    if (candidates.empty()) return std::nullopt;
    std::string pick = candidates[rng() % candidates.size()];
    chain.push_back(pick);
    acc = (i == 0) ? pick
                   : (kind == Story::Kind::Underconstrained && i == hops - 1)
                         ? acc
                         : t.compose.at({acc, pick});
  }

  Story s;
  s.kind = kind;
  s.gold = acc;
  char g0 = (rng() % 2) ? 'F' : 'M';
  auto person = [](int i) { return "p" + std::to_string(i); };
  for (int i = 0; i < hops; ++i) {
    char gi = i == 0 ? g0 : gender_of(t, chain[i - 1]);
    auto conv = t.converse.find({chain[i], gi});
    if (conv == t.converse.end()) return std::nullopt;
    KinEdge e;
    if (rng() % 2) {
      e = KinEdge{person(i + 1), person(i), chain[i], conv->second};
    } else {
      e = KinEdge{person(i), person(i + 1), conv->second, chain[i]};
    }
    s.graph.edges.push_back(e);
  }
  std::shuffle(s.graph.edges.begin(), s.graph.edges.end(), rng);
  s.from = person(hops);
  s.to = person(0);

  if (kind == Story::Kind::Conflict) {
    // corrupt one edge's backward label so the pair is no longer converse
    size_t k = rng() % s.graph.edges.size();
    KinEdge& e = s.graph.edges[k];
    for (const auto& l : labels) {
      if (l == e.backward) continue;
      KinEdge trial = e;
      trial.backward = l;
      auto cf = t.converse.find({trial.forward, gender_of(t, trial.backward)});
      if (cf == t.converse.end() || cf->second != trial.backward) {
        e = trial;
        return s;
      }
    }
    return std::nullopt;
  }
  return s;
}

}  // namespace kintest

#endif  // SATKIT_TESTS_KIN_TESTLIB_HPP
