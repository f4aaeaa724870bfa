/* Copyright 2026 The xlamr Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Random AMR graph generators used by the property tests and the
// acceptance suite.

#ifndef XLAMR_TESTS_SUPPORT_RANDOM_GRAPHS_HPP_
#define XLAMR_TESTS_SUPPORT_RANDOM_GRAPHS_HPP_

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "xlamr/amr_graph.hpp"
#include "xlamr/rng.hpp"

namespace xlamr::testing {

struct GenOptions {
  int min_nodes = 1;
  int max_nodes = 10;
  // Every concept appears at most once (name nodes excepted).
  bool unique_concepts = true;
  double reentrancy_prob = 0.3;
  double inverse_prob = 0.15;
  double attribute_prob = 0.3;
  double named_entity_prob = 0.2;
  // Concept pool size when concepts may repeat.
  int concept_pool = 40;
};

inline const std::vector<std::string>& ConceptPool() {
  static const std::vector<std::string> pool = {
      "want-01", "go-02",   "boy",      "girl",     "see-01",  "eat-01",
      "cat",     "dog",     "city",     "person",   "big",     "small",
      "and",     "or",      "tree",     "book",     "read-01", "write-01",
      "house",   "live-01", "country",  "teacher",  "give-01", "happy",
      "run-02",  "child",   "school",   "know-01",  "think-01", "car",
      "red",     "old",     "friend",   "sleep-01", "help-01", "like-01",
      "river",   "bird",    "begin-01", "possible-01", "rain-01", "sun",
      "door",    "open-01", "close-01", "food",     "water",   "music"};
  return pool;
}

inline const std::vector<std::string>& RolePool() {
  static const std::vector<std::string> roles = {
      "ARG0", "ARG1", "ARG2", "mod", "location", "time", "manner", "op1",
      "op2",  "poss", "topic", "purpose"};
  return roles;
}

inline const std::vector<std::pair<std::string, std::string>>& NamePool() {
  static const std::vector<std::pair<std::string, std::string>> names = {
      {"Paris", "Q90"},  {"London", "Q84"}, {"Rome", "Q220"},
      {"Berlin", "Q64"}, {"Mary", "-"},     {"John", "-"}};
  return names;
}

inline AmrGraph RandomGraph(Rng& rng, const GenOptions& opt) {
  const auto& concepts = ConceptPool();
  const auto& roles = RolePool();
  const int span = opt.max_nodes - opt.min_nodes + 1;
  int n = opt.min_nodes + static_cast<int>(rng.below(static_cast<std::uint64_t>(span)));

  std::vector<std::string> chosen;
  if (opt.unique_concepts) {
    std::vector<std::string> pool = concepts;
    rng.shuffle(pool);
    chosen.assign(pool.begin(), pool.begin() + std::min<std::size_t>(n, pool.size()));
    n = static_cast<int>(chosen.size());
  } else {
    int pool = std::min<int>(opt.concept_pool, static_cast<int>(concepts.size()));
    for (int i = 0; i < n; ++i) chosen.push_back(concepts[rng.below(pool)]);
  }

  AmrGraph g;
  std::vector<std::string> vars;
  std::vector<int> parent(n, -1);
  int name_nodes = 0;
  for (int i = 0; i < n; ++i) {
    std::string v = "v" + std::to_string(i);
    g.add_instance(v, chosen[i]);
    vars.push_back(v);
  }
  g.set_top(vars[0]);
  for (int i = 1; i < n; ++i) {
    int p = static_cast<int>(rng.below(static_cast<std::uint64_t>(i)));
    parent[i] = p;
    const std::string& role = roles[rng.below(roles.size())];
    if (rng.uniform() < opt.inverse_prob) {
      g.add_edge(vars[i], role + "-of", vars[p]);
    } else {
      g.add_edge(vars[p], role, vars[i]);
    }
  }
  if (n >= 3 && rng.uniform() < opt.reentrancy_prob) {
    // Extra edge from a node to a non-ancestor, non-child earlier node.
    for (int attempt = 0; attempt < 10; ++attempt) {
      int s = static_cast<int>(rng.below(n));
      int t = 1 + static_cast<int>(rng.below(n - 1));
      bool ancestor = false;
      for (int a = s; a >= 0; a = parent[a]) ancestor |= (a == t);
      if (s == t || ancestor || parent[t] == s) continue;
      g.add_edge(vars[s], roles[rng.below(roles.size())], vars[t]);
      break;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (rng.uniform() < opt.attribute_prob) {
      switch (rng.below(3)) {
        case 0: g.add_attribute(vars[i], "polarity", "-", false); break;
        case 1: g.add_attribute(vars[i], "quant", std::to_string(1 + rng.below(9)), false); break;
        default: g.add_attribute(vars[i], "mode", "imperative", false); break;
      }
    }
  }
  if (rng.uniform() < opt.named_entity_prob) {
    const auto& [name, wiki] = NamePool()[rng.below(NamePool().size())];
    int host = static_cast<int>(rng.below(n));
    std::string nv = "n" + std::to_string(name_nodes++);
    g.add_instance(nv, "name");
    g.add_edge(vars[host], "name", nv);
    g.add_attribute(nv, "op1", name, true);
    g.add_attribute(vars[host], "wiki", wiki, wiki != "-");
  }
  return g;
}

// Bijective variable renaming with shuffled names.
inline AmrGraph RenameVariables(const AmrGraph& g, Rng& rng) {
  std::vector<std::string> fresh;
  for (std::size_t i = 0; i < g.instances().size(); ++i) {
    fresh.push_back("r" + std::to_string(i));
  }
  rng.shuffle(fresh);
  std::map<std::string, std::string> to;
  for (std::size_t i = 0; i < g.instances().size(); ++i) {
    to[g.instances()[i].variable] = fresh[i];
  }
  AmrGraph out;
  for (const auto& inst : g.instances()) out.add_instance(to[inst.variable], inst.concept_label);
  out.set_top(to[g.top()]);
  for (const auto& e : g.edges()) out.add_edge(to[e.source], e.role, to[e.target]);
  for (const auto& a : g.attributes()) out.add_attribute(to[a.source], a.role, a.value, a.quoted);
  return out;
}

// Random local edits: relabel concepts, drop or relabel edges and
// attributes. The result stays a valid graph.
inline AmrGraph Perturb(const AmrGraph& g, Rng& rng, int pool = 12) {
  const auto& concepts = ConceptPool();
  const auto& roles = RolePool();
  AmrGraph out;
  for (const auto& inst : g.instances()) {
    std::string c = inst.concept_label;
    if (rng.uniform() < 0.25) c = concepts[rng.below(static_cast<std::uint64_t>(pool))];
    out.add_instance(inst.variable, c);
  }
  out.set_top(g.top());
  for (const auto& e : g.edges()) {
    std::string role = e.role;
    if (rng.uniform() < 0.2) {
      role = roles[rng.below(roles.size())] + (IsInverseRole(e.role) ? "-of" : "");
    }
    out.add_edge(e.source, role, e.target);
  }
  for (const auto& a : g.attributes()) {
    if (rng.uniform() < 0.3) continue;
    out.add_attribute(a.source, a.role, a.value, a.quoted);
  }
  if (rng.uniform() < 0.3) {
    out.add_attribute(out.instances()[rng.below(out.size())].variable,
                      "polarity", "-", false);
  }
  return out;
}

}  // namespace xlamr::testing

#endif  // XLAMR_TESTS_SUPPORT_RANDOM_GRAPHS_HPP_
