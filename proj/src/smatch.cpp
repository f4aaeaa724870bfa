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

#include "xlamr/smatch.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "xlamr/rng.hpp"

namespace xlamr {

SmatchScore SmatchScore::FromCounts(long matched, long pred_total,
                                    long gold_total) {
  SmatchScore s;
  s.matched = matched;
  s.pred_total = pred_total;
  s.gold_total = gold_total;
  if (pred_total == 0 && gold_total == 0) {
    s.precision = s.recall = s.f1 = 1.0;
    return s;
  }
  s.precision = pred_total > 0 ? static_cast<double>(matched) / pred_total : 0.0;
  s.recall = gold_total > 0 ? static_cast<double>(matched) / gold_total : 0.0;
  double pr = s.precision + s.recall;
  s.f1 = pr > 0.0 ? 2.0 * s.precision * s.recall / pr : 0.0;
  return s;
}

const SmatchScore& FineGrainedReport::at(std::string_view metric) const {
  auto it = scores.find(std::string(metric));
  if (it == scores.end()) {
    throw std::out_of_range("no metric '" + std::string(metric) + "'");
  }
  return it->second;
}

namespace {

// Scoring tables for one (pred, gold) pair of triple sets. Variables are
// indexed; unary triples (top/instance/attribute) become a pred x gold
// weight table, relations are matched through a hash set of gold edges.
class Alignment {
 public:
  Alignment(const TripleSet& pred, const TripleSet& gold) {
    std::unordered_map<std::string, int> pred_ix = Index(pred, pred_vars_);
    std::unordered_map<std::string, int> gold_ix = Index(gold, gold_vars_);
    n_ = static_cast<int>(pred_vars_.size());
    m_ = static_cast<int>(gold_vars_.size());
    pred_total_ = static_cast<long>(pred.triples.size());
    gold_total_ = static_cast<long>(gold.triples.size());
    unary_.assign(static_cast<std::size_t>(n_) * m_, 0);
    rels_of_.resize(n_);

    std::unordered_map<std::string, std::vector<int>> gold_unary;
    std::unordered_map<std::string, int> roles;
    auto role_id = [&](const std::string& r) {
      return roles.emplace(r, static_cast<int>(roles.size())).first->second;
    };
    for (const auto& t : gold.triples) {
      if (t.kind == TripleKind::kRelation) {
        gold_rels_.insert(Key(role_id(t.role), gold_ix.at(t.source),
                              gold_ix.at(t.target)));
      } else {
        gold_unary[UnaryKey(t)].push_back(gold_ix.at(t.source));
      }
    }
    for (const auto& t : pred.triples) {
      int a = pred_ix.at(t.source);
      if (t.kind == TripleKind::kRelation) {
        int b = pred_ix.at(t.target);
        int id = static_cast<int>(rels_.size());
        rels_.push_back({a, b, role_id(t.role)});
        rels_of_[a].push_back(id);
        if (b != a) rels_of_[b].push_back(id);
      } else {
        auto it = gold_unary.find(UnaryKey(t));
        if (it == gold_unary.end()) continue;
        for (int j : it->second) ++unary_[Cell(a, j)];
      }
    }
  }

  int n() const { return n_; }
  int m() const { return m_; }
  long pred_total() const { return pred_total_; }
  long gold_total() const { return gold_total_; }
  const std::vector<std::string>& pred_vars() const { return pred_vars_; }
  const std::vector<std::string>& gold_vars() const { return gold_vars_; }

  int U(int i, int j) const { return j < 0 ? 0 : unary_[Cell(i, j)]; }

  struct Rel {
    int a, b, role;
  };
  const std::vector<Rel>& rels() const { return rels_; }
  const std::vector<int>& rels_of(int i) const { return rels_of_[i]; }

  bool RelMatches(const Rel& r, const std::vector<int>& map) const {
    int ja = map[r.a], jb = map[r.b];
    return ja >= 0 && jb >= 0 && gold_rels_.count(Key(r.role, ja, jb));
  }

  int Score(const std::vector<int>& map) const {
    int s = 0;
    for (int i = 0; i < n_; ++i) s += U(i, map[i]);
    for (const auto& r : rels_) s += RelMatches(r, map);
    return s;
  }

  // Contribution of everything touching variable i (or i and k).
  int Local(const std::vector<int>& map, int i, int k = -1) const {
    int s = U(i, map[i]);
    for (int id : rels_of_[i]) s += RelMatches(rels_[id], map);
    if (k >= 0) {
      s += U(k, map[k]);
      for (int id : rels_of_[k]) {
        const Rel& r = rels_[id];
        if (r.a == i || r.b == i) continue;
        s += RelMatches(r, map);
      }
    }
    return s;
  }

  std::map<std::string, std::string> Named(const std::vector<int>& map) const {
    std::map<std::string, std::string> out;
    for (int i = 0; i < n_; ++i) {
      if (map[i] >= 0) out[pred_vars_[i]] = gold_vars_[map[i]];
    }
    return out;
  }

 private:
  static std::unordered_map<std::string, int> Index(
      const TripleSet& ts, std::vector<std::string>& vars) {
    std::unordered_map<std::string, int> ix;
    auto add = [&](const std::string& v) {
      if (ix.emplace(v, static_cast<int>(vars.size())).second) vars.push_back(v);
    };
    for (const auto& v : ts.variables) add(v);
    for (const auto& t : ts.triples) {
      add(t.source);
      if (t.kind == TripleKind::kRelation) add(t.target);
    }
    return ix;
  }

  static std::string UnaryKey(const Triple& t) {
    return std::to_string(static_cast<int>(t.kind)) + '\x1f' + t.role + '\x1f' +
           t.target;
  }
  static std::uint64_t Key(int role, int a, int b) {
    return (static_cast<std::uint64_t>(role) << 42) |
           (static_cast<std::uint64_t>(a) << 21) | static_cast<std::uint64_t>(b);
  }
  std::size_t Cell(int i, int j) const {
    return static_cast<std::size_t>(i) * m_ + j;
  }

  int n_ = 0, m_ = 0;
  long pred_total_ = 0, gold_total_ = 0;
  std::vector<std::string> pred_vars_, gold_vars_;
  std::vector<int> unary_;
  std::vector<Rel> rels_;
  std::vector<std::vector<int>> rels_of_;
  std::unordered_set<std::uint64_t> gold_rels_;
};

// Best-improvement hill climbing from `map`. Moves are single reassignment
// to an unused gold variable and pairwise swaps; ties go to the first move
// in (variable, candidate) order.
int Climb(const Alignment& al, std::vector<int>& map) {
  const int n = al.n(), m = al.m();
  std::vector<int> used_by(m, -1);
  for (int i = 0; i < n; ++i) {
    if (map[i] >= 0) used_by[map[i]] = i;
  }
  int score = al.Score(map);
  while (true) {
    int best_delta = 0;
    int bi = -1, bj = -1, bk = -1;
    for (int i = 0; i < n; ++i) {
      const int old = map[i];
      const int before = al.Local(map, i);
      for (int j = 0; j < m; ++j) {
        if (used_by[j] >= 0) continue;
        map[i] = j;
        int delta = al.Local(map, i) - before;
        if (delta > best_delta) {
          best_delta = delta;
          bi = i, bj = j, bk = -1;
        }
      }
      map[i] = old;
    }
    for (int i = 0; i < n; ++i) {
      for (int k = i + 1; k < n; ++k) {
        if (map[i] == map[k]) continue;  // both unmapped
        const int before = al.Local(map, i, k);
        std::swap(map[i], map[k]);
        int delta = al.Local(map, i, k) - before;
        std::swap(map[i], map[k]);
        if (delta > best_delta) {
          best_delta = delta;
          bi = i, bj = -1, bk = k;
        }
      }
    }
    if (best_delta <= 0) break;
    if (bk >= 0) {
      std::swap(map[bi], map[bk]);
      if (map[bi] >= 0) used_by[map[bi]] = bi;
      if (map[bk] >= 0) used_by[map[bk]] = bk;
    } else {
      if (map[bi] >= 0) used_by[map[bi]] = -1;
      map[bi] = bj;
      used_by[bj] = bi;
    }
    score += best_delta;
  }
  return score;
}

std::vector<int> GreedyInit(const Alignment& al, Rng& rng) {
  const int n = al.n(), m = al.m();
  std::vector<int> map(n, -1);
  std::vector<bool> used(m, false);
  for (int i = 0; i < n; ++i) {
    int best = 0, best_j = -1;
    for (int j = 0; j < m; ++j) {
      if (!used[j] && al.U(i, j) > best) {
        best = al.U(i, j);
        best_j = j;
      }
    }
    if (best_j >= 0) {
      map[i] = best_j;
      used[best_j] = true;
    }
  }
  std::vector<int> free_gold;
  for (int j = 0; j < m; ++j) {
    if (!used[j]) free_gold.push_back(j);
  }
  rng.shuffle(free_gold);
  std::size_t next = 0;
  for (int i = 0; i < n && next < free_gold.size(); ++i) {
    if (map[i] < 0) map[i] = free_gold[next++];
  }
  return map;
}

std::vector<int> RandomInit(const Alignment& al, Rng& rng) {
  std::vector<int> gold(al.m()), pred(al.n());
  std::iota(gold.begin(), gold.end(), 0);
  std::iota(pred.begin(), pred.end(), 0);
  rng.shuffle(gold);
  rng.shuffle(pred);
  std::vector<int> map(al.n(), -1);
  for (std::size_t k = 0; k < pred.size() && k < gold.size(); ++k) {
    map[pred[k]] = gold[k];
  }
  return map;
}

// Depth-first search over injective maps from every small-side variable to
// a distinct big-side variable. Adding a pair never lowers the score, so
// complete injections contain an optimum.
class ExactSearch {
 public:
  explicit ExactSearch(const Alignment& al) : al_(al), n_(al.n()), m_(al.m()) {
    max_u_.assign(n_ + 1, 0);
    rels_at_.resize(n_);
    suffix_rels_.assign(n_ + 1, 0);
    for (int i = 0; i < n_; ++i) {
      int best = 0;
      for (int j = 0; j < m_; ++j) best = std::max(best, al_.U(i, j));
      max_u_[i] = best;
    }
    for (int i = n_ - 1; i >= 0; --i) max_u_[i] += max_u_[i + 1];
    for (int id = 0; id < static_cast<int>(al_.rels().size()); ++id) {
      const auto& r = al_.rels()[id];
      rels_at_[std::max(r.a, r.b)].push_back(id);
    }
    for (int i = n_ - 1; i >= 0; --i) {
      suffix_rels_[i] = suffix_rels_[i + 1] + static_cast<int>(rels_at_[i].size());
    }
    candidates_.resize(n_);
    for (int i = 0; i < n_; ++i) {
      auto& c = candidates_[i];
      c.resize(m_);
      std::iota(c.begin(), c.end(), 0);
      std::stable_sort(c.begin(), c.end(), [&](int x, int y) {
        return al_.U(i, x) > al_.U(i, y);
      });
    }
  }

  int Run(std::vector<int>& best_map) {
    map_.assign(n_, -1);
    used_.assign(m_, false);
    best_ = -1;
    Recurse(0, 0);
    best_map = best_map_;
    return best_;
  }

 private:
  void Recurse(int i, int score) {
    if (i == n_) {
      if (score > best_) {
        best_ = score;
        best_map_ = map_;
      }
      return;
    }
    if (score + max_u_[i] + suffix_rels_[i] <= best_) return;
    for (int j : candidates_[i]) {
      if (used_[j]) continue;
      map_[i] = j;
      used_[j] = true;
      int gain = al_.U(i, j);
      for (int id : rels_at_[i]) gain += al_.RelMatches(al_.rels()[id], map_);
      Recurse(i + 1, score + gain);
      used_[j] = false;
      map_[i] = -1;
    }
  }

  const Alignment& al_;
  int n_, m_;
  std::vector<int> max_u_;
  std::vector<std::vector<int>> rels_at_;
  std::vector<int> suffix_rels_;
  std::vector<std::vector<int>> candidates_;
  std::vector<int> map_, best_map_;
  std::vector<bool> used_;
  int best_ = -1;
};

bool IsArgRole(const std::string& role) {
  if (role.size() < 4 || role.compare(0, 3, "ARG") != 0) return false;
  return std::all_of(role.begin() + 3, role.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c));
  });
}

TripleSet Finish(std::vector<Triple> triples) {
  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());
  TripleSet ts;
  std::unordered_set<std::string> seen;
  for (const auto& t : triples) {
    if (seen.insert(t.source).second) ts.variables.push_back(t.source);
    if (t.kind == TripleKind::kRelation && seen.insert(t.target).second) {
      ts.variables.push_back(t.target);
    }
  }
  ts.triples = std::move(triples);
  return ts;
}

TripleSet Unlabeled(const TripleSet& ts) {
  std::vector<Triple> out = ts.triples;
  for (auto& t : out) {
    if (t.kind == TripleKind::kRelation) t.role = "rel";
  }
  TripleSet r = Finish(std::move(out));
  r.variables = ts.variables;
  return r;
}

TripleSet NoSense(const TripleSet& ts) {
  std::vector<Triple> out = ts.triples;
  for (auto& t : out) {
    if (t.kind == TripleKind::kInstance) t.target = StripSense(t.target);
  }
  TripleSet r = Finish(std::move(out));
  r.variables = ts.variables;
  return r;
}

// Subgraphs below every node with at least two incoming relations, plus
// those incoming relations and the instances of their sources.
TripleSet Reentrant(const TripleSet& normalized) {
  std::unordered_map<std::string, int> incoming;
  std::unordered_map<std::string, std::vector<const Triple*>> out_rels;
  for (const auto& t : normalized.triples) {
    if (t.kind != TripleKind::kRelation) continue;
    ++incoming[t.target];
    out_rels[t.source].push_back(&t);
  }
  std::unordered_set<std::string> roots, nodes, parents;
  for (const auto& [v, c] : incoming) {
    if (c >= 2) roots.insert(v);
  }
  std::vector<std::string> stack(roots.begin(), roots.end());
  nodes.insert(roots.begin(), roots.end());
  while (!stack.empty()) {
    std::string v = std::move(stack.back());
    stack.pop_back();
    for (const Triple* t : out_rels[v]) {
      if (nodes.insert(t->target).second) stack.push_back(t->target);
    }
  }
  std::vector<Triple> out;
  for (const auto& t : normalized.triples) {
    if (t.kind == TripleKind::kRelation) {
      bool inside = nodes.count(t.source) && nodes.count(t.target);
      bool into_root = roots.count(t.target) > 0;
      if (inside || into_root) out.push_back(t);
      if (into_root) parents.insert(t.source);
    }
  }
  for (const auto& t : normalized.triples) {
    bool unary = t.kind == TripleKind::kInstance || t.kind == TripleKind::kAttribute;
    if (!unary) continue;
    if (nodes.count(t.source) ||
        (t.kind == TripleKind::kInstance && parents.count(t.source))) {
      out.push_back(t);
    }
  }
  return Finish(std::move(out));
}

TripleSet SemanticRoles(const TripleSet& normalized) {
  std::vector<Triple> out;
  std::unordered_set<std::string> endpoints;
  for (const auto& t : normalized.triples) {
    if (t.kind == TripleKind::kRelation && IsArgRole(t.role)) {
      out.push_back(t);
      endpoints.insert(t.source);
      endpoints.insert(t.target);
    }
  }
  for (const auto& t : normalized.triples) {
    if (t.kind == TripleKind::kInstance && endpoints.count(t.source)) {
      out.push_back(t);
    }
  }
  return Finish(std::move(out));
}

using Multiset = std::map<std::string, long>;

SmatchScore MultisetScore(const Multiset& pred, const Multiset& gold) {
  long p = 0, g = 0, matched = 0;
  for (const auto& [k, c] : pred) {
    p += c;
    auto it = gold.find(k);
    if (it != gold.end()) matched += std::min(c, it->second);
  }
  for (const auto& [k, c] : gold) g += c;
  return SmatchScore::FromCounts(matched, p, g);
}

Multiset Concepts(const AmrGraph& g) {
  Multiset out;
  for (const auto& inst : g.instances()) ++out[inst.concept_label];
  return out;
}

Multiset NamedEntities(const AmrGraph& g) {
  Multiset out;
  for (const auto& e : g.edges()) {
    if (e.role == "name") {
      ++out[g.concept_of(e.source) + '\x1f' + NameString(g, e.target)];
    }
  }
  return out;
}

Multiset WikiLinks(const AmrGraph& g) {
  Multiset out;
  for (const auto& a : g.attributes()) {
    if (a.role != "wiki") continue;
    std::string name;
    for (const auto& e : g.edges()) {
      if (e.source == a.source && e.role == "name") {
        name = NameString(g, e.target);
        break;
      }
    }
    ++out[a.value + '\x1f' + name];
  }
  return out;
}

Multiset Negated(const AmrGraph& g) {
  Multiset out;
  for (const auto& a : g.attributes()) {
    if (a.role == "polarity" && a.value == "-") ++out[g.concept_of(a.source)];
  }
  return out;
}

}  // namespace

std::string StripSense(const std::string& concept_label) {
  auto dash = concept_label.rfind('-');
  if (dash == std::string::npos || dash == 0 || dash + 1 == concept_label.size()) {
    return concept_label;
  }
  for (std::size_t i = dash + 1; i < concept_label.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(concept_label[i]))) {
      return concept_label;
    }
  }
  return concept_label.substr(0, dash);
}

SmatchScore AlignTriples(const TripleSet& pred, const TripleSet& gold,
                         int restarts, std::uint64_t seed) {
  Alignment al(pred, gold);
  if (al.n() == 0 || al.m() == 0) {
    return SmatchScore::FromCounts(0, al.pred_total(), al.gold_total());
  }
  Rng rng(seed);
  int best = -1;
  std::vector<int> best_map;
  for (int r = 0; r < std::max(1, restarts); ++r) {
    std::vector<int> map = r == 0 ? GreedyInit(al, rng) : RandomInit(al, rng);
    int score = Climb(al, map);
    if (score > best) {
      best = score;
      best_map = map;
    }
  }
  SmatchScore s = SmatchScore::FromCounts(best, al.pred_total(), al.gold_total());
  s.mapping = al.Named(best_map);
  return s;
}

SmatchScore ExactAlignTriples(const TripleSet& pred, const TripleSet& gold,
                              int max_vars) {
  Alignment forward(pred, gold);
  const bool flip = forward.n() > forward.m();
  const int small = std::min(forward.n(), forward.m());
  if (small > max_vars) {
    throw SmatchError(SmatchError::Kind::kTooLarge,
                      "exact Smatch limited to " + std::to_string(max_vars) +
                          " variables on the smaller side, got " +
                          std::to_string(small));
  }
  if (small == 0) {
    return SmatchScore::FromCounts(0, forward.pred_total(), forward.gold_total());
  }
  // Matched-triple counts are symmetric, so search from the smaller side.
  Alignment al = flip ? Alignment(gold, pred) : std::move(forward);
  std::vector<int> map;
  int best = ExactSearch(al).Run(map);
  SmatchScore s = flip ? SmatchScore::FromCounts(best, al.gold_total(), al.pred_total())
                       : SmatchScore::FromCounts(best, al.pred_total(), al.gold_total());
  auto named = al.Named(map);
  if (flip) {
    for (const auto& [g, p] : named) s.mapping[p] = g;
  } else {
    s.mapping = std::move(named);
  }
  return s;
}

SmatchScore ComputeSmatch(const AmrGraph& pred, const AmrGraph& gold,
                          const SmatchOptions& options) {
  TripleOptions to{options.normalize_inverse};
  return AlignTriples(ToTriples(pred, to), ToTriples(gold, to),
                      options.restarts, options.seed);
}

SmatchScore BruteForceSmatch(const AmrGraph& pred, const AmrGraph& gold,
                             int max_vars, bool normalize_inverse) {
  TripleOptions to{normalize_inverse};
  return ExactAlignTriples(ToTriples(pred, to), ToTriples(gold, to), max_vars);
}

FineGrainedReport FineGrained(const AmrGraph& pred, const AmrGraph& gold,
                              const SmatchOptions& options) {
  const TripleOptions literal{options.normalize_inverse};
  const TripleSet p = ToTriples(pred, literal), g = ToTriples(gold, literal);
  const TripleSet pn = ToTriples(pred, {true}), gn = ToTriples(gold, {true});
  auto align = [&](const TripleSet& a, const TripleSet& b) {
    return AlignTriples(a, b, options.restarts, options.seed);
  };
  FineGrainedReport r;
  r.scores["Smatch"] = align(p, g);
  r.scores["Unlabeled"] = align(Unlabeled(p), Unlabeled(g));
  r.scores["NoWSD"] = align(NoSense(p), NoSense(g));
  r.scores["Reentrancies"] = align(Reentrant(pn), Reentrant(gn));
  r.scores["Concepts"] = MultisetScore(Concepts(pred), Concepts(gold));
  r.scores["NamedEnt"] = MultisetScore(NamedEntities(pred), NamedEntities(gold));
  r.scores["Wikification"] = MultisetScore(WikiLinks(pred), WikiLinks(gold));
  r.scores["Negation"] = MultisetScore(Negated(pred), Negated(gold));
  r.scores["SRL"] = align(SemanticRoles(pn), SemanticRoles(gn));
  return r;
}

FineGrainedReport CorpusScore(const std::vector<AmrGraph>& pred,
                              const std::vector<AmrGraph>& gold,
                              const SmatchOptions& options) {
  if (pred.size() != gold.size()) {
    throw SmatchError(SmatchError::Kind::kLengthMismatch,
                      "corpus sizes differ: " + std::to_string(pred.size()) +
                          " predicted vs " + std::to_string(gold.size()) +
                          " gold");
  }
  struct Counts {
    long matched = 0, pred = 0, gold = 0;
  };
  std::map<std::string, Counts> totals;
  for (auto name : kMetricNames) totals[std::string(name)];
  for (std::size_t i = 0; i < pred.size(); ++i) {
    FineGrainedReport one = FineGrained(pred[i], gold[i], options);
    for (const auto& [name, s] : one.scores) {
      auto& c = totals[name];
      c.matched += s.matched;
      c.pred += s.pred_total;
      c.gold += s.gold_total;
    }
  }
  FineGrainedReport r;
  r.vacuous = pred.empty();
  for (const auto& [name, c] : totals) {
    r.scores[name] = SmatchScore::FromCounts(c.matched, c.pred, c.gold);
  }
  return r;
}

}  // namespace xlamr
