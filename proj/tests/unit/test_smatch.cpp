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

#include <algorithm>
#include <set>

#include "doctest.h"
#include "support/random_graphs.hpp"
#include "xlamr/smatch.hpp"

using namespace xlamr;

namespace {

constexpr const char* kWantBoy = "(w / want-01 :ARG0 (b / boy))";
constexpr const char* kWantGirl = "(x / want-01 :ARG0 (y / girl))";

// Independent exhaustive oracle: enumerates every injective partial mapping
// from the smaller side and counts matches with a plain set lookup.
long OracleMatches(const TripleSet& pred, const TripleSet& gold) {
  std::set<Triple> gold_set(gold.triples.begin(), gold.triples.end());
  const auto& pv = pred.variables;
  const auto& gv = gold.variables;
  std::vector<int> assign(pv.size(), -1);
  std::vector<bool> used(gv.size(), false);
  long best = 0;
  auto count = [&]() {
    std::map<std::string, std::string> m;
    for (std::size_t i = 0; i < pv.size(); ++i) {
      if (assign[i] >= 0) m[pv[i]] = gv[static_cast<std::size_t>(assign[i])];
    }
    long c = 0;
    for (Triple t : pred.triples) {
      auto map_var = [&](std::string& s) {
        auto it = m.find(s);
        if (it == m.end()) return false;
        s = it->second;
        return true;
      };
      if (!map_var(t.source)) continue;
      if (t.kind == TripleKind::kRelation && !map_var(t.target)) continue;
      c += gold_set.count(t);
    }
    return c;
  };
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == pv.size()) {
      best = std::max(best, count());
      return;
    }
    assign[i] = -1;
    self(self, i + 1);
    for (std::size_t j = 0; j < gv.size(); ++j) {
      if (used[j]) continue;
      used[j] = true;
      assign[i] = static_cast<int>(j);
      self(self, i + 1);
      used[j] = false;
    }
    assign[i] = -1;
  };
  rec(rec, 0);
  return best;
}

AmrGraph SmallGraph(Rng& rng) {
  testing::GenOptions opt;
  opt.min_nodes = 1;
  opt.max_nodes = 5;
  opt.concept_pool = 6;
  opt.named_entity_prob = 0.0;
  return testing::RandomGraph(rng, opt);
}

}  // namespace

TEST_CASE("identical graphs score 1") {
  AmrGraph g = ParsePenman(kWantBoy);
  SmatchScore s = ComputeSmatch(g, g);
  CHECK(s.precision == 1.0);
  CHECK(s.recall == 1.0);
  CHECK(s.f1 == 1.0);
}

TEST_CASE("renamed copy scores 1") {
  AmrGraph g = ParsePenman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))");
  AmrGraph h = ParsePenman("(p / want-01 :ARG0 (q / boy) :ARG1 (r / go-02 :ARG0 q))");
  CHECK(ComputeSmatch(g, h).f1 == 1.0);
}

TEST_CASE("want/girl pair") {
  AmrGraph p = ParsePenman(kWantBoy);
  AmrGraph g = ParsePenman(kWantGirl);
  SmatchScore s = ComputeSmatch(p, g);
  CHECK(s.matched == 3);
  CHECK(s.pred_total == 4);
  CHECK(s.gold_total == 4);
  CHECK(s.f1 == doctest::Approx(0.75));
  SmatchScore b = BruteForceSmatch(p, g);
  CHECK(b.f1 == doctest::Approx(0.75));
  CHECK(b.matched == OracleMatches(ToTriples(p, {false}), ToTriples(g, {false})));
}

TEST_CASE("brute force basics") {
  AmrGraph a = ParsePenman("(a / cat)");
  CHECK(BruteForceSmatch(a, a).f1 == 1.0);
  SmatchScore s = BruteForceSmatch(a, ParsePenman("(b / dog)"));
  CHECK(s.matched == 1);
  CHECK(s.precision == doctest::Approx(0.5));
  CHECK(s.recall == doctest::Approx(0.5));
}

TEST_CASE("brute force guard") {
  std::string big = "(a / x";
  for (int i = 0; i < 9; ++i) big += " :ARG0 (v" + std::to_string(i) + " / y)";
  big += ")";
  AmrGraph g = ParsePenman(big);
  try {
    BruteForceSmatch(g, g);
    FAIL("expected TooLarge");
  } catch (const SmatchError& e) {
    CHECK(e.kind() == SmatchError::Kind::kTooLarge);
  }
  CHECK(BruteForceSmatch(g, g, 10).f1 == 1.0);
}

TEST_CASE("fine-grained identical") {
  AmrGraph g = ParsePenman(
      "(w / want-01 :polarity - :ARG0 (c / city :wiki \"Q90\" :name (n / name :op1 \"Paris\"))"
      " :ARG1 (g / go-02 :ARG0 c))");
  FineGrainedReport r = FineGrained(g, g);
  CHECK(r.scores.size() == kMetricNames.size());
  for (auto name : kMetricNames) CHECK(r.at(name).f1 == 1.0);
  // Metrics over empty sets score 1 when both sides are empty.
  AmrGraph plain = ParsePenman("(b / boy)");
  FineGrainedReport e = FineGrained(plain, plain);
  for (auto name : kMetricNames) CHECK(e.at(name).f1 == 1.0);
}

TEST_CASE("fine-grained negation") {
  AmrGraph gold = ParsePenman("(g / go-02 :polarity - :ARG0 (b / boy))");
  AmrGraph pred = ParsePenman("(g / go-02 :ARG0 (b / boy))");
  FineGrainedReport r = FineGrained(pred, gold);
  CHECK(r.at("Negation").f1 == 0.0);
  CHECK(r.at("Smatch").f1 > 0.0);
}

TEST_CASE("fine-grained sense stripping") {
  AmrGraph pred = ParsePenman("(p / publish-01 :ARG0 (b / boy))");
  AmrGraph gold = ParsePenman("(p / publish-02 :ARG0 (b / boy))");
  FineGrainedReport r = FineGrained(pred, gold);
  CHECK(r.at("NoWSD").f1 == 1.0);
  CHECK(r.at("Smatch").f1 < 1.0);
  CHECK(StripSense("publish-01") == "publish");
  CHECK(StripSense("boy") == "boy");
  CHECK(StripSense("-") == "-");
}

TEST_CASE("fine-grained named entities and wiki") {
  AmrGraph gold = ParsePenman("(c / city :wiki \"Q90\" :name (n / name :op1 \"Paris\"))");
  AmrGraph wrong_type = ParsePenman("(c / country :wiki \"Q90\" :name (n / name :op1 \"Paris\"))");
  AmrGraph wrong_wiki = ParsePenman("(c / city :wiki \"Q1\" :name (n / name :op1 \"Paris\"))");
  CHECK(FineGrained(wrong_type, gold).at("NamedEnt").f1 == 0.0);
  CHECK(FineGrained(wrong_type, gold).at("Wikification").f1 == 1.0);
  CHECK(FineGrained(wrong_wiki, gold).at("NamedEnt").f1 == 1.0);
  CHECK(FineGrained(wrong_wiki, gold).at("Wikification").f1 == 0.0);
}

TEST_CASE("fine-grained unlabeled ignores role names") {
  AmrGraph pred = ParsePenman("(w / want-01 :ARG1 (b / boy))");
  AmrGraph gold = ParsePenman(kWantBoy);
  FineGrainedReport r = FineGrained(pred, gold);
  CHECK(r.at("Unlabeled").f1 == 1.0);
  CHECK(r.at("Smatch").f1 < 1.0);
  CHECK(r.at("Concepts").f1 == 1.0);
}

TEST_CASE("fine-grained reentrancy") {
  AmrGraph gold = ParsePenman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))");
  AmrGraph tree = ParsePenman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 (b2 / boy)))");
  FineGrainedReport r = FineGrained(tree, gold);
  CHECK(r.at("Reentrancies").f1 == 0.0);
  CHECK(FineGrained(gold, gold).at("Reentrancies").f1 == 1.0);
}

TEST_CASE("corpus micro-average") {
  AmrGraph p = ParsePenman(kWantBoy);
  AmrGraph g = ParsePenman(kWantGirl);
  CHECK(CorpusScore({p, p}, {p, p}).at("Smatch").f1 == 1.0);
  FineGrainedReport r = CorpusScore({p, p}, {p, g});
  CHECK(r.at("Smatch").precision == doctest::Approx(0.875));
  CHECK(r.at("Smatch").recall == doctest::Approx(0.875));
  FineGrainedReport empty = CorpusScore({}, {});
  CHECK(empty.vacuous);
  for (auto name : kMetricNames) CHECK(empty.at(name).f1 == 1.0);
  try {
    CorpusScore({p}, {});
    FAIL("expected LengthMismatch");
  } catch (const SmatchError& e) {
    CHECK(e.kind() == SmatchError::Kind::kLengthMismatch);
  }
}

TEST_CASE("score arithmetic") {
  SmatchScore s = SmatchScore::FromCounts(3, 4, 6);
  CHECK(s.precision == doctest::Approx(0.75));
  CHECK(s.recall == doctest::Approx(0.5));
  CHECK(s.f1 == doctest::Approx(0.6));
  CHECK(SmatchScore::FromCounts(0, 0, 0).f1 == 1.0);
  CHECK(SmatchScore::FromCounts(0, 3, 0).f1 == 0.0);
  CHECK(SmatchScore::FromCounts(0, 3, 3).f1 == 0.0);
}

TEST_CASE("property: exact search matches the enumeration oracle") {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    AmrGraph a = SmallGraph(rng);
    AmrGraph b = SmallGraph(rng);
    TripleSet ta = ToTriples(a, {false});
    TripleSet tb = ToTriples(b, {false});
    CHECK(ExactAlignTriples(ta, tb).matched == OracleMatches(ta, tb));
  }
}

TEST_CASE("property: hill climbing agrees with brute force") {
  Rng rng(17);
  int agree = 0;
  const int pairs = 500;
  for (int trial = 0; trial < pairs; ++trial) {
    AmrGraph a = SmallGraph(rng);
    AmrGraph b = rng.below(2) ? testing::Perturb(a, rng) : SmallGraph(rng);
    SmatchOptions opt;
    opt.restarts = 8;
    opt.seed = static_cast<std::uint64_t>(trial);
    double hc = ComputeSmatch(a, b, opt).f1;
    double bf = BruteForceSmatch(a, b).f1;
    CHECK(hc <= bf + 1e-12);
    if (hc == bf) ++agree;
  }
  CHECK(agree >= pairs * 99 / 100);
}

TEST_CASE("property: bounds, renaming invariance, determinism, monotonicity") {
  Rng rng(33);
  for (int trial = 0; trial < 200; ++trial) {
    testing::GenOptions opt;
    AmrGraph a = testing::RandomGraph(rng, opt);
    AmrGraph b = testing::Perturb(a, rng);
    SmatchOptions so;
    so.seed = 7;
    SmatchScore s = ComputeSmatch(a, b, so);
    for (double v : {s.precision, s.recall, s.f1}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    SmatchScore again = ComputeSmatch(a, b, so);
    CHECK(again.f1 == s.f1);
    CHECK(again.mapping == s.mapping);
    std::set<std::string> targets;
    for (const auto& [k, v] : s.mapping) targets.insert(v);
    CHECK(targets.size() == s.mapping.size());

    if (std::min(a.instances().size(), b.instances().size()) <= 8) {
      double exact = BruteForceSmatch(a, b).f1;
      CHECK(BruteForceSmatch(testing::RenameVariables(a, rng), b).f1 == exact);
      CHECK(BruteForceSmatch(a, testing::RenameVariables(b, rng)).f1 == exact);
      TripleSet ta = ToTriples(a, {false});
      TripleSet tb = ToTriples(b, {false});
      long m = ExactAlignTriples(ta, tb).matched;
      if (!ta.triples.empty()) {
        TripleSet smaller = ta;
        smaller.triples.erase(smaller.triples.begin() +
                              static_cast<long>(rng.below(smaller.triples.size())));
        CHECK(ExactAlignTriples(smaller, tb).matched <= m);
      }
    }
  }
}
