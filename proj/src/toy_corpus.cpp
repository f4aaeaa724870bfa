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

#include "xlamr/toy_corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "xlamr/rng.hpp"

namespace xlamr {

namespace {

struct Noun {
  const char* word;
  const char* target;
  const char* plural;  // nullptr when the noun is never counted
  const char* plural_target;
};

struct Verb {
  const char* concept_label;
  const char* third;  // "sleeps"
  const char* base;   // "sleep"
  const char* third_target;
  const char* base_target;
};

struct Adjective {
  const char* word;
  const char* target;
};

struct Name {
  const char* text;
  const char* wiki;
};

constexpr Noun kNouns[] = {
    {"boy", "junge", nullptr, nullptr},     {"lad", "junge", nullptr, nullptr},
    {"girl", "maedchen", nullptr, nullptr}, {"man", "mann", nullptr, nullptr},
    {"husband", "mann", nullptr, nullptr},  {"woman", "frau", nullptr, nullptr},
    {"wife", "frau", nullptr, nullptr},     {"child", "kind", nullptr, nullptr},
    {"teacher", "lehrer", nullptr, nullptr}, {"doctor", "arzt", nullptr, nullptr},
    {"dog", "hund", "dogs", "hunde"},       {"cat", "katze", "cats", "katzen"},
    {"bird", "vogel", "birds", "voegel"},   {"horse", "pferd", "horses", "pferde"},
};

constexpr Verb kIntransitive[] = {
    {"sleep-01", "sleeps", "sleep", "schlaeft", "schlafen"},
    {"run-02", "runs", "run", "laeuft", "laufen"},
    {"go-02", "goes", "go", "geht", "gehen"},
    {"walk-01", "walks", "walk", "geht", "gehen"},
    {"sing-01", "sings", "sing", "singt", "singen"},
    {"laugh-01", "laughs", "laugh", "lacht", "lachen"},
};

constexpr Verb kTransitive[] = {
    {"see-01", "sees", "see", "sieht", "sehen"},
    {"watch-01", "watches", "watch", "sieht", "sehen"},
    {"like-01", "likes", "like", "mag", "moegen"},
    {"love-01", "loves", "love", "liebt", "lieben"},
    {"help-01", "helps", "help", "hilft", "helfen"},
    {"meet-03", "meets", "meet", "trifft", "treffen"},
};

constexpr Verb kControl[] = {
    {"want-01", "wants", "want", "will", "wollen"},
    {"try-01", "tries", "try", "versucht", "versuchen"},
};

constexpr Adjective kAdjectives[] = {
    {"big", "gross"}, {"tall", "gross"}, {"small", "klein"},
    {"old", "alt"},   {"young", "jung"}, {"happy", "froh"},
};

constexpr Name kCities[] = {
    {"Paris", "Q90"}, {"Berlin", "Q64"}, {"London", "Q84"}, {"Rome", "Q220"}, {"Vienna", "Q1741"},
};

constexpr Name kPeople[] = {{"John", "-"}, {"Mary", "-"}, {"Anna", "-"}, {"Peter", "-"}};

constexpr const char* kNumbers[][3] = {
    {"two", "zwei", "2"}, {"three", "drei", "3"}, {"four", "vier", "4"}, {"five", "fuenf", "5"}};

template <typename T, std::size_t N>
const T& Pick(Rng& rng, const T (&items)[N]) {
  return items[rng.below(N)];
}

// Builds one sentence; leaf concepts are kept distinct so that restoring
// the linearized graph is unambiguous.
class Sentence {
 public:
  explicit Sentence(Rng& rng) : rng_(rng) {}

  std::string var() { return "v" + std::to_string(++vars_); }

  void word(const std::string& w) {
    if (!english_.empty()) english_.push_back(' ');
    english_ += w;
  }

  const Noun& noun() {
    for (;;) {
      const Noun& n = Pick(rng_, kNouns);
      if (used_.insert(n.word).second) return n;
    }
  }

  const Noun& countable() {
    for (;;) {
      const Noun& n = Pick(rng_, kNouns);
      if (n.plural && used_.insert(n.word).second) return n;
    }
  }

  const Adjective& adjective() {
    for (;;) {
      const Adjective& a = Pick(rng_, kAdjectives);
      if (used_.insert(a.word).second) return a;
    }
  }

  // Noun phrase; returns its PENMAN fragment and sets `head`.
  std::string phrase(std::string& head, bool allow_name = true) {
    head = var();
    const auto kind = rng_.below(allow_name ? 4 : 3);
    if (kind == 3 && !person_used_) {
      person_used_ = true;
      const Name& p = Pick(rng_, kPeople);
      word(p.text);
      return "(" + head + " / person :wiki " + Quote(p.wiki) + " :name (" + var() +
             " / name :op1 \"" + p.text + "\"))";
    }
    word("the");
    if (kind == 2) {
      const Adjective& a = adjective();
      const Noun& n = noun();
      word(a.word);
      word(n.word);
      return "(" + head + " / " + n.word + " :mod (" + var() + " / " + a.word + "))";
    }
    const Noun& n = noun();
    word(n.word);
    return "(" + head + " / " + n.word + ")";
  }

  std::string city() {
    const Name& c = Pick(rng_, kCities);
    word(c.text);
    return "(" + var() + " / city :wiki " + Quote(c.wiki) + " :name (" + var() +
           " / name :op1 \"" + c.text + "\"))";
  }

  const std::string& english() const { return english_; }

 private:
  static std::string Quote(const char* wiki) {
    return std::string(wiki) == "-" ? "-" : "\"" + std::string(wiki) + "\"";
  }

  Rng& rng_;
  int vars_ = 0;
  std::set<std::string> used_;
  bool person_used_ = false;
  std::string english_;
};

// Returns the PENMAN text of one templated sentence and its English.
std::pair<std::string, std::string> MakeSentence(Rng& rng) {
  Sentence s(rng);
  std::string amr;
  std::string subj, obj;
  switch (rng.below(12)) {
    case 0: {  // intransitive
      const std::string np = s.phrase(subj);
      const Verb& v = Pick(rng, kIntransitive);
      s.word(v.third);
      amr = "(" + s.var() + " / " + v.concept_label + " :ARG0 " + np + ")";
      break;
    }
    case 1: {  // transitive
      const std::string a = s.phrase(subj);
      const Verb& v = Pick(rng, kTransitive);
      s.word(v.third);
      const std::string b = s.phrase(obj);
      amr = "(" + s.var() + " / " + v.concept_label + " :ARG0 " + a + " :ARG1 " + b + ")";
      break;
    }
    case 2: {  // negated intransitive
      const std::string np = s.phrase(subj);
      const Verb& v = Pick(rng, kIntransitive);
      s.word("does");
      s.word("not");
      s.word(v.base);
      amr = "(" + s.var() + " / " + v.concept_label + " :polarity - :ARG0 " + np + ")";
      break;
    }
    case 3: {  // negated transitive
      const std::string a = s.phrase(subj);
      const Verb& v = Pick(rng, kTransitive);
      s.word("does");
      s.word("not");
      s.word(v.base);
      const std::string b = s.phrase(obj);
      amr = "(" + s.var() + " / " + v.concept_label + " :polarity - :ARG0 " + a + " :ARG1 " +
            b + ")";
      break;
    }
    case 4:
    case 5: {  // subject control, re-entrant subject
      const std::string a = s.phrase(subj);
      const Verb& c = kControl[rng.below(2)];
      s.word(c.third);
      s.word("to");
      const std::string outer = s.var();
      const std::string inner = s.var();
      std::string tail;
      if (rng.below(2)) {
        const Verb& v = Pick(rng, kIntransitive);
        s.word(v.base);
        tail = "(" + inner + " / " + v.concept_label + " :ARG0 " + subj + ")";
      } else {
        const Verb& v = Pick(rng, kTransitive);
        s.word(v.base);
        const std::string b = s.phrase(obj);
        tail = "(" + inner + " / " + v.concept_label + " :ARG0 " + subj + " :ARG1 " + b + ")";
      }
      amr = "(" + outer + " / " + c.concept_label + " :ARG0 " + a + " :ARG1 " + tail + ")";
      break;
    }
    case 6: {  // visit a city
      const std::string a = s.phrase(subj);
      s.word("visits");
      const std::string c = s.city();
      amr = "(" + s.var() + " / visit-01 :ARG0 " + a + " :ARG1 " + c + ")";
      break;
    }
    case 7: {  // location
      const std::string a = s.phrase(subj);
      const Verb& v = Pick(rng, kIntransitive);
      s.word(v.third);
      s.word("in");
      const std::string c = s.city();
      amr = "(" + s.var() + " / " + v.concept_label + " :ARG0 " + a + " :location " + c + ")";
      break;
    }
    case 8: {  // coordination
      const std::string a = s.phrase(subj, false);
      s.word("and");
      const std::string b = s.phrase(obj, false);
      const Verb& v = Pick(rng, kIntransitive);
      s.word(v.base);
      amr = "(" + s.var() + " / " + v.concept_label + " :ARG0 (" + s.var() + " / and :op1 " + a +
            " :op2 " + b + "))";
      break;
    }
    case 9: {  // quantity
      const auto& num = kNumbers[rng.below(4)];
      s.word(num[0]);
      const Noun& n = s.countable();
      s.word(n.plural);
      const Verb& v = Pick(rng, kIntransitive);
      s.word(v.base);
      amr = "(" + s.var() + " / " + v.concept_label + " :ARG0 (" + s.var() + " / " + n.word +
            " :quant " + num[2] + "))";
      break;
    }
    case 10: {  // possession
      s.word("the");
      const Noun& owned = s.noun();
      s.word(owned.word);
      s.word("of");
      const std::string owner = s.phrase(obj, false);
      const Verb& v = Pick(rng, kIntransitive);
      s.word(v.third);
      amr = "(" + s.var() + " / " + v.concept_label + " :ARG0 (" + s.var() + " / " + owned.word +
            " :poss " + owner + "))";
      break;
    }
    default: {  // copula with adjective
      s.word("the");
      const Noun& n = s.noun();
      s.word(n.word);
      s.word("is");
      const Adjective& a = s.adjective();
      s.word(a.word);
      amr = "(" + s.var() + " / " + a.word + " :domain (" + s.var() + " / " + n.word + "))";
      break;
    }
  }
  return {amr, s.english()};
}

}  // namespace

MockLexicon ToyLexicon() {
  std::map<std::string, std::string> m = {
      {"the", "der"}, {"and", "und"}, {"not", "nicht"}, {"does", ""},
      {"to", "zu"},   {"of", "von"},  {"in", "in"},     {"is", "ist"},
      {"visits", "besucht"},
  };
  for (const auto& n : kNouns) {
    m[n.word] = n.target;
    if (n.plural) m[n.plural] = n.plural_target;
  }
  for (const auto* verbs : {&kIntransitive, &kTransitive}) {
    for (const auto& v : *verbs) {
      m[v.third] = v.third_target;
      m[v.base] = v.base_target;
    }
  }
  for (const auto& v : kControl) {
    m[v.third] = v.third_target;
    m[v.base] = v.base_target;
  }
  for (const auto& a : kAdjectives) m[a.word] = a.target;
  for (const auto& n : kNumbers) m[n[0]] = n[1];
  return MockLexicon(std::move(m));
}

std::vector<ParallelExample> GenerateToyCorpus(int count, std::uint64_t seed,
                                               const std::string& lang) {
  Rng rng(DeriveSeed(seed, 0x70f));
  const MockLexicon lexicon = ToyLexicon();
  std::set<std::string> seen;
  std::vector<ParallelExample> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++attempts > count * 100 + 1000) {
      throw std::runtime_error("toy corpus: cannot draw " + std::to_string(count) +
                               " distinct sentences");
    }
    auto [amr, english] = MakeSentence(rng);
    if (!seen.insert(english).second) continue;
    ParallelExample ex;
    char id[32];
    std::snprintf(id, sizeof id, "toy-%05d", static_cast<int>(out.size()) + 1);
    ex.id = id;
    ex.english = english;
    ex.lang = lang;
    ex.target = lexicon.translate(ex.id, english, "en", lang);
    ex.gold = ParsePenman(amr);
    ex.linearized = Preprocess(*ex.gold);
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace xlamr
