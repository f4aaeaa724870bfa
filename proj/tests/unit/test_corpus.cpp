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

#include <filesystem>
#include <set>

#include "doctest.h"
#include "xlamr/corpus.hpp"
#include "xlamr/io_util.hpp"
#include "xlamr/smatch.hpp"
#include "xlamr/toy_corpus.hpp"
#include "xlamr/translator.hpp"

using namespace xlamr;

namespace {

constexpr const char* kTwoBlocks =
    "# ::id a1\n"
    "# ::snt The boy wants to go.\n"
    "(w / want-01\n"
    "   :ARG0 (b / boy)\n"
    "   :ARG1 (g / go-02 :ARG0 b))\n"
    "\n"
    "# ::id a2\n"
    "# ::snt It rains.\n"
    "# ::tgt es regnet\n"
    "# ::lang de\n"
    "(r / rain-01)\n";

std::filesystem::path TempFile(const std::string& name, const std::string& text) {
  const auto dir = std::filesystem::temp_directory_path() / "xlamr_corpus_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  WriteFileAtomic(path, text);
  return path;
}

}  // namespace

TEST_CASE("two well-formed blocks") {
  CorpusReadResult r = ReadAmrCorpus(TempFile("two.txt", kTwoBlocks));
  REQUIRE(r.examples.size() == 2);
  CHECK(r.errors.empty());
  CHECK(!r.empty);
  CHECK(r.examples[0].id == "a1");
  CHECK(r.examples[0].english == "The boy wants to go.");
  CHECK(r.examples[0].target.empty());
  CHECK(r.examples[0].gold->size() == 3);
  CHECK(*r.examples[0].linearized == Preprocess(*r.examples[0].gold));
  CHECK(r.examples[1].target == "es regnet");
  CHECK(r.examples[1].lang == "de");
}

TEST_CASE("bad blocks are isolated") {
  const std::string text = std::string(kTwoBlocks) +
                           "\n# ::id a3\n(x / cat)\n"
                           "\n# ::id a4\n# ::snt broken\n(x / cat :ARG0 (y / dog)\n"
                           "\n# ::snt no id here\n(z / zebra)\n";
  CorpusReadResult r = ParseAmrCorpus(text);
  REQUIRE(r.examples.size() == 3);
  REQUIRE(r.errors.size() == 2);
  CHECK(r.errors[0].id == "a3");
  CHECK(r.errors[0].line == 13);
  CHECK(r.errors[1].id == "a4");
  CHECK(r.examples[2].id == "#5");
}

TEST_CASE("empty input") {
  CorpusReadResult r = ParseAmrCorpus("\n\n  \n");
  CHECK(r.empty);
  CHECK(r.examples.empty());
  CHECK(r.errors.empty());
  CHECK_THROWS_AS(ReadAmrCorpus("/nonexistent/xlamr/corpus.txt"), IoError);
}

TEST_CASE("format and parse round trip") {
  CorpusReadResult r = ParseAmrCorpus(kTwoBlocks);
  CorpusReadResult back = ParseAmrCorpus(FormatAmrCorpus(r.examples));
  REQUIRE(back.examples.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back.examples[i].id == r.examples[i].id);
    CHECK(back.examples[i].english == r.examples[i].english);
    CHECK(back.examples[i].target == r.examples[i].target);
    CHECK(back.examples[i].lang == r.examples[i].lang);
    CHECK(BruteForceSmatch(*back.examples[i].gold, *r.examples[i].gold).f1 == 1.0);
  }
}

TEST_CASE("sentence input") {
  auto plain = ReadSentences(TempFile("plain.txt", "der junge geht\n\n  es regnet \n"));
  REQUIRE(plain.size() == 2);
  CHECK(plain[0].id == "1");
  CHECK(plain[1].target == "es regnet");
  auto blocks = ReadSentences(TempFile("blocks.txt", "# ::id q\n# ::snt ciao\n\n# ::id r\n# ::snt hello\n# ::tgt hallo\n"));
  REQUIRE(blocks.size() == 2);
  CHECK(blocks[0].target == "ciao");
  CHECK(blocks[1].target == "hallo");
  CHECK(blocks[1].english == "hello");
}

TEST_CASE("mock lexicon") {
  MockLexicon lex({{"the", "le"}, {"boy", "garçon"}});
  CHECK(lex.translate("x", "the boy", "en", "fr") == "le garçon");
  CHECK(lex.translate("x", "the cat", "en", "fr") == "le cat");
  CHECK(lex.translate("x", "le garçon", "fr", "en") == "the boy");
  CHECK(lex.translate("x", "", "en", "fr") == "");
  MockLexicon back = MockLexicon::from_text(lex.to_text());
  CHECK(back.entries() == lex.entries());
  CHECK_THROWS_AS(MockLexicon::from_text("no tab here\n"), TranslatorFailure);
}

TEST_CASE("external file translator") {
  ExternalFile table = ExternalFile::from_text("a1\tder Junge will gehen\na2\tes regnet\n");
  auto examples = ParseAmrCorpus(kTwoBlocks).examples;
  auto silver = SynthesizeSilver(examples, table, "de");
  REQUIRE(silver.size() == 2);
  CHECK(silver[0].target == "der Junge will gehen");
  CHECK(silver[1].target == "es regnet");
  CHECK(silver[0].lang == "de");
  CHECK(*silver[0].linearized == Preprocess(*examples[0].gold));
  ExternalFile partial = ExternalFile::from_text("a1\tx\n");
  CHECK_THROWS_AS(SynthesizeSilver(examples, partial, "de"), TranslatorFailure);
}

TEST_CASE("toy corpus") {
  auto a = GenerateToyCorpus(300, 11);
  CHECK(FormatAmrCorpus(a) == FormatAmrCorpus(GenerateToyCorpus(300, 11)));
  CHECK(FormatAmrCorpus(a) != FormatAmrCorpus(GenerateToyCorpus(300, 12)));
  std::set<std::string> sentences, ids;
  bool negation = false, wiki = false, reentrant = false, named = false;
  const MockLexicon lex = ToyLexicon();
  for (const auto& ex : a) {
    sentences.insert(ex.english);
    ids.insert(ex.id);
    REQUIRE(ex.gold);
    CHECK_NOTHROW(ex.gold->validate());
    CHECK(*ex.linearized == Preprocess(*ex.gold));
    CHECK(ex.target == lex.translate(ex.id, ex.english, "en", "de"));
    for (const auto& at : ex.gold->attributes()) {
      negation |= at.role == "polarity";
      wiki |= at.role == "wiki" && at.value != "-";
    }
    for (const auto& inst : ex.gold->instances()) named |= inst.concept_label == "name";
    std::set<std::string> targets;
    for (const auto& e : ex.gold->edges()) {
      if (!targets.insert(e.target).second) reentrant = true;
    }
  }
  CHECK(sentences.size() == a.size());
  CHECK(ids.size() == a.size());
  CHECK(a[0].id == "toy-00001");
  CHECK(negation);
  CHECK(wiki);
  CHECK(reentrant);
  CHECK(named);
  // Round-tripping through the file format preserves everything.
  auto back = ParseAmrCorpus(FormatAmrCorpus(a));
  CHECK(back.errors.empty());
  CHECK(FormatAmrCorpus(back.examples) == FormatAmrCorpus(a));
}
