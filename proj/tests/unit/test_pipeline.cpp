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
#include <sstream>

#include "doctest.h"
#include "xlamr/pipeline.hpp"
#include "xlamr/report.hpp"
#include "xlamr/toy_corpus.hpp"

using namespace xlamr;

namespace {

ParallelExample Example(const std::string& id, const std::string& penman) {
  ParallelExample ex;
  ex.id = id;
  ex.english = id;
  ex.gold = ParsePenman(penman);
  return ex;
}

std::size_t CountLines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

ParserBundle UntrainedParser(TrainMode mode, const std::vector<ParallelExample>& data) {
  ModelConfig m;
  m.layers = 1;
  m.d_model = 16;
  m.d_ff = 64;
  m.heads = 2;
  m.dropout = 0.0;
  m.max_len = 128;
  BpeVocab vocab = TrainBpe(BpeTrainingText(data), 40);
  m.vocab_size = static_cast<int>(vocab.size());
  return ParserBundle{Transformer<float>(m), vocab, WikiDictionary{}, mode};
}

}  // namespace

TEST_CASE("evaluation of identical corpora") {
  auto toy = GenerateToyCorpus(25, 2);
  Evaluation ev = EvaluateCorpora(toy, toy, SmatchOptions{});
  CHECK(ev.pairs == 25);
  for (auto name : kMetricNames) CHECK(ev.report.at(name).f1 == 1.0);
}

TEST_CASE("corpus score is a micro-average over id-aligned pairs") {
  std::vector<ParallelExample> pred = {Example("p", "(w / want-01 :ARG0 (b / boy))"),
                                       Example("q", "(r / rain-01)")};
  std::vector<ParallelExample> gold = {Example("q", "(r / rain-01)"),
                                       Example("p", "(x / want-01 :ARG0 (y / girl))")};
  Evaluation ev = EvaluateCorpora(pred, gold, SmatchOptions{});
  // want/girl matches 3 of 4 triples, rain matches 2 of 2.
  CHECK(ev.report.at("Smatch").f1 == doctest::Approx(5.0 / 6.0));
  std::reverse(pred.begin(), pred.end());
  Evaluation shuffled = EvaluateCorpora(pred, gold, SmatchOptions{});
  CHECK(FormatEvaluation(shuffled) == FormatEvaluation(ev));
}

TEST_CASE("unmatched and disjoint ids") {
  std::vector<ParallelExample> pred = {Example("a", "(r / rain-01)"), Example("b", "(r / rain-01)")};
  std::vector<ParallelExample> gold = {Example("b", "(r / rain-01)"), Example("c", "(r / rain-01)")};
  Evaluation ev = EvaluateCorpora(pred, gold, SmatchOptions{});
  CHECK(ev.pairs == 1);
  CHECK(ev.missing_in_pred == std::vector<std::string>{"c"});
  CHECK(ev.missing_in_gold == std::vector<std::string>{"a"});
  const std::string text = FormatEvaluation(ev);
  CHECK(text.find("unmatched_gold c\n") != std::string::npos);
  CHECK(text.find("unmatched_pred a\n") != std::string::npos);
  CHECK_THROWS_AS(EvaluateCorpora({Example("x", "(r / rain-01)")}, gold, SmatchOptions{}),
                  DataError);
  CHECK_THROWS_AS(EvaluateCorpora(pred, {gold[0], gold[0]}, SmatchOptions{}), DataError);
}

TEST_CASE("metric table and key:value block") {
  FineGrainedReport r =
      FineGrained(ParsePenman("(w / want-01 :ARG0 (b / boy))"),
                  ParsePenman("(x / want-01 :ARG0 (y / girl))"));
  const std::string table = FormatMetricTable(r);
  CHECK(CountLines(table) == 10);
  CHECK(table.rfind("Metric", 0) == 0);
  const std::string block = FormatMetricBlock(r);
  CHECK(CountLines(block) == 9);
  CHECK(block.rfind("Smatch 0.750\n", 0) == 0);
  std::size_t pos = 0;
  for (auto name : kMetricNames) {
    const auto at = block.find(std::string(name) + " ", pos);
    REQUIRE(at != std::string::npos);
    pos = at;
  }
  CHECK(FormatMetricBlock(r, "full").rfind("full.Smatch 0.750\n", 0) == 0);
}

TEST_CASE("ablation report shape") {
  AblationReport rep;
  const FineGrainedReport perfect = FineGrained(ParsePenman("(r / rain-01)"),
                                                ParsePenman("(r / rain-01)"));
  const FineGrainedReport half = FineGrained(ParsePenman("(w / want-01 :ARG0 (b / boy))"),
                                             ParsePenman("(x / want-01 :ARG0 (y / girl))"));
  for (std::uint64_t seed : {1, 2}) {
    for (TrainMode m : kAllModes) {
      rep.runs.push_back({seed, m, m == TrainMode::kS2s ? half : perfect});
    }
  }
  CHECK(rep.mean_f1(TrainMode::kS2s, "Smatch") == doctest::Approx(0.75));
  CHECK(rep.mean_f1(TrainMode::kFull, "Smatch") == 1.0);
  const std::string text = FormatAblationReport(rep);
  std::istringstream in(text);
  std::string header;
  std::getline(in, header);
  for (TrainMode m : kAllModes) CHECK(header.find(ToString(m)) != std::string::npos);
  for (auto name : kMetricNames) {
    std::string row;
    std::getline(in, row);
    CHECK(row.rfind(std::string(name), 0) == 0);
    CHECK(std::count(row.begin(), row.end(), '(') == 3);
  }
  CHECK(text.find("100.0 (+25.0)") != std::string::npos);
  CHECK(text.find("full.Smatch 1.000\n") != std::string::npos);
  CHECK(text.find("seed2.s2s.Smatch 0.750\n") != std::string::npos);
}

TEST_CASE("parsing never aborts the batch") {
  auto toy = GenerateToyCorpus(12, 5);
  const ParserBundle parser = UntrainedParser(TrainMode::kFull, toy);

  SUBCASE("empty input gives empty output") {
    CHECK(FormatParses(ParseSentences(parser, {}, nullptr, ParseOptions{})).empty());
  }
  SUBCASE("truncated decoding still yields valid graphs") {
    auto parses = ParseSentences(parser, toy, nullptr, ParseOptions{2, 3});
    REQUIRE(parses.size() == toy.size());
    for (const auto& p : parses) {
      CHECK_NOTHROW(p.graph.validate());
      CHECK(p.error.empty());
    }
    const std::string text = FormatParses(parses);
    auto back = ParseAmrCorpus(text);
    CHECK(back.errors.empty());
    CHECK(back.examples.size() == toy.size());
    CHECK(text == FormatParses(ParseSentences(parser, toy, nullptr, ParseOptions{2, 3})));
  }
  SUBCASE("missing translation is annotated") {
    ParallelExample lonely;
    lonely.id = "solo";
    lonely.target = "der junge geht";
    lonely.lang = "de";
    auto parses = ParseSentences(parser, {toy[0], lonely, toy[1]}, nullptr, ParseOptions{1, 5});
    CHECK(parses[0].error.empty());
    CHECK(!parses[1].error.empty());
    CHECK(parses[2].error.empty());
    const std::string text = FormatParses(parses);
    CHECK(text.find("# ::id solo\n# ::snt der junge geht\n# ::lang de\n# ::error ") !=
          std::string::npos);
    CHECK(text.find("(a / amr-empty)") != std::string::npos);
  }
  SUBCASE("translator failures are per sentence") {
    ExternalFile table = ExternalFile::from_text(toy[0].id + "\t" + toy[0].english + "\n");
    auto parses = ParseSentences(parser, {toy[0], toy[1]}, &table, ParseOptions{1, 5});
    CHECK(parses[0].error.empty());
    CHECK(parses[1].error.find("no translation") != std::string::npos);
  }
  SUBCASE("over-long input is reported") {
    ParallelExample big = toy[0];
    for (int i = 0; i < 60; ++i) big.target += " junge";
    auto parses = ParseSentences(parser, {big}, nullptr, ParseOptions{1, 5});
    CHECK(!parses[0].error.empty());
  }
}

TEST_CASE("bpe training text covers inputs and outputs") {
  auto toy = GenerateToyCorpus(3, 1);
  auto text = BpeTrainingText(toy);
  CHECK(text.size() == 9);
  CHECK(text[2] == toy[0].linearized->str());
}

TEST_CASE("tiny ablation is deterministic and complete") {
  RunConfig cfg;
  cfg.model.layers = 1;
  cfg.model.d_model = 16;
  cfg.model.d_ff = 64;
  cfg.model.heads = 2;
  cfg.train.max_steps = 3;
  cfg.train.batch_tokens = 200;
  cfg.bpe_merges = 40;
  cfg.beam_width = 1;
  cfg.decode_max_steps = 10;
  cfg.ablation_seeds = 2;
  auto all = GenerateToyCorpus(30, 3);
  std::vector<ParallelExample> train(all.begin(), all.begin() + 24);
  std::vector<ParallelExample> held(all.begin() + 24, all.end());
  AblationReport a = RunAblation(cfg, train, held, 7, nullptr);
  CHECK(a.runs.size() == 8);
  CHECK(a.runs.front().seed == 7);
  CHECK(a.runs.back().seed == 8);
  CHECK(FormatAblationReport(a) == FormatAblationReport(RunAblation(cfg, train, held, 7, nullptr)));
  CHECK_THROWS_AS(RunAblation(cfg, train, {}, 7, nullptr), DataError);
}
