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

#include "xlamr/pipeline.hpp"

#include <map>
#include <ostream>
#include <set>

#include "xlamr/io_util.hpp"

namespace xlamr {

namespace {

AmrGraph EmptyGraph() {
  AmrGraph g;
  g.add_instance("a", std::string(kEmptyConcept));
  g.set_top("a");
  return g;
}

std::string OneLine(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

TrainOutcome Finish(Trainer& trainer, std::ostream* log,
                    const std::filesystem::path& checkpoint_path) {
  TrainHooks hooks;
  hooks.log = log;
  hooks.checkpoint = checkpoint_path;
  trainer.run(hooks);
  return TrainOutcome{trainer.to_checkpoint(), trainer.current_step(),
                      trainer.best_dev_smatch()};
}

}  // namespace

std::vector<std::string> BpeTrainingText(const std::vector<ParallelExample>& examples) {
  std::vector<std::string> text;
  text.reserve(examples.size() * 3);
  for (const auto& ex : examples) {
    if (!ex.english.empty()) text.push_back(ex.english);
    if (!ex.target.empty()) text.push_back(ex.target);
    if (ex.linearized) text.push_back(ex.linearized->str());
  }
  return text;
}

std::vector<ParallelExample> LoadCorpusStrict(const std::filesystem::path& path) {
  CorpusReadResult r = ReadAmrCorpus(path);
  if (!r.errors.empty()) {
    std::string msg = path.string() + ": " + std::to_string(r.errors.size()) +
                      " malformed block(s)";
    for (const auto& e : r.errors) {
      msg += "\n  block '" + e.id + "' at line " + std::to_string(e.line) + ": " +
             e.message;
    }
    throw DataError(msg);
  }
  return std::move(r.examples);
}

std::string FormatSequences(const std::vector<ParallelExample>& examples) {
  std::string out;
  for (const auto& ex : examples) {
    if (!ex.linearized) continue;
    out += ex.id + "\t" + ex.linearized->str() + "\n";
  }
  return out;
}

ParserBundle ParserBundle::FromCheckpoint(const Checkpoint& checkpoint) {
  return ParserBundle{CheckpointModel(checkpoint), CheckpointVocab(checkpoint),
                      CheckpointWiki(checkpoint), CheckpointTrainConfig(checkpoint).mode};
}

std::vector<ParsedSentence> ParseSentences(const ParserBundle& parser,
                                           const std::vector<ParallelExample>& inputs,
                                           const Translator* translator,
                                           const ParseOptions& options) {
  std::vector<ParsedSentence> out(inputs.size());
  std::vector<TokenIds> sources;
  std::vector<std::size_t> slots;
  const int max_len = parser.model.config().max_len;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const ParallelExample& ex = inputs[i];
    ParsedSentence& p = out[i];
    p.id = ex.id;
    p.sentence = ex.target.empty() ? ex.english : ex.target;
    p.lang = ex.lang;
    p.graph = EmptyGraph();
    try {
      std::string english;
      if (UsesBilingualInput(parser.mode)) {
        if (translator != nullptr) {
          english = translator->translate(ex.id, p.sentence, ex.lang.empty() ? "xx" : ex.lang,
                                          "en");
        } else if (!ex.english.empty() && !ex.target.empty()) {
          english = ex.english;
        } else {
          throw TranslatorFailure("no English translation available");
        }
      }
      TokenIds src = EncodeSource(p.sentence, english, parser.vocab, parser.mode);
      if (static_cast<int>(src.size()) > max_len) {
        throw DataError("input has " + std::to_string(src.size()) +
                        " tokens, model limit is " + std::to_string(max_len));
      }
      sources.push_back(std::move(src));
      slots.push_back(i);
    } catch (const std::exception& e) {
      p.error = OneLine(e.what());
    }
  }
  const auto decoded =
      DecodeAll(parser.model, sources, kBosAmr, options.beam_width, options.max_steps);
  for (std::size_t k = 0; k < slots.size(); ++k) {
    ParsedSentence& p = out[slots[k]];
    try {
      p.graph = SequenceToGraph(decoded[k].ids, parser.vocab, parser.wiki);
      p.graph.validate();
    } catch (const std::exception& e) {
      p.graph = EmptyGraph();
      p.error = OneLine(e.what());
    }
  }
  return out;
}

std::string FormatParses(const std::vector<ParsedSentence>& parses) {
  std::string out;
  for (const auto& p : parses) {
    out += "# ::id " + p.id + "\n";
    out += "# ::snt " + p.sentence + "\n";
    if (!p.lang.empty() && p.lang != "en") out += "# ::lang " + p.lang + "\n";
    if (!p.error.empty()) out += "# ::error " + p.error + "\n";
    out += SerializePenman(p.graph) + "\n\n";
  }
  return out;
}

Evaluation EvaluateCorpora(const std::vector<ParallelExample>& pred,
                           const std::vector<ParallelExample>& gold,
                           const SmatchOptions& options) {
  std::map<std::string, const AmrGraph*> by_id;
  for (const auto& ex : pred) {
    if (!ex.gold) continue;
    if (!by_id.emplace(ex.id, &*ex.gold).second) {
      throw DataError("duplicate id '" + ex.id + "' in predictions");
    }
  }
  Evaluation ev;
  std::vector<AmrGraph> p, g;
  std::set<std::string> seen;
  for (const auto& ex : gold) {
    if (!ex.gold) continue;
    if (!seen.insert(ex.id).second) throw DataError("duplicate id '" + ex.id + "' in gold");
    auto it = by_id.find(ex.id);
    if (it == by_id.end()) {
      ev.missing_in_pred.push_back(ex.id);
      continue;
    }
    p.push_back(*it->second);
    g.push_back(*ex.gold);
  }
  for (const auto& [id, graph] : by_id) {
    if (!seen.count(id)) ev.missing_in_gold.push_back(id);
  }
  if (p.empty()) throw DataError("NoOverlappingIds: prediction and gold share no ::id");
  ev.pairs = p.size();
  ev.report = CorpusScore(p, g, options);
  return ev;
}

std::string FormatEvaluation(const Evaluation& evaluation) {
  std::string out = FormatMetricTable(evaluation.report);
  out += "\n" + FormatMetricBlock(evaluation.report);
  out += "pairs " + std::to_string(evaluation.pairs) + "\n";
  for (const auto& id : evaluation.missing_in_pred) out += "unmatched_gold " + id + "\n";
  for (const auto& id : evaluation.missing_in_gold) out += "unmatched_pred " + id + "\n";
  return out;
}

TrainOutcome TrainParser(const RunConfig& config, const BpeVocab& vocab,
                         const std::vector<ParallelExample>& train,
                         const std::vector<ParallelExample>& dev, std::ostream* log,
                         const std::filesystem::path& checkpoint_path) {
  std::vector<AmrGraph> graphs;
  for (const auto& ex : train) {
    if (ex.gold) graphs.push_back(*ex.gold);
  }
  Trainer trainer(config.model, config.train, vocab, BuildWikiDict(graphs), train, dev);
  return Finish(trainer, log, checkpoint_path);
}

TrainOutcome ResumeParser(const Checkpoint& checkpoint, const RunConfig& config,
                          const std::vector<ParallelExample>& train,
                          const std::vector<ParallelExample>& dev, std::ostream* log,
                          const std::filesystem::path& checkpoint_path) {
  Trainer trainer = Trainer::Resume(checkpoint, config.train, train, dev);
  return Finish(trainer, log, checkpoint_path);
}

AblationReport RunAblation(const RunConfig& config,
                           const std::vector<ParallelExample>& train,
                           const std::vector<ParallelExample>& heldout,
                           std::uint64_t base_seed, std::ostream* progress) {
  if (train.empty() || heldout.empty()) {
    throw DataError("ablation needs non-empty training and held-out sets");
  }
  const BpeVocab vocab = TrainBpe(BpeTrainingText(train), config.bpe_merges);
  std::vector<AmrGraph> graphs, gold;
  for (const auto& ex : train) graphs.push_back(*ex.gold);
  for (const auto& ex : heldout) {
    if (!ex.gold) throw DataError("held-out example '" + ex.id + "' has no graph");
    gold.push_back(*ex.gold);
  }
  const WikiDictionary wiki = BuildWikiDict(graphs);

  AblationReport report;
  for (int k = 0; k < config.ablation_seeds; ++k) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(k);
    for (TrainMode mode : kAllModes) {
      RunConfig c = config;
      SetSeed(c, seed);
      c.train.mode = mode;
      Trainer trainer(c.model, c.train, vocab, wiki, train, {});
      trainer.run();
      const ParserBundle parser{trainer.model(), vocab, wiki, mode};
      const auto parses = ParseSentences(parser, heldout, nullptr,
                                         ParseOptions{c.beam_width, c.decode_max_steps});
      std::vector<AmrGraph> pred;
      pred.reserve(parses.size());
      for (const auto& p : parses) pred.push_back(p.graph);
      SmatchOptions opt;
      opt.restarts = c.train.smatch_restarts;
      opt.seed = seed;
      AblationRun run{seed, mode, CorpusScore(pred, gold, opt)};
      if (progress) {
        *progress << "ablate\tseed=" << seed << "\tmode=" << ToString(mode)
                  << "\tsmatch=" << run.heldout.at("Smatch").f1 << std::endl;
      }
      report.runs.push_back(std::move(run));
    }
  }
  return report;
}

}  // namespace xlamr
