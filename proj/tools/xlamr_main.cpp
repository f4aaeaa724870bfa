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

// xlamr: command-line driver for corpus preparation, training, parsing and
// evaluation. Exit codes: 0 success, 1 usage, 2 data error, 3 internal.

#include <CLI11.hpp>

#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "xlamr/amr_graph.hpp"
#include "xlamr/bpe.hpp"
#include "xlamr/checkpoint.hpp"
#include "xlamr/config.hpp"
#include "xlamr/corpus.hpp"
#include "xlamr/io_util.hpp"
#include "xlamr/linearizer.hpp"
#include "xlamr/pipeline.hpp"
#include "xlamr/report.hpp"
#include "xlamr/smatch.hpp"
#include "xlamr/toy_corpus.hpp"
#include "xlamr/training.hpp"
#include "xlamr/translator.hpp"

namespace {

using namespace xlamr;

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;

  RunConfig load() const {
    RunConfig cfg;
    if (!config_path.empty()) cfg = LoadRunConfig(config_path);
    if (seed) SetSeed(cfg, *seed);
    return cfg;
  }
};

void AddCommon(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config_path, "key = value run configuration")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", common.seed, "overrides the configured seed");
}

// "toy", "lexicon:PATH", "table:PATH" or "none".
std::unique_ptr<Translator> MakeTranslator(const std::string& spec) {
  if (spec.empty() || spec == "none") return nullptr;
  if (spec == "toy") return std::make_unique<MockLexicon>(ToyLexicon());
  if (spec.rfind("lexicon:", 0) == 0) {
    return std::make_unique<MockLexicon>(MockLexicon::load(spec.substr(8)));
  }
  if (spec.rfind("table:", 0) == 0) {
    return std::make_unique<ExternalFile>(ExternalFile::load(spec.substr(6)));
  }
  throw UsageError("unknown translator '" + spec + "' (toy, lexicon:PATH, table:PATH, none)");
}

void ReportBlockErrors(const CorpusReadResult& r, const std::string& path) {
  if (r.empty) std::cerr << "warning: " << path << " holds no blocks\n";
  for (const auto& e : r.errors) {
    std::cerr << "warning: " << path << ": block '" << e.id << "' at line " << e.line
              << " skipped: " << e.message << "\n";
  }
}

std::vector<ParallelExample> ReadOptionalCorpus(const std::string& path) {
  if (path.empty()) return {};
  return LoadCorpusStrict(path);
}

int CmdGenToy(const Common& common, const std::string& out, std::optional<int> count,
              const std::string& heldout_out, const std::string& lexicon_out) {
  const RunConfig cfg = common.load();
  const int n = count.value_or(cfg.toy_examples);
  const int h = heldout_out.empty() ? 0 : cfg.toy_heldout;
  if (n < 1) throw UsageError("--count must be positive");
  auto all = GenerateToyCorpus(n + h, cfg.train.seed, cfg.lang);
  std::vector<ParallelExample> train(all.begin(), all.begin() + n);
  WriteFileAtomic(out, FormatAmrCorpus(train));
  if (h > 0) {
    std::vector<ParallelExample> held(all.begin() + n, all.end());
    WriteFileAtomic(heldout_out, FormatAmrCorpus(held));
  }
  if (!lexicon_out.empty()) WriteFileAtomic(lexicon_out, ToyLexicon().to_text());
  std::cout << "gen-toy: " << n << " training and " << h << " held-out examples\n";
  return kOk;
}

int CmdPreprocess(const Common& common, const std::string& in, const std::string& out,
                  const std::string& wiki_out) {
  (void)common.load();
  CorpusReadResult r = ReadAmrCorpus(in);
  ReportBlockErrors(r, in);
  WriteFileAtomic(out, FormatSequences(r.examples));
  if (!wiki_out.empty()) {
    std::vector<AmrGraph> graphs;
    for (const auto& ex : r.examples) {
      if (ex.gold) graphs.push_back(*ex.gold);
    }
    BuildWikiDict(graphs).save(wiki_out);
  }
  std::cout << "preprocess: " << r.examples.size() << " sequences, " << r.errors.size()
            << " skipped blocks\n";
  return r.errors.empty() ? kOk : kData;
}

int CmdTrainBpe(const Common& common, const std::vector<std::string>& inputs,
                const std::string& out, std::optional<int> merges) {
  const RunConfig cfg = common.load();
  std::vector<std::string> text;
  for (const auto& path : inputs) {
    auto part = BpeTrainingText(LoadCorpusStrict(path));
    text.insert(text.end(), part.begin(), part.end());
  }
  const BpeVocab vocab = TrainBpe(text, merges.value_or(cfg.bpe_merges));
  vocab.save(out);
  std::cout << "train-bpe: " << vocab.merges().size() << " merges, " << vocab.size()
            << " tokens\n";
  return kOk;
}

int CmdSynthesize(const Common& common, const std::string& in, const std::string& out,
                  const std::string& translator_spec, const std::string& lang) {
  const RunConfig cfg = common.load();
  auto translator = MakeTranslator(translator_spec);
  if (!translator) throw UsageError("synthesize needs a translator");
  auto examples = LoadCorpusStrict(in);
  auto silver = SynthesizeSilver(examples, *translator, lang.empty() ? cfg.lang : lang);
  WriteFileAtomic(out, FormatAmrCorpus(silver));
  std::cout << "synthesize: " << silver.size() << " examples\n";
  return kOk;
}

int CmdTrain(const Common& common, const std::string& train_path,
             const std::string& dev_path, const std::string& vocab_path,
             const std::string& out, const std::string& log_path,
             const std::string& resume_path) {
  RunConfig cfg = common.load();
  const auto train = LoadCorpusStrict(train_path);
  const auto dev = ReadOptionalCorpus(dev_path);
  std::ostringstream buffered;
  std::ostream* log = log_path.empty() ? &std::cout : &buffered;
  TrainOutcome outcome;
  if (!resume_path.empty()) {
    const Checkpoint ck = Checkpoint::Load(resume_path);
    if (!common.seed && common.config_path.empty()) {
      cfg.train = CheckpointTrainConfig(ck);
    }
    outcome = ResumeParser(ck, cfg, train, dev, log, out);
  } else {
    const BpeVocab vocab = vocab_path.empty()
                               ? TrainBpe(BpeTrainingText(train), cfg.bpe_merges)
                               : BpeVocab::load(vocab_path);
    outcome = TrainParser(cfg, vocab, train, dev, log, out);
  }
  outcome.checkpoint.save(out);
  if (!log_path.empty()) WriteFileAtomic(log_path, buffered.str());
  std::cerr << "train: " << outcome.steps << " steps";
  if (outcome.best_dev_smatch >= 0) std::cerr << ", best dev Smatch " << outcome.best_dev_smatch;
  std::cerr << "\n";
  return kOk;
}

int CmdParse(const Common& common, const std::string& checkpoint, const std::string& in,
             const std::string& out, const std::string& translator_spec,
             std::optional<int> beam) {
  const RunConfig cfg = common.load();
  const ParserBundle parser = ParserBundle::FromCheckpoint(Checkpoint::Load(checkpoint));
  auto translator = MakeTranslator(translator_spec);
  const auto inputs = ReadSentences(in);
  const auto parses = ParseSentences(parser, inputs, translator.get(),
                                     ParseOptions{beam.value_or(cfg.beam_width),
                                                  cfg.decode_max_steps});
  WriteFileAtomic(out, FormatParses(parses));
  std::size_t failed = 0;
  for (const auto& p : parses) failed += p.error.empty() ? 0 : 1;
  std::cout << "parse: " << parses.size() << " sentences, " << failed << " failed\n";
  return kOk;
}

int CmdEvaluate(const Common& common, const std::string& pred_path,
                const std::string& gold_path, const std::string& out) {
  const RunConfig cfg = common.load();
  CorpusReadResult pred = ParseAmrCorpus(ReadFile(pred_path), true);
  CorpusReadResult gold = ParseAmrCorpus(ReadFile(gold_path), true);
  ReportBlockErrors(pred, pred_path);
  ReportBlockErrors(gold, gold_path);
  SmatchOptions opt;
  opt.restarts = cfg.train.smatch_restarts;
  opt.seed = cfg.train.seed;
  const std::string report = FormatEvaluation(EvaluateCorpora(pred.examples, gold.examples, opt));
  if (!out.empty()) WriteFileAtomic(out, report);
  std::cout << report;
  return kOk;
}

int CmdAblate(const Common& common, const std::string& train_path,
              const std::string& heldout_path, const std::string& out) {
  const RunConfig cfg = common.load();
  std::vector<ParallelExample> train, heldout;
  if (train_path.empty() != heldout_path.empty()) {
    throw UsageError("--train and --heldout go together");
  }
  if (train_path.empty()) {
    auto all = GenerateToyCorpus(cfg.toy_examples + cfg.toy_heldout, cfg.train.seed, cfg.lang);
    train.assign(all.begin(), all.begin() + cfg.toy_examples);
    heldout.assign(all.begin() + cfg.toy_examples, all.end());
  } else {
    train = LoadCorpusStrict(train_path);
    heldout = LoadCorpusStrict(heldout_path);
  }
  const AblationReport report = RunAblation(cfg, train, heldout, cfg.train.seed, &std::cerr);
  const std::string text = FormatAblationReport(report);
  if (!out.empty()) WriteFileAtomic(out, text);
  std::cout << text;
  return kOk;
}

int ExitCodeFor(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ConfigError*>(&e)) {
    return kUsage;
  }
  if (auto* t = dynamic_cast<const TrainError*>(&e)) {
    return t->kind() == TrainError::Kind::kBadConfig ? kUsage : kData;
  }
  if (auto* m = dynamic_cast<const ModelError*>(&e)) {
    return m->kind() == ModelError::Kind::kBadConfig ? kUsage : kData;
  }
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const IoError*>(&e) ||
      dynamic_cast<const AmrError*>(&e) || dynamic_cast<const LinearizeError*>(&e) ||
      dynamic_cast<const BpeError*>(&e) || dynamic_cast<const CheckpointError*>(&e) ||
      dynamic_cast<const TranslatorFailure*>(&e) || dynamic_cast<const SmatchError*>(&e)) {
    return kData;
  }
  return kInternal;
}

const char* Category(int code) {
  switch (code) {
    case kUsage:
      return "usage error";
    case kData:
      return "data error";
    default:
      return "internal error";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-lingual AMR parsing toolkit"};
  app.require_subcommand(1);
  Common common;
  std::function<int()> action;

  auto* gen = app.add_subcommand("gen-toy", "write the synthetic toy corpus");
  std::string gen_out, gen_heldout, gen_lexicon;
  std::optional<int> gen_count;
  gen->add_option("--out", gen_out, "training corpus file")->required();
  gen->add_option("--count", gen_count, "training examples (default toy_examples)");
  gen->add_option("--heldout-out", gen_heldout, "also write toy_heldout held-out examples");
  gen->add_option("--lexicon-out", gen_lexicon, "write the toy lexicon");
  AddCommon(gen, common);
  gen->callback([&] { action = [&] { return CmdGenToy(common, gen_out, gen_count, gen_heldout, gen_lexicon); }; });

  auto* pre = app.add_subcommand("preprocess", "linearize a corpus");
  std::string pre_in, pre_out, pre_wiki;
  pre->add_option("--in", pre_in, "AMR corpus")->required()->check(CLI::ExistingFile);
  pre->add_option("--out", pre_out, "id<TAB>sequence output")->required();
  pre->add_option("--wiki-out", pre_wiki, "wiki dictionary output");
  AddCommon(pre, common);
  pre->callback([&] { action = [&] { return CmdPreprocess(common, pre_in, pre_out, pre_wiki); }; });

  auto* bpe = app.add_subcommand("train-bpe", "learn a shared BPE vocabulary");
  std::vector<std::string> bpe_in;
  std::string bpe_out;
  std::optional<int> bpe_merges;
  bpe->add_option("--in", bpe_in, "AMR corpora")->required()->check(CLI::ExistingFile);
  bpe->add_option("--out", bpe_out, "vocabulary file")->required();
  bpe->add_option("--merges", bpe_merges, "merge operations (default bpe_merges)");
  AddCommon(bpe, common);
  bpe->callback([&] { action = [&] { return CmdTrainBpe(common, bpe_in, bpe_out, bpe_merges); }; });

  auto* syn = app.add_subcommand("synthesize", "add silver target-language text");
  std::string syn_in, syn_out, syn_translator, syn_lang;
  syn->add_option("--in", syn_in, "AMR corpus with English sentences")->required()->check(CLI::ExistingFile);
  syn->add_option("--out", syn_out, "output corpus")->required();
  syn->add_option("--translator", syn_translator, "toy, lexicon:PATH or table:PATH")->required();
  syn->add_option("--lang", syn_lang, "target language tag (default lang)");
  AddCommon(syn, common);
  syn->callback([&] { action = [&] { return CmdSynthesize(common, syn_in, syn_out, syn_translator, syn_lang); }; });

  auto* tr = app.add_subcommand("train", "train a parser");
  std::string tr_train, tr_dev, tr_vocab, tr_out, tr_log, tr_resume;
  tr->add_option("--train", tr_train, "training corpus")->required()->check(CLI::ExistingFile);
  tr->add_option("--dev", tr_dev, "dev corpus for model selection")->check(CLI::ExistingFile);
  tr->add_option("--vocab", tr_vocab, "BPE vocabulary (learned from --train if absent)")->check(CLI::ExistingFile);
  tr->add_option("--out", tr_out, "checkpoint file")->required();
  tr->add_option("--log", tr_log, "training log (stdout if absent)");
  tr->add_option("--resume", tr_resume, "continue from a checkpoint")->check(CLI::ExistingFile);
  AddCommon(tr, common);
  tr->callback([&] { action = [&] { return CmdTrain(common, tr_train, tr_dev, tr_vocab, tr_out, tr_log, tr_resume); }; });

  auto* parse = app.add_subcommand("parse", "parse sentences into AMR graphs");
  std::string parse_ck, parse_in, parse_out, parse_translator = "none";
  std::optional<int> parse_beam;
  parse->add_option("--checkpoint", parse_ck, "trained checkpoint")->required()->check(CLI::ExistingFile);
  parse->add_option("--in", parse_in, "plain sentences or block corpus")->required()->check(CLI::ExistingFile);
  parse->add_option("--out", parse_out, "PENMAN output")->required();
  parse->add_option("--translator", parse_translator, "toy, lexicon:PATH, table:PATH or none");
  parse->add_option("--beam", parse_beam, "beam width (default beam_width)");
  AddCommon(parse, common);
  parse->callback([&] { action = [&] { return CmdParse(common, parse_ck, parse_in, parse_out, parse_translator, parse_beam); }; });

  auto* ev = app.add_subcommand("evaluate", "score predictions against gold graphs");
  std::string ev_pred, ev_gold, ev_out;
  ev->add_option("--pred", ev_pred, "predicted corpus")->required()->check(CLI::ExistingFile);
  ev->add_option("--gold", ev_gold, "gold corpus")->required()->check(CLI::ExistingFile);
  ev->add_option("--out", ev_out, "report file");
  AddCommon(ev, common);
  ev->callback([&] { action = [&] { return CmdEvaluate(common, ev_pred, ev_gold, ev_out); }; });

  auto* abl = app.add_subcommand("ablate", "train all four modes and compare");
  std::string abl_train, abl_heldout, abl_out;
  abl->add_option("--train", abl_train, "training corpus (toy corpus if absent)")->check(CLI::ExistingFile);
  abl->add_option("--heldout", abl_heldout, "held-out corpus")->check(CLI::ExistingFile);
  abl->add_option("--out", abl_out, "report file");
  AddCommon(abl, common);
  abl->callback([&] { action = [&] { return CmdAblate(common, abl_train, abl_heldout, abl_out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    return action();
  } catch (const std::exception& e) {
    const int code = ExitCodeFor(e);
    std::cerr << "xlamr: " << Category(code) << ": " << e.what() << "\n";
    return code;
  }
}
