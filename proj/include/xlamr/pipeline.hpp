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

#ifndef XLAMR_PIPELINE_HPP_
#define XLAMR_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "xlamr/bpe.hpp"
#include "xlamr/config.hpp"
#include "xlamr/corpus.hpp"
#include "xlamr/linearizer.hpp"
#include "xlamr/report.hpp"
#include "xlamr/smatch.hpp"
#include "xlamr/training.hpp"
#include "xlamr/transformer.hpp"
#include "xlamr/translator.hpp"

namespace xlamr {

// Input data that cannot be used as given (no overlapping ids, unreadable
// blocks, missing translations).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// English, target-language text and linearized graphs of every example,
// so one vocabulary covers both inputs and outputs.
std::vector<std::string> BpeTrainingText(const std::vector<ParallelExample>& examples);

// Loads a corpus and throws DataError if any block failed to parse.
std::vector<ParallelExample> LoadCorpusStrict(const std::filesystem::path& path);

// "id<TAB>linearized" lines.
std::string FormatSequences(const std::vector<ParallelExample>& examples);

struct ParserBundle {
  Transformer<float> model;
  BpeVocab vocab;
  WikiDictionary wiki;
  TrainMode mode;

  static ParserBundle FromCheckpoint(const Checkpoint& checkpoint);
};

struct ParsedSentence {
  std::string id;
  std::string sentence;
  std::string lang;
  AmrGraph graph;
  // Empty on success; the graph is then (a / amr-empty) otherwise.
  std::string error;
};

struct ParseOptions {
  int beam_width = 4;
  int max_steps = 160;
};

// Bilingual modes translate each sentence to English with `translator`;
// without a translator the example's own English text is used. A sentence
// that fails gets the empty graph and an error message, never an exception.
std::vector<ParsedSentence> ParseSentences(const ParserBundle& parser,
                                           const std::vector<ParallelExample>& inputs,
                                           const Translator* translator,
                                           const ParseOptions& options);

// Block format with ::id, ::snt and, for failures, ::error.
std::string FormatParses(const std::vector<ParsedSentence>& parses);

struct Evaluation {
  FineGrainedReport report;
  std::size_t pairs = 0;
  std::vector<std::string> missing_in_pred;
  std::vector<std::string> missing_in_gold;
};

// Pairs graphs by id. Throws DataError when no id is shared.
Evaluation EvaluateCorpora(const std::vector<ParallelExample>& pred,
                           const std::vector<ParallelExample>& gold,
                           const SmatchOptions& options);

// Table, key:value block and the unmatched ids.
std::string FormatEvaluation(const Evaluation& evaluation);

struct TrainOutcome {
  Checkpoint checkpoint;
  long steps = 0;
  double best_dev_smatch = -1.0;
};

// Builds the wiki dictionary from `train`, trains and returns the final
// checkpoint (also written to `checkpoint_path` when non-empty).
TrainOutcome TrainParser(const RunConfig& config, const BpeVocab& vocab,
                         const std::vector<ParallelExample>& train,
                         const std::vector<ParallelExample>& dev, std::ostream* log,
                         const std::filesystem::path& checkpoint_path = {});

// Continues a run saved by TrainParser; the model, vocabulary and wiki
// dictionary come from `checkpoint`.
TrainOutcome ResumeParser(const Checkpoint& checkpoint, const RunConfig& config,
                          const std::vector<ParallelExample>& train,
                          const std::vector<ParallelExample>& dev, std::ostream* log,
                          const std::filesystem::path& checkpoint_path = {});

// Trains every mode for `config.ablation_seeds` seeds starting at
// `base_seed` with one shared vocabulary, and scores each on `heldout`.
// Held-out English comes from the examples themselves.
AblationReport RunAblation(const RunConfig& config,
                           const std::vector<ParallelExample>& train,
                           const std::vector<ParallelExample>& heldout,
                           std::uint64_t base_seed, std::ostream* progress);

}  // namespace xlamr

#endif  // XLAMR_PIPELINE_HPP_
