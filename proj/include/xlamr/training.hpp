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

#ifndef XLAMR_TRAINING_HPP_
#define XLAMR_TRAINING_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "xlamr/bpe.hpp"
#include "xlamr/checkpoint.hpp"
#include "xlamr/corpus.hpp"
#include "xlamr/linearizer.hpp"
#include "xlamr/transformer.hpp"

namespace xlamr {

class TrainError : public std::runtime_error {
 public:
  enum class Kind { kEmptyDataset, kBadConfig, kCheckpointMismatch };
  TrainError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// s2s: target text in, AMR out. bilingual adds the English text to the
// input; aux adds the English reconstruction task.
enum class TrainMode { kS2s, kS2sBilingual, kS2sAux, kFull };
inline constexpr std::array<TrainMode, 4> kAllModes = {
    TrainMode::kS2s, TrainMode::kS2sBilingual, TrainMode::kS2sAux, TrainMode::kFull};

std::string ToString(TrainMode mode);
TrainMode ParseTrainMode(std::string_view text);
bool UsesBilingualInput(TrainMode mode);
bool UsesAuxTask(TrainMode mode);

struct TrainConfig {
  int warmup_steps = 400;
  double decoder_lr_factor = 0.5;
  double lr_scale = 1.0;
  int batch_tokens = 2048;
  int max_steps = 2000;
  int eval_every = 200;
  std::uint64_t seed = 1;
  TrainMode mode = TrainMode::kFull;
  double clip_norm = 1.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.98;
  double adam_eps = 1e-9;
  int eval_max_steps = 160;
  int smatch_restarts = 4;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

// d_model^-0.5 * min(step^-0.5, step * warmup^-1.5).
double LrSchedule(long step, int d_model, int warmup);

struct EncodedExample {
  TokenIds source;
  TokenIds amr;
  TokenIds eng;  // empty unless the mode trains the auxiliary task
};

// Requires `linearized`.
EncodedExample EncodeExample(const ParallelExample& example, const BpeVocab& vocab,
                             TrainMode mode);
// Model input for parsing: the target sentence, plus `english` in bilingual
// modes.
TokenIds EncodeSource(const std::string& target, const std::string& english,
                      const BpeVocab& vocab, TrainMode mode);

// Length-bucketed batches of at most `batch_tokens` source tokens (a single
// longer example forms its own batch). Throws kEmptyDataset.
std::vector<TrainBatch> MakeBatches(const std::vector<ParallelExample>& examples,
                                    const BpeVocab& vocab, const TrainConfig& config,
                                    TrainMode mode);
// Batch visiting order of one epoch; a pure function of its arguments.
std::vector<std::size_t> EpochOrder(std::size_t batches, std::uint64_t seed, long epoch);

class Adam {
 public:
  Adam(std::size_t size, double beta1, double beta2, double eps);

  // One update at 1-based `step`; decoder parameters use `lr_decoder`.
  void update(ParamSet<float>& params, const std::vector<float>& grad, long step,
              double lr_encoder, double lr_decoder);

  std::vector<float>& m() { return m_; }
  std::vector<float>& v() { return v_; }
  const std::vector<float>& m() const { return m_; }
  const std::vector<float>& v() const { return v_; }

 private:
  double beta1_, beta2_, eps_;
  std::vector<float> m_, v_;
};

// Scales `grad` to global L2 norm `max_norm` when larger; returns the
// pre-clipping norm.
double ClipGradNorm(std::vector<float>& grad, double max_norm);

// Decoded ids -> graph: detokenize, repair, restore.
AmrGraph SequenceToGraph(const TokenIds& ids, const BpeVocab& vocab,
                         const WikiDictionary& wiki);

// Decodes in chunks; beam_width 1 is greedy.
std::vector<DecodeResult> DecodeAll(const Transformer<float>& model,
                                    const std::vector<TokenIds>& sources, TokenId task,
                                    int beam_width, int max_steps);

// Micro-averaged Smatch F1 over aligned pairs.
double CorpusSmatchF1(const std::vector<AmrGraph>& pred, const std::vector<AmrGraph>& gold,
                      int restarts, std::uint64_t seed);

struct StepRecord {
  long step = 0;
  double lr_encoder = 0.0;
  double lr_decoder = 0.0;
  LossBreakdown loss;
  double grad_norm = 0.0;
};

struct EvalRecord {
  long step = 0;
  double smatch = 0.0;
};

struct TrainHooks {
  std::ostream* log = nullptr;
  std::function<void(const StepRecord&)> on_step;
  std::function<void(const EvalRecord&)> on_eval;
  // Written after every evaluation and at the end when non-empty.
  std::filesystem::path checkpoint;
};

class Trainer {
 public:
  Trainer(const ModelConfig& model, const TrainConfig& config, BpeVocab vocab,
          WikiDictionary wiki, const std::vector<ParallelExample>& train,
          const std::vector<ParallelExample>& dev);
  // Continues from a checkpoint written by to_checkpoint(). `config`
  // overrides the stored training config (e.g. a larger max_steps) but must
  // keep the mode and seed.
  static Trainer Resume(const Checkpoint& checkpoint, const TrainConfig& config,
                        const std::vector<ParallelExample>& train,
                        const std::vector<ParallelExample>& dev);

  StepRecord step();
  // Greedy-decoded dev Smatch of the current parameters.
  double evaluate() const;
  // Runs until config().max_steps and leaves the best parameters in
  // best_params() (the current ones if there is no dev set).
  void run(const TrainHooks& hooks = {});

  long current_step() const { return step_; }
  const Transformer<float>& model() const { return model_; }
  Transformer<float>& model() { return model_; }
  const TrainConfig& config() const { return config_; }
  const BpeVocab& vocab() const { return vocab_; }
  const WikiDictionary& wiki() const { return wiki_; }
  const Adam& optimizer() const { return adam_; }
  double best_dev_smatch() const { return best_smatch_; }
  long best_step() const { return best_step_; }
  const std::vector<float>& best_params() const { return best_params_; }
  const std::vector<TrainBatch>& batches() const { return batches_; }

  Checkpoint to_checkpoint() const;

 private:
  const TrainBatch& batch_for(long step);

  ModelConfig model_config_;
  TrainConfig config_;
  BpeVocab vocab_;
  WikiDictionary wiki_;
  Transformer<float> model_;
  Adam adam_;
  std::vector<TrainBatch> batches_;
  std::vector<TokenIds> dev_sources_;
  std::vector<AmrGraph> dev_gold_;
  std::vector<float> grad_;
  long step_ = 0;
  double best_smatch_ = -1.0;
  long best_step_ = 0;
  std::vector<float> best_params_;
  long order_epoch_ = -1;
  std::vector<std::size_t> order_;
};

// Checkpoint accessors used by parsing and evaluation.
ModelConfig CheckpointModelConfig(const Checkpoint& checkpoint);
TrainConfig CheckpointTrainConfig(const Checkpoint& checkpoint);
BpeVocab CheckpointVocab(const Checkpoint& checkpoint);
WikiDictionary CheckpointWiki(const Checkpoint& checkpoint);
// Best parameters when present, otherwise the latest ones.
Transformer<float> CheckpointModel(const Checkpoint& checkpoint);

}  // namespace xlamr

#endif  // XLAMR_TRAINING_HPP_
