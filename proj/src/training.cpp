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

#include "xlamr/training.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>

#include "xlamr/config.hpp"
#include "xlamr/rng.hpp"
#include "xlamr/smatch.hpp"

namespace xlamr {

namespace {

constexpr int kDecodeChunk = 64;

std::string Num(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
  return std::string(buf, r.ptr);
}

Tensor ToTensor(const ParamInfo& info, const float* data) {
  Tensor t;
  t.rows = static_cast<std::uint32_t>(info.rows);
  t.cols = static_cast<std::uint32_t>(info.cols);
  t.data.assign(data, data + info.size());
  return t;
}

void FromTensor(const Checkpoint& ck, const std::string& name, const ParamInfo& info,
                float* out) {
  const Tensor& t = ck.tensor(name);
  if (t.rows != static_cast<std::uint32_t>(info.rows) ||
      t.cols != static_cast<std::uint32_t>(info.cols)) {
    throw TrainError(TrainError::Kind::kCheckpointMismatch,
                     "tensor '" + name + "' has the wrong shape");
  }
  std::copy(t.data.begin(), t.data.end(), out);
}

void LoadParams(const Checkpoint& ck, const std::string& prefix, ParamSet<float>& ps,
                std::vector<float>& buffer) {
  for (const auto& info : ps.info()) {
    FromTensor(ck, prefix + info.name, info, buffer.data() + info.offset);
  }
}

}  // namespace

std::string ToString(TrainMode mode) {
  switch (mode) {
    case TrainMode::kS2s: return "s2s";
    case TrainMode::kS2sBilingual: return "s2s_bilingual";
    case TrainMode::kS2sAux: return "s2s_aux";
    case TrainMode::kFull: return "full";
  }
  return "full";
}

TrainMode ParseTrainMode(std::string_view text) {
  for (TrainMode m : kAllModes) {
    if (ToString(m) == text) return m;
  }
  throw std::invalid_argument("unknown training mode '" + std::string(text) +
                              "' (expected s2s, s2s_bilingual, s2s_aux or full)");
}

bool UsesBilingualInput(TrainMode mode) {
  return mode == TrainMode::kS2sBilingual || mode == TrainMode::kFull;
}

bool UsesAuxTask(TrainMode mode) {
  return mode == TrainMode::kS2sAux || mode == TrainMode::kFull;
}

void TrainConfig::validate() const {
  auto bad = [](const std::string& m) {
    return TrainError(TrainError::Kind::kBadConfig, "train config: " + m);
  };
  if (warmup_steps < 1) throw bad("warmup_steps must be at least 1");
  if (!(decoder_lr_factor > 0.0 && decoder_lr_factor <= 1.0)) {
    throw bad("decoder_lr_factor must lie in (0, 1]");
  }
  if (!(lr_scale > 0.0)) throw bad("lr_scale must be positive");
  if (batch_tokens < 1) throw bad("batch_tokens must be positive");
  if (max_steps < 0) throw bad("max_steps must be non-negative");
  if (eval_every < 1) throw bad("eval_every must be positive");
  if (!(clip_norm > 0.0)) throw bad("clip_norm must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw bad("Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw bad("adam_eps must be positive");
  if (eval_max_steps < 1) throw bad("eval_max_steps must be positive");
  if (smatch_restarts < 1) throw bad("smatch_restarts must be positive");
}

double LrSchedule(long step, int d_model, int warmup) {
  const double s = static_cast<double>(std::max(1L, step));
  return std::pow(static_cast<double>(d_model), -0.5) *
         std::min(std::pow(s, -0.5), s * std::pow(static_cast<double>(warmup), -1.5));
}

TokenIds EncodeSource(const std::string& target, const std::string& english,
                      const BpeVocab& vocab, TrainMode mode) {
  if (UsesBilingualInput(mode)) return BuildBilingualInput(target, english, vocab);
  return Encode(target, vocab);
}

EncodedExample EncodeExample(const ParallelExample& example, const BpeVocab& vocab,
                             TrainMode mode) {
  if (!example.linearized) {
    throw TrainError(TrainError::Kind::kEmptyDataset,
                     "example '" + example.id + "' has no AMR sequence");
  }
  EncodedExample out;
  out.source = EncodeSource(example.target, example.english, vocab, mode);
  out.amr = Encode(example.linearized->str(), vocab);
  if (UsesAuxTask(mode)) out.eng = Encode(example.english, vocab);
  return out;
}

std::vector<TrainBatch> MakeBatches(const std::vector<ParallelExample>& examples,
                                    const BpeVocab& vocab, const TrainConfig& config,
                                    TrainMode mode) {
  if (examples.empty()) {
    throw TrainError(TrainError::Kind::kEmptyDataset, "training set is empty");
  }
  std::vector<EncodedExample> enc;
  enc.reserve(examples.size());
  for (const auto& ex : examples) enc.push_back(EncodeExample(ex, vocab, mode));
  std::vector<std::size_t> order(enc.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return enc[a].source.size() < enc[b].source.size();
  });
  std::vector<TrainBatch> batches;
  TrainBatch cur;
  std::size_t tokens = 0;
  for (std::size_t i : order) {
    const std::size_t len = enc[i].source.size();
    if (!cur.sources.empty() && tokens + len > static_cast<std::size_t>(config.batch_tokens)) {
      batches.push_back(std::move(cur));
      cur = TrainBatch();
      tokens = 0;
    }
    const int s = static_cast<int>(cur.sources.size());
    cur.sources.push_back(std::move(enc[i].source));
    cur.rows.push_back({s, kBosAmr, std::move(enc[i].amr)});
    if (!enc[i].eng.empty()) cur.rows.push_back({s, kBosEng, std::move(enc[i].eng)});
    tokens += len;
  }
  if (!cur.sources.empty()) batches.push_back(std::move(cur));
  return batches;
}

std::vector<std::size_t> EpochOrder(std::size_t batches, std::uint64_t seed, long epoch) {
  std::vector<std::size_t> order(batches);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(DeriveSeed(seed, 0x5eed0000ULL + static_cast<std::uint64_t>(epoch)));
  rng.shuffle(order);
  return order;
}

Adam::Adam(std::size_t size, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps), m_(size, 0.0f), v_(size, 0.0f) {}

void Adam::update(ParamSet<float>& params, const std::vector<float>& grad, long step,
                  double lr_encoder, double lr_decoder) {
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step));
  const auto b1 = static_cast<float>(beta1_);
  const auto b2 = static_cast<float>(beta2_);
  const auto eps = static_cast<float>(eps_);
  const auto inv_c2 = static_cast<float>(1.0 / c2);
  std::vector<float>& theta = params.data();
  for (const auto& info : params.info()) {
    const double lr = IsDecoderParam(info.name) ? lr_decoder : lr_encoder;
    const auto step_size = static_cast<float>(lr / c1);
    const std::size_t end = info.offset + info.size();
    for (std::size_t i = info.offset; i < end; ++i) {
      const float g = grad[i];
      m_[i] = b1 * m_[i] + (1.0f - b1) * g;
      v_[i] = b2 * v_[i] + (1.0f - b2) * g * g;
      theta[i] -= step_size * m_[i] / (std::sqrt(v_[i] * inv_c2) + eps);
    }
  }
}

double ClipGradNorm(std::vector<float>& grad, double max_norm) {
  double sq = 0.0;
  for (float g : grad) sq += static_cast<double>(g) * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const auto s = static_cast<float>(max_norm / norm);
    for (float& g : grad) g *= s;
  }
  return norm;
}

AmrGraph SequenceToGraph(const TokenIds& ids, const BpeVocab& vocab,
                         const WikiDictionary& wiki) {
  return Restore(Repair(SplitLinear(Decode(ids, vocab))), wiki);
}

std::vector<DecodeResult> DecodeAll(const Transformer<float>& model,
                                    const std::vector<TokenIds>& sources, TokenId task,
                                    int beam_width, int max_steps) {
  std::vector<DecodeResult> out;
  out.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); i += kDecodeChunk) {
    const std::size_t end = std::min(sources.size(), i + kDecodeChunk);
    std::vector<TokenIds> chunk(sources.begin() + static_cast<long>(i),
                                sources.begin() + static_cast<long>(end));
    auto part = beam_width <= 1 ? model.DecodeGreedy(chunk, task, max_steps)
                                : model.DecodeBeam(chunk, task, beam_width, max_steps);
    for (auto& r : part) out.push_back(std::move(r));
  }
  return out;
}

double CorpusSmatchF1(const std::vector<AmrGraph>& pred, const std::vector<AmrGraph>& gold,
                      int restarts, std::uint64_t seed) {
  if (pred.size() != gold.size()) {
    throw SmatchError(SmatchError::Kind::kLengthMismatch, "corpus sizes differ");
  }
  long matched = 0, pred_total = 0, gold_total = 0;
  SmatchOptions opt;
  opt.restarts = restarts;
  opt.seed = seed;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    SmatchScore s = ComputeSmatch(pred[i], gold[i], opt);
    matched += s.matched;
    pred_total += s.pred_total;
    gold_total += s.gold_total;
  }
  return SmatchScore::FromCounts(matched, pred_total, gold_total).f1;
}

Trainer::Trainer(const ModelConfig& model, const TrainConfig& config, BpeVocab vocab,
                 WikiDictionary wiki, const std::vector<ParallelExample>& train,
                 const std::vector<ParallelExample>& dev)
    : model_config_(model),
      config_(config),
      vocab_(std::move(vocab)),
      wiki_(std::move(wiki)),
      model_([&] {
        ModelConfig m = model;
        if (m.vocab_size != 0 && m.vocab_size != static_cast<int>(vocab_.size())) {
          throw TrainError(TrainError::Kind::kBadConfig,
                           "vocab_size " + std::to_string(m.vocab_size) +
                               " disagrees with the vocabulary (" +
                               std::to_string(vocab_.size()) + " tokens)");
        }
        m.vocab_size = static_cast<int>(vocab_.size());
        return m;
      }()),
      adam_(model_.params().size(), config.adam_beta1, config.adam_beta2, config.adam_eps) {
  config_.validate();
  model_config_ = model_.config();
  batches_ = MakeBatches(train, vocab_, config_, config_.mode);
  for (const auto& ex : dev) {
    if (!ex.gold) continue;
    dev_sources_.push_back(EncodeSource(ex.target, ex.english, vocab_, config_.mode));
    dev_gold_.push_back(*ex.gold);
  }
  grad_.assign(model_.params().size(), 0.0f);
}

Trainer Trainer::Resume(const Checkpoint& ck, const TrainConfig& config,
                        const std::vector<ParallelExample>& train,
                        const std::vector<ParallelExample>& dev) {
  const TrainConfig stored = CheckpointTrainConfig(ck);
  if (stored.mode != config.mode || stored.seed != config.seed) {
    throw TrainError(TrainError::Kind::kCheckpointMismatch,
                     "resume must keep the checkpoint's mode and seed");
  }
  Trainer t(CheckpointModelConfig(ck), config, CheckpointVocab(ck), CheckpointWiki(ck), train,
            dev);
  ParamSet<float>& ps = t.model_.params();
  LoadParams(ck, "param/", ps, ps.data());
  LoadParams(ck, "adam_m/", ps, t.adam_.m());
  LoadParams(ck, "adam_v/", ps, t.adam_.v());
  const KeyValues state = ParseKeyValues(ck.text("state"));
  try {
    t.step_ = std::stol(state.at("step"));
    t.best_smatch_ = std::stod(state.at("best_dev_smatch"));
    t.best_step_ = std::stol(state.at("best_step"));
  } catch (const std::exception&) {
    throw TrainError(TrainError::Kind::kCheckpointMismatch, "checkpoint state block is malformed");
  }
  if (ck.has_tensor("best/emb")) {
    t.best_params_.assign(ps.size(), 0.0f);
    LoadParams(ck, "best/", ps, t.best_params_);
  }
  return t;
}

const TrainBatch& Trainer::batch_for(long step) {
  const long n = static_cast<long>(batches_.size());
  const long epoch = (step - 1) / n;
  if (epoch != order_epoch_) {
    order_ = EpochOrder(batches_.size(), config_.seed, epoch);
    order_epoch_ = epoch;
  }
  return batches_[order_[static_cast<std::size_t>((step - 1) % n)]];
}

StepRecord Trainer::step() {
  const long s = step_ + 1;
  const TrainBatch& batch = batch_for(s);
  std::fill(grad_.begin(), grad_.end(), 0.0f);
  StepRecord rec;
  rec.step = s;
  rec.loss = model_.Loss(batch, &grad_, true, DeriveSeed(config_.seed, static_cast<std::uint64_t>(s)));
  rec.grad_norm = ClipGradNorm(grad_, config_.clip_norm);
  rec.lr_encoder = config_.lr_scale * LrSchedule(s, model_config_.d_model, config_.warmup_steps);
  rec.lr_decoder = rec.lr_encoder * config_.decoder_lr_factor;
  adam_.update(model_.params(), grad_, s, rec.lr_encoder, rec.lr_decoder);
  step_ = s;
  return rec;
}

double Trainer::evaluate() const {
  if (dev_sources_.empty()) return 0.0;
  const auto decoded = DecodeAll(model_, dev_sources_, kBosAmr, 1, config_.eval_max_steps);
  std::vector<AmrGraph> pred;
  pred.reserve(decoded.size());
  for (const auto& d : decoded) pred.push_back(SequenceToGraph(d.ids, vocab_, wiki_));
  return CorpusSmatchF1(pred, dev_gold_, config_.smatch_restarts, config_.seed);
}

void Trainer::run(const TrainHooks& hooks) {
  auto evaluate_now = [&]() {
    if (dev_sources_.empty()) return;
    EvalRecord ev{step_, evaluate()};
    if (hooks.log) *hooks.log << "eval\t" << ev.step << '\t' << Num(ev.smatch) << '\n';
    if (hooks.on_eval) hooks.on_eval(ev);
    if (ev.smatch > best_smatch_) {
      best_smatch_ = ev.smatch;
      best_step_ = step_;
      best_params_ = model_.params().data();
    }
  };
  while (step_ < config_.max_steps) {
    StepRecord rec = step();
    if (hooks.log) {
      *hooks.log << rec.step << '\t' << Num(rec.lr_encoder) << '\t' << Num(rec.loss.loss_amr)
                 << '\t' << Num(rec.loss.loss_eng) << '\t' << Num(rec.loss.total) << '\n';
    }
    if (hooks.on_step) hooks.on_step(rec);
    if (step_ % config_.eval_every == 0 || step_ == config_.max_steps) {
      evaluate_now();
      if (!hooks.checkpoint.empty()) to_checkpoint().save(hooks.checkpoint);
    }
  }
  if (best_params_.empty()) {
    best_params_ = model_.params().data();
    best_step_ = step_;
  }
  if (!hooks.checkpoint.empty()) to_checkpoint().save(hooks.checkpoint);
}

Checkpoint Trainer::to_checkpoint() const {
  Checkpoint ck;
  ck.set_text("model_config", FormatKeyValues(ModelKeyValues(model_config_)));
  ck.set_text("train_config", FormatKeyValues(TrainKeyValues(config_)));
  ck.set_text("vocab", vocab_.to_text());
  ck.set_text("wiki", wiki_.to_text());
  char smatch[64];
  auto r = std::to_chars(smatch, smatch + sizeof smatch, best_smatch_);
  ck.set_text("state", FormatKeyValues({{"step", std::to_string(step_)},
                                        {"best_dev_smatch", std::string(smatch, r.ptr)},
                                        {"best_step", std::to_string(best_step_)}}));
  const ParamSet<float>& ps = model_.params();
  for (const auto& info : ps.info()) {
    ck.set_tensor("param/" + info.name, ToTensor(info, ps.data().data() + info.offset));
    ck.set_tensor("adam_m/" + info.name, ToTensor(info, adam_.m().data() + info.offset));
    ck.set_tensor("adam_v/" + info.name, ToTensor(info, adam_.v().data() + info.offset));
    if (!best_params_.empty()) {
      ck.set_tensor("best/" + info.name, ToTensor(info, best_params_.data() + info.offset));
    }
  }
  return ck;
}

ModelConfig CheckpointModelConfig(const Checkpoint& ck) {
  return ModelConfigFromText(ck.text("model_config"));
}

TrainConfig CheckpointTrainConfig(const Checkpoint& ck) {
  return TrainConfigFromText(ck.text("train_config"));
}

BpeVocab CheckpointVocab(const Checkpoint& ck) { return BpeVocab::from_text(ck.text("vocab")); }

WikiDictionary CheckpointWiki(const Checkpoint& ck) {
  return WikiDictionary::from_text(ck.text("wiki"));
}

Transformer<float> CheckpointModel(const Checkpoint& ck) {
  Transformer<float> model(CheckpointModelConfig(ck));
  ParamSet<float>& ps = model.params();
  LoadParams(ck, ck.has_tensor("best/emb") ? "best/" : "param/", ps, ps.data());
  return model;
}

}  // namespace xlamr
