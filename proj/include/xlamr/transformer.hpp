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

#ifndef XLAMR_TRANSFORMER_HPP_
#define XLAMR_TRANSFORMER_HPP_

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "xlamr/bpe.hpp"

namespace xlamr {

class ModelError : public std::runtime_error {
 public:
  enum class Kind { kBadConfig, kShapeMismatch, kPositionOverflow };
  ModelError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct ModelConfig {
  int layers = 2;
  int d_model = 128;
  int d_ff = 512;
  int heads = 4;
  double dropout = 0.1;
  int vocab_size = 0;
  int max_len = 256;
  double loss_weight_amr = 1.0;
  double loss_weight_eng = 0.5;
  double label_smoothing = 0.0;
  std::uint64_t init_seed = 1;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

struct LossBreakdown {
  double loss_amr = 0.0;
  double loss_eng = 0.0;
  double total = 0.0;
  long tokens_amr = 0;
  long tokens_eng = 0;
};

struct ParamInfo {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;
  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

// Named row-major tensors stored in one flat buffer; gradient and optimizer
// buffers share the same layout.
template <typename T>
class ParamSet {
 public:
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Map = Eigen::Map<Mat>;
  using ConstMap = Eigen::Map<const Mat>;

  std::size_t add(const std::string& name, int rows, int cols);
  const std::vector<ParamInfo>& info() const { return info_; }
  const ParamInfo* find(const std::string& name) const;
  std::size_t size() const { return data_.size(); }
  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  Map view(std::size_t i) { return view(data_, i); }
  ConstMap view(std::size_t i) const { return view(data_, i); }
  Map view(std::vector<T>& buffer, std::size_t i) const {
    return Map(buffer.data() + info_[i].offset, info_[i].rows, info_[i].cols);
  }
  ConstMap view(const std::vector<T>& buffer, std::size_t i) const {
    return ConstMap(buffer.data() + info_[i].offset, info_[i].rows, info_[i].cols);
  }

 private:
  std::vector<ParamInfo> info_;
  std::vector<T> data_;
};

// Parameters updated at the decoder learning rate.
bool IsDecoderParam(const std::string& name);

// One decoder sequence of a training batch. The decoder reads
// [bos, gold[0..n-2]] and predicts gold, which ends with kEos.
struct DecoderRow {
  int source = 0;
  TokenId bos = kBosAmr;
  TokenIds gold;
};

struct TrainBatch {
  std::vector<TokenIds> sources;
  std::vector<DecoderRow> rows;
};

struct DecodeResult {
  TokenIds ids;  // without the BOS and the final kEos
  bool truncated = false;
  double log_prob = 0.0;

  // Length-normalized score; the length counts the kEos when present.
  double score() const;
};

template <typename T>
class Transformer {
 public:
  using Mat = typename ParamSet<T>::Mat;

  explicit Transformer(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  ParamSet<T>& params() { return params_; }
  const ParamSet<T>& params() const { return params_; }

  // Logits per example, one row per prefix position. Trailing kPad
  // positions of a prefix get zero rows; kPad tokens in sources are masked.
  std::vector<Mat> Forward(const std::vector<TokenIds>& sources,
                           const std::vector<TokenIds>& prefixes) const;

  // Weighted two-task cross-entropy. When `grad` is non-null it must have
  // params().size() entries and receives the gradient of the total (added).
  // Dropout is active iff `train`; masks derive from `dropout_seed`.
  LossBreakdown Loss(const TrainBatch& batch, std::vector<T>* grad,
                     bool train = false, std::uint64_t dropout_seed = 0) const;

  std::vector<DecodeResult> DecodeGreedy(const std::vector<TokenIds>& sources,
                                         TokenId task, int max_steps) const;
  // Length-normalized beam search. The greedy hypothesis always competes in
  // the final selection.
  std::vector<DecodeResult> DecodeBeam(const std::vector<TokenIds>& sources,
                                       TokenId task, int beam_width,
                                       int max_steps) const;

 private:
  struct Layout;
  struct Cache;
  struct Hypothesis;
  struct Memory;

  void EncodeForward(const std::vector<TokenIds>& sources, Cache& cache) const;
  void DecodeForward(const std::vector<int>& row_source,
                     const std::vector<TokenIds>& inputs, Cache& cache) const;
  void Backward(Cache& cache, const Mat& d_out, std::vector<T>& grad) const;

  Memory Encode(const std::vector<TokenIds>& sources) const;
  Mat Step(const Memory& memory, std::vector<Hypothesis*>& hyps) const;
  std::vector<DecodeResult> Greedy(const Memory& memory, TokenId task,
                                   int max_steps) const;

  ModelConfig config_;
  ParamSet<T> params_;
  std::shared_ptr<const Layout> layout_;
};

// Cross-entropy over non-kPad gold positions per task, combined with the
// configured weights. `logits[i]` has one row per position of `gold[i]`.
template <typename T>
LossBreakdown ComputeLoss(
    const std::vector<typename Transformer<T>::Mat>& logits_amr,
    const std::vector<TokenIds>& gold_amr,
    const std::vector<typename Transformer<T>::Mat>& logits_eng,
    const std::vector<TokenIds>& gold_eng, const ModelConfig& config);

extern template class ParamSet<float>;
extern template class ParamSet<double>;
extern template class Transformer<float>;
extern template class Transformer<double>;

}  // namespace xlamr

#endif  // XLAMR_TRANSFORMER_HPP_
