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

#include <cmath>

#include "doctest.h"
#include "support/grad_check.hpp"
#include "support/tiny_model.hpp"
#include "xlamr/transformer.hpp"

using namespace xlamr;
using testing::TinyBatch;
using testing::TinyConfig;

namespace {

using MatD = Transformer<double>::Mat;

double MaxAbsDiff(const MatD& a, const MatD& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("config validation") {
  ModelConfig c = TinyConfig();
  CHECK_NOTHROW(c.validate());
  c.heads = 3;
  CHECK_THROWS_AS(c.validate(), ModelError);
  c = TinyConfig();
  c.vocab_size = 4;
  CHECK_THROWS_AS(Transformer<float>{c}, ModelError);
}

TEST_CASE("logits shape") {
  ModelConfig c = TinyConfig();
  c.vocab_size = 11;
  Transformer<float> m(c);
  auto out = m.Forward({{6, 7, 8}}, {{kBosAmr, 6}});
  REQUIRE(out.size() == 1);
  CHECK(out[0].rows() == 2);
  CHECK(out[0].cols() == 11);
  CHECK_THROWS_AS(m.Forward({{6}}, {}), ModelError);
  CHECK_THROWS_AS(m.Forward({{6, 99}}, {{kBosAmr}}), ModelError);
}

TEST_CASE("position overflow") {
  ModelConfig c = TinyConfig();
  c.max_len = 4;
  Transformer<float> m(c);
  try {
    m.Forward({{6, 7, 8, 9, 10}}, {{kBosAmr}});
    FAIL("expected overflow");
  } catch (const ModelError& e) {
    CHECK(e.kind() == ModelError::Kind::kPositionOverflow);
  }
}

TEST_CASE("forward is deterministic and the task token matters") {
  Transformer<double> m(TinyConfig());
  auto a = m.Forward({{6, 7, 8}}, {{kBosAmr, 9}});
  auto b = m.Forward({{6, 7, 8}}, {{kBosAmr, 9}});
  CHECK(a[0] == b[0]);
  auto e = m.Forward({{6, 7, 8}}, {{kBosEng, 9}});
  CHECK(MaxAbsDiff(a[0].topRows(1), e[0].topRows(1)) > 1e-6);
}

TEST_CASE("causality") {
  Transformer<double> m(TinyConfig());
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    TokenIds src = testing::RandomIds(rng, 4, 16);
    TokenIds tgt = testing::RandomIds(rng, 6, 16);
    tgt[0] = kBosAmr;
    const int t = static_cast<int>(rng.below(5));
    TokenIds changed = tgt;
    for (std::size_t j = static_cast<std::size_t>(t) + 1; j < changed.size(); ++j) {
      changed[j] = static_cast<TokenId>(kNumSpecials + rng.below(10));
    }
    auto a = m.Forward({src}, {tgt});
    auto b = m.Forward({src}, {changed});
    CHECK(MaxAbsDiff(a[0].topRows(t + 1), b[0].topRows(t + 1)) == 0.0);
  }
}

TEST_CASE("padding invariance") {
  Transformer<float> m([] {
    ModelConfig c = TinyConfig();
    return c;
  }());
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    TokenIds src = testing::RandomIds(rng, 5, 16);
    TokenIds tgt = testing::RandomIds(rng, 4, 16);
    tgt[0] = kBosAmr;
    TokenIds padded = src;
    padded.insert(padded.end(), 1 + rng.below(6), kPad);
    TokenIds padded_tgt = tgt;
    padded_tgt.push_back(kPad);
    auto a = m.Forward({src}, {tgt});
    auto b = m.Forward({padded}, {padded_tgt});
    CHECK((a[0] - b[0].topRows(tgt.size())).cwiseAbs().maxCoeff() <= 1e-6f);
    CHECK(b[0].row(static_cast<Eigen::Index>(tgt.size())).isZero());
  }
}

TEST_CASE("loss arithmetic") {
  ModelConfig c = TinyConfig();
  using Mat = Transformer<double>::Mat;
  // Uniform logits give ln(V) per task.
  std::vector<Mat> la{Mat::Zero(3, c.vocab_size)};
  std::vector<Mat> le{Mat::Zero(2, c.vocab_size)};
  LossBreakdown l = ComputeLoss<double>(la, {{6, 7, kEos}}, le, {{8, kPad}}, c);
  CHECK(l.loss_amr == doctest::Approx(std::log(16.0)).epsilon(1e-12));
  CHECK(l.loss_eng == doctest::Approx(std::log(16.0)).epsilon(1e-12));
  CHECK(l.tokens_eng == 1);
  CHECK(l.total == doctest::Approx(1.5 * std::log(16.0)).epsilon(1e-12));
  c.loss_weight_eng = 0.0;
  CHECK(ComputeLoss<double>(la, {{6, 7, kEos}}, le, {{8, kPad}}, c).total == l.loss_amr);
}

TEST_CASE("fused loss matches the logits path and the weighted total") {
  Transformer<double> m(TinyConfig());
  Rng rng(12);
  TrainBatch b = TinyBatch(rng, 16);
  LossBreakdown fused = m.Loss(b, nullptr);
  std::vector<MatD> la, le;
  std::vector<TokenIds> ga, ge;
  for (const auto& row : b.rows) {
    TokenIds prefix{row.bos};
    prefix.insert(prefix.end(), row.gold.begin(), row.gold.end() - 1);
    MatD logits = m.Forward({b.sources[static_cast<std::size_t>(row.source)]}, {prefix})[0];
    (row.bos == kBosEng ? le : la).push_back(logits);
    (row.bos == kBosEng ? ge : ga).push_back(row.gold);
  }
  LossBreakdown split = ComputeLoss<double>(la, ga, le, ge, m.config());
  CHECK(fused.loss_amr == doctest::Approx(split.loss_amr).epsilon(1e-12));
  CHECK(fused.loss_eng == doctest::Approx(split.loss_eng).epsilon(1e-12));
  CHECK(std::abs(fused.total - (fused.loss_amr + 0.5 * fused.loss_eng)) <= 1e-7);
}

TEST_CASE("gradient check") {
  Transformer<double> m(TinyConfig());
  Rng rng(1);
  const testing::GradCheck g = testing::CheckGradients(m, TinyBatch(rng, 16), false);
  CHECK(g.agreement == 1.0);
  CHECK(g.worst_relative <= 1e-4);
}

TEST_CASE("gradient check with dropout and label smoothing") {
  ModelConfig c = TinyConfig();
  c.dropout = 0.2;
  c.label_smoothing = 0.1;
  Transformer<double> m(c);
  Rng rng(4);
  const testing::GradCheck g = testing::CheckGradients(m, TinyBatch(rng, 16), true);
  CHECK(g.agreement == 1.0);
  CHECK(g.worst_relative <= 1e-4);
}

TEST_CASE("the decoder is shared by both tasks") {
  Transformer<double> m(TinyConfig());
  const TokenIds src{6, 7, 8};
  auto amr = m.Forward({src}, {{kBosAmr, 9}})[0];
  auto eng = m.Forward({src}, {{kBosEng, 9}})[0];
  for (const auto& p : m.params().info()) {
    if (p.name.rfind("dec.0.ff1.w", 0) == 0) {
      auto w = m.params().view(static_cast<std::size_t>(&p - m.params().info().data()));
      w *= 1.5;
    }
  }
  CHECK(MaxAbsDiff(amr, m.Forward({src}, {{kBosAmr, 9}})[0]) > 1e-9);
  CHECK(MaxAbsDiff(eng, m.Forward({src}, {{kBosEng, 9}})[0]) > 1e-9);
  int decoders = 0;
  for (const auto& p : m.params().info()) decoders += p.name == "dec.ln.g";
  CHECK(decoders == 1);
}

TEST_CASE("incremental decoding matches the full forward pass") {
  Transformer<double> m(TinyConfig());
  Rng rng(5);
  std::vector<TokenIds> srcs;
  for (int i = 0; i < 6; ++i) srcs.push_back(testing::RandomIds(rng, 2 + i, 16));
  auto out = m.DecodeGreedy(srcs, kBosAmr, 10);
  for (std::size_t i = 0; i < srcs.size(); ++i) {
    TokenIds prefix{kBosAmr};
    prefix.insert(prefix.end(), out[i].ids.begin(), out[i].ids.end());
    auto logits = m.Forward({srcs[i]}, {prefix})[0];
    double lp = 0.0;
    for (std::size_t t = 0; t < out[i].ids.size() + (out[i].truncated ? 0 : 1); ++t) {
      const TokenId next = t < out[i].ids.size() ? out[i].ids[t] : kEos;
      Eigen::Index arg;
      logits.row(static_cast<Eigen::Index>(t)).maxCoeff(&arg);
      CHECK(arg == next);
      const auto row = logits.row(static_cast<Eigen::Index>(t));
      lp += row(next) - (std::log((row.array() - row.maxCoeff()).exp().sum()) + row.maxCoeff());
    }
    CHECK(out[i].log_prob == doctest::Approx(lp).epsilon(1e-9));
  }
}

TEST_CASE("max_steps zero yields an empty truncated output") {
  Transformer<float> m(TinyConfig());
  auto g = m.DecodeGreedy({{6, 7}}, kBosAmr, 0);
  CHECK(g[0].ids.empty());
  CHECK(g[0].truncated);
  auto b = m.DecodeBeam({{6, 7}}, kBosAmr, 3, 0);
  CHECK(b[0].ids.empty());
  CHECK(b[0].truncated);
}

TEST_CASE("beam width 1 equals greedy and wider beams dominate") {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    ModelConfig c = TinyConfig();
    c.init_seed = static_cast<std::uint64_t>(trial);
    Transformer<float> m(c);
    TokenIds src = testing::RandomIds(rng, 1 + static_cast<int>(rng.below(6)), 16);
    const TokenId task = trial % 2 ? kBosEng : kBosAmr;
    auto g = m.DecodeGreedy({src}, task, 12)[0];
    auto b1 = m.DecodeBeam({src}, task, 1, 12)[0];
    CHECK(b1.ids == g.ids);
    CHECK(b1.truncated == g.truncated);
    auto b4 = m.DecodeBeam({src}, task, 4, 12)[0];
    CHECK(b4.score() >= g.score());
  }
}
