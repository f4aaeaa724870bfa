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

#ifndef XLAMR_TESTS_SUPPORT_TINY_MODEL_HPP_
#define XLAMR_TESTS_SUPPORT_TINY_MODEL_HPP_

#include "xlamr/rng.hpp"
#include "xlamr/transformer.hpp"

namespace xlamr::testing {

inline ModelConfig TinyConfig() {
  ModelConfig c;
  c.layers = 1;
  c.d_model = 8;
  c.d_ff = 32;
  c.heads = 2;
  c.dropout = 0.0;
  c.vocab_size = 16;
  c.max_len = 32;
  c.init_seed = 3;
  return c;
}

inline TokenIds RandomIds(Rng& rng, int len, int vocab) {
  TokenIds ids;
  for (int i = 0; i < len; ++i) {
    ids.push_back(static_cast<TokenId>(kNumSpecials + rng.below(vocab - kNumSpecials)));
  }
  return ids;
}

// Two sources and three decoder rows covering both tasks.
inline TrainBatch TinyBatch(Rng& rng, int vocab) {
  TrainBatch b;
  b.sources = {RandomIds(rng, 5, vocab), RandomIds(rng, 3, vocab)};
  b.sources[0].push_back(kSep);
  b.sources[0].push_back(kEos);
  for (int s = 0; s < 2; ++s) {
    TokenIds amr = RandomIds(rng, 4 + s, vocab);
    amr.push_back(kEos);
    b.rows.push_back({s, kBosAmr, amr});
  }
  TokenIds eng = RandomIds(rng, 3, vocab);
  eng.push_back(kEos);
  b.rows.push_back({0, kBosEng, eng});
  return b;
}

}  // namespace xlamr::testing

#endif  // XLAMR_TESTS_SUPPORT_TINY_MODEL_HPP_
