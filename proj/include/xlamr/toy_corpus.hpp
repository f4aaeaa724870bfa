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

#ifndef XLAMR_TOY_CORPUS_HPP_
#define XLAMR_TOY_CORPUS_HPP_

#include <cstdint>
#include <vector>

#include "xlamr/corpus.hpp"
#include "xlamr/translator.hpp"

namespace xlamr {

// Word map into the toy target language. Several English synonyms share a
// target word, so the target side alone is ambiguous.
MockLexicon ToyLexicon();

// `count` distinct templated sentences with gold graphs and lexicon
// translations, ids "toy-00001"... Same arguments, same corpus.
std::vector<ParallelExample> GenerateToyCorpus(int count, std::uint64_t seed,
                                               const std::string& lang = "de");

}  // namespace xlamr

#endif  // XLAMR_TOY_CORPUS_HPP_
