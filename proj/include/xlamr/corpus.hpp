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

#ifndef XLAMR_CORPUS_HPP_
#define XLAMR_CORPUS_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xlamr/amr_graph.hpp"
#include "xlamr/linearizer.hpp"

namespace xlamr {

struct ParallelExample {
  std::string id;
  std::string english;
  std::string target;
  std::string lang = "en";
  std::optional<AmrGraph> gold;
  std::optional<LinearSeq> linearized;
};

struct BlockError {
  std::string id;
  int line = 0;  // 1-based line of the block start
  std::string message;
};

struct CorpusReadResult {
  std::vector<ParallelExample> examples;
  std::vector<BlockError> errors;
  // Set when the input held no blocks at all.
  bool empty = false;
};

// Block format, blocks separated by blank lines:
//   # ::id <id>
//   # ::snt <english sentence>
//   # ::tgt <target-language sentence>   (optional)
//   # ::lang <tag>                        (optional)
//   <PENMAN graph>
// Bad blocks are reported in `errors` and skipped. Blocks without an id
// are named by their ordinal ("#3"). Throws IoError if the file is missing.
CorpusReadResult ReadAmrCorpus(const std::filesystem::path& path);
CorpusReadResult ParseAmrCorpus(std::string_view text, bool require_graph = true);

std::string FormatAmrCorpus(const std::vector<ParallelExample>& examples);

// Input for parsing: either a block file (the ::tgt line, or ::snt when
// absent, is the sentence) or plain text with one sentence per line, ids
// "1", "2", ...
std::vector<ParallelExample> ReadSentences(const std::filesystem::path& path);

}  // namespace xlamr

#endif  // XLAMR_CORPUS_HPP_
