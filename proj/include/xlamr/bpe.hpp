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

#ifndef XLAMR_BPE_HPP_
#define XLAMR_BPE_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace xlamr {

using TokenId = std::int32_t;
using TokenIds = std::vector<TokenId>;

// Reserved ids shared by the tokenizer and the model.
enum SpecialToken : TokenId {
  kPad = 0,
  kUnk = 1,
  kEos = 2,
  kSep = 3,
  kBosAmr = 4,
  kBosEng = 5,
};
inline constexpr int kNumSpecials = 6;

// Appended to the last symbol of every word.
inline constexpr std::string_view kEndOfWord = "</w>";

class BpeError : public std::runtime_error {
 public:
  enum class Kind { kEmptyCorpus, kInvalidId, kBadFile };
  BpeError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// "(", ")" and ":role" words are never split.
bool IsProtectedWord(std::string_view word);

class BpeVocab {
 public:
  const std::vector<std::pair<std::string, std::string>>& merges() const {
    return merges_;
  }
  std::size_t size() const { return id_to_token_.size(); }
  const std::string& token(TokenId id) const;
  // kUnk when absent.
  TokenId id(std::string_view token) const;
  bool contains(std::string_view token) const;

  // Symbols of one whitespace-free word after applying all merges, with the
  // end-of-word marker folded into the final symbol.
  std::vector<std::string> segment(std::string_view word) const;

  std::string to_text() const;
  static BpeVocab from_text(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static BpeVocab load(const std::filesystem::path& path);

  bool operator==(const BpeVocab& other) const {
    return merges_ == other.merges_ && id_to_token_ == other.id_to_token_;
  }

 private:
  friend BpeVocab TrainBpe(const std::vector<std::string>&, int);
  void add_token(const std::string& token);
  void index_merges();

  std::vector<std::pair<std::string, std::string>> merges_;
  std::map<std::pair<std::string, std::string>, int> merge_rank_;
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, TokenId> token_to_id_;
};

BpeVocab TrainBpe(const std::vector<std::string>& corpus, int merge_count);

// Appends kEos.
TokenIds Encode(std::string_view text, const BpeVocab& vocab);
// Stops at the first kEos; kPad ids are skipped. Throws kInvalidId for ids
// outside the vocabulary.
std::string Decode(const TokenIds& ids, const BpeVocab& vocab);

// encode(target) ++ [SEP] ++ encode(english) ++ [EOS], inner EOS dropped.
TokenIds BuildBilingualInput(std::string_view target_text,
                             std::string_view english_text,
                             const BpeVocab& vocab);

}  // namespace xlamr

#endif  // XLAMR_BPE_HPP_
