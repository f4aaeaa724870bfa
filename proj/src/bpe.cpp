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

#include "xlamr/bpe.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <set>
#include <sstream>

#include "xlamr/io_util.hpp"

namespace xlamr {

namespace {

constexpr const char* kSpecialNames[kNumSpecials] = {
    "<pad>", "<unk>", "</s>", "<sep>", "<amr>", "<eng>"};

std::vector<std::string_view> SplitWords(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) words.push_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

// Splits into UTF-8 code points; malformed bytes become single symbols.
std::vector<std::string> Utf8Chars(std::string_view word) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < word.size()) {
    auto c = static_cast<unsigned char>(word[i]);
    std::size_t len = 1;
    if (c >= 0xF0) len = 4;
    else if (c >= 0xE0) len = 3;
    else if (c >= 0xC0) len = 2;
    len = std::min(len, word.size() - i);
    out.emplace_back(word.substr(i, len));
    i += len;
  }
  return out;
}

std::vector<std::string> InitialSymbols(std::string_view word) {
  std::vector<std::string> s = Utf8Chars(word);
  s.emplace_back(kEndOfWord);
  return s;
}

bool EndsWithMarker(const std::string& s) {
  return s.size() >= kEndOfWord.size() &&
         s.compare(s.size() - kEndOfWord.size(), kEndOfWord.size(), kEndOfWord) == 0;
}

void FoldMarker(std::vector<std::string>& symbols) {
  if (symbols.size() > 1 && symbols.back() == kEndOfWord) {
    symbols.pop_back();
    symbols.back() += kEndOfWord;
  }
}

void MergeInPlace(std::vector<std::string>& symbols, const std::string& left,
                  const std::string& right) {
  std::vector<std::string> out;
  out.reserve(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
      out.push_back(left + right);
      ++i;
    } else {
      out.push_back(std::move(symbols[i]));
    }
  }
  symbols = std::move(out);
}

}  // namespace

bool IsProtectedWord(std::string_view word) {
  return word == "(" || word == ")" || (word.size() > 1 && word[0] == ':');
}

const std::string& BpeVocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
    throw BpeError(BpeError::Kind::kInvalidId,
                   "token id " + std::to_string(id) + " out of range");
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

TokenId BpeVocab::id(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  return it == token_to_id_.end() ? kUnk : it->second;
}

bool BpeVocab::contains(std::string_view token) const {
  return token_to_id_.count(std::string(token)) > 0;
}

void BpeVocab::add_token(const std::string& token) {
  if (token_to_id_.count(token)) return;
  token_to_id_.emplace(token, static_cast<TokenId>(id_to_token_.size()));
  id_to_token_.push_back(token);
}

void BpeVocab::index_merges() {
  merge_rank_.clear();
  for (std::size_t i = 0; i < merges_.size(); ++i) {
    merge_rank_.emplace(merges_[i], static_cast<int>(i));
  }
}

std::vector<std::string> BpeVocab::segment(std::string_view word) const {
  if (IsProtectedWord(word)) return {std::string(word) + std::string(kEndOfWord)};
  std::vector<std::string> symbols = InitialSymbols(word);
  while (symbols.size() > 1) {
    int best = std::numeric_limits<int>::max();
    std::size_t at = 0;
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = merge_rank_.find({symbols[i], symbols[i + 1]});
      if (it != merge_rank_.end() && it->second < best) {
        best = it->second;
        at = i;
      }
    }
    if (best == std::numeric_limits<int>::max()) break;
    const auto pair = std::make_pair(symbols[at], symbols[at + 1]);
    MergeInPlace(symbols, pair.first, pair.second);
  }
  FoldMarker(symbols);
  return symbols;
}

BpeVocab TrainBpe(const std::vector<std::string>& corpus, int merge_count) {
  std::map<std::string, long> word_freq;
  std::set<std::string> protected_words;
  for (const auto& line : corpus) {
    for (auto w : SplitWords(line)) {
      if (IsProtectedWord(w)) {
        protected_words.emplace(w);
      } else {
        ++word_freq[std::string(w)];
      }
    }
  }
  if (word_freq.empty() && protected_words.empty()) {
    throw BpeError(BpeError::Kind::kEmptyCorpus, "BPE corpus has no words");
  }

  std::vector<std::pair<std::vector<std::string>, long>> words;
  std::set<std::string> alphabet;
  for (const auto& [w, f] : word_freq) {
    words.emplace_back(InitialSymbols(w), f);
    for (auto& c : Utf8Chars(w)) alphabet.insert(c);
  }

  BpeVocab vocab;
  for (int i = 0; i < merge_count; ++i) {
    std::map<std::pair<std::string, std::string>, long> pairs;
    for (const auto& [syms, f] : words) {
      for (std::size_t k = 0; k + 1 < syms.size(); ++k) {
        pairs[{syms[k], syms[k + 1]}] += f;
      }
    }
    if (pairs.empty()) break;
    // Strict ">" over lexicographic iteration keeps the smallest pair on ties.
    auto best = pairs.begin();
    for (auto it = pairs.begin(); it != pairs.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    const auto merged = best->first;
    vocab.merges_.push_back(merged);
    for (auto& [syms, f] : words) MergeInPlace(syms, merged.first, merged.second);
  }
  vocab.index_merges();

  for (const char* s : kSpecialNames) vocab.add_token(s);
  const std::string eow(kEndOfWord);
  for (const auto& c : alphabet) {
    vocab.add_token(c);
    vocab.add_token(c + eow);
  }
  for (const auto& w : protected_words) vocab.add_token(w + eow);
  for (const auto& [l, r] : vocab.merges_) {
    std::string m = l + r;
    vocab.add_token(m);
    if (!EndsWithMarker(m)) vocab.add_token(m + eow);
  }
  return vocab;
}

TokenIds Encode(std::string_view text, const BpeVocab& vocab) {
  TokenIds ids;
  for (auto w : SplitWords(text)) {
    for (const auto& sym : vocab.segment(w)) ids.push_back(vocab.id(sym));
  }
  ids.push_back(kEos);
  return ids;
}

std::string Decode(const TokenIds& ids, const BpeVocab& vocab) {
  std::string out;
  for (TokenId id : ids) {
    const std::string& tok = vocab.token(id);
    if (id == kEos) break;
    if (id == kPad) continue;
    if (id < kNumSpecials) {
      out += tok;
      out.push_back(' ');
    } else if (EndsWithMarker(tok)) {
      out.append(tok, 0, tok.size() - kEndOfWord.size());
      out.push_back(' ');
    } else {
      out += tok;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

TokenIds BuildBilingualInput(std::string_view target_text,
                             std::string_view english_text,
                             const BpeVocab& vocab) {
  TokenIds ids = Encode(target_text, vocab);
  ids.back() = kSep;
  TokenIds eng = Encode(english_text, vocab);
  ids.insert(ids.end(), eng.begin(), eng.end());
  return ids;
}

std::string BpeVocab::to_text() const {
  std::string out = "#merges " + std::to_string(merges_.size()) + "\n";
  for (const auto& [l, r] : merges_) out += l + " " + r + "\n";
  for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
    out += id_to_token_[i] + "\t" + std::to_string(i) + "\n";
  }
  return out;
}

BpeVocab BpeVocab::from_text(std::string_view text) {
  auto bad = [](const std::string& msg) {
    return BpeError(BpeError::Kind::kBadFile, "vocabulary file: " + msg);
  };
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line.rfind("#merges ", 0) != 0) {
    throw bad("missing '#merges N' header");
  }
  long n = 0;
  try {
    n = std::stol(line.substr(8));
  } catch (const std::exception&) {
    throw bad("bad merge count");
  }
  BpeVocab v;
  for (long i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw bad("truncated merge list");
    auto sp = line.find(' ');
    if (sp == std::string::npos) throw bad("bad merge line '" + line + "'");
    v.merges_.emplace_back(line.substr(0, sp), line.substr(sp + 1));
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw bad("bad token line '" + line + "'");
    std::string tok = line.substr(0, tab);
    if (std::to_string(v.id_to_token_.size()) != line.substr(tab + 1)) {
      throw bad("token ids must be consecutive, at '" + line + "'");
    }
    if (v.token_to_id_.count(tok)) throw bad("duplicate token '" + tok + "'");
    v.add_token(tok);
  }
  if (v.id_to_token_.size() < kNumSpecials) throw bad("missing special tokens");
  for (int i = 0; i < kNumSpecials; ++i) {
    if (v.id_to_token_[i] != kSpecialNames[i]) throw bad("special tokens out of place");
  }
  v.index_merges();
  return v;
}

void BpeVocab::save(const std::filesystem::path& path) const {
  WriteFileAtomic(path, to_text());
}

BpeVocab BpeVocab::load(const std::filesystem::path& path) {
  return from_text(ReadFile(path));
}

}  // namespace xlamr
