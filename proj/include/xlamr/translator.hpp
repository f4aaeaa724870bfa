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

#ifndef XLAMR_TRANSLATOR_HPP_
#define XLAMR_TRANSLATOR_HPP_

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "xlamr/corpus.hpp"

namespace xlamr {

class TranslatorFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Translator {
 public:
  virtual ~Translator() = default;
  // `id` names the sentence for table-backed translators.
  virtual std::string translate(const std::string& id, const std::string& text,
                                const std::string& from, const std::string& to) const = 0;
};

// Word-by-word dictionary. English -> target uses the map directly; the
// reverse direction picks the smallest English word among collisions.
// Unknown words pass through; words mapped to "" are dropped.
class MockLexicon : public Translator {
 public:
  explicit MockLexicon(std::map<std::string, std::string> english_to_target);

  std::string translate(const std::string& id, const std::string& text,
                        const std::string& from, const std::string& to) const override;

  const std::map<std::string, std::string>& entries() const { return forward_; }
  std::string to_text() const;
  static MockLexicon from_text(std::string_view text);
  static MockLexicon load(const std::filesystem::path& path);

 private:
  std::map<std::string, std::string> forward_;
  std::map<std::string, std::string> backward_;
};

// Pre-translated sentences keyed by id ("id<TAB>text" lines).
class ExternalFile : public Translator {
 public:
  explicit ExternalFile(std::map<std::string, std::string> table);

  std::string translate(const std::string& id, const std::string& text,
                        const std::string& from, const std::string& to) const override;

  static ExternalFile from_text(std::string_view text);
  static ExternalFile load(const std::filesystem::path& path);

 private:
  std::map<std::string, std::string> table_;
};

// Fills `target` by translating the English side and re-derives the AMR
// sequence from the gold graph.
std::vector<ParallelExample> SynthesizeSilver(const std::vector<ParallelExample>& examples,
                                              const Translator& translator,
                                              const std::string& lang);

}  // namespace xlamr

#endif  // XLAMR_TRANSLATOR_HPP_
