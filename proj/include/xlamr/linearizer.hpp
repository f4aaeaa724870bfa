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

#ifndef XLAMR_LINEARIZER_HPP_
#define XLAMR_LINEARIZER_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xlamr/amr_graph.hpp"

namespace xlamr {

// Variable-free bracketed token sequence, e.g.
//   ( want-01 :ARG0 ( boy ) :ARG1 ( go-02 :ARG0 ( boy ) ) )
// Quoted constants keep their quotes and form a single token.
struct LinearSeq {
  std::vector<std::string> tokens;

  std::string str() const;
  bool operator==(const LinearSeq&) const = default;
};

// Splits on whitespace, keeping double-quoted literals as one token.
std::vector<std::string> SplitLinear(std::string_view text);

inline constexpr std::string_view kEmptyConcept = "amr-empty";

// Name-string -> wiki value, learned from :wiki annotations.
class WikiDictionary {
 public:
  void add(const std::string& name, const std::string& wiki, long count = 1);
  // nullptr when the name has never been seen.
  const std::string* lookup(const std::string& name) const;
  const std::map<std::string, std::string>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  void save(const std::filesystem::path& path) const;
  static WikiDictionary load(const std::filesystem::path& path);
  std::string to_text() const;
  static WikiDictionary from_text(std::string_view text);

 private:
  void refresh(const std::string& name);

  std::map<std::string, std::string> entries_;
  std::map<std::pair<std::string, std::string>, long> counts_;
};

class LinearizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

LinearSeq Preprocess(const AmrGraph& graph);
LinearSeq Repair(const std::vector<std::string>& tokens);
// Throws LinearizeError if the parentheses are unbalanced.
AmrGraph Restore(const LinearSeq& seq, const WikiDictionary& wiki);
WikiDictionary BuildWikiDict(const std::vector<AmrGraph>& training);

}  // namespace xlamr

#endif  // XLAMR_LINEARIZER_HPP_
