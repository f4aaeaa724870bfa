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

#include "xlamr/translator.hpp"

#include <sstream>

#include "xlamr/io_util.hpp"

namespace xlamr {

namespace {

std::map<std::string, std::string> ReadTable(std::string_view text, const char* what) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw TranslatorFailure(std::string(what) + " line " + std::to_string(n) +
                              ": expected two tab-separated columns");
    }
    out[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return out;
}

}  // namespace

MockLexicon::MockLexicon(std::map<std::string, std::string> english_to_target)
    : forward_(std::move(english_to_target)) {
  for (const auto& [en, tgt] : forward_) {
    if (!tgt.empty()) backward_.emplace(tgt, en);
  }
}

std::string MockLexicon::translate(const std::string&, const std::string& text,
                                   const std::string& from, const std::string&) const {
  const auto& table = from == "en" ? forward_ : backward_;
  std::istringstream in(text);
  std::string word, out;
  while (in >> word) {
    auto it = table.find(word);
    const std::string& mapped = it == table.end() ? word : it->second;
    if (mapped.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += mapped;
  }
  return out;
}

std::string MockLexicon::to_text() const {
  std::string out;
  for (const auto& [en, tgt] : forward_) out += en + "\t" + tgt + "\n";
  return out;
}

MockLexicon MockLexicon::from_text(std::string_view text) {
  return MockLexicon(ReadTable(text, "lexicon"));
}

MockLexicon MockLexicon::load(const std::filesystem::path& path) {
  return from_text(ReadFile(path));
}

ExternalFile::ExternalFile(std::map<std::string, std::string> table) : table_(std::move(table)) {}

std::string ExternalFile::translate(const std::string& id, const std::string&,
                                    const std::string&, const std::string&) const {
  auto it = table_.find(id);
  if (it == table_.end()) throw TranslatorFailure("no translation for id '" + id + "'");
  return it->second;
}

ExternalFile ExternalFile::from_text(std::string_view text) {
  return ExternalFile(ReadTable(text, "translation table"));
}

ExternalFile ExternalFile::load(const std::filesystem::path& path) {
  return from_text(ReadFile(path));
}

std::vector<ParallelExample> SynthesizeSilver(const std::vector<ParallelExample>& examples,
                                              const Translator& translator,
                                              const std::string& lang) {
  std::vector<ParallelExample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    ParallelExample s = ex;
    s.target = translator.translate(ex.id, ex.english, "en", lang);
    s.lang = lang;
    if (s.gold) s.linearized = Preprocess(*s.gold);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace xlamr
