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

#include "xlamr/corpus.hpp"

#include <sstream>

#include "xlamr/io_util.hpp"

namespace xlamr {

namespace {

std::string Trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

struct RawBlock {
  int line = 0;
  std::vector<std::string> lines;
};

std::vector<RawBlock> SplitBlocks(std::string_view text) {
  std::vector<RawBlock> blocks;
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  RawBlock cur;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) {
      if (!cur.lines.empty()) blocks.push_back(std::move(cur));
      cur = RawBlock();
      continue;
    }
    if (cur.lines.empty()) cur.line = n;
    cur.lines.push_back(line);
  }
  if (!cur.lines.empty()) blocks.push_back(std::move(cur));
  return blocks;
}

// Reads "# ::key value" annotations; returns false for other comments.
bool ReadAnnotation(const std::string& line, std::string& key, std::string& value) {
  std::string t = Trim(line);
  if (t.rfind("# ::", 0) != 0) return false;
  t = t.substr(4);
  const auto sp = t.find(' ');
  key = t.substr(0, sp);
  value = sp == std::string::npos ? "" : Trim(t.substr(sp + 1));
  return true;
}

}  // namespace

CorpusReadResult ParseAmrCorpus(std::string_view text, bool require_graph) {
  CorpusReadResult result;
  const auto blocks = SplitBlocks(text);
  result.empty = blocks.empty();
  int ordinal = 0;
  for (const auto& block : blocks) {
    ++ordinal;
    ParallelExample ex;
    ex.id = "#" + std::to_string(ordinal);
    bool has_snt = false;
    bool has_tgt = false;
    std::string graph_text;
    for (const auto& line : block.lines) {
      std::string key, value;
      if (ReadAnnotation(line, key, value)) {
        if (key == "id") ex.id = value;
        if (key == "snt") {
          ex.english = value;
          has_snt = true;
        }
        if (key == "tgt") {
          ex.target = value;
          has_tgt = true;
        }
        if (key == "lang") ex.lang = value;
      } else if (Trim(line).rfind('#', 0) != 0) {
        graph_text += line;
        graph_text.push_back('\n');
      }
    }
    if (!has_snt) {
      result.errors.push_back({ex.id, block.line, "block has no '# ::snt' line"});
      continue;
    }
    if (!has_tgt) ex.target.clear();
    if (Trim(graph_text).empty()) {
      if (require_graph) {
        result.errors.push_back({ex.id, block.line, "block has no graph"});
        continue;
      }
    } else {
      try {
        ex.gold = ParsePenman(graph_text);
        ex.linearized = Preprocess(*ex.gold);
      } catch (const AmrError& e) {
        result.errors.push_back({ex.id, block.line, e.what()});
        continue;
      }
    }
    result.examples.push_back(std::move(ex));
  }
  return result;
}

CorpusReadResult ReadAmrCorpus(const std::filesystem::path& path) {
  return ParseAmrCorpus(ReadFile(path));
}

std::string FormatAmrCorpus(const std::vector<ParallelExample>& examples) {
  std::string out;
  for (const auto& ex : examples) {
    out += "# ::id " + ex.id + "\n";
    out += "# ::snt " + ex.english + "\n";
    if (!ex.target.empty()) out += "# ::tgt " + ex.target + "\n";
    if (!ex.lang.empty() && ex.lang != "en") out += "# ::lang " + ex.lang + "\n";
    if (ex.gold) out += SerializePenman(*ex.gold) + "\n";
    out += "\n";
  }
  return out;
}

std::vector<ParallelExample> ReadSentences(const std::filesystem::path& path) {
  const std::string text = ReadFile(path);
  if (Trim(text).rfind("# ::", 0) == 0) {
    CorpusReadResult r = ParseAmrCorpus(text, false);
    for (auto& ex : r.examples) {
      if (ex.target.empty()) std::swap(ex.target, ex.english);
    }
    return std::move(r.examples);
  }
  std::vector<ParallelExample> out;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    std::string t = Trim(line);
    if (t.empty()) continue;
    ParallelExample ex;
    ex.id = std::to_string(++n);
    ex.target = t;
    ex.lang.clear();
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace xlamr
