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

#include "xlamr/linearizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <unordered_map>
#include <unordered_set>
#include <variant>

#include "xlamr/io_util.hpp"

namespace xlamr {

std::string LinearSeq::str() const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::vector<std::string> SplitLinear(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    if (text[i] == '"') {
      ++j;
      while (j < text.size() && text[j] != '"') {
        if (text[j] == '\\') ++j;
        ++j;
      }
      j = std::min(j + 1, text.size());
    } else {
      while (j < text.size() &&
             !std::isspace(static_cast<unsigned char>(text[j]))) {
        ++j;
      }
    }
    out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

// ---------------------------------------------------------------------------
// WikiDictionary

void WikiDictionary::add(const std::string& name, const std::string& wiki,
                         long count) {
  counts_[{name, wiki}] += count;
  refresh(name);
}

void WikiDictionary::refresh(const std::string& name) {
  long best = -1;
  std::string best_wiki;
  // Map iteration is lexicographic in wiki, so ">" keeps the smallest on ties.
  for (auto it = counts_.lower_bound({name, std::string()});
       it != counts_.end() && it->first.first == name; ++it) {
    if (it->second > best) {
      best = it->second;
      best_wiki = it->first.second;
    }
  }
  entries_[name] = best_wiki;
}

const std::string* WikiDictionary::lookup(const std::string& name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

std::string WikiDictionary::to_text() const {
  std::string out;
  for (const auto& [name, wiki] : entries_) out += name + "\t" + wiki + "\n";
  return out;
}

WikiDictionary WikiDictionary::from_text(std::string_view text) {
  WikiDictionary dict;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw LinearizeError("wiki dictionary line lacks a tab: " + line);
    }
    dict.add(line.substr(0, tab), line.substr(tab + 1));
  }
  return dict;
}

void WikiDictionary::save(const std::filesystem::path& path) const {
  WriteFileAtomic(path, to_text());
}

WikiDictionary WikiDictionary::load(const std::filesystem::path& path) {
  return from_text(ReadFile(path));
}

// ---------------------------------------------------------------------------

namespace {

bool IsRoleToken(const std::string& t) { return t.size() > 1 && t[0] == ':'; }

std::string QuoteToken(const std::string& value) {
  std::string out = "\"";
  for (char c : value) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::pair<std::string, bool> UnquoteToken(const std::string& token) {
  if (token.size() >= 2 && token.front() == '"' && token.back() == '"') {
    std::string out;
    for (std::size_t i = 1; i + 1 < token.size(); ++i) {
      if (token[i] == '\\' && i + 2 < token.size()) ++i;
      out.push_back(token[i]);
    }
    return {out, true};
  }
  return {token, false};
}

// Well-formed tree recovered from a token sequence.
struct TreeNode;
struct TreeChild {
  std::string role;
  std::variant<std::unique_ptr<TreeNode>, std::string> value;
};
struct TreeNode {
  std::string concept_label;
  std::vector<TreeChild> children;
};

// Raw bracket structure before normalization.
struct RawGroup;
using RawItem = std::variant<std::string, std::unique_ptr<RawGroup>>;
struct RawGroup {
  std::vector<RawItem> items;
};

std::vector<std::string> Balance(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  int depth = 0;
  for (const auto& t : tokens) {
    if (t == ")") {
      if (depth == 0) continue;
      --depth;
    } else if (t == "(") {
      ++depth;
    }
    out.push_back(t);
  }
  out.insert(out.end(), static_cast<std::size_t>(depth), ")");
  return out;
}

// `tokens` must be balanced; pos points at "(".
std::unique_ptr<RawGroup> ReadGroup(const std::vector<std::string>& tokens,
                                    std::size_t& pos) {
  auto group = std::make_unique<RawGroup>();
  ++pos;
  while (tokens[pos] != ")") {
    if (tokens[pos] == "(") {
      group->items.emplace_back(ReadGroup(tokens, pos));
    } else {
      group->items.emplace_back(tokens[pos++]);
    }
  }
  ++pos;
  return group;
}

// Returns nullptr for groups that carry nothing.
std::unique_ptr<TreeNode> Normalize(const RawGroup& group) {
  auto node = std::make_unique<TreeNode>();
  std::size_t i = 0;
  const auto& items = group.items;
  if (!items.empty() && std::holds_alternative<std::string>(items[0]) &&
      !IsRoleToken(std::get<std::string>(items[0]))) {
    node->concept_label = std::get<std::string>(items[0]);
    i = 1;
  }
  for (; i < items.size(); ++i) {
    if (!std::holds_alternative<std::string>(items[i])) continue;  // no role
    const std::string& tok = std::get<std::string>(items[i]);
    if (!IsRoleToken(tok)) continue;  // stray constant
    if (i + 1 >= items.size()) break;  // dangling role at the end
    const RawItem& next = items[i + 1];
    if (std::holds_alternative<std::string>(next)) {
      const std::string& value = std::get<std::string>(next);
      if (IsRoleToken(value)) continue;  // dangling role before another role
      node->children.push_back({tok, value});
      ++i;
    } else {
      auto child = Normalize(*std::get<std::unique_ptr<RawGroup>>(next));
      ++i;
      if (child) node->children.push_back({tok, std::move(child)});
    }
  }
  if (node->concept_label.empty()) {
    if (node->children.empty()) return nullptr;
    node->concept_label = std::string(kEmptyConcept);
  }
  return node;
}

void Emit(const TreeNode& node, std::vector<std::string>& out) {
  out.push_back("(");
  out.push_back(node.concept_label);
  for (const auto& c : node.children) {
    out.push_back(c.role);
    if (std::holds_alternative<std::string>(c.value)) {
      out.push_back(std::get<std::string>(c.value));
    } else {
      Emit(*std::get<std::unique_ptr<TreeNode>>(c.value), out);
    }
  }
  out.push_back(")");
}

std::unique_ptr<TreeNode> BuildTree(const std::vector<std::string>& tokens) {
  std::vector<std::string> balanced = Balance(tokens);
  std::size_t pos = 0;
  while (pos < balanced.size()) {
    if (balanced[pos] != "(") {
      ++pos;
      continue;
    }
    auto raw = ReadGroup(balanced, pos);
    if (auto node = Normalize(*raw)) return node;
  }
  return nullptr;
}

bool IsBalanced(const std::vector<std::string>& tokens) {
  int depth = 0;
  for (const auto& t : tokens) {
    if (t == "(") ++depth;
    if (t == ")" && --depth < 0) return false;
  }
  return depth == 0 && !tokens.empty();
}

class VariableNamer {
 public:
  std::string Next(const std::string& concept_label) {
    char letter = 'x';
    for (char c : concept_label) {
      if (std::isalpha(static_cast<unsigned char>(c))) {
        letter = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        break;
      }
    }
    std::string base(1, letter);
    int& n = next_[letter];
    ++n;
    return n == 1 ? base : base + std::to_string(n);
  }

 private:
  std::unordered_map<char, int> next_;
};

}  // namespace

LinearSeq Preprocess(const AmrGraph& graph) {
  graph.validate();
  auto plan = TraversalPlan(graph);
  std::unordered_map<std::string, std::vector<const AmrAttribute*>> attrs;
  for (const auto& a : graph.attributes()) {
    if (a.role != "wiki") attrs[a.source].push_back(&a);
  }
  LinearSeq seq;
  auto& out = seq.tokens;
  std::unordered_set<std::string> visited;
  std::function<void(const std::string&)> emit = [&](const std::string& var) {
    visited.insert(var);
    out.push_back("(");
    out.push_back(graph.concept_of(var));
    for (const auto& te : plan[var]) {
      out.push_back(":" + te.role(graph));
      const std::string& child = te.child(graph);
      if (visited.count(child)) {
        out.push_back("(");
        out.push_back(graph.concept_of(child));
        out.push_back(")");
      } else {
        emit(child);
      }
    }
    for (const auto* a : attrs[var]) {
      out.push_back(":" + a->role);
      out.push_back(a->quoted ? QuoteToken(a->value) : a->value);
    }
    out.push_back(")");
  };
  emit(graph.top());
  return seq;
}

LinearSeq Repair(const std::vector<std::string>& tokens) {
  LinearSeq seq;
  if (auto root = BuildTree(tokens)) {
    Emit(*root, seq.tokens);
  } else {
    seq.tokens = {"(", std::string(kEmptyConcept), ")"};
  }
  return seq;
}

AmrGraph Restore(const LinearSeq& seq, const WikiDictionary& wiki) {
  if (!IsBalanced(seq.tokens)) {
    throw LinearizeError("UnbalancedInput: sequence must be repaired first");
  }
  auto root = BuildTree(seq.tokens);
  if (!root) {
    root = std::make_unique<TreeNode>();
    root->concept_label = std::string(kEmptyConcept);
  }

  AmrGraph graph;
  VariableNamer namer;
  std::unordered_map<std::string, std::string> first_with_concept;

  std::function<std::string(const TreeNode&)> build =
      [&](const TreeNode& node) -> std::string {
    if (node.children.empty()) {
      auto it = first_with_concept.find(node.concept_label);
      if (it != first_with_concept.end()) return it->second;
    }
    std::string var = namer.Next(node.concept_label);
    graph.add_instance(var, node.concept_label);
    first_with_concept.emplace(node.concept_label, var);
    for (const auto& c : node.children) {
      std::string role = c.role.substr(1);
      if (std::holds_alternative<std::string>(c.value)) {
        auto [value, quoted] = UnquoteToken(std::get<std::string>(c.value));
        graph.add_attribute(var, role, value, quoted);
      } else {
        std::string child =
            build(*std::get<std::unique_ptr<TreeNode>>(c.value));
        graph.add_edge(var, role, child);
      }
    }
    return var;
  };
  graph.set_top(build(*root));

  std::vector<std::pair<std::string, std::string>> wiki_links;
  for (const auto& e : graph.edges()) {
    if (e.role != "name") continue;
    bool has_wiki = std::any_of(
        graph.attributes().begin(), graph.attributes().end(),
        [&](const AmrAttribute& a) { return a.source == e.source && a.role == "wiki"; });
    if (has_wiki) continue;
    const std::string* value = wiki.lookup(NameString(graph, e.target));
    wiki_links.emplace_back(e.source, value ? *value : "-");
  }
  for (const auto& [var, value] : wiki_links) {
    graph.add_attribute(var, "wiki", value, value != "-");
  }
  graph.validate();
  return graph;
}

WikiDictionary BuildWikiDict(const std::vector<AmrGraph>& training) {
  WikiDictionary dict;
  for (const auto& g : training) {
    for (const auto& a : g.attributes()) {
      if (a.role != "wiki") continue;
      for (const auto& e : g.edges()) {
        if (e.source == a.source && e.role == "name") {
          dict.add(NameString(g, e.target), a.value);
        }
      }
    }
  }
  return dict;
}

}  // namespace xlamr
