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

#include "xlamr/amr_graph.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <unordered_set>

namespace xlamr {

const char* ToString(AmrErrorKind kind) {
  switch (kind) {
    case AmrErrorKind::kEmptyInput: return "EmptyInput";
    case AmrErrorKind::kUnbalancedParens: return "UnbalancedParens";
    case AmrErrorKind::kDuplicateVariableDefinition:
      return "DuplicateVariableDefinition";
    case AmrErrorKind::kUndefinedVariableReference:
      return "UndefinedVariableReference";
    case AmrErrorKind::kUnexpectedToken: return "UnexpectedToken";
    case AmrErrorKind::kInvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

bool AmrGraph::has_variable(std::string_view var) const {
  return index_.count(std::string(var)) > 0;
}

const std::string& AmrGraph::concept_of(std::string_view var) const {
  auto it = index_.find(std::string(var));
  if (it == index_.end()) {
    throw AmrError(AmrErrorKind::kInvariantViolation,
                   "unknown variable '" + std::string(var) + "'");
  }
  return instances_[it->second].concept_label;
}

void AmrGraph::add_instance(std::string var, std::string concept_label) {
  if (index_.count(var)) {
    throw AmrError(AmrErrorKind::kDuplicateVariableDefinition,
                   "variable '" + var + "' defined twice");
  }
  index_.emplace(var, instances_.size());
  instances_.push_back({std::move(var), std::move(concept_label)});
}

bool AmrGraph::add_edge(std::string source, std::string role,
                        std::string target) {
  AmrEdge e{std::move(source), std::move(role), std::move(target)};
  if (std::find(edges_.begin(), edges_.end(), e) != edges_.end()) return false;
  edges_.push_back(std::move(e));
  return true;
}

bool AmrGraph::add_attribute(std::string source, std::string role,
                             std::string value, bool quoted) {
  AmrAttribute a{std::move(source), std::move(role), std::move(value), quoted};
  for (const auto& b : attributes_) {
    if (b.source == a.source && b.role == a.role && b.value == a.value) {
      return false;
    }
  }
  attributes_.push_back(std::move(a));
  return true;
}

void AmrGraph::rename_concept(std::string_view var, std::string concept_label) {
  auto it = index_.find(std::string(var));
  if (it == index_.end()) {
    throw AmrError(AmrErrorKind::kInvariantViolation,
                   "unknown variable '" + std::string(var) + "'");
  }
  instances_[it->second].concept_label = std::move(concept_label);
}

void AmrGraph::validate() const {
  auto fail = [](const std::string& msg) {
    throw AmrError(AmrErrorKind::kInvariantViolation, msg);
  };
  if (instances_.empty()) fail("graph has no instances");
  if (!has_variable(top_)) fail("top '" + top_ + "' is not an instance");
  for (const auto& e : edges_) {
    if (!has_variable(e.source) || !has_variable(e.target)) {
      fail("edge endpoint undefined: " + e.source + " :" + e.role + " " +
           e.target);
    }
  }
  for (const auto& a : attributes_) {
    if (!has_variable(a.source)) fail("attribute source undefined: " + a.source);
  }
  // Plain edges are followed source->target; inverse edges both ways.
  std::unordered_map<std::string, std::vector<std::string>> adj;
  for (const auto& e : edges_) {
    adj[e.source].push_back(e.target);
    if (IsInverseRole(e.role)) adj[e.target].push_back(e.source);
  }
  std::unordered_set<std::string> seen{top_};
  std::vector<std::string> stack{top_};
  while (!stack.empty()) {
    std::string v = std::move(stack.back());
    stack.pop_back();
    for (const auto& w : adj[v]) {
      if (seen.insert(w).second) stack.push_back(w);
    }
  }
  for (const auto& inst : instances_) {
    if (!seen.count(inst.variable)) {
      fail("variable '" + inst.variable + "' unreachable from top");
    }
  }
}

bool IsInverseRole(std::string_view role) {
  return role.size() > 3 && role.substr(role.size() - 3) == "-of" &&
         role != "consist-of";
}

std::string InvertRole(std::string_view role) {
  if (IsInverseRole(role)) return std::string(role.substr(0, role.size() - 3));
  return std::string(role) + "-of";
}

std::string TraversalEdge::role(const AmrGraph& g) const {
  const auto& r = g.edges()[edge_index].role;
  return inverted ? InvertRole(r) : r;
}

std::unordered_map<std::string, std::vector<TraversalEdge>> TraversalPlan(
    const AmrGraph& graph) {
  const auto& edges = graph.edges();
  std::vector<bool> inverted(edges.size(), false);
  std::unordered_set<std::string> reached;

  auto close_from = [&](const std::string& start) {
    std::vector<std::string> stack;
    if (reached.insert(start).second) stack.push_back(start);
    while (!stack.empty()) {
      std::string v = std::move(stack.back());
      stack.pop_back();
      for (std::size_t i = 0; i < edges.size(); ++i) {
        const std::string* next = nullptr;
        if (!inverted[i] && edges[i].source == v) next = &edges[i].target;
        if (inverted[i] && edges[i].target == v) next = &edges[i].source;
        if (next && reached.insert(*next).second) stack.push_back(*next);
      }
    }
  };

  close_from(graph.top());
  bool changed = true;
  while (changed && reached.size() < graph.size()) {
    changed = false;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (reached.count(edges[i].target) && !reached.count(edges[i].source)) {
        inverted[i] = true;
        close_from(edges[i].source);
        changed = true;
        break;
      }
    }
  }
  if (reached.size() < graph.size()) {
    throw AmrError(AmrErrorKind::kInvariantViolation,
                   "graph is not connected to its top");
  }

  std::unordered_map<std::string, std::vector<TraversalEdge>> plan;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& parent = inverted[i] ? edges[i].target : edges[i].source;
    plan[parent].push_back({i, inverted[i]});
  }
  return plan;
}

namespace {

bool IsNameOpRole(const std::string& role) {
  if (role.size() < 3 || role.compare(0, 2, "op") != 0) return false;
  return std::all_of(role.begin() + 2, role.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

}  // namespace

std::string NameString(const AmrGraph& graph, const std::string& name_var) {
  std::vector<std::pair<long, std::string>> ops;
  for (const auto& a : graph.attributes()) {
    if (a.source == name_var && IsNameOpRole(a.role)) {
      ops.emplace_back(std::stol(a.role.substr(2)), a.value);
    }
  }
  std::sort(ops.begin(), ops.end());
  std::string out;
  for (const auto& [idx, v] : ops) {
    if (!out.empty()) out.push_back(' ');
    out += v;
  }
  return out;
}

// ---------------------------------------------------------------------------
// PENMAN reader

namespace {

enum class TokType { kLParen, kRParen, kSlash, kRole, kQuoted, kSymbol };

struct Tok {
  TokType type;
  std::string text;
};

bool IsDelimiter(char c) {
  return c == '(' || c == ')' || c == '/' || c == '"' ||
         std::isspace(static_cast<unsigned char>(c));
}

std::vector<Tok> Lex(std::string_view s) {
  std::vector<Tok> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '(') {
      out.push_back({TokType::kLParen, "("});
      ++i;
    } else if (c == ')') {
      out.push_back({TokType::kRParen, ")"});
      ++i;
    } else if (c == '/') {
      out.push_back({TokType::kSlash, "/"});
      ++i;
    } else if (c == '"') {
      std::string lit;
      ++i;
      bool closed = false;
      while (i < s.size()) {
        if (s[i] == '\\' && i + 1 < s.size()) {
          lit.push_back(s[i + 1]);
          i += 2;
        } else if (s[i] == '"') {
          closed = true;
          ++i;
          break;
        } else {
          lit.push_back(s[i++]);
        }
      }
      if (!closed) {
        throw AmrError(AmrErrorKind::kUnexpectedToken,
                       "unterminated string literal");
      }
      out.push_back({TokType::kQuoted, std::move(lit)});
    } else {
      std::size_t j = i;
      // A role token may contain '/' only if it never starts one.
      while (j < s.size() && !IsDelimiter(s[j])) ++j;
      std::string text(s.substr(i, j - i));
      out.push_back({text[0] == ':' && text.size() > 1 ? TokType::kRole
                                                       : TokType::kSymbol,
                     std::move(text)});
      i = j;
    }
  }
  return out;
}

class PenmanParser {
 public:
  explicit PenmanParser(std::vector<Tok> toks) : toks_(std::move(toks)) {}

  AmrGraph Parse() {
    if (toks_.empty()) {
      throw AmrError(AmrErrorKind::kEmptyInput, "no PENMAN expression");
    }
    int depth = 0;
    for (const auto& t : toks_) {
      if (t.type == TokType::kLParen) ++depth;
      if (t.type == TokType::kRParen && --depth < 0) break;
    }
    if (depth != 0) {
      throw AmrError(AmrErrorKind::kUnbalancedParens,
                     depth < 0 ? "unexpected ')'" : "missing ')'");
    }
    if (toks_[0].type != TokType::kLParen) {
      throw AmrError(AmrErrorKind::kUnexpectedToken,
                     "expression must start with '(' but got '" +
                         toks_[0].text + "'");
    }
    std::string top = ParseNode();
    if (pos_ != toks_.size()) {
      throw AmrError(AmrErrorKind::kUnexpectedToken,
                     "trailing token '" + toks_[pos_].text + "'");
    }
    graph_.set_top(top);

    for (auto& p : pending_) {
      if (p.kind == Pending::kNode) {
        graph_.add_edge(p.source, p.role, p.value);
      } else if (p.kind == Pending::kReference) {
        if (!graph_.has_variable(p.value)) {
          throw AmrError(AmrErrorKind::kUndefinedVariableReference,
                         "'(" + p.value + ")' refers to an undefined variable");
        }
        graph_.add_edge(p.source, p.role, p.value);
      } else if (!p.quoted && graph_.has_variable(p.value)) {
        graph_.add_edge(p.source, p.role, p.value);
      } else {
        graph_.add_attribute(p.source, p.role, p.value, p.quoted);
      }
    }
    if (!graph_.has_variable(graph_.top())) {
      throw AmrError(AmrErrorKind::kUndefinedVariableReference,
                     "top variable '" + graph_.top() + "' is never defined");
    }
    graph_.validate();
    return std::move(graph_);
  }

 private:
  struct Pending {
    enum Kind { kNode, kReference, kConstant } kind;
    std::string source;
    std::string role;
    std::string value;
    bool quoted = false;
  };

  const Tok& Peek() const {
    // Balanced parens guarantee a closing token before the end.
    return toks_[pos_];
  }

  std::string ParseNode() {
    ++pos_;  // '('
    const Tok& var = Peek();
    if (var.type != TokType::kSymbol) {
      throw AmrError(AmrErrorKind::kUnexpectedToken,
                     "expected variable after '(' but got '" + var.text + "'");
    }
    std::string name = var.text;
    ++pos_;
    if (Peek().type == TokType::kRParen) {
      // "(x)" is a parenthesized reference to a variable defined elsewhere.
      ++pos_;
      if (reference_source_.empty()) return name;
      pending_.push_back({Pending::kReference, reference_source_,
                          reference_role_, name, false});
      return std::string();
    }
    if (Peek().type != TokType::kSlash) {
      throw AmrError(AmrErrorKind::kUnexpectedToken,
                     "expected '/' after variable '" + name + "'");
    }
    ++pos_;
    const Tok& concept_tok = Peek();
    if (concept_tok.type != TokType::kSymbol &&
        concept_tok.type != TokType::kQuoted) {
      throw AmrError(AmrErrorKind::kUnexpectedToken,
                     "expected concept for '" + name + "'");
    }
    graph_.add_instance(name, concept_tok.text);
    ++pos_;

    while (Peek().type != TokType::kRParen) {
      const Tok& role = Peek();
      if (role.type != TokType::kRole) {
        throw AmrError(AmrErrorKind::kUnexpectedToken,
                       "expected role in '" + name + "' but got '" + role.text +
                           "'");
      }
      std::string role_name = role.text.substr(1);
      ++pos_;
      const Tok& value = Peek();
      switch (value.type) {
        case TokType::kLParen: {
          reference_source_ = name;
          reference_role_ = role_name;
          std::size_t slot = pending_.size();
          pending_.push_back({Pending::kNode, name, role_name, "", false});
          std::string child = ParseNode();
          if (child.empty()) {
            // Reference form appended its own entry; drop the placeholder.
            pending_.erase(pending_.begin() + static_cast<long>(slot));
          } else {
            pending_[slot].value = child;
          }
          break;
        }
        case TokType::kQuoted:
          pending_.push_back(
              {Pending::kConstant, name, role_name, value.text, true});
          ++pos_;
          break;
        case TokType::kSymbol:
          pending_.push_back(
              {Pending::kConstant, name, role_name, value.text, false});
          ++pos_;
          break;
        default:
          throw AmrError(AmrErrorKind::kUnexpectedToken,
                         "role :" + role_name + " has no value");
      }
    }
    ++pos_;  // ')'
    return name;
  }

  std::vector<Tok> toks_;
  std::size_t pos_ = 0;
  AmrGraph graph_;
  std::vector<Pending> pending_;
  std::string reference_source_;
  std::string reference_role_;
};

std::string Quote(const std::string& value) {
  std::string out = "\"";
  for (char c : value) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

AmrGraph ParsePenman(std::string_view text) {
  return PenmanParser(Lex(text)).Parse();
}

std::string SerializePenman(const AmrGraph& graph) {
  graph.validate();
  auto plan = TraversalPlan(graph);
  std::unordered_set<std::string> defined;
  std::unordered_map<std::string, std::vector<const AmrAttribute*>> attrs;
  for (const auto& a : graph.attributes()) attrs[a.source].push_back(&a);

  std::string out;
  std::function<void(const std::string&, int)> emit =
      [&](const std::string& var, int depth) {
        defined.insert(var);
        out += "(" + var + " / " + graph.concept_of(var);
        std::string indent(static_cast<std::size_t>(depth + 1) * 6, ' ');
        for (const auto& te : plan[var]) {
          out += "\n" + indent + ":" + te.role(graph) + " ";
          const std::string& child = te.child(graph);
          if (defined.count(child)) {
            out += child;
          } else {
            emit(child, depth + 1);
          }
        }
        for (const auto* a : attrs[var]) {
          out += "\n" + indent + ":" + a->role + " " +
                 (a->quoted ? Quote(a->value) : a->value);
        }
        out += ")";
      };
  emit(graph.top(), 0);
  return out;
}

TripleSet ToTriples(const AmrGraph& graph, TripleOptions options) {
  graph.validate();
  TripleSet ts;
  for (const auto& inst : graph.instances()) {
    ts.variables.push_back(inst.variable);
    ts.triples.push_back(
        {TripleKind::kInstance, inst.variable, "instance", inst.concept_label});
  }
  ts.triples.push_back({TripleKind::kTop, graph.top(), "TOP", "top"});
  for (const auto& a : graph.attributes()) {
    ts.triples.push_back({TripleKind::kAttribute, a.source, a.role, a.value});
  }
  for (const auto& e : graph.edges()) {
    if (options.normalize_inverse && IsInverseRole(e.role)) {
      ts.triples.push_back(
          {TripleKind::kRelation, e.target, InvertRole(e.role), e.source});
    } else {
      ts.triples.push_back({TripleKind::kRelation, e.source, e.role, e.target});
    }
  }
  std::sort(ts.triples.begin(), ts.triples.end());
  ts.triples.erase(std::unique(ts.triples.begin(), ts.triples.end()),
                   ts.triples.end());
  return ts;
}

}  // namespace xlamr
