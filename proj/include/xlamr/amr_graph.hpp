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

#ifndef XLAMR_AMR_GRAPH_HPP_
#define XLAMR_AMR_GRAPH_HPP_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace xlamr {

enum class AmrErrorKind {
  kEmptyInput,
  kUnbalancedParens,
  kDuplicateVariableDefinition,
  kUndefinedVariableReference,
  kUnexpectedToken,
  kInvariantViolation,
};

const char* ToString(AmrErrorKind kind);

class AmrError : public std::runtime_error {
 public:
  AmrError(AmrErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(ToString(kind)) + ": " + what),
        kind_(kind) {}
  AmrErrorKind kind() const { return kind_; }

 private:
  AmrErrorKind kind_;
};

// Roles are stored without the leading colon ("ARG0", "ARG0-of").
struct AmrEdge {
  std::string source;
  std::string role;
  std::string target;
  bool operator==(const AmrEdge&) const = default;
};

// Constant-valued role. `value` never carries quotes; `quoted` records
// whether the surface form was a double-quoted literal.
struct AmrAttribute {
  std::string source;
  std::string role;
  std::string value;
  bool quoted = false;
  bool operator==(const AmrAttribute&) const = default;
};

struct AmrInstance {
  std::string variable;
  std::string concept_label;
};

// Rooted labeled graph. Instances keep definition order, which is also
// the order used for deterministic serialization.
class AmrGraph {
 public:
  AmrGraph() = default;

  const std::string& top() const { return top_; }
  void set_top(std::string var) { top_ = std::move(var); }

  const std::vector<AmrInstance>& instances() const { return instances_; }
  const std::vector<AmrEdge>& edges() const { return edges_; }
  const std::vector<AmrAttribute>& attributes() const { return attributes_; }

  bool has_variable(std::string_view var) const;
  // Throws kInvariantViolation if `var` is unknown.
  const std::string& concept_of(std::string_view var) const;

  // Throws kDuplicateVariableDefinition if `var` already exists.
  void add_instance(std::string var, std::string concept_label);
  // Identical duplicates are ignored; returns whether anything was added.
  bool add_edge(std::string source, std::string role, std::string target);
  bool add_attribute(std::string source, std::string role, std::string value,
                     bool quoted);

  void rename_concept(std::string_view var, std::string concept_label);

  // Throws AmrError(kInvariantViolation) describing the first broken rule.
  void validate() const;

  std::size_t size() const { return instances_.size(); }

 private:
  std::string top_;
  std::vector<AmrInstance> instances_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<AmrEdge> edges_;
  std::vector<AmrAttribute> attributes_;
};

// True for roles of the form "X-of" that denote the inverse of "X".
// "consist-of" is a primary role and is not treated as an inverse.
bool IsInverseRole(std::string_view role);
std::string InvertRole(std::string_view role);

// Space-joined :opN values of a name node, ordered by N.
std::string NameString(const AmrGraph& graph, const std::string& name_var);

AmrGraph ParsePenman(std::string_view text);
std::string SerializePenman(const AmrGraph& graph);

enum class TripleKind { kTop, kInstance, kAttribute, kRelation };

// `source` is always a variable. For relations `target` is a variable;
// otherwise it is a concept, constant or the literal "top".
struct Triple {
  TripleKind kind;
  std::string source;
  std::string role;
  std::string target;
  auto operator<=>(const Triple&) const = default;
};

struct TripleSet {
  std::vector<std::string> variables;
  std::vector<Triple> triples;  // sorted, unique

  std::size_t size() const { return triples.size(); }
};

struct TripleOptions {
  bool normalize_inverse = true;
};

TripleSet ToTriples(const AmrGraph& graph, TripleOptions options = {});

// Orientation used when walking the graph from its top: which edges are
// followed forward and which are followed from target to source.
// Shared by the serializer and the linearizer so both visit nodes in the
// same order.
struct TraversalEdge {
  std::size_t edge_index;
  bool inverted;
  const std::string& child(const AmrGraph& g) const {
    return inverted ? g.edges()[edge_index].source
                    : g.edges()[edge_index].target;
  }
  std::string role(const AmrGraph& g) const;
};

// Children of each variable in emission order.
std::unordered_map<std::string, std::vector<TraversalEdge>> TraversalPlan(
    const AmrGraph& graph);

}  // namespace xlamr

#endif  // XLAMR_AMR_GRAPH_HPP_
