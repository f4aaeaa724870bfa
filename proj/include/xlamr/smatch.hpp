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

#ifndef XLAMR_SMATCH_HPP_
#define XLAMR_SMATCH_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "xlamr/amr_graph.hpp"

namespace xlamr {

class SmatchError : public std::runtime_error {
 public:
  enum class Kind { kTooLarge, kLengthMismatch };
  SmatchError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct SmatchScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long matched = 0;
  long pred_total = 0;
  long gold_total = 0;
  // Predicted variable -> gold variable; empty for alignment-free metrics.
  std::map<std::string, std::string> mapping;

  // Empty-vs-empty scores 1.0; one empty side scores 0.0.
  static SmatchScore FromCounts(long matched, long pred_total, long gold_total);
};

struct SmatchOptions {
  int restarts = 4;
  std::uint64_t seed = 0;
  // Rewrite ":R-of" relations as ":R" with swapped endpoints before scoring.
  bool normalize_inverse = false;
};

// Hill-climbing search over injective variable mappings.
SmatchScore ComputeSmatch(const AmrGraph& pred, const AmrGraph& gold,
                          const SmatchOptions& options = {});
SmatchScore AlignTriples(const TripleSet& pred, const TripleSet& gold,
                         int restarts, std::uint64_t seed);

inline constexpr int kBruteForceMaxVars = 8;

// Exact optimum (exhaustive search with bound pruning). Throws
// SmatchError(kTooLarge) when the smaller side has more than `max_vars`
// variables.
SmatchScore BruteForceSmatch(const AmrGraph& pred, const AmrGraph& gold,
                             int max_vars = kBruteForceMaxVars,
                             bool normalize_inverse = false);
SmatchScore ExactAlignTriples(const TripleSet& pred, const TripleSet& gold,
                              int max_vars = kBruteForceMaxVars);

inline constexpr std::array<std::string_view, 9> kMetricNames = {
    "Smatch",   "Unlabeled", "NoWSD",    "Reentrancies", "Concepts",
    "NamedEnt", "Wikification", "Negation", "SRL"};

struct FineGrainedReport {
  std::map<std::string, SmatchScore> scores;
  // Set when a corpus report was computed over zero pairs.
  bool vacuous = false;

  const SmatchScore& at(std::string_view metric) const;
};

FineGrainedReport FineGrained(const AmrGraph& pred, const AmrGraph& gold,
                              const SmatchOptions& options = {});

// Micro-average: matched/total counts are summed over pairs before P/R/F1.
FineGrainedReport CorpusScore(const std::vector<AmrGraph>& pred,
                              const std::vector<AmrGraph>& gold,
                              const SmatchOptions& options = {});

// Sense suffix removal used by NoWSD: "publish-01" -> "publish".
std::string StripSense(const std::string& concept_label);

}  // namespace xlamr

#endif  // XLAMR_SMATCH_HPP_
