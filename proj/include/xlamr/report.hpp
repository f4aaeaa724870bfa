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

#ifndef XLAMR_REPORT_HPP_
#define XLAMR_REPORT_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "xlamr/smatch.hpp"
#include "xlamr/training.hpp"

namespace xlamr {

// Nine rows in kMetricNames order with P, R and F1 columns.
std::string FormatMetricTable(const FineGrainedReport& report);

// One "Metric value" line per metric (F1, three decimals). A non-empty
// `prefix` is prepended as "prefix.Metric".
std::string FormatMetricBlock(const FineGrainedReport& report,
                              std::string_view prefix = {});

struct AblationRun {
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::kS2s;
  FineGrainedReport heldout;
};

struct AblationReport {
  std::vector<AblationRun> runs;

  // Mean held-out F1 of `metric` over all seeds trained in `mode`.
  double mean_f1(TrainMode mode, std::string_view metric) const;
};

// Rows are metrics, columns are the four modes. Cells hold mean F1 x 100;
// the non-baseline columns add the difference to s2s. A key:value block
// with means and per-seed Smatch follows the table.
std::string FormatAblationReport(const AblationReport& report);

}  // namespace xlamr

#endif  // XLAMR_REPORT_HPP_
