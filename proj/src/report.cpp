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

#include "xlamr/report.hpp"

#include <cstdio>

namespace xlamr {

namespace {

std::string Fixed(double value, int decimals) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

std::string Signed(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.1f", value);
  // "-0.0" reads as a loss that did not happen.
  if (std::string(buf) == "-0.0") return "+0.0";
  return buf;
}

std::string PadRight(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string PadLeft(const std::string& s, std::size_t width) {
  return s.size() < width ? std::string(width - s.size(), ' ') + s : s;
}

constexpr std::size_t kNameWidth = 14;

}  // namespace

std::string FormatMetricTable(const FineGrainedReport& report) {
  std::string out = PadRight("Metric", kNameWidth) + PadLeft("P", 8) +
                    PadLeft("R", 8) + PadLeft("F1", 8) + "\n";
  for (std::string_view name : kMetricNames) {
    const SmatchScore& s = report.at(name);
    out += PadRight(std::string(name), kNameWidth) + PadLeft(Fixed(s.precision, 3), 8) +
           PadLeft(Fixed(s.recall, 3), 8) + PadLeft(Fixed(s.f1, 3), 8) + "\n";
  }
  return out;
}

std::string FormatMetricBlock(const FineGrainedReport& report, std::string_view prefix) {
  std::string out;
  for (std::string_view name : kMetricNames) {
    if (!prefix.empty()) out += std::string(prefix) + ".";
    out += std::string(name) + " " + Fixed(report.at(name).f1, 3) + "\n";
  }
  return out;
}

double AblationReport::mean_f1(TrainMode mode, std::string_view metric) const {
  double sum = 0.0;
  int n = 0;
  for (const auto& run : runs) {
    if (run.mode != mode) continue;
    sum += run.heldout.at(metric).f1;
    ++n;
  }
  return n == 0 ? 0.0 : sum / n;
}

std::string FormatAblationReport(const AblationReport& report) {
  constexpr std::size_t kCol = 16;
  std::string out = PadRight("Metric", kNameWidth);
  for (TrainMode mode : kAllModes) out += PadLeft(ToString(mode), kCol);
  out += "\n";
  for (std::string_view name : kMetricNames) {
    const double base = 100.0 * report.mean_f1(TrainMode::kS2s, name);
    out += PadRight(std::string(name), kNameWidth);
    for (TrainMode mode : kAllModes) {
      const double v = 100.0 * report.mean_f1(mode, name);
      std::string cell = Fixed(v, 1);
      if (mode != TrainMode::kS2s) cell += " (" + Signed(v - base) + ")";
      out += PadLeft(cell, kCol);
    }
    out += "\n";
  }
  out += "\n";
  for (TrainMode mode : kAllModes) {
    for (std::string_view name : kMetricNames) {
      out += ToString(mode) + "." + std::string(name) + " " +
             Fixed(report.mean_f1(mode, name), 3) + "\n";
    }
  }
  for (const auto& run : report.runs) {
    out += "seed" + std::to_string(run.seed) + "." + ToString(run.mode) + ".Smatch " +
           Fixed(run.heldout.at("Smatch").f1, 3) + "\n";
  }
  return out;
}

}  // namespace xlamr
