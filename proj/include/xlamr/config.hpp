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

#ifndef XLAMR_CONFIG_HPP_
#define XLAMR_CONFIG_HPP_

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "xlamr/training.hpp"
#include "xlamr/transformer.hpp"

namespace xlamr {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using KeyValues = std::map<std::string, std::string>;

// "key = value" lines; '#' starts a comment line. Duplicate keys are errors.
KeyValues ParseKeyValues(std::string_view text);
std::string FormatKeyValues(const KeyValues& values);

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  int bpe_merges = 600;
  int beam_width = 4;
  int decode_max_steps = 160;
  std::string lang = "de";
  // Toy corpus size used by gen-toy and ablate.
  int toy_examples = 500;
  int toy_heldout = 100;
  int ablation_seeds = 3;

  bool operator==(const RunConfig&) const = default;
};

// Unknown keys and malformed values raise ConfigError.
void ApplyKeyValues(const KeyValues& values, RunConfig& config);
KeyValues ToKeyValues(const RunConfig& config);
RunConfig LoadRunConfig(const std::filesystem::path& path);

// Model-only and train-only views, used inside checkpoints.
KeyValues ModelKeyValues(const ModelConfig& config);
KeyValues TrainKeyValues(const TrainConfig& config);
ModelConfig ModelConfigFromText(std::string_view text);
TrainConfig TrainConfigFromText(std::string_view text);

// Sets the training seed and derives the initialization seed from it.
void SetSeed(RunConfig& config, std::uint64_t seed);

}  // namespace xlamr

#endif  // XLAMR_CONFIG_HPP_
