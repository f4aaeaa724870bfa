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

#include "xlamr/config.hpp"

#include <charconv>
#include <functional>
#include <sstream>
#include <vector>

#include "xlamr/io_util.hpp"
#include "xlamr/rng.hpp"

namespace xlamr {

namespace {

std::string Trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string FormatDouble(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <typename N>
N ParseNumber(const std::string& key, const std::string& value) {
  N out{};
  auto r = std::from_chars(value.data(), value.data() + value.size(), out);
  if (r.ec != std::errc() || r.ptr != value.data() + value.size()) {
    throw ConfigError("config: bad value '" + value + "' for key '" + key + "'");
  }
  return out;
}

// One settable field: reads from and writes to text.
struct Field {
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

template <typename N>
Field NumberField(const std::string& key, N& target) {
  return {[&target, key](const std::string& v) { target = ParseNumber<N>(key, v); },
          [&target]() {
            if constexpr (std::is_floating_point_v<N>) {
              return FormatDouble(target);
            } else {
              return std::to_string(target);
            }
          }};
}

std::map<std::string, Field> ModelFields(ModelConfig& m) {
  return {
      {"layers", NumberField("layers", m.layers)},
      {"d_model", NumberField("d_model", m.d_model)},
      {"d_ff", NumberField("d_ff", m.d_ff)},
      {"heads", NumberField("heads", m.heads)},
      {"dropout", NumberField("dropout", m.dropout)},
      {"vocab_size", NumberField("vocab_size", m.vocab_size)},
      {"max_len", NumberField("max_len", m.max_len)},
      {"loss_weight_amr", NumberField("loss_weight_amr", m.loss_weight_amr)},
      {"loss_weight_eng", NumberField("loss_weight_eng", m.loss_weight_eng)},
      {"label_smoothing", NumberField("label_smoothing", m.label_smoothing)},
      {"init_seed", NumberField("init_seed", m.init_seed)},
  };
}

std::map<std::string, Field> TrainFields(TrainConfig& t) {
  return {
      {"warmup_steps", NumberField("warmup_steps", t.warmup_steps)},
      {"decoder_lr_factor", NumberField("decoder_lr_factor", t.decoder_lr_factor)},
      {"lr_scale", NumberField("lr_scale", t.lr_scale)},
      {"batch_tokens", NumberField("batch_tokens", t.batch_tokens)},
      {"max_steps", NumberField("max_steps", t.max_steps)},
      {"eval_every", NumberField("eval_every", t.eval_every)},
      {"seed", NumberField("seed", t.seed)},
      {"mode",
       {[&t](const std::string& v) {
          try {
            t.mode = ParseTrainMode(v);
          } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("config: ") + e.what());
          }
        },
        [&t]() { return ToString(t.mode); }}},
      {"clip_norm", NumberField("clip_norm", t.clip_norm)},
      {"adam_beta1", NumberField("adam_beta1", t.adam_beta1)},
      {"adam_beta2", NumberField("adam_beta2", t.adam_beta2)},
      {"adam_eps", NumberField("adam_eps", t.adam_eps)},
      {"eval_max_steps", NumberField("eval_max_steps", t.eval_max_steps)},
      {"smatch_restarts", NumberField("smatch_restarts", t.smatch_restarts)},
  };
}

std::map<std::string, Field> RunFields(RunConfig& r) {
  auto fields = ModelFields(r.model);
  fields.merge(TrainFields(r.train));
  fields.emplace("bpe_merges", NumberField("bpe_merges", r.bpe_merges));
  fields.emplace("beam_width", NumberField("beam_width", r.beam_width));
  fields.emplace("decode_max_steps", NumberField("decode_max_steps", r.decode_max_steps));
  fields.emplace("toy_examples", NumberField("toy_examples", r.toy_examples));
  fields.emplace("toy_heldout", NumberField("toy_heldout", r.toy_heldout));
  fields.emplace("ablation_seeds", NumberField("ablation_seeds", r.ablation_seeds));
  fields.emplace("lang", Field{[&r](const std::string& v) { r.lang = v; },
                               [&r]() { return r.lang; }});
  return fields;
}

void Apply(const KeyValues& values, std::map<std::string, Field>& fields) {
  for (const auto& [key, value] : values) {
    auto it = fields.find(key);
    if (it == fields.end()) throw ConfigError("config: unknown key '" + key + "'");
    it->second.set(value);
  }
}

KeyValues Collect(const std::map<std::string, Field>& fields) {
  KeyValues out;
  for (const auto& [key, field] : fields) out[key] = field.get();
  return out;
}

}  // namespace

KeyValues ParseKeyValues(std::string_view text) {
  KeyValues out;
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string t = Trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(n) + ": expected key = value");
    }
    const std::string key = Trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(n) + ": empty key");
    if (!out.emplace(key, Trim(t.substr(eq + 1))).second) {
      throw ConfigError("config line " + std::to_string(n) + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

std::string FormatKeyValues(const KeyValues& values) {
  std::string out;
  for (const auto& [k, v] : values) out += k + " = " + v + "\n";
  return out;
}

void ApplyKeyValues(const KeyValues& values, RunConfig& config) {
  auto fields = RunFields(config);
  Apply(values, fields);
}

KeyValues ToKeyValues(const RunConfig& config) {
  RunConfig copy = config;
  return Collect(RunFields(copy));
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  RunConfig config;
  ApplyKeyValues(ParseKeyValues(ReadFile(path)), config);
  return config;
}

KeyValues ModelKeyValues(const ModelConfig& config) {
  ModelConfig copy = config;
  return Collect(ModelFields(copy));
}

KeyValues TrainKeyValues(const TrainConfig& config) {
  TrainConfig copy = config;
  return Collect(TrainFields(copy));
}

ModelConfig ModelConfigFromText(std::string_view text) {
  ModelConfig config;
  auto fields = ModelFields(config);
  Apply(ParseKeyValues(text), fields);
  return config;
}

TrainConfig TrainConfigFromText(std::string_view text) {
  TrainConfig config;
  auto fields = TrainFields(config);
  Apply(ParseKeyValues(text), fields);
  return config;
}

void SetSeed(RunConfig& config, std::uint64_t seed) {
  config.train.seed = seed;
  config.model.init_seed = DeriveSeed(seed, 0x1417);
}

}  // namespace xlamr
