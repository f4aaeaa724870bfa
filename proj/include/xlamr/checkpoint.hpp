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

#ifndef XLAMR_CHECKPOINT_HPP_
#define XLAMR_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace xlamr {

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { kBadMagic, kCorrupt, kChecksum, kMissing };
  CheckpointError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct Tensor {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<float> data;  // row-major

  bool operator==(const Tensor&) const = default;
};

// Self-describing container: magic, named text and tensor blocks in name
// order, then an FNV-1a 64 checksum of everything before it. Tensors are
// stored as little-endian float32.
class Checkpoint {
 public:
  void set_text(const std::string& name, std::string value);
  void set_tensor(const std::string& name, Tensor tensor);
  const std::string& text(const std::string& name) const;
  const Tensor& tensor(const std::string& name) const;
  bool has_text(const std::string& name) const { return texts_.count(name) > 0; }
  bool has_tensor(const std::string& name) const { return tensors_.count(name) > 0; }
  const std::map<std::string, Tensor>& tensors() const { return tensors_; }

  std::string serialize() const;
  static Checkpoint Parse(std::string_view bytes);
  void save(const std::filesystem::path& path) const;
  static Checkpoint Load(const std::filesystem::path& path);

 private:
  std::map<std::string, std::string> texts_;
  std::map<std::string, Tensor> tensors_;
};

std::uint64_t Fnv1a64(std::string_view bytes);

}  // namespace xlamr

#endif  // XLAMR_CHECKPOINT_HPP_
