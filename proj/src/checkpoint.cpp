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

#include "xlamr/checkpoint.hpp"

#include <cstring>

#include "xlamr/io_util.hpp"

namespace xlamr {

namespace {

constexpr std::string_view kMagic = "XLAMRCK1";
constexpr char kTextBlock = 'T';
constexpr char kTensorBlock = 'W';
constexpr char kEndBlock = 'E';

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void PutU64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  char u8() { return take(1)[0]; }
  std::uint32_t u32() {
    auto s = take(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[static_cast<std::size_t>(i)]);
    return v;
  }
  std::uint64_t u64() {
    auto s = take(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[static_cast<std::size_t>(i)]);
    return v;
  }
  std::string_view take(std::size_t n) {
    if (bytes_.size() - pos_ < n) {
      throw CheckpointError(CheckpointError::Kind::kCorrupt, "checkpoint truncated");
    }
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

void Checkpoint::set_text(const std::string& name, std::string value) {
  texts_[name] = std::move(value);
}

void Checkpoint::set_tensor(const std::string& name, Tensor tensor) {
  if (tensor.data.size() != static_cast<std::size_t>(tensor.rows) * tensor.cols) {
    throw CheckpointError(CheckpointError::Kind::kCorrupt,
                          "tensor '" + name + "' has inconsistent shape");
  }
  tensors_[name] = std::move(tensor);
}

const std::string& Checkpoint::text(const std::string& name) const {
  auto it = texts_.find(name);
  if (it == texts_.end()) {
    throw CheckpointError(CheckpointError::Kind::kMissing, "checkpoint lacks text block '" + name + "'");
  }
  return it->second;
}

const Tensor& Checkpoint::tensor(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) {
    throw CheckpointError(CheckpointError::Kind::kMissing, "checkpoint lacks tensor '" + name + "'");
  }
  return it->second;
}

std::string Checkpoint::serialize() const {
  std::string out(kMagic);
  for (const auto& [name, value] : texts_) {
    out.push_back(kTextBlock);
    PutU32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    PutU64(out, value.size());
    out += value;
  }
  for (const auto& [name, t] : tensors_) {
    out.push_back(kTensorBlock);
    PutU32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    PutU32(out, t.rows);
    PutU32(out, t.cols);
    for (float f : t.data) {
      std::uint32_t bits;
      std::memcpy(&bits, &f, sizeof bits);
      PutU32(out, bits);
    }
  }
  out.push_back(kEndBlock);
  PutU64(out, Fnv1a64(out));
  return out;
}

Checkpoint Checkpoint::Parse(std::string_view bytes) {
  if (bytes.substr(0, kMagic.size()) != kMagic) {
    throw CheckpointError(CheckpointError::Kind::kBadMagic, "not an xlamr checkpoint");
  }
  Reader r(bytes);
  r.take(kMagic.size());
  Checkpoint ck;
  for (;;) {
    const char kind = r.u8();
    if (kind == kEndBlock) break;
    const std::string name(r.take(r.u32()));
    if (kind == kTextBlock) {
      const std::uint64_t n = r.u64();
      if (n > bytes.size()) throw CheckpointError(CheckpointError::Kind::kCorrupt, "bad text length");
      ck.texts_[name] = std::string(r.take(static_cast<std::size_t>(n)));
    } else if (kind == kTensorBlock) {
      Tensor t;
      t.rows = r.u32();
      t.cols = r.u32();
      const std::uint64_t n = static_cast<std::uint64_t>(t.rows) * t.cols;
      if (n * 4 > bytes.size()) throw CheckpointError(CheckpointError::Kind::kCorrupt, "bad tensor shape");
      t.data.resize(static_cast<std::size_t>(n));
      for (auto& f : t.data) {
        const std::uint32_t bits = r.u32();
        std::memcpy(&f, &bits, sizeof f);
      }
      ck.tensors_[name] = std::move(t);
    } else {
      throw CheckpointError(CheckpointError::Kind::kCorrupt, "unknown block kind");
    }
  }
  const std::size_t body = r.pos();
  const std::uint64_t stored = r.u64();
  if (r.pos() != bytes.size()) {
    throw CheckpointError(CheckpointError::Kind::kCorrupt, "trailing bytes after checksum");
  }
  if (stored != Fnv1a64(bytes.substr(0, body))) {
    throw CheckpointError(CheckpointError::Kind::kChecksum, "checkpoint checksum mismatch");
  }
  return ck;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  WriteFileAtomic(path, serialize());
}

Checkpoint Checkpoint::Load(const std::filesystem::path& path) {
  return Parse(ReadFile(path));
}

}  // namespace xlamr
