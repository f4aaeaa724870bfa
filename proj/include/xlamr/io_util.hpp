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

#ifndef XLAMR_IO_UTIL_HPP_
#define XLAMR_IO_UTIL_HPP_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace xlamr {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string ReadFile(const std::filesystem::path& path);

// Writes to "<path>.tmp" and renames over `path`, so readers never observe
// a partially written file.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view data);

}  // namespace xlamr

#endif  // XLAMR_IO_UTIL_HPP_
