// Copyright 2026 The sme-forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Types shared by the kernel and benchmark generators.

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "sme_forge/isa.h"

namespace sme_forge {

enum class DType { kF32, kF64, kF16, kBF16 };

std::string_view dtype_name(DType d);
/// Throws Error{kUnsupportedDatatype} for unknown names.
DType parse_dtype(std::string_view name);

/// A finished kernel. Words end with RET; `scratch_bytes` is the size of the
/// 64-byte aligned scratch region the caller passes in x3 (0 if unused) and
/// `return_value` is what the kernel leaves in x0.
struct KernelBuffer {
  std::vector<EncodedWord> words;
  std::uint64_t scratch_bytes = 0;
  std::uint64_t return_value = 0;
};

}  // namespace sme_forge
