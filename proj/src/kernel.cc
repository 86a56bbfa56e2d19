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

#include "sme_forge/kernel.h"

#include <array>
#include <string>
#include <utility>

#include "sme_forge/error.h"

namespace sme_forge {

namespace {

constexpr std::array<std::pair<DType, std::string_view>, 4> kNames = {{
    {DType::kF32, "fp32"},
    {DType::kF64, "fp64"},
    {DType::kF16, "fp16"},
    {DType::kBF16, "bf16"},
}};

}  // namespace

std::string_view dtype_name(DType d) {
  for (const auto& [id, name] : kNames) {
    if (id == d) return name;
  }
  return "?";
}

DType parse_dtype(std::string_view name) {
  for (const auto& [id, n] : kNames) {
    if (n == name) return id;
  }
  throw Error(ErrorCode::kUnsupportedDatatype, "unknown datatype '" + std::string(name) + "'");
}

}  // namespace sme_forge
