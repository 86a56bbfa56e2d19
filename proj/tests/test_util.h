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


#pragma once

#include <cstdint>
#include <cstring>
#include <functional>
#include <string_view>
#include <vector>

#include "sme_forge/asm_text.h"
#include "sme_forge/encoder.h"
#include "sme_forge/error.h"
#include "sme_forge/machine.h"

namespace sme_forge::testing {

inline RunResult run_asm(Machine& m, std::string_view text,
                         std::vector<std::uint64_t> args = {},
                         std::uint64_t max_steps = 1'000'000) {
  const auto words = assemble(parse_program(text));
  return m.run(words, args, max_steps);
}

inline ErrorCode error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(-1);
}

template <typename T>
void put(std::span<std::uint8_t> dst, int index, T v) {
  std::memcpy(dst.data() + index * sizeof(T), &v, sizeof(T));
}

template <typename T>
T get(std::span<const std::uint8_t> src, int index) {
  T v;
  std::memcpy(&v, src.data() + index * sizeof(T), sizeof(T));
  return v;
}

}  // namespace sme_forge::testing
