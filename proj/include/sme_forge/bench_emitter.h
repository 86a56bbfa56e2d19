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

// Microbenchmark kernels: peak FMLA / FMOPA throughput loops and ZA
// load/store bandwidth loops.
//
// Throughput kernels take the repetition count in x0 and return the FP
// operations of one loop iteration. Bandwidth kernels take the pass count in
// x0 and the data address in x1 and return the bytes moved per pass. ZA is
// addressed through the byte tile ZA0.B, whose horizontal slice r is array
// vector r, so memory byte i of a pass lands in ZA byte i mod (SVL/8)^2.
// Load kernels finish with `smstop sm` and leave ZA live; store kernels
// expect ZA to be live already.

#pragma once

#include <cstdint>
#include <string_view>

#include "sme_forge/kernel.h"

namespace sme_forge {

enum class BenchKind { kNeonFmla, kSmeFmopa, kBwLoad, kBwStore };
enum class BwStrategy { kDirect, kIndirect1, kIndirect2, kIndirect4 };

std::string_view bench_kind_name(BenchKind k);
std::string_view bw_strategy_name(BwStrategy s);
/// Both throw Error{kInvalidSpec} for unknown names.
BenchKind parse_bench_kind(std::string_view name);
BwStrategy parse_bw_strategy(std::string_view name);

struct BenchSpec {
  BenchKind kind = BenchKind::kSmeFmopa;
  DType dtype = DType::kF32;
  BwStrategy strategy = BwStrategy::kDirect;
  std::uint64_t bytes_per_pass = 0;  // bandwidth kinds
  std::uint64_t repetitions = 1;     // passed in x0 by the caller
};

/// Bytes one load/store step moves at a 512-bit SVL: 64, 64, 128, 256.
int transfer_bytes(BwStrategy s);

/// 30 Neon FMLA on v30/v31, or 32 FMOPA cycling over every tile. Throws
/// kUnsupportedDatatype for FP16/BF16, kInvalidSpec for other kinds.
KernelBuffer emit_throughput_bench(const BenchSpec& spec);

/// Throws kInvalidTransferSize unless bytes_per_pass is a positive multiple
/// of transfer_bytes(strategy), kInvalidSpec for other kinds.
KernelBuffer emit_bandwidth_bench(const BenchSpec& spec);

/// Dispatches on spec.kind.
KernelBuffer emit_bench(const BenchSpec& spec);

}  // namespace sme_forge
