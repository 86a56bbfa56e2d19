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

// Harness code: running generated kernels in the emulator against reference
// results, checking golden fixtures and (on SME hardware) native timing.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sme_forge/golden.h"
#include "sme_forge/kernel_emitter.h"
#include "sme_forge/machine.h"

namespace sme_forge {

/// Integer mode draws from {-8, ..., 8}, uniform mode from [-1, 1).
enum class FillMode { kInteger, kUniform };

/// Operands laid out with their leading dimensions. Elements outside the
/// logical matrices are NaN in A and B and a NaN sentinel in C; none of the
/// padding is placed in emulator memory.
struct GemmOperands {
  std::vector<float> a;
  std::vector<float> b;
  std::vector<float> c;
};

GemmOperands random_operands(const GemmSpec& spec, std::uint64_t seed, FillMode mode);

/// C + A*B in double precision over the logical region; slack copied from C.
std::vector<double> reference_gemm(const GemmSpec& spec, const GemmOperands& ops);

/// Emulator addresses of the operands.
inline constexpr std::uint64_t kAddrA = 1ULL << 32;
inline constexpr std::uint64_t kAddrB = 2ULL << 32;
inline constexpr std::uint64_t kAddrC = 3ULL << 32;
inline constexpr std::uint64_t kAddrScratch = 4ULL << 32;
inline constexpr std::uint64_t kGuardBytes = 256;

struct EmulatedGemm {
  std::vector<float> c;
  RunResult run;
  std::uint64_t fmopa_count = 0;
  std::uint64_t flops = 0;
  bool guards_intact = false;  // C padding never written, bands around C unchanged
  bool reads_in_bounds = false;  // no read of an unmapped byte
  bool writes_in_bounds = false;  // nothing written outside C and scratch
};

/// Places the operands, runs the kernel and collects C plus safety checks.
EmulatedGemm run_gemm(const KernelBuffer& kernel, const GemmSpec& spec,
                      const GemmOperands& ops, int svl_bits = 512);

struct Verdict {
  bool pass = false;
  double max_error = 0;  // absolute (integer mode) or max|diff| / max|ref|
  std::string detail;
};

struct RunReport {
  std::string kernel_id;
  std::string mode;  // "emulated" or "native"
  std::uint64_t steps = 0;
  double seconds = 0;
  std::uint64_t return_value = 0;
  double rate = 0;  // native only: return value units per second
  std::optional<Verdict> verdict;
};

/// Generates the kernel, runs it on seeded random operands and compares
/// with the reference: exact in integer mode, relative 1e-5 in uniform mode.
/// Throws kInvalidSpec for an invalid spec.
RunReport verify_gemm(const GemmSpec& spec, std::uint64_t seed,
                      FillMode mode = FillMode::kUniform, int svl_bits = 512);

inline constexpr double kUniformTolerance = 1e-5;

/// Encodes every fixture entry; empty result means all agree.
std::vector<GoldenMismatch> golden_check(const std::string& fixture_path);

/// True on an AArch64 Linux host reporting SME.
bool host_has_sme();

/// Maps the kernel executable and calls it with `args` until at least
/// `min_seconds` have passed. Each call is taken to do `return value *
/// iterations_per_call` units of work (benchmark kernels return the work of
/// one loop iteration). Throws kUnsupportedHost elsewhere.
RunReport native_execute(const KernelBuffer& kernel, const std::vector<std::uint64_t>& args,
                         double min_seconds = 1.0, std::uint64_t iterations_per_call = 1);

}  // namespace sme_forge
