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

#include "sme_forge/runner.h"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "sme_forge/error.h"

#if defined(__aarch64__) && defined(__linux__)
#include <sys/auxv.h>
#include <sys/mman.h>
#endif

namespace sme_forge {

namespace {

constexpr std::uint32_t kSentinel = 0x7fc0dead;

float sentinel() { return std::bit_cast<float>(kSentinel); }

std::span<const std::uint8_t> bytes_of(const float* p, std::size_t count) {
  return {reinterpret_cast<const std::uint8_t*>(p), count * sizeof(float)};
}

// Element index of logical B(p, j).
std::size_t b_index(const GemmSpec& s, int p, int j) {
  return s.b_layout == BLayout::kRowMajor ? static_cast<std::size_t>(p) * s.ldb + j
                                          : static_cast<std::size_t>(j) * s.ldb + p;
}

}  // namespace

GemmOperands random_operands(const GemmSpec& s, std::uint64_t seed, FillMode mode) {
  check_spec(s);
  const auto ext = operand_extents(s);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> ints(-8, 8);
  std::uniform_real_distribution<float> reals(-1.0f, 1.0f);
  auto draw = [&]() {
    return mode == FillMode::kInteger ? static_cast<float>(ints(rng)) : reals(rng);
  };
  const float nan = std::numeric_limits<float>::quiet_NaN();

  GemmOperands ops{std::vector<float>(ext.a, nan), std::vector<float>(ext.b, nan),
                   std::vector<float>(ext.c, sentinel())};
  for (int p = 0; p < s.k; ++p) {
    for (int i = 0; i < s.m; ++i) ops.a[static_cast<std::size_t>(p) * s.lda + i] = draw();
  }
  for (int p = 0; p < s.k; ++p) {
    for (int j = 0; j < s.n; ++j) ops.b[b_index(s, p, j)] = draw();
  }
  for (int j = 0; j < s.n; ++j) {
    for (int i = 0; i < s.m; ++i) ops.c[static_cast<std::size_t>(j) * s.ldc + i] = draw();
  }
  return ops;
}

std::vector<double> reference_gemm(const GemmSpec& s, const GemmOperands& ops) {
  std::vector<double> c(ops.c.begin(), ops.c.end());
  for (int j = 0; j < s.n; ++j) {
    for (int i = 0; i < s.m; ++i) {
      double acc = ops.c[static_cast<std::size_t>(j) * s.ldc + i];
      for (int p = 0; p < s.k; ++p) {
        acc += static_cast<double>(ops.a[static_cast<std::size_t>(p) * s.lda + i]) *
               ops.b[b_index(s, p, j)];
      }
      c[static_cast<std::size_t>(j) * s.ldc + i] = acc;
    }
  }
  return c;
}

EmulatedGemm run_gemm(const KernelBuffer& kernel, const GemmSpec& s, const GemmOperands& ops,
                      int svl_bits) {
  Machine m(svl_bits);
  // Only logical elements of A and B are mapped, so reading padding shows up
  // as an undefined read.
  for (int p = 0; p < s.k; ++p) {
    const std::size_t at = static_cast<std::size_t>(p) * s.lda;
    m.write_memory(kAddrA + at * 4, bytes_of(&ops.a[at], s.m));
  }
  const bool row_b = s.b_layout == BLayout::kRowMajor;
  const int b_lines = row_b ? s.k : s.n;
  const int b_len = row_b ? s.n : s.k;
  for (int l = 0; l < b_lines; ++l) {
    const std::size_t at = static_cast<std::size_t>(l) * s.ldb;
    m.write_memory(kAddrB + at * 4, bytes_of(&ops.b[at], b_len));
  }
  // C padding (rows m..ldc-1) stays unmapped: touching it either reads an
  // undefined byte or maps a new one. Guard bands sit around the whole span.
  std::vector<std::uint8_t> guard(kGuardBytes, 0xA5);
  m.write_memory(kAddrC - kGuardBytes, guard);
  for (int j = 0; j < s.n; ++j) {
    const std::size_t at = static_cast<std::size_t>(j) * s.ldc;
    m.write_memory(kAddrC + at * 4, bytes_of(&ops.c[at], s.m));
  }
  m.write_memory(kAddrC + ops.c.size() * 4, guard);
  if (kernel.scratch_bytes > 0) {
    m.write_memory(kAddrScratch, std::vector<std::uint8_t>(kernel.scratch_bytes, 0));
  }
  const std::size_t defined = m.memory().defined_bytes();

  EmulatedGemm out;
  const std::uint64_t args[] = {kAddrA, kAddrB, kAddrC, kAddrScratch};
  const std::uint64_t budget = 64 + 64 * kernel.words.size() +
                               64ULL * s.k * (static_cast<std::uint64_t>(s.m / 16 + 4) *
                                              (s.n / 16 + 4));
  out.run = m.run(kernel.words, args, budget);
  out.fmopa_count = m.executed(Opcode::kFmopa);
  out.flops = m.flops_executed();
  out.reads_in_bounds = m.memory().undefined_reads() == 0;
  out.writes_in_bounds = m.memory().defined_bytes() == defined;

  out.c = ops.c;
  bool intact = m.read_memory(kAddrC - kGuardBytes, kGuardBytes) == guard &&
                m.read_memory(kAddrC + ops.c.size() * 4, kGuardBytes) == guard;
  for (int j = 0; j < s.n; ++j) {
    const std::size_t at = static_cast<std::size_t>(j) * s.ldc;
    const auto col = m.read_memory(kAddrC + at * 4, static_cast<std::size_t>(s.m) * 4);
    std::memcpy(&out.c[at], col.data(), col.size());
    for (std::size_t i = s.m; i < static_cast<std::size_t>(s.ldc) && at + i < ops.c.size(); ++i) {
      if (m.memory().defined(kAddrC + (at + i) * 4)) intact = false;
    }
  }
  out.guards_intact = intact;
  return out;
}

RunReport verify_gemm(const GemmSpec& spec, std::uint64_t seed, FillMode mode, int svl_bits) {
  check_spec(spec);
  const auto start = std::chrono::steady_clock::now();
  const KernelBuffer kernel = generate_gemm(spec);
  const GemmOperands ops = random_operands(spec, seed, mode);
  const EmulatedGemm got = run_gemm(kernel, spec, ops, svl_bits);
  const std::vector<double> ref = reference_gemm(spec, ops);

  double max_diff = 0;
  double max_ref = 0;
  for (int j = 0; j < spec.n; ++j) {
    for (int i = 0; i < spec.m; ++i) {
      const std::size_t at = static_cast<std::size_t>(j) * spec.ldc + i;
      const double d = std::fabs(static_cast<double>(got.c[at]) - ref[at]);
      max_diff = std::isnan(d) ? std::numeric_limits<double>::infinity() : std::max(max_diff, d);
      max_ref = std::max(max_ref, std::fabs(ref[at]));
    }
  }

  Verdict v;
  if (mode == FillMode::kInteger) {
    v.max_error = max_diff;
    v.pass = max_diff == 0;
  } else {
    v.max_error = max_ref > 0 ? max_diff / max_ref : max_diff;
    v.pass = v.max_error <= kUniformTolerance;
  }
  if (!got.guards_intact) v.detail += "C padding or guard modified; ";
  if (!got.reads_in_bounds) v.detail += "read outside operands; ";
  if (!got.writes_in_bounds) v.detail += "write outside C/scratch; ";
  if (got.run.return_value != kernel.return_value) v.detail += "wrong return value; ";
  v.pass = v.pass && v.detail.empty();

  RunReport r;
  r.kernel_id = fmt::format("gemm m={} n={} k={} lda={} ldb={} ldc={} b={}", spec.m, spec.n,
                            spec.k, spec.lda, spec.ldb, spec.ldc, b_layout_name(spec.b_layout));
  r.mode = "emulated";
  r.steps = got.run.steps;
  r.return_value = got.run.return_value;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.verdict = std::move(v);
  return r;
}

std::vector<GoldenMismatch> golden_check(const std::string& fixture_path) {
  return check_golden(load_golden(fixture_path));
}

bool host_has_sme() {
#if defined(__aarch64__) && defined(__linux__) && defined(HWCAP2_SME)
  return (getauxval(AT_HWCAP2) & HWCAP2_SME) != 0;
#else
  return false;
#endif
}

RunReport native_execute(const KernelBuffer& kernel, const std::vector<std::uint64_t>& args,
                         double min_seconds, std::uint64_t iterations_per_call) {
  if (!host_has_sme()) {
    throw Error(ErrorCode::kUnsupportedHost, "native execution needs an AArch64 host with SME");
  }
#if defined(__aarch64__) && defined(__linux__)
  const std::size_t len = kernel.words.size() * 4;
  void* mem = mmap(nullptr, len, PROT_READ | PROT_WRITE, MAP_PRIVATE | MAP_ANONYMOUS, -1, 0);
  if (mem == MAP_FAILED) throw Error(ErrorCode::kUnsupportedHost, "mmap failed");
  std::memcpy(mem, kernel.words.data(), len);
  if (mprotect(mem, len, PROT_READ | PROT_EXEC) != 0) {
    munmap(mem, len);
    throw Error(ErrorCode::kUnsupportedHost, "mprotect failed");
  }
  __builtin___clear_cache(static_cast<char*>(mem), static_cast<char*>(mem) + len);
  using Fn = std::uint64_t (*)(std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t);
  const auto fn = reinterpret_cast<Fn>(mem);
  std::uint64_t a[4] = {};
  std::copy_n(args.begin(), std::min<std::size_t>(4, args.size()), a);

  RunReport r;
  r.kernel_id = fmt::format("native kernel, {} words", kernel.words.size());
  r.mode = "native";
  std::uint64_t total = 0;
  const auto start = std::chrono::steady_clock::now();
  double elapsed = 0;
  do {
    r.return_value = fn(a[0], a[1], a[2], a[3]);
    total += r.return_value * iterations_per_call;
    ++r.steps;
    elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  } while (elapsed < min_seconds);
  munmap(mem, len);
  r.seconds = elapsed;
  r.rate = static_cast<double>(total) / elapsed;
  return r;
#else
  (void)kernel;
  (void)args;
  (void)min_seconds;
  (void)iterations_per_call;
  throw Error(ErrorCode::kUnsupportedHost, "native execution needs an AArch64 host with SME");
#endif
}

}  // namespace sme_forge
