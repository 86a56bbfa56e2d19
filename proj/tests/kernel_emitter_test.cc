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

#include "sme_forge/kernel_emitter.h"

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <random>

#include "sme_forge/runner.h"
#include "test_util.h"

namespace sme_forge {
namespace {

using testing::error_of;

constexpr std::uint64_t kA = 0x100000;
constexpr std::uint64_t kB = 0x200000;
constexpr std::uint64_t kC = 0x300000;
constexpr std::uint64_t kScratch = 0x400000;

void put_floats(Machine& m, std::uint64_t addr, const std::vector<float>& v) {
  m.write_memory(addr, {reinterpret_cast<const std::uint8_t*>(v.data()), v.size() * 4});
}

std::vector<float> get_floats(const Machine& m, std::uint64_t addr, std::size_t n) {
  const auto bytes = m.read_memory(addr, n * 4);
  std::vector<float> out(n);
  std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

// Wraps a fragment in smstart / smstop / ret. ZA survives the smstop.
std::vector<EncodedWord> wrap(const std::function<void(CodeBuilder&)>& body) {
  CodeBuilder b;
  b.emit(insn::smstart());
  body(b);
  b.emit(insn::smstop());
  b.emit(insn::ret());
  return assemble(b.program());
}

// x4 and x5 are the microkernel's A/B pointers, x7 the C block pointer.
RunResult run_fragment(Machine& m, const std::vector<EncodedWord>& words) {
  const std::uint64_t args[] = {kA, kB, kC, kScratch, kA, kB, 0, kC};
  return m.run(words, args, 10'000'000);
}

TEST(Microkernel, BasisVectors) {
  Machine m;
  // A is 32x1 with a one in row 1, B is 1x32 with a one in column 1.
  std::vector<float> a(32, 0.0f), b(32, 0.0f);
  a[1] = 1.0f;
  b[1] = 1.0f;
  put_floats(m, kA, a);
  put_floats(m, kB, b);
  run_fragment(m, wrap([](CodeBuilder& cb) {
                 emit_microkernel(cb, Strategy::kM32N32, 1, {32, 32}, 32, 32);
               }));
  int nonzero = 0;
  for (int t = 0; t < 4; ++t) {
    const auto tile = m.read_tile(t, ElemSize::kS);
    for (int r = 0; r < 16; ++r) {
      for (int c = 0; c < 16; ++c) {
        if (tile.f32(r, c) != 0.0f) {
          ++nonzero;
          EXPECT_EQ(t, 0);
          EXPECT_EQ(r, 1);
          EXPECT_EQ(c, 1);
          EXPECT_EQ(tile.f32(r, c), 1.0f);
        }
      }
    }
  }
  EXPECT_EQ(nonzero, 1);
}

TEST(Microkernel, MaskedBlockTouchesOnlyZa0) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  const int k = 23, lda = 40, ldb = 37;
  Machine m;
  // Only the 16 active rows of A and columns of B exist in memory.
  std::vector<float> a(static_cast<std::size_t>(lda) * k), b(static_cast<std::size_t>(ldb) * k);
  for (auto& v : a) v = dist(rng);
  for (auto& v : b) v = dist(rng);
  for (int p = 0; p < k; ++p) {
    put_floats(m, kA + 4ULL * p * lda, {a.begin() + p * lda, a.begin() + p * lda + 16});
    put_floats(m, kB + 4ULL * p * ldb, {b.begin() + p * ldb, b.begin() + p * ldb + 16});
  }
  run_fragment(m, wrap([&](CodeBuilder& cb) {
                 emit_microkernel(cb, Strategy::kM32N32, k, {16, 16}, lda, ldb);
               }));
  EXPECT_EQ(m.memory().undefined_reads(), 0u);
  for (int t = 1; t < 4; ++t) {
    for (auto bits : m.read_tile(t, ElemSize::kS).bits) EXPECT_EQ(bits, 0u);
  }
  const auto za0 = m.read_tile(0, ElemSize::kS);
  for (int j = 0; j < 16; ++j) {
    for (int i = 0; i < 16; ++i) {
      float acc = 0.0f;
      for (int p = 0; p < k; ++p) acc = std::fma(b[p * ldb + j], a[p * lda + i], acc);
      EXPECT_EQ(std::bit_cast<std::uint32_t>(za0.f32(j, i)), std::bit_cast<std::uint32_t>(acc))
          << i << "," << j;
    }
  }
}

TEST(Microkernel, M32N32LoopBodyShape) {
  CodeBuilder b;
  emit_microkernel(b, Strategy::kM32N32, 512, {32, 32}, 32, 32);
  const Program& prog = b.program();
  ASSERT_EQ(prog.labels.size(), 1u);
  const std::size_t start = prog.labels.begin()->second;
  std::vector<Opcode> body;
  for (std::size_t i = start; i < prog.code.size(); ++i) body.push_back(prog.code[i].op);
  const std::vector<Opcode> want = {Opcode::kSubImm,    Opcode::kLd1wMulti, Opcode::kLd1wMulti,
                                    Opcode::kAddReg,    Opcode::kAddReg,    Opcode::kFmopa,
                                    Opcode::kFmopa,     Opcode::kFmopa,     Opcode::kFmopa,
                                    Opcode::kCbnz};
  EXPECT_EQ(body, want);
  EXPECT_EQ(format(prog.code[start + 5]), "fmopa za0.s, p1/m, p0/m, z2.s, z0.s");
  EXPECT_EQ(format(prog.code[start + 6]), "fmopa za1.s, p1/m, p2/m, z2.s, z1.s");
  EXPECT_EQ(format(prog.code[start + 7]), "fmopa za2.s, p3/m, p0/m, z3.s, z0.s");
  EXPECT_EQ(format(prog.code[start + 8]), "fmopa za3.s, p3/m, p2/m, z3.s, z1.s");
  EXPECT_EQ(format(prog.code[start + 1]), "ld1w { z0.s, z1.s }, pn8/z, [x4]");
  EXPECT_EQ(format(prog.code[start + 2]), "ld1w { z2.s, z3.s }, pn9/z, [x5]");
}

TEST(Microkernel, RejectsBadMasks) {
  CodeBuilder b;
  EXPECT_EQ(error_of([&] { emit_microkernel(b, Strategy::kM32N32, 4, {0, 5}, 32, 32); }),
            ErrorCode::kInvalidMask);
  EXPECT_EQ(error_of([&] { emit_microkernel(b, Strategy::kM32N32, 4, {33, 1}, 32, 32); }),
            ErrorCode::kInvalidMask);
  EXPECT_EQ(error_of([&] { emit_microkernel(b, Strategy::kM16N64, 4, {17, 1}, 32, 64); }),
            ErrorCode::kInvalidMask);
  EXPECT_EQ(error_of([&] { emit_c_block_access(b, Direction::kLoad, Strategy::kM64N16,
                                               {64, 17}, 64); }),
            ErrorCode::kInvalidMask);
  EXPECT_EQ(error_of([&] {
              emit_microkernel(b, static_cast<Strategy>(9), 4, {1, 1}, 32, 32);
            }),
            ErrorCode::kInvalidStrategy);
}

struct CaseParam {
  Strategy s;
  int rows, cols;
};

const CaseParam kStrategies[] = {
    {Strategy::kM32N32, 32, 32}, {Strategy::kM16N64, 16, 64}, {Strategy::kM64N16, 64, 16}};

TEST(CBlock, TileViewsFollowOrientation) {
  for (const auto& cp : kStrategies) {
    const int ldc = cp.rows + 3;
    Machine m;
    std::vector<float> c(static_cast<std::size_t>(ldc) * cp.cols, -1.0f);
    for (int j = 0; j < cp.cols; ++j) {
      for (int i = 0; i < cp.rows; ++i) c[j * ldc + i] = static_cast<float>(i + 100 * j);
    }
    put_floats(m, kC, c);
    run_fragment(m, wrap([&](CodeBuilder& cb) {
                   emit_c_block_access(cb, Direction::kLoad, cp.s, {cp.rows, cp.cols}, ldc);
                 }));
    const int mregs = cp.rows / 16;
    for (int nb = 0; nb < cp.cols / 16; ++nb) {
      for (int mb = 0; mb < mregs; ++mb) {
        const auto tile = m.read_tile(nb * mregs + mb, ElemSize::kS);
        for (int r = 0; r < 16; ++r) {
          for (int col = 0; col < 16; ++col) {
            ASSERT_EQ(tile.f32(r, col), static_cast<float>(16 * mb + col + 100 * (16 * nb + r)));
          }
        }
      }
    }
  }
}

TEST(CBlock, LoadThenStoreIsIdentity) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto& cp = kStrategies[trial % 3];
    const Masks masks{1 + static_cast<int>(rng() % cp.rows), 1 + static_cast<int>(rng() % cp.cols)};
    const int ldc = masks.m_active + static_cast<int>(rng() % 9);
    Machine m;
    std::vector<float> c(static_cast<std::size_t>(ldc) * masks.n_active);
    for (auto& v : c) v = std::bit_cast<float>(static_cast<std::uint32_t>(rng()));
    put_floats(m, kC, c);
    const std::size_t defined = m.memory().defined_bytes();
    run_fragment(m, wrap([&](CodeBuilder& cb) {
                   emit_c_block_access(cb, Direction::kLoad, cp.s, masks, ldc);
                   cb.emit(insn::add(reg::x(7), reg::x(2), 0));  // load moved x7
                   emit_c_block_access(cb, Direction::kStore, cp.s, masks, ldc);
                 }));
    EXPECT_EQ(m.read_memory(kC, c.size() * 4),
              std::vector<std::uint8_t>(reinterpret_cast<std::uint8_t*>(c.data()),
                                        reinterpret_cast<std::uint8_t*>(c.data()) + c.size() * 4));
    EXPECT_EQ(m.memory().defined_bytes(), defined);
    EXPECT_EQ(m.memory().undefined_reads(), 0u);
  }
}

TEST(CBlock, MaskedStoreTouchesOnlyActiveBlock) {
  // Store a zeroed ZA over a 32x32 block filled with ones: exactly the
  // 16x16 masked corner becomes zero.
  const int ldc = 32;
  Machine m;
  put_floats(m, kC, std::vector<float>(ldc * 32, 1.0f));
  run_fragment(m, wrap([&](CodeBuilder& cb) {
                 emit_c_block_access(cb, Direction::kStore, Strategy::kM32N32, {16, 16}, ldc);
               }));
  const auto c = get_floats(m, kC, ldc * 32);
  int zeros = 0;
  for (int j = 0; j < 32; ++j) {
    for (int i = 0; i < 32; ++i) {
      const bool inside = i < 16 && j < 16;
      EXPECT_EQ(c[j * ldc + i], inside ? 0.0f : 1.0f);
      zeros += c[j * ldc + i] == 0.0f;
    }
  }
  EXPECT_EQ(zeros, 256);
}

// Runs the stand-alone transpose on a column-major K x n panel.
std::vector<float> transpose_in_emulator(const std::vector<float>& b, int k, int ldb, int n,
                                         Machine& m) {
  for (int j = 0; j < n; ++j) {
    put_floats(m, kB + 4ULL * j * ldb, {b.begin() + j * ldb, b.begin() + j * ldb + k});
  }
  const KernelBuffer kb = generate_transpose(k, ldb, n);
  EXPECT_EQ(kb.scratch_bytes, 256u * k);
  m.write_memory(kScratch, std::vector<std::uint8_t>(kb.scratch_bytes, 0));
  const std::uint64_t args[] = {0, kB, 0, kScratch};
  m.run(kb.words, args, 1'000'000);
  return get_floats(m, kScratch, kb.scratch_bytes / 4);
}

TEST(Transpose, Identity) {
  Machine m;
  std::vector<float> b(16 * 16, 0.0f);
  for (int i = 0; i < 16; ++i) b[i * 16 + i] = 1.0f;
  const auto s = transpose_in_emulator(b, 16, 16, 16, m);
  for (int p = 0; p < 16; ++p) {
    for (int j = 0; j < 64; ++j) EXPECT_EQ(s[p * 64 + j], (p == j) ? 1.0f : 0.0f);
  }
}

TEST(Transpose, AnalyticPattern) {
  Machine m;
  // Column-major storage of B(p, j) = 16p + j.
  std::vector<float> b(16 * 16);
  for (int j = 0; j < 16; ++j) {
    for (int p = 0; p < 16; ++p) b[j * 16 + p] = static_cast<float>(16 * p + j);
  }
  const auto s = transpose_in_emulator(b, 16, 16, 16, m);
  for (int p = 0; p < 16; ++p) {
    for (int j = 0; j < 16; ++j) EXPECT_EQ(s[p * 64 + j], static_cast<float>(16 * p + j));
  }
}

TEST(Transpose, RandomPanelWithPadding) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> dist(-4.0f, 4.0f);
  const int k = 48, ldb = 50, n = 32;
  std::vector<float> b(static_cast<std::size_t>(ldb) * n, std::nanf(""));
  for (int j = 0; j < n; ++j) {
    for (int p = 0; p < k; ++p) b[j * ldb + p] = dist(rng);
  }
  Machine m;
  const auto s = transpose_in_emulator(b, k, ldb, n, m);
  EXPECT_EQ(m.memory().undefined_reads(), 0u);
  for (int p = 0; p < k; ++p) {
    for (int j = 0; j < 64; ++j) {
      const float want = j < n ? b[j * ldb + p] : 0.0f;
      ASSERT_EQ(std::bit_cast<std::uint32_t>(s[p * 64 + j]), std::bit_cast<std::uint32_t>(want));
    }
  }
}

TEST(Transpose, PartialPanelLeavesRestUntouched) {
  std::mt19937_64 rng(5);
  const int k = 21, ldb = 23, n = 19;
  std::vector<float> b(static_cast<std::size_t>(ldb) * n);
  for (auto& v : b) v = static_cast<float>(static_cast<int>(rng() % 1000));
  Machine m;
  const auto s = transpose_in_emulator(b, k, ldb, n, m);
  EXPECT_EQ(m.memory().undefined_reads(), 0u);
  for (int p = 0; p < k; ++p) {
    for (int j = 0; j < 64; ++j) EXPECT_EQ(s[p * 64 + j], j < n ? b[j * ldb + p] : 0.0f);
  }
}

TEST(Transpose, BlocksStart64ByteAligned) {
  for (int kb = 0; kb < 8; ++kb) {
    for (int nb = 0; nb < 2; ++nb) {
      for (int p = 0; p < 2; ++p) EXPECT_EQ(scratch_block_offset(kb, nb, p) % 64, 0u);
    }
  }
  // Every scratch store issued by a full GEMM lands on a 64-byte boundary.
  const GemmSpec spec = make_spec(40, 70, 35, BLayout::kColMajor);
  const auto kernel = generate_gemm(spec);
  const auto ops = random_operands(spec, 1, FillMode::kInteger);
  Machine m;
  // Reuse the runner's layout but trace scratch stores.
  int stores = 0;
  bool aligned = true;
  const auto ext = operand_extents(spec);
  m.write_memory(kAddrA, {reinterpret_cast<const std::uint8_t*>(ops.a.data()), ext.a * 4});
  m.write_memory(kAddrB, {reinterpret_cast<const std::uint8_t*>(ops.b.data()), ext.b * 4});
  m.write_memory(kAddrC, {reinterpret_cast<const std::uint8_t*>(ops.c.data()), ext.c * 4});
  const std::uint64_t args[] = {kAddrA, kAddrB, kAddrC, kAddrScratch};
  m.run(kernel.words, args, 10'000'000, [&](std::size_t, const Instruction& in) {
    if (in.op != Opcode::kSt1w) return;
    const std::uint64_t addr = m.x(in.operands[2].index);
    if (addr >= kAddrScratch && addr < kAddrScratch + kernel.scratch_bytes) {
      ++stores;
      aligned = aligned && (addr - kAddrScratch) % 64 == 0;
    }
  });
  EXPECT_GT(stores, 0);
  EXPECT_TRUE(aligned);
}

TEST(Transpose, RejectsBadPanels) {
  CodeBuilder b;
  EXPECT_EQ(error_of([&] { emit_transpose_panel(b, 8, 8, 33); }), ErrorCode::kInvalidPanel);
  EXPECT_EQ(error_of([&] { emit_transpose_panel(b, 8, 8, 0); }), ErrorCode::kInvalidPanel);
  EXPECT_EQ(error_of([&] { emit_transpose_panel(b, 8, 7, 4); }), ErrorCode::kInvalidPanel);
  EXPECT_EQ(error_of([&] { emit_transpose_panel(b, 8, 8, 4, 0, 16); }), ErrorCode::kInvalidPanel);
}

// Same-precision triple loop; exact for small integers.
std::vector<float> float_reference(const GemmSpec& s, const GemmOperands& ops) {
  std::vector<float> c = ops.c;
  for (int j = 0; j < s.n; ++j) {
    for (int i = 0; i < s.m; ++i) {
      float acc = c[j * s.ldc + i];
      for (int p = 0; p < s.k; ++p) {
        const float bv = s.b_layout == BLayout::kRowMajor ? ops.b[p * s.ldb + j]
                                                          : ops.b[j * s.ldb + p];
        acc += ops.a[p * s.lda + i] * bv;
      }
      c[j * s.ldc + i] = acc;
    }
  }
  return c;
}

TEST(Gemm, Exact32Cube) {
  const GemmSpec spec = make_spec(32, 32, 32);
  const auto kernel = generate_gemm(spec);
  EXPECT_EQ(kernel.scratch_bytes, 0u);
  EXPECT_EQ(kernel.words.back(), 0xD65F03C0u);
  const auto ops = random_operands(spec, 42, FillMode::kInteger);
  const auto got = run_gemm(kernel, spec, ops);
  const auto want = float_reference(spec, ops);
  for (std::size_t i = 0; i < want.size(); ++i) {
    ASSERT_EQ(std::bit_cast<std::uint32_t>(got.c[i]), std::bit_cast<std::uint32_t>(want[i])) << i;
  }
  EXPECT_EQ(got.run.return_value, 2u * 32 * 32 * 32);
  EXPECT_TRUE(got.guards_intact);
  EXPECT_TRUE(got.reads_in_bounds);
  EXPECT_TRUE(got.writes_in_bounds);
}

TEST(Gemm, Shape80x80x512) {
  const auto r = verify_gemm(make_spec(80, 80, 512), 2024, FillMode::kUniform);
  ASSERT_TRUE(r.verdict.has_value());
  EXPECT_TRUE(r.verdict->pass) << r.verdict->detail << " err=" << r.verdict->max_error;
  EXPECT_LE(r.verdict->max_error, 1e-5);
  EXPECT_EQ(r.return_value, 2u * 80 * 80 * 512);
}

TEST(Gemm, FmopaCount80x80) {
  // 4 full 32x32 blocks, one 16x64, one 64x16 and the 16x16 corner: 25 tiles.
  const GemmSpec spec = make_spec(80, 80, 512);
  const auto got = run_gemm(generate_gemm(spec), spec, random_operands(spec, 1, FillMode::kInteger));
  EXPECT_EQ(got.fmopa_count, 25u * 512);
  EXPECT_EQ(expected_fmopa_count(plan_blocks(80, 80), 512), 25u * 512);
}

TEST(Gemm, SingleElement) {
  const GemmSpec spec = make_spec(1, 1, 1);
  GemmOperands ops{{3.0f}, {-2.5f}, {10.0f}};
  const auto got = run_gemm(generate_gemm(spec), spec, ops);
  EXPECT_EQ(got.c[0], 10.0f + 3.0f * -2.5f);
  EXPECT_EQ(got.run.return_value, 2u);
}

TEST(Gemm, ColumnMajorAllStrategies) {
  GemmSpec spec = make_spec(33, 65, 7, BLayout::kColMajor);
  spec.ldb = spec.k + 3;
  for (const FillMode mode : {FillMode::kInteger, FillMode::kUniform}) {
    const auto r = verify_gemm(spec, 9, mode);
    EXPECT_TRUE(r.verdict->pass) << r.verdict->detail << " err=" << r.verdict->max_error;
  }
  const auto plan = plan_blocks(33, 65);
  bool seen[3] = {};
  for (const auto& blk : plan.blocks) seen[static_cast<int>(blk.strategy)] = true;
  EXPECT_TRUE(seen[0] && seen[1] && seen[2]);
}

TEST(Gemm, RejectsInvalidSpecs) {
  EXPECT_EQ(error_of([] { generate_gemm(make_spec(4, 4, 0)); }), ErrorCode::kInvalidSpec);
  EXPECT_EQ(error_of([] { verify_gemm(make_spec(0, 4, 4), 1); }), ErrorCode::kInvalidSpec);
  GemmSpec s = make_spec(8, 8, 8);
  s.lda = 7;
  EXPECT_EQ(error_of([&] { generate_gemm(s); }), ErrorCode::kInvalidSpec);
  s = make_spec(8, 8, 8, BLayout::kColMajor);
  s.ldb = 7;
  EXPECT_EQ(error_of([&] { generate_gemm(s); }), ErrorCode::kInvalidSpec);
  s = make_spec(8, 8, 8);
  s.dtype = DType::kF64;
  EXPECT_EQ(error_of([&] { generate_gemm(s); }), ErrorCode::kInvalidSpec);
}

TEST(Gemm, RandomSpecsMatchReference) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 60; ++trial) {
    GemmSpec s;
    s.m = 1 + static_cast<int>(rng() % 96);
    s.n = 1 + static_cast<int>(rng() % 96);
    s.k = 1 + static_cast<int>(rng() % 64);
    s.b_layout = trial % 2 ? BLayout::kColMajor : BLayout::kRowMajor;
    s.lda = s.m + static_cast<int>(rng() % 5);
    s.ldc = s.m + static_cast<int>(rng() % 5);
    s.ldb = (s.b_layout == BLayout::kRowMajor ? s.n : s.k) + static_cast<int>(rng() % 5);
    const auto mode = (trial / 2) % 2 ? FillMode::kUniform : FillMode::kInteger;
    const auto r = verify_gemm(s, rng(), mode);
    ASSERT_TRUE(r.verdict->pass) << r.kernel_id << ": " << r.verdict->detail
                                 << " err=" << r.verdict->max_error;
    // FMOPA count follows the plan.
    const auto got = run_gemm(generate_gemm(s), s, random_operands(s, 0, FillMode::kInteger));
    EXPECT_EQ(got.fmopa_count, expected_fmopa_count(plan_blocks(s.m, s.n), s.k));
  }
}

}  // namespace
}  // namespace sme_forge
