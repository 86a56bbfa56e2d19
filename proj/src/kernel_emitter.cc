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

#include <algorithm>
#include <optional>
#include <utility>

#include <fmt/format.h>

#include "sme_forge/error.h"

namespace sme_forge {

namespace {

constexpr RegisterRef kA = reg::x(4);
constexpr RegisterRef kB = reg::x(5);
constexpr RegisterRef kLdbBytes = reg::x(6);
constexpr RegisterRef kC = reg::x(7);
constexpr RegisterRef kK = reg::x(8);
constexpr RegisterRef kLdaBytes = reg::x(9);
constexpr RegisterRef kLdbEffBytes = reg::x(10);
constexpr RegisterRef kTmp = reg::x(11);
constexpr RegisterRef kSlice = reg::w(12);
constexpr RegisterRef kLdcBytes = reg::x(13);
constexpr RegisterRef kMActive = reg::x(14);
constexpr RegisterRef kNActive = reg::x(15);
constexpr RegisterRef kPart = reg::x(16);
constexpr RegisterRef kAddr = reg::x(17);

constexpr int kTileDim = 16;  // FP32 tile at 512-bit SVL
constexpr int kRowBytes = kScratchRowFloats * 4;

int parts(int active) { return (active + kTileDim - 1) / kTileDim; }

// B vectors live above A: z2/z3 next to z0/z1 for M32N32, z4.. otherwise.
int b_base(const BlockStrategy& st) { return st.b_vectors() == 2 ? 2 : 4; }

// Governing predicates of the part-wise masks: A part q in p(2q), B part q
// in p(2q+1), so M32N32 uses p0/p2 for A and p1/p3 for B.
int a_pred(int part) { return 2 * part; }
int b_pred(int part) { return 2 * part + 1; }

void check_masks(const BlockStrategy& st, Masks masks) {
  if (masks.m_active < 1 || masks.m_active > st.tile_rows || masks.n_active < 1 ||
      masks.n_active > st.tile_cols) {
    throw Error(ErrorCode::kInvalidMask,
                fmt::format("masks ({}, {}) outside {} block", masks.m_active, masks.n_active,
                            st.name));
  }
}

// whilelt p, xzr/x16, count for every non-empty 16-lane part.
void emit_part_predicates(CodeBuilder& b, RegisterRef count, int active, int first) {
  for (int q = 0; q < parts(active); ++q) {
    RegisterRef lo = reg::xzr();
    if (q > 0) {
      b.mov_imm(kPart, static_cast<std::uint64_t>(kTileDim * q));
      lo = kPart;
    }
    b.emit(insn::whilelt(reg::p(first + 2 * q, ElemSize::kS), lo, count));
  }
}

// Counter predicate for a multi-vector group, or nothing for single vectors.
void emit_group_predicate(CodeBuilder& b, int pn, RegisterRef count, int vectors) {
  if (vectors > 1) {
    b.emit(insn::whilelt(reg::pn(pn, ElemSize::kS), reg::xzr(), count, vectors));
  }
}

// Z register holding part `mb` of staged C column q.
int c_stage(int mregs, int mb, int q) { return 16 + (16 / mregs) * mb + q; }

}  // namespace

std::string_view b_layout_name(BLayout l) { return l == BLayout::kRowMajor ? "row" : "col"; }

GemmSpec make_spec(int m, int n, int k, BLayout layout) {
  return {m, n, k, m, layout == BLayout::kRowMajor ? n : k, m, layout, DType::kF32};
}

void check_spec(const GemmSpec& s) {
  auto fail = [&](std::string_view why) {
    throw Error(ErrorCode::kInvalidSpec,
                fmt::format("m={} n={} k={} lda={} ldb={} ldc={}: {}", s.m, s.n, s.k, s.lda,
                            s.ldb, s.ldc, why));
  };
  if (s.m < 1 || s.n < 1 || s.k < 1) fail("extents must be positive");
  if (s.lda < s.m) fail("lda < m");
  if (s.ldc < s.m) fail("ldc < m");
  if (s.b_layout == BLayout::kRowMajor && s.ldb < s.n) fail("ldb < n");
  if (s.b_layout == BLayout::kColMajor && s.ldb < s.k) fail("ldb < k");
  if (s.dtype != DType::kF32) fail("only fp32 GEMM is generated");
}

OperandExtents operand_extents(const GemmSpec& s) {
  auto span = [](std::uint64_t ld, int outer, int inner) {
    return ld * static_cast<std::uint64_t>(outer - 1) + static_cast<std::uint64_t>(inner);
  };
  OperandExtents e;
  e.a = span(s.lda, s.k, s.m);
  e.b = s.b_layout == BLayout::kRowMajor ? span(s.ldb, s.k, s.n) : span(s.ldb, s.n, s.k);
  e.c = span(s.ldc, s.n, s.m);
  return e;
}

void emit_microkernel(CodeBuilder& b, Strategy strategy, int k, Masks masks, int lda,
                      int ldb_eff) {
  const auto& st = block_strategy(strategy);
  check_masks(st, masks);
  if (k < 1) throw Error(ErrorCode::kInvalidMask, "k must be positive");
  const int mregs = st.a_vectors();
  const int nregs = st.b_vectors();
  const int zb = b_base(st);

  // set predicate registers
  b.mov_imm(kMActive, static_cast<std::uint64_t>(masks.m_active));
  b.mov_imm(kNActive, static_cast<std::uint64_t>(masks.n_active));
  emit_group_predicate(b, 8, kMActive, mregs);
  emit_group_predicate(b, 9, kNActive, nregs);
  emit_part_predicates(b, kMActive, masks.m_active, a_pred(0));
  emit_part_predicates(b, kNActive, masks.n_active, b_pred(0));
  // set register offset
  b.mov_imm(kLdaBytes, static_cast<std::uint64_t>(lda) * 4);
  b.mov_imm(kLdbEffBytes, static_cast<std::uint64_t>(ldb_eff) * 4);
  b.mov_imm(kK, static_cast<std::uint64_t>(k));

  const std::string loop = b.fresh_label("k_loop");
  b.bind(loop);
  b.emit(insn::sub(kK, kK, 1));
  if (mregs == 1) {
    b.emit(insn::ld1w(reg::z(0), reg::p(a_pred(0)), kA));
  } else {
    b.emit(insn::ld1w_multi(0, mregs, reg::pn(8), kA));
  }
  if (nregs == 1) {
    b.emit(insn::ld1w(reg::z(zb), reg::p(b_pred(0)), kB));
  } else {
    b.emit(insn::ld1w_multi(zb, nregs, reg::pn(9), kB));
  }
  b.emit(insn::add(kA, kA, kLdaBytes));
  b.emit(insn::add(kB, kB, kLdbEffBytes));
  for (int nb = 0; nb < parts(masks.n_active); ++nb) {
    for (int mb = 0; mb < parts(masks.m_active); ++mb) {
      b.emit(insn::fmopa(reg::za(nb * mregs + mb), reg::p(b_pred(nb)), reg::p(a_pred(mb)),
                         reg::z(zb + nb), reg::z(mb)));
    }
  }
  b.emit(insn::cbnz(kK, loop));
}

void emit_c_block_access(CodeBuilder& b, Direction dir, Strategy strategy, Masks masks,
                         int ldc) {
  const auto& st = block_strategy(strategy);
  check_masks(st, masks);
  const int mregs = st.a_vectors();
  const int mparts = parts(masks.m_active);

  b.mov_imm(kMActive, static_cast<std::uint64_t>(masks.m_active));
  if (mregs == 1) {
    b.emit(insn::whilelt(reg::p(0, ElemSize::kS), reg::xzr(), kMActive));
  } else {
    emit_group_predicate(b, 8, kMActive, mregs);
  }
  b.mov_imm(kLdcBytes, static_cast<std::uint64_t>(ldc) * 4);

  auto column = [&](int q, bool load) {
    if (mregs == 1) {
      b.emit(load ? insn::ld1w(reg::z(16 + q), reg::p(0), kC)
                  : insn::st1w(reg::z(16 + q), reg::p(0), kC));
    } else {
      b.emit(load ? insn::ld1w_strided(16 + q, mregs, reg::pn(8), kC)
                  : insn::st1w_strided(16 + q, mregs, reg::pn(8), kC));
    }
    b.emit(insn::add(kC, kC, kLdcBytes));
  };

  // Columns go four at a time: horizontal slice j % 16 of the tiles in
  // column group j / 16.
  for (int j0 = 0; j0 < masks.n_active; j0 += 4) {
    const int cols = std::min(4, masks.n_active - j0);
    const int nb = j0 / kTileDim;
    if (dir == Direction::kLoad) {
      for (int q = 0; q < cols; ++q) column(q, true);
      b.emit(insn::movz(kSlice, static_cast<std::uint16_t>(j0 % kTileDim)));
      for (int mb = 0; mb < mparts; ++mb) {
        b.emit(insn::mova_to_tile(reg::za(nb * mregs + mb), false, kSlice, 0,
                                  c_stage(mregs, mb, 0), 4));
      }
    } else {
      b.emit(insn::movz(kSlice, static_cast<std::uint16_t>(j0 % kTileDim)));
      for (int mb = 0; mb < mparts; ++mb) {
        b.emit(insn::mova_from_tile(c_stage(mregs, mb, 0), 4, reg::za(nb * mregs + mb), false,
                                    kSlice, 0));
      }
      for (int q = 0; q < cols; ++q) column(q, false);
    }
  }
}

std::uint64_t scratch_block_offset(int kb, int nb, int panel) {
  return static_cast<std::uint64_t>(kb) * kTileDim * kRowBytes +
         static_cast<std::uint64_t>(panel) * kPanelCols * 4 +
         static_cast<std::uint64_t>(nb) * kTileDim * 4;
}

void emit_transpose_panel(CodeBuilder& b, int k, int ldb, int n_active, std::int64_t b_col,
                          int scratch_col) {
  if (k < 1 || ldb < k || n_active < 1 || n_active > kPanelCols || b_col < 0 ||
      (scratch_col != 0 && scratch_col != kPanelCols)) {
    throw Error(ErrorCode::kInvalidPanel,
                fmt::format("k={} ldb={} n_active={} scratch_col={}", k, ldb, n_active,
                            scratch_col));
  }
  const int panel = scratch_col / kPanelCols;
  b.mov_imm(kLdbBytes, static_cast<std::uint64_t>(ldb) * 4);

  for (int kb = 0; kb * kTileDim < k; ++kb) {
    const int rows = std::min(kTileDim, k - kb * kTileDim);
    b.mov_imm(kPart, static_cast<std::uint64_t>(rows));
    b.emit(insn::whilelt(reg::p(0, ElemSize::kS), reg::xzr(), kPart));
    for (int nb = 0; nb * kTileDim < n_active; ++nb) {
      const int cols = std::min(kTileDim, n_active - nb * kTileDim);
      b.mov_imm(kPart, static_cast<std::uint64_t>(cols));
      b.emit(insn::whilelt(reg::p(1, ElemSize::kS), reg::xzr(), kPart));

      // Column c of the block into z<c>, masked to the rows that exist.
      const auto first = static_cast<std::uint64_t>(b_col + nb * kTileDim) * ldb +
                         static_cast<std::uint64_t>(kb) * kTileDim;
      b.add_imm(kAddr, reg::x(1), first * 4, kTmp);
      for (int c = 0; c < cols; ++c) {
        b.emit(insn::ld1w(reg::z(c), reg::p(0), kAddr));
        if (c + 1 < cols) b.emit(insn::add(kAddr, kAddr, kLdbBytes));
      }

      // Horizontal in, vertical out.
      for (bool vertical : {false, true}) {
        b.emit(insn::movz(kSlice, 0));
        for (int g = 0; g < 4; ++g) {
          if (g > 0) b.emit(insn::add(kSlice, kSlice, 4));
          b.emit(vertical ? insn::mova_from_tile(4 * g, 4, reg::za(0), true, kSlice, 0)
                          : insn::mova_to_tile(reg::za(0), false, kSlice, 0, 4 * g, 4));
        }
      }

      b.add_imm(kAddr, reg::x(3), scratch_block_offset(kb, nb, panel), kTmp);
      for (int r = 0; r < rows; ++r) {
        b.emit(insn::st1w(reg::z(r), reg::p(1), kAddr));
        if (r + 1 < rows) b.emit(insn::add(kAddr, kAddr, kRowBytes));
      }
    }
  }
}

KernelBuffer generate_gemm(const GemmSpec& spec) {
  check_spec(spec);
  const BlockPlan plan = plan_blocks(spec.m, spec.n);
  const bool col_b = spec.b_layout == BLayout::kColMajor;
  const int ldb_eff = col_b ? kScratchRowFloats : spec.ldb;
  const auto ldc = static_cast<std::uint64_t>(spec.ldc);

  CodeBuilder b;
  b.emit(insn::smstart());
  std::optional<std::pair<int, int>> transposed;  // (n_offset, width) in scratch
  for (const BlockExec& blk : plan.blocks) {
    const Masks masks{blk.m_active, blk.n_active};
    if (col_b && transposed != std::pair{blk.n_offset, blk.n_active}) {
      for (int p = 0; p * kPanelCols < blk.n_active; ++p) {
        emit_transpose_panel(b, spec.k, spec.ldb,
                             std::min(kPanelCols, blk.n_active - p * kPanelCols),
                             blk.n_offset + p * kPanelCols, p * kPanelCols);
      }
      transposed = std::pair{blk.n_offset, blk.n_active};
    }
    const std::uint64_t c_off =
        (static_cast<std::uint64_t>(blk.m_offset) + blk.n_offset * ldc) * 4;

    b.add_imm(kC, reg::x(2), c_off, kTmp);
    emit_c_block_access(b, Direction::kLoad, blk.strategy, masks, spec.ldc);

    b.add_imm(kA, reg::x(0), static_cast<std::uint64_t>(blk.m_offset) * 4, kTmp);
    if (col_b) {
      b.add_imm(kB, reg::x(3), 0, kTmp);
    } else {
      b.add_imm(kB, reg::x(1), static_cast<std::uint64_t>(blk.n_offset) * 4, kTmp);
    }
    emit_microkernel(b, blk.strategy, spec.k, masks, spec.lda, ldb_eff);

    b.add_imm(kC, reg::x(2), c_off, kTmp);
    emit_c_block_access(b, Direction::kStore, blk.strategy, masks, spec.ldc);
  }
  b.emit(insn::smstop());

  KernelBuffer out;
  out.return_value = 2ULL * spec.m * spec.n * spec.k;
  b.mov_imm(reg::x(0), out.return_value);
  b.emit(insn::ret());
  out.words = assemble(b.program());
  out.scratch_bytes = col_b ? static_cast<std::uint64_t>(kRowBytes) * spec.k : 0;
  return out;
}

KernelBuffer generate_transpose(int k, int ldb, int n_active) {
  CodeBuilder b;
  b.emit(insn::smstart());
  emit_transpose_panel(b, k, ldb, n_active);
  b.emit(insn::smstop());
  b.mov_imm(reg::x(0), 0);
  b.emit(insn::ret());
  return {assemble(b.program()), static_cast<std::uint64_t>(kRowBytes) * k, 0};
}

std::uint64_t expected_fmopa_count(const BlockPlan& plan, int k) {
  std::uint64_t total = 0;
  for (const BlockExec& blk : plan.blocks) {
    total += static_cast<std::uint64_t>(parts(blk.m_active)) * parts(blk.n_active) * k;
  }
  return total;
}

}  // namespace sme_forge
