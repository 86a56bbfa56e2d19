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

// FP32 small-GEMM generator, C += A * B with A and C column-major.
//
// B is the K x N operand. Row-major B (element (p, j) at p*ldb + j) is the
// transposed-B case and feeds the outer products directly. Column-major B
// (element (p, j) at p + j*ldb) is first transposed through ZA into a
// row-major scratch panel.
//
// Kernel ABI:
//   x0 = A, x1 = B, x2 = C, x3 = scratch (64-byte aligned, scratch_bytes)
//   returns 2*m*n*k in x0
// Registers used inside a kernel: x4-x17, w12, z0-z31, p0-p7, pn8, pn9, ZA.
//
// The building blocks below append to a CodeBuilder and document which
// general registers they expect to be set up. All of them assume streaming
// mode with ZA enabled.

#pragma once

#include <cstdint>
#include <string_view>

#include "sme_forge/encoder.h"
#include "sme_forge/kernel.h"
#include "sme_forge/planner.h"

namespace sme_forge {

enum class BLayout { kRowMajor, kColMajor };

std::string_view b_layout_name(BLayout l);

struct GemmSpec {
  int m = 0;
  int n = 0;
  int k = 0;
  int lda = 0;
  int ldb = 0;
  int ldc = 0;
  BLayout b_layout = BLayout::kRowMajor;
  DType dtype = DType::kF32;
};

/// GemmSpec with the tightest legal leading dimensions.
GemmSpec make_spec(int m, int n, int k, BLayout layout = BLayout::kRowMajor);

/// Throws Error{kInvalidSpec} unless all extents are positive, lda >= m,
/// ldc >= m, ldb >= n (row-major) or ldb >= k (column-major) and dtype is F32.
void check_spec(const GemmSpec& spec);

/// Elements of each operand the kernel may touch: A is lda*(k-1)+m, and so on.
struct OperandExtents {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  std::uint64_t c = 0;
};
OperandExtents operand_extents(const GemmSpec& spec);

/// Scratch rows are 64 floats wide so an M16N64 block can read two
/// transposed 32-column panels side by side.
inline constexpr int kScratchRowFloats = 64;
inline constexpr int kPanelCols = 32;

struct Masks {
  int m_active = 0;
  int n_active = 0;
};

/// Predicate setup plus the outer-product K loop. Expects x4 = A block, x5 = B
/// block; ldb_eff is the distance in elements between consecutive B rows.
/// Tiles whose rows or columns are fully masked get no FMOPA.
/// Throws kInvalidMask or kInvalidStrategy.
void emit_microkernel(CodeBuilder& b, Strategy strategy, int k, Masks masks, int lda,
                      int ldb_eff);

enum class Direction { kLoad, kStore };

/// Moves the C block between memory at x7 and the strategy's tiles. Loads
/// use strided multi-vector LD1W into z16-z31 followed by four-register
/// vector-to-tile moves; stores mirror that. Only the masked block is read
/// or written. Clobbers x7.
void emit_c_block_access(CodeBuilder& b, Direction dir, Strategy strategy, Masks masks,
                         int ldc);

/// Transposes columns [b_col, b_col + n_active) of column-major B into
/// scratch columns [scratch_col, scratch_col + n_active), 16x16 blocks at a
/// time through ZA0. Expects x1 = B and x3 = scratch. Throws kInvalidPanel.
void emit_transpose_panel(CodeBuilder& b, int k, int ldb, int n_active,
                          std::int64_t b_col = 0, int scratch_col = 0);

/// Byte offset of the 16x16 block (kb, nb) of panel `panel` in scratch.
std::uint64_t scratch_block_offset(int kb, int nb, int panel);

/// Complete kernel for `spec`, blocks taken from plan_blocks().
KernelBuffer generate_gemm(const GemmSpec& spec);

/// Stand-alone transpose of one K x n_active panel: x1 = panel start,
/// x3 = scratch. Returns 0.
KernelBuffer generate_transpose(int k, int ldb, int n_active);

/// FMOPA instructions the generated kernel executes.
std::uint64_t expected_fmopa_count(const BlockPlan& plan, int k);

}  // namespace sme_forge
