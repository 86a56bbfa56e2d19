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


// Register blocking of an M x N output into microkernel executions. Each
// strategy fills the four 16x16 FP32 tiles of a 512-bit ZA differently.

#pragma once

#include <string_view>
#include <vector>

namespace sme_forge {

enum class Strategy { kM32N32, kM16N64, kM64N16 };

struct BlockStrategy {
  Strategy id;
  std::string_view name;
  int tile_rows;  // extent in M
  int tile_cols;  // extent in N
  int a_values_loaded;  // per K step
  int b_values_loaded;

  int loads_per_kstep() const { return a_values_loaded + b_values_loaded; }
  int a_vectors() const { return tile_rows / 16; }
  int b_vectors() const { return tile_cols / 16; }
};

const BlockStrategy& block_strategy(Strategy s);
/// Throws Error{kInvalidStrategy} for unknown names.
Strategy parse_strategy(std::string_view name);

struct BlockExec {
  int m_offset = 0;
  int n_offset = 0;
  Strategy strategy = Strategy::kM32N32;
  int m_active = 0;
  int n_active = 0;

  friend bool operator==(const BlockExec&, const BlockExec&) = default;
};

struct BlockPlan {
  int m = 0;
  int n = 0;
  std::vector<BlockExec> blocks;
};

/// Heterogeneous plan: M32N32 interior in column-major block order, then the
/// M-remainder strip, the N-remainder strip and the corner. Remainders of at
/// most 16 use the 16-wide strategies, larger ones masked M32N32. Throws
/// Error{kInvalidDimension} if m or n < 1.
BlockPlan plan_blocks(int m, int n);

/// Baseline using one strategy everywhere, masked at the edges.
BlockPlan plan_homogeneous(int m, int n, Strategy s = Strategy::kM32N32);

struct PlanCost {
  int microkernel_count = 0;
  int operand_loads_per_kstep = 0;
};

PlanCost plan_cost(const BlockPlan& plan);

}  // namespace sme_forge
