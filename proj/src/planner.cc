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


#include "sme_forge/planner.h"

#include <fmt/format.h>

#include <algorithm>

#include "sme_forge/error.h"

namespace sme_forge {
namespace {

constexpr BlockStrategy kStrategies[] = {
    {Strategy::kM32N32, "M32N32", 32, 32, 32, 32},
    {Strategy::kM16N64, "M16N64", 16, 64, 16, 64},
    {Strategy::kM64N16, "M64N16", 64, 16, 64, 16},
};

void check_dims(int m, int n) {
  if (m < 1 || n < 1) {
    throw Error(ErrorCode::kInvalidDimension, fmt::format("m={} n={}", m, n));
  }
}

// Covers [m0, m0+rows) x [n0, n0+cols) with blocks of one strategy, stepping
// column-major; edge blocks are masked.
void tile_region(std::vector<BlockExec>& out, Strategy s, int m0, int rows, int n0, int cols) {
  const auto& st = block_strategy(s);
  for (int n = 0; n < cols; n += st.tile_cols) {
    for (int m = 0; m < rows; m += st.tile_rows) {
      out.push_back({m0 + m, n0 + n, s, std::min(st.tile_rows, rows - m),
                     std::min(st.tile_cols, cols - n)});
    }
  }
}

}  // namespace

const BlockStrategy& block_strategy(Strategy s) {
  for (const auto& st : kStrategies) {
    if (st.id == s) return st;
  }
  throw Error(ErrorCode::kInvalidStrategy, "unknown strategy");
}

Strategy parse_strategy(std::string_view name) {
  for (const auto& st : kStrategies) {
    if (st.name == name) return st.id;
  }
  throw Error(ErrorCode::kInvalidStrategy, fmt::format("'{}'", name));
}

BlockPlan plan_blocks(int m, int n) {
  check_dims(m, n);
  BlockPlan plan{m, n, {}};
  const int m_full = m / 32 * 32;
  const int n_full = n / 32 * 32;
  const int r_m = m - m_full;
  const int r_n = n - n_full;
  const Strategy m_edge = r_m <= 16 ? Strategy::kM16N64 : Strategy::kM32N32;
  const Strategy n_edge = r_n <= 16 ? Strategy::kM64N16 : Strategy::kM32N32;

  tile_region(plan.blocks, Strategy::kM32N32, 0, m_full, 0, n_full);
  if (r_m > 0) tile_region(plan.blocks, m_edge, m_full, r_m, 0, n_full);
  if (r_n > 0) tile_region(plan.blocks, n_edge, 0, m_full, n_full, r_n);
  if (r_m > 0 && r_n > 0) plan.blocks.push_back({m_full, n_full, n_edge, r_m, r_n});
  return plan;
}

BlockPlan plan_homogeneous(int m, int n, Strategy s) {
  check_dims(m, n);
  BlockPlan plan{m, n, {}};
  tile_region(plan.blocks, s, 0, m, 0, n);
  return plan;
}

PlanCost plan_cost(const BlockPlan& plan) {
  PlanCost cost;
  cost.microkernel_count = static_cast<int>(plan.blocks.size());
  for (const auto& b : plan.blocks) {
    cost.operand_loads_per_kstep += block_strategy(b.strategy).loads_per_kstep();
  }
  return cost;
}

}  // namespace sme_forge
