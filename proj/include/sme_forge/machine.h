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


// Functional model of the streaming-SVE / SME state: general registers, Z,
// P, predicate-as-counter state, the ZA array and a sparse byte memory.
// There is no timing model.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "sme_forge/isa.h"

namespace sme_forge {

/// Sparse byte-addressed memory. Only bytes that have been written exist;
/// reading a missing byte yields 0 and is counted, which lets tests prove a
/// kernel stayed inside its buffers.
class Memory {
 public:
  void write(std::uint64_t addr, std::span<const std::uint8_t> bytes);
  void read(std::uint64_t addr, std::span<std::uint8_t> out) const;
  std::vector<std::uint8_t> read(std::uint64_t addr, std::size_t len) const;

  bool defined(std::uint64_t addr) const;
  std::size_t defined_bytes() const { return defined_bytes_; }
  std::uint64_t undefined_reads() const { return undefined_reads_; }
  void clear();

 private:
  static constexpr std::size_t kPageBytes = 4096;
  struct Page {
    std::array<std::uint8_t, kPageBytes> data{};
    std::array<bool, kPageBytes> present{};
  };
  std::unordered_map<std::uint64_t, Page> pages_;
  std::size_t defined_bytes_ = 0;
  mutable std::uint64_t undefined_reads_ = 0;
};

/// A square tile read out of ZA, element bits stored row-major.
struct TileView {
  int tile = 0;
  ElemSize esize = ElemSize::kS;
  int dim = 0;
  std::vector<std::uint64_t> bits;

  std::uint64_t raw(int row, int col) const { return bits[row * dim + col]; }
  float f32(int row, int col) const;
  double f64(int row, int col) const;
};

/// Floating-point operations one instruction performs at the given vector
/// length (FMOPA 2·dim², Neon FMLA 2·lanes), 0 for everything else.
std::uint64_t flops(const Instruction& instr, int svl_bits);

struct RunResult {
  std::uint64_t return_value = 0;
  std::uint64_t steps = 0;
};

class Machine {
 public:
  using Trace = std::function<void(std::size_t pc, const Instruction&)>;
  enum class Step { kContinue, kHalt };

  /// Throws Error{kInvalidSvl} unless svl_bits is 128, 256, 512, 1024 or 2048.
  explicit Machine(int svl_bits = 512);
  void reset(int svl_bits);

  int svl_bits() const { return svl_bits_; }
  int svl_bytes() const { return svl_bits_ / 8; }
  bool streaming() const { return streaming_; }
  bool za_enabled() const { return za_enabled_; }
  std::size_t pc() const { return pc_; }
  void set_pc(std::size_t pc) { pc_ = pc; }

  std::uint64_t x(int i) const { return x_.at(i); }
  void set_x(int i, std::uint64_t v) { x_.at(i) = v; }

  // Raw register storage, svl_bytes per Z vector and one byte per predicate
  // lane (0 or 1). Available regardless of mode so harnesses can inspect and
  // seed state; instructions enforce the mode rules.
  std::span<std::uint8_t> z(int i);
  std::span<const std::uint8_t> z(int i) const;
  std::span<std::uint8_t> p(int i);
  std::span<const std::uint8_t> p(int i) const;
  std::span<std::uint8_t> za() { return za_; }
  std::span<const std::uint8_t> za() const { return za_; }
  /// ZA array vector `v` (0 <= v < svl_bytes).
  std::span<const std::uint8_t> za_vector(int v) const;

  /// Tile view; throws Error{kInvalidOperand} for an illegal tile index.
  TileView read_tile(int tile, ElemSize esize) const;

  Memory& memory() { return memory_; }
  const Memory& memory() const { return memory_; }
  void write_memory(std::uint64_t addr, std::span<const std::uint8_t> bytes) {
    memory_.write(addr, bytes);
  }
  std::vector<std::uint8_t> read_memory(std::uint64_t addr, std::size_t len) const {
    return memory_.read(addr, len);
  }

  /// Executes one instruction at the current pc and advances it.
  Step execute(const Instruction& instr);
  /// Decodes and executes one word.
  Step step(EncodedWord word);

  /// Places args in x0..x7 and runs from word 0 until RET. Throws
  /// Error{kStepBudgetExceeded} after max_steps instructions.
  RunResult run(std::span<const EncodedWord> kernel, std::span<const std::uint64_t> args,
                std::uint64_t max_steps, const Trace& trace = {});

  /// Executions per opcode since the last reset.
  std::uint64_t executed(Opcode op) const { return counts_[static_cast<int>(op)]; }
  std::uint64_t flops_executed() const { return flops_; }

 private:
  struct Counter {
    ElemSize esize = ElemSize::kNone;
    std::uint64_t active = 0;  // leading active elements across the group
  };

  void require_streaming(const Instruction& instr) const;
  void require_za(const Instruction& instr) const;
  void set_streaming(bool on);
  void set_za(bool on);

  std::uint64_t read_gpr(const RegisterRef& r) const;
  void write_gpr(const RegisterRef& r, std::uint64_t v);
  bool lane(int pred, int element, int esize_bytes) const;
  bool counter_lane(int pn, std::uint64_t element) const;
  std::uint8_t* tile_element(int tile, int esize_bytes, int row, int col);

  void exec_fmopa(const Instruction& instr);
  void exec_mova(const Instruction& instr);
  void exec_memory_group(const Instruction& instr);

  int svl_bits_ = 512;
  std::array<std::uint64_t, 32> x_{};
  std::vector<std::uint8_t> z_;
  std::vector<std::uint8_t> p_;
  std::array<Counter, 8> pn_{};
  std::vector<std::uint8_t> za_;
  bool streaming_ = false;
  bool za_enabled_ = false;
  std::size_t pc_ = 0;
  Memory memory_;
  std::array<std::uint64_t, kOpcodeCount> counts_{};
  std::uint64_t flops_ = 0;
};

}  // namespace sme_forge
