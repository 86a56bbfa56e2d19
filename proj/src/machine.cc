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

#include "sme_forge/machine.h"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "sme_forge/encoder.h"
#include "sme_forge/error.h"

namespace sme_forge {

// ---------------------------------------------------------------------------
// Memory

void Memory::write(std::uint64_t addr, std::span<const std::uint8_t> bytes) {
  for (std::size_t i = 0; i < bytes.size();) {
    const std::uint64_t a = addr + i;
    Page& page = pages_[a / kPageBytes];
    const std::size_t off = a % kPageBytes;
    const std::size_t n = std::min(bytes.size() - i, kPageBytes - off);
    for (std::size_t j = 0; j < n; ++j) {
      if (!page.present[off + j]) {
        page.present[off + j] = true;
        ++defined_bytes_;
      }
    }
    std::memcpy(page.data.data() + off, bytes.data() + i, n);
    i += n;
  }
}

void Memory::read(std::uint64_t addr, std::span<std::uint8_t> out) const {
  for (std::size_t i = 0; i < out.size();) {
    const std::uint64_t a = addr + i;
    const std::size_t off = a % kPageBytes;
    const std::size_t n = std::min(out.size() - i, kPageBytes - off);
    auto it = pages_.find(a / kPageBytes);
    if (it == pages_.end()) {
      std::fill_n(out.data() + i, n, 0);
      undefined_reads_ += n;
    } else {
      for (std::size_t j = 0; j < n; ++j) {
        if (it->second.present[off + j]) {
          out[i + j] = it->second.data[off + j];
        } else {
          out[i + j] = 0;
          ++undefined_reads_;
        }
      }
    }
    i += n;
  }
}

std::vector<std::uint8_t> Memory::read(std::uint64_t addr, std::size_t len) const {
  std::vector<std::uint8_t> out(len);
  read(addr, out);
  return out;
}

bool Memory::defined(std::uint64_t addr) const {
  auto it = pages_.find(addr / kPageBytes);
  return it != pages_.end() && it->second.present[addr % kPageBytes];
}

void Memory::clear() {
  pages_.clear();
  defined_bytes_ = 0;
  undefined_reads_ = 0;
}

// ---------------------------------------------------------------------------
// Tiles and accounting

float TileView::f32(int row, int col) const {
  return std::bit_cast<float>(static_cast<std::uint32_t>(raw(row, col)));
}

double TileView::f64(int row, int col) const { return std::bit_cast<double>(raw(row, col)); }

std::uint64_t flops(const Instruction& instr, int svl_bits) {
  switch (instr.op) {
    case Opcode::kFmopa: {
      const std::uint64_t dim = svl_bits / static_cast<int>(instr.operands[0].esize);
      return 2 * dim * dim;
    }
    case Opcode::kFmlaVector:
      return instr.operands[0].esize == ElemSize::kD ? 4 : 8;
    default:
      return 0;
  }
}

// ---------------------------------------------------------------------------
// Machine

namespace {

template <typename T>
T load_as(const std::uint8_t* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
void store_as(std::uint8_t* p, T v) {
  std::memcpy(p, &v, sizeof(T));
}

int slice_count(const Instruction& instr) {
  return static_cast<int>(instr.operands.size()) - 2;
}

}  // namespace

Machine::Machine(int svl_bits) { reset(svl_bits); }

void Machine::reset(int svl_bits) {
  if (svl_bits != 128 && svl_bits != 256 && svl_bits != 512 && svl_bits != 1024 &&
      svl_bits != 2048) {
    throw Error(ErrorCode::kInvalidSvl, fmt::format("{} bits", svl_bits));
  }
  svl_bits_ = svl_bits;
  const std::size_t vl = svl_bytes();
  x_.fill(0);
  z_.assign(32 * vl, 0);
  p_.assign(16 * vl, 0);
  pn_.fill({});
  za_.assign(vl * vl, 0);
  streaming_ = false;
  za_enabled_ = false;
  pc_ = 0;
  memory_.clear();
  counts_.fill(0);
  flops_ = 0;
}

std::span<std::uint8_t> Machine::z(int i) {
  return std::span<std::uint8_t>(z_).subspan(static_cast<std::size_t>(i) * svl_bytes(),
                                              svl_bytes());
}
std::span<const std::uint8_t> Machine::z(int i) const {
  return std::span<const std::uint8_t>(z_).subspan(static_cast<std::size_t>(i) * svl_bytes(),
                                                    svl_bytes());
}
std::span<std::uint8_t> Machine::p(int i) {
  return std::span<std::uint8_t>(p_).subspan(static_cast<std::size_t>(i) * svl_bytes(),
                                              svl_bytes());
}
std::span<const std::uint8_t> Machine::p(int i) const {
  return std::span<const std::uint8_t>(p_).subspan(static_cast<std::size_t>(i) * svl_bytes(),
                                                    svl_bytes());
}
std::span<const std::uint8_t> Machine::za_vector(int v) const {
  return std::span<const std::uint8_t>(za_).subspan(static_cast<std::size_t>(v) * svl_bytes(),
                                                     svl_bytes());
}

// Tile t of an eb-byte element size: horizontal slice r is ZA array vector
// r*eb + t (eb tiles interleave row by row).
std::uint8_t* Machine::tile_element(int tile, int esize_bytes, int row, int col) {
  const std::size_t vector = static_cast<std::size_t>(row) * esize_bytes + tile;
  return za_.data() + vector * svl_bytes() + static_cast<std::size_t>(col) * esize_bytes;
}

TileView Machine::read_tile(int tile, ElemSize esize) const {
  const int eb = elem_bytes(esize);
  if (eb == 0 || tile < 0 || tile >= eb) {
    throw Error(ErrorCode::kInvalidOperand,
                fmt::format("tile {} with {}-bit elements", tile, static_cast<int>(esize)));
  }
  TileView view;
  view.tile = tile;
  view.esize = esize;
  view.dim = svl_bytes() / eb;
  view.bits.resize(static_cast<std::size_t>(view.dim) * view.dim);
  auto* self = const_cast<Machine*>(this);
  for (int r = 0; r < view.dim; ++r) {
    for (int c = 0; c < view.dim; ++c) {
      std::uint64_t v = 0;
      std::memcpy(&v, self->tile_element(tile, eb, r, c), eb);
      view.bits[r * view.dim + c] = v;
    }
  }
  return view;
}

void Machine::require_streaming(const Instruction& instr) const {
  if (!streaming_) {
    throw Error(ErrorCode::kModeFault,
                fmt::format("{} needs streaming mode (pc={})", opcode_name(instr.op), pc_));
  }
}

void Machine::require_za(const Instruction& instr) const {
  if (!za_enabled_) {
    throw Error(ErrorCode::kModeFault,
                fmt::format("{} needs ZA enabled (pc={})", opcode_name(instr.op), pc_));
  }
}

// Entering or leaving streaming mode resets the vector and predicate state.
void Machine::set_streaming(bool on) {
  if (on != streaming_) {
    std::fill(z_.begin(), z_.end(), 0);
    std::fill(p_.begin(), p_.end(), 0);
    pn_.fill({});
  }
  streaming_ = on;
}

// ZA is zeroed when it is switched on. Turning it off keeps the bytes so a
// harness can still inspect them.
void Machine::set_za(bool on) {
  if (on && !za_enabled_) std::fill(za_.begin(), za_.end(), 0);
  za_enabled_ = on;
}

std::uint64_t Machine::read_gpr(const RegisterRef& r) const {
  if (r.index == kZeroRegister) return 0;
  const std::uint64_t v = x_[r.index];
  return r.kind == RegKind::kW ? (v & 0xFFFFFFFFu) : v;
}

void Machine::write_gpr(const RegisterRef& r, std::uint64_t v) {
  if (r.index == kZeroRegister) return;
  x_[r.index] = r.kind == RegKind::kW ? (v & 0xFFFFFFFFu) : v;
}

bool Machine::lane(int pred, int element, int esize_bytes) const {
  return p_[static_cast<std::size_t>(pred) * svl_bytes() +
            static_cast<std::size_t>(element) * esize_bytes] & 1u;
}

bool Machine::counter_lane(int pn, std::uint64_t element) const {
  return element < pn_[pn - 8].active;
}

Machine::Step Machine::step(EncodedWord word) { return execute(decode(word)); }

Machine::Step Machine::execute(const Instruction& instr) {
  const auto& ops = instr.operands;
  const int vl = svl_bytes();
  std::size_t next_pc = pc_ + 1;
  ++counts_[static_cast<int>(instr.op)];

  switch (instr.op) {
    case Opcode::kRet:
      return Step::kHalt;
    case Opcode::kSmstart:
      set_streaming(true);
      set_za(true);
      break;
    case Opcode::kSmstartSm: set_streaming(true); break;
    case Opcode::kSmstartZa: set_za(true); break;
    case Opcode::kSmstop:
      set_streaming(false);
      set_za(false);
      break;
    case Opcode::kSmstopSm: set_streaming(false); break;
    case Opcode::kSmstopZa: set_za(false); break;

    case Opcode::kMovz:
      write_gpr(ops[0], static_cast<std::uint64_t>(instr.imm) << instr.shift);
      break;
    case Opcode::kMovk: {
      const std::uint64_t mask = std::uint64_t{0xFFFF} << instr.shift;
      write_gpr(ops[0], (read_gpr(ops[0]) & ~mask) |
                            (static_cast<std::uint64_t>(instr.imm) << instr.shift));
      break;
    }
    case Opcode::kAddImm:
    case Opcode::kSubImm: {
      const std::uint64_t v = static_cast<std::uint64_t>(instr.imm) << instr.shift;
      const std::uint64_t a = read_gpr(ops[1]);
      write_gpr(ops[0], instr.op == Opcode::kAddImm ? a + v : a - v);
      break;
    }
    case Opcode::kAddReg:
    case Opcode::kSubReg: {
      const std::uint64_t a = read_gpr(ops[1]);
      const std::uint64_t b = read_gpr(ops[2]);
      write_gpr(ops[0], instr.op == Opcode::kAddReg ? a + b : a - b);
      break;
    }
    case Opcode::kCbnz:
      if (!instr.label.empty()) {
        throw Error(ErrorCode::kUnresolvedLabel, fmt::format("label '{}'", instr.label));
      }
      if (read_gpr(ops[0]) != 0) {
        next_pc = static_cast<std::size_t>(static_cast<std::int64_t>(pc_) + instr.imm / 4);
      }
      break;

    case Opcode::kFmlaVector: {
      if (streaming_) {
        throw Error(ErrorCode::kModeFault, fmt::format("Neon FMLA in streaming mode (pc={})", pc_));
      }
      std::uint8_t* d = z(ops[0].index).data();
      const std::uint8_t* n = z(ops[1].index).data();
      const std::uint8_t* m = z(ops[2].index).data();
      std::array<std::uint8_t, 16> result{};
      if (ops[0].esize == ElemSize::kD) {
        for (int i = 0; i < 2; ++i) {
          store_as(result.data() + 8 * i,
                   std::fma(load_as<double>(n + 8 * i), load_as<double>(m + 8 * i),
                            load_as<double>(d + 8 * i)));
        }
      } else {
        for (int i = 0; i < 4; ++i) {
          store_as(result.data() + 4 * i,
                   std::fma(load_as<float>(n + 4 * i), load_as<float>(m + 4 * i),
                            load_as<float>(d + 4 * i)));
        }
      }
      // A Neon write clears the rest of the Z register.
      std::fill_n(d, vl, 0);
      std::memcpy(d, result.data(), 16);
      break;
    }

    case Opcode::kPtrue:
    case Opcode::kWhilelt: {
      require_streaming(instr);
      const int eb = elem_bytes(ops[0].esize);
      const int elems = vl / eb;
      std::uint64_t active = elems;
      if (instr.op == Opcode::kWhilelt) {
        const auto lo = static_cast<std::int64_t>(read_gpr(ops[1]));
        const auto hi = static_cast<std::int64_t>(read_gpr(ops[2]));
        active = lo >= hi ? 0 : std::min<std::uint64_t>(elems, static_cast<std::uint64_t>(hi - lo));
      }
      auto lanes = p(ops[0].index);
      std::fill(lanes.begin(), lanes.end(), 0);
      for (std::uint64_t e = 0; e < active; ++e) lanes[e * eb] = 1;
      if (ops[0].index >= 8) pn_[ops[0].index - 8] = {};
      break;
    }
    case Opcode::kPtruePn:
    case Opcode::kWhileltPn: {
      require_streaming(instr);
      const int eb = elem_bytes(ops[0].esize);
      const int group = instr.op == Opcode::kPtruePn ? 1 : instr.vlx;
      std::uint64_t active = static_cast<std::uint64_t>(vl / eb) * group;
      if (instr.op == Opcode::kWhileltPn) {
        const auto lo = static_cast<std::int64_t>(read_gpr(ops[1]));
        const auto hi = static_cast<std::int64_t>(read_gpr(ops[2]));
        active = lo >= hi ? 0 : std::min<std::uint64_t>(active, static_cast<std::uint64_t>(hi - lo));
      } else {
        active = ~std::uint64_t{0};  // every element of any group
      }
      pn_[ops[0].index - 8] = {ops[0].esize, active};
      break;
    }

    case Opcode::kLd1w:
    case Opcode::kSt1w: {
      require_streaming(instr);
      const std::uint64_t base = read_gpr(ops[2]) + static_cast<std::uint64_t>(instr.imm * vl);
      std::uint8_t* zt = z(ops[0].index).data();
      const int pg = ops[1].index;
      for (int e = 0; e < vl / 4; ++e) {
        const bool active = lane(pg, e, 4);
        if (instr.op == Opcode::kLd1w) {
          if (active) {
            memory_.read(base + 4 * e, std::span<std::uint8_t>(zt + 4 * e, 4));
          } else {
            std::fill_n(zt + 4 * e, 4, 0);
          }
        } else if (active) {
          memory_.write(base + 4 * e, std::span<const std::uint8_t>(zt + 4 * e, 4));
        }
      }
      break;
    }
    case Opcode::kLd1wMulti:
    case Opcode::kSt1wMulti:
    case Opcode::kLd1wStrided:
    case Opcode::kSt1wStrided:
      require_streaming(instr);
      exec_memory_group(instr);
      break;

    case Opcode::kFmopa:
      require_streaming(instr);
      require_za(instr);
      exec_fmopa(instr);
      break;

    case Opcode::kMovaToTile:
    case Opcode::kMovaFromTile:
    case Opcode::kMovaToTileMulti:
    case Opcode::kMovaFromTileMulti:
      require_streaming(instr);
      require_za(instr);
      exec_mova(instr);
      break;

    case Opcode::kLdrZa:
    case Opcode::kStrZa: {
      require_za(instr);
      const std::uint64_t v = (read_gpr(ops[1]) + static_cast<std::uint64_t>(instr.imm)) % vl;
      const std::uint64_t addr = read_gpr(ops[2]) + static_cast<std::uint64_t>(instr.imm * vl);
      auto row = std::span<std::uint8_t>(za_).subspan(v * vl, vl);
      if (instr.op == Opcode::kLdrZa) {
        memory_.read(addr, row);
      } else {
        memory_.write(addr, row);
      }
      break;
    }
  }
  flops_ += flops(instr, svl_bits_);
  pc_ = next_pc;
  return Step::kContinue;
}

void Machine::exec_memory_group(const Instruction& instr) {
  const auto& ops = instr.operands;
  const int vl = svl_bytes();
  const int count = slice_count(instr);
  const int pn = ops[count].index;
  const std::uint64_t base = read_gpr(ops[count + 1]) + static_cast<std::uint64_t>(instr.imm * vl);
  const bool load = instr.op == Opcode::kLd1wMulti || instr.op == Opcode::kLd1wStrided;
  const int elems = vl / 4;
  for (int r = 0; r < count; ++r) {
    std::uint8_t* zt = z(ops[r].index).data();
    const std::uint64_t row = base + static_cast<std::uint64_t>(r) * vl;
    for (int e = 0; e < elems; ++e) {
      const bool active = counter_lane(pn, static_cast<std::uint64_t>(r) * elems + e);
      if (load) {
        if (active) {
          memory_.read(row + 4 * e, std::span<std::uint8_t>(zt + 4 * e, 4));
        } else {
          std::fill_n(zt + 4 * e, 4, 0);
        }
      } else if (active) {
        memory_.write(row + 4 * e, std::span<const std::uint8_t>(zt + 4 * e, 4));
      }
    }
  }
}

void Machine::exec_fmopa(const Instruction& instr) {
  const auto& ops = instr.operands;
  const int tile = ops[0].index;
  const int pn = ops[1].index;
  const int pm = ops[2].index;
  const std::uint8_t* zn = z(ops[3].index).data();
  const std::uint8_t* zm = z(ops[4].index).data();
  if (ops[0].esize == ElemSize::kD) {
    const int dim = svl_bytes() / 8;
    for (int i = 0; i < dim; ++i) {
      if (!lane(pn, i, 8)) continue;
      const double a = load_as<double>(zn + 8 * i);
      for (int j = 0; j < dim; ++j) {
        if (!lane(pm, j, 8)) continue;
        std::uint8_t* t = tile_element(tile, 8, i, j);
        store_as(t, std::fma(a, load_as<double>(zm + 8 * j), load_as<double>(t)));
      }
    }
  } else {
    const int dim = svl_bytes() / 4;
    for (int i = 0; i < dim; ++i) {
      if (!lane(pn, i, 4)) continue;
      const float a = load_as<float>(zn + 4 * i);
      for (int j = 0; j < dim; ++j) {
        if (!lane(pm, j, 4)) continue;
        std::uint8_t* t = tile_element(tile, 4, i, j);
        store_as(t, std::fma(a, load_as<float>(zm + 4 * j), load_as<float>(t)));
      }
    }
  }
}

void Machine::exec_mova(const Instruction& instr) {
  const auto& ops = instr.operands;
  const bool to_tile = instr.op == Opcode::kMovaToTile || instr.op == Opcode::kMovaToTileMulti;

  // Operand positions differ per form; pull out tile, slice register,
  // optional governing predicate and the first vector register.
  RegisterRef tile, ws;
  int pg = -1;
  int zfirst = 0;
  int count = 1;
  switch (instr.op) {
    case Opcode::kMovaToTile:
      tile = ops[0];
      ws = ops[1];
      pg = ops[2].index;
      zfirst = ops[3].index;
      break;
    case Opcode::kMovaFromTile:
      zfirst = ops[0].index;
      pg = ops[1].index;
      tile = ops[2];
      ws = ops[3];
      break;
    case Opcode::kMovaToTileMulti:
      count = slice_count(instr);
      tile = ops[0];
      ws = ops[1];
      zfirst = ops[2].index;
      break;
    default:
      count = slice_count(instr);
      zfirst = ops[0].index;
      tile = ops[count];
      ws = ops[count + 1];
      break;
  }

  const int eb = elem_bytes(tile.esize);
  const int dim = svl_bytes() / eb;
  const std::uint64_t w = read_gpr(ws);
  for (int r = 0; r < count; ++r) {
    const int slice = static_cast<int>((w + static_cast<std::uint64_t>(instr.imm + r)) % dim);
    std::uint8_t* zreg = z(zfirst + r).data();
    for (int e = 0; e < dim; ++e) {
      if (pg >= 0 && !lane(pg, e, eb)) continue;
      std::uint8_t* t = instr.vertical ? tile_element(tile.index, eb, e, slice)
                                       : tile_element(tile.index, eb, slice, e);
      if (to_tile) {
        std::memcpy(t, zreg + e * eb, eb);
      } else {
        std::memcpy(zreg + e * eb, t, eb);
      }
    }
  }
}

RunResult Machine::run(std::span<const EncodedWord> kernel, std::span<const std::uint64_t> args,
                       std::uint64_t max_steps, const Trace& trace) {
  if (args.size() > 8) {
    throw Error(ErrorCode::kInvalidOperand, fmt::format("{} arguments, at most 8", args.size()));
  }
  std::vector<Instruction> code;
  code.reserve(kernel.size());
  for (EncodedWord w : kernel) code.push_back(decode(w));

  for (std::size_t i = 0; i < args.size(); ++i) x_[i] = args[i];
  pc_ = 0;
  RunResult result;
  while (true) {
    if (result.steps >= max_steps) {
      throw Error(ErrorCode::kStepBudgetExceeded, fmt::format("{} steps", max_steps));
    }
    if (pc_ >= code.size()) {
      throw Error(ErrorCode::kUnknownEncoding,
                  fmt::format("pc {} is outside the {}-word kernel", pc_, code.size()));
    }
    const Instruction& instr = code[pc_];
    if (trace) trace(pc_, instr);
    ++result.steps;
    if (execute(instr) == Step::kHalt) break;
  }
  result.return_value = x_[0];
  return result;
}

}  // namespace sme_forge
