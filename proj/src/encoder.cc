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

#include "sme_forge/encoder.h"

#include <fmt/format.h>

#include <bit>
#include <optional>

#include "sme_forge/error.h"

namespace sme_forge {
namespace {

[[noreturn]] void fail(ErrorCode code, const Instruction& instr, std::string_view what) {
  throw Error(code, fmt::format("{}: {}", opcode_name(instr.op), what));
}

void require(bool ok, ErrorCode code, const Instruction& instr, std::string_view what) {
  if (!ok) fail(code, instr, what);
}

void operand_count(const Instruction& instr, std::size_t n) {
  require(instr.operands.size() == n, ErrorCode::kInvalidOperand, instr,
          fmt::format("expected {} operands, got {}", n, instr.operands.size()));
}

bool is_gpr(const RegisterRef& r) { return r.kind == RegKind::kX || r.kind == RegKind::kW; }

// General register usable as data (no SP, no ZR).
void require_gpr(const Instruction& instr, const RegisterRef& r) {
  require(is_gpr(r) && r.index <= 30 && r.esize == ElemSize::kNone,
          ErrorCode::kInvalidOperand, instr, "expected x0-x30 or w0-w30");
}

void require_x(const Instruction& instr, const RegisterRef& r, bool allow_zr = false) {
  require(r.kind == RegKind::kX && (r.index <= 30 || (allow_zr && r.index == kZeroRegister)) &&
              r.esize == ElemSize::kNone,
          ErrorCode::kInvalidOperand, instr, "expected 64-bit general register");
}

void require_same_width(const Instruction& instr, const RegisterRef& a, const RegisterRef& b) {
  require(a.kind == b.kind, ErrorCode::kInvalidOperand, instr, "mixed register widths");
}

// Slice-select registers W12-W15.
void require_slice_reg(const Instruction& instr, const RegisterRef& r) {
  require(r.kind == RegKind::kW && r.index >= 12 && r.index <= 15, ErrorCode::kInvalidOperand,
          instr, "slice index must be w12-w15");
}

void require_z(const Instruction& instr, const RegisterRef& r, std::optional<ElemSize> e) {
  require(r.kind == RegKind::kZ && r.index <= 31, ErrorCode::kInvalidOperand, instr,
          "expected scalable vector register");
  if (e) require(r.esize == *e, ErrorCode::kInvalidOperand, instr, "wrong element size");
  require(r.esize != ElemSize::kNone, ErrorCode::kInvalidOperand, instr,
          "vector needs an element size");
}

void require_governing(const Instruction& instr, const RegisterRef& r) {
  require(r.kind == RegKind::kP && r.index <= 7 && r.esize == ElemSize::kNone,
          ErrorCode::kInvalidOperand, instr, "governing predicate must be p0-p7");
}

void require_counter(const Instruction& instr, const RegisterRef& r, bool sized) {
  require(r.kind == RegKind::kPn && r.index >= 8 && r.index <= 15, ErrorCode::kInvalidOperand,
          instr, "expected pn8-pn15");
  require((r.esize != ElemSize::kNone) == sized, ErrorCode::kInvalidOperand, instr,
          sized ? "predicate-as-counter needs an element size" : "unexpected element size");
}

int tile_bits(ElemSize e) { return std::countr_zero(static_cast<unsigned>(elem_bytes(e))); }

void require_tile(const Instruction& instr, const RegisterRef& r) {
  require(r.kind == RegKind::kZaTile && r.esize != ElemSize::kNone, ErrorCode::kInvalidOperand,
          instr, "expected ZA tile");
  require(r.index < elem_bytes(r.esize), ErrorCode::kInvalidOperand, instr,
          fmt::format("tile index {} out of range for {}-bit elements", r.index,
                      static_cast<int>(r.esize)));
}

void require_range(const Instruction& instr, std::int64_t v, std::int64_t lo, std::int64_t hi,
                   std::string_view what) {
  require(v >= lo && v <= hi, ErrorCode::kInvalidImmediate, instr,
          fmt::format("{} {} outside [{}, {}]", what, v, lo, hi));
}

// Register group shape for the multi-vector forms: consecutive or strided.
void require_group(const Instruction& instr, int count, bool strided, ElemSize e) {
  require(count == 2 || count == 4, ErrorCode::kInvalidOperand, instr,
          "register group must hold 2 or 4 vectors");
  const int first = instr.operands[0].index;
  const int stride = strided ? 16 / count : 1;
  for (int r = 0; r < count; ++r) {
    require_z(instr, instr.operands[r], e);
    require(instr.operands[r].index == first + r * stride, ErrorCode::kInvalidOperand, instr,
            "register group is not contiguous");
  }
  if (strided) {
    require((first & 16) + (first & (stride - 1)) == first, ErrorCode::kInvalidOperand, instr,
            "strided group must start at z0-z7/z16-z23 (pairs) or z0-z3/z16-z19 (quads)");
  } else {
    require(first % count == 0, ErrorCode::kInvalidOperand, instr,
            "group base must be a multiple of the group size");
  }
}

int count_of_group(const Instruction& instr, std::size_t trailing) {
  return static_cast<int>(instr.operands.size() - trailing);
}

// Offset field widths for tile slices. The tile number and the slice offset
// share a fixed-width field; bigger elements mean more tiles, fewer offsets.
int single_offset_bits(ElemSize e) { return 4 - tile_bits(e); }
int multi_offset_bits(ElemSize e, int count) {
  return count == 2 ? 3 - tile_bits(e) : std::max(0, 2 - tile_bits(e));
}

int size_field(ElemSize e) { return tile_bits(e); }

void validate_mova_single(const Instruction& instr, const RegisterRef& tile,
                          const RegisterRef& ws, const RegisterRef& pg, const RegisterRef& z) {
  require_tile(instr, tile);
  require_slice_reg(instr, ws);
  require_governing(instr, pg);
  require_z(instr, z, tile.esize);
  require_range(instr, instr.imm, 0, (1 << single_offset_bits(tile.esize)) - 1, "slice offset");
}

void validate_mova_multi(const Instruction& instr, const RegisterRef& tile,
                         const RegisterRef& ws, int count) {
  require_tile(instr, tile);
  require_slice_reg(instr, ws);
  const int limit = (1 << multi_offset_bits(tile.esize, count)) * count;
  require(instr.imm % count == 0, ErrorCode::kInvalidImmediate, instr,
          "slice offset must be a multiple of the group size");
  require_range(instr, instr.imm, 0, limit - count, "slice offset");
}

void validate_group_memory(const Instruction& instr, bool strided) {
  require(instr.operands.size() == 4 || instr.operands.size() == 6, ErrorCode::kInvalidOperand,
          instr, "expected a 2- or 4-register group");
  const int count = count_of_group(instr, 2);
  require_group(instr, count, strided, ElemSize::kS);
  require_counter(instr, instr.operands[count], false);
  require_x(instr, instr.operands[count + 1]);
  require(instr.imm % count == 0, ErrorCode::kInvalidImmediate, instr,
          "offset must be a multiple of the group size");
  require_range(instr, instr.imm, -8 * count, 7 * count, "vector offset");
}

}  // namespace

void validate(const Instruction& instr) {
  const auto& ops = instr.operands;
  switch (instr.op) {
    case Opcode::kRet:
    case Opcode::kSmstart:
    case Opcode::kSmstartSm:
    case Opcode::kSmstartZa:
    case Opcode::kSmstop:
    case Opcode::kSmstopSm:
    case Opcode::kSmstopZa:
      operand_count(instr, 0);
      return;
    case Opcode::kMovz:
    case Opcode::kMovk:
      operand_count(instr, 1);
      require_gpr(instr, ops[0]);
      require_range(instr, instr.imm, 0, 0xFFFF, "immediate");
      require(instr.shift % 16 == 0 && instr.shift <= (ops[0].kind == RegKind::kX ? 48 : 16),
              ErrorCode::kInvalidImmediate, instr, "shift must be a multiple of 16 within width");
      return;
    case Opcode::kAddImm:
    case Opcode::kSubImm:
      operand_count(instr, 2);
      require_gpr(instr, ops[0]);
      require_gpr(instr, ops[1]);
      require_same_width(instr, ops[0], ops[1]);
      require_range(instr, instr.imm, 0, 4095, "immediate");
      require(instr.shift == 0 || instr.shift == 12, ErrorCode::kInvalidImmediate, instr,
              "shift must be 0 or 12");
      return;
    case Opcode::kAddReg:
    case Opcode::kSubReg:
      operand_count(instr, 3);
      for (const auto& r : ops) require_gpr(instr, r);
      require_same_width(instr, ops[0], ops[1]);
      require_same_width(instr, ops[0], ops[2]);
      return;
    case Opcode::kCbnz:
      operand_count(instr, 1);
      require_gpr(instr, ops[0]);
      require(instr.imm % 4 == 0, ErrorCode::kInvalidImmediate, instr,
              "branch offset must be word aligned");
      require_range(instr, instr.imm, -(std::int64_t{1} << 20), (std::int64_t{1} << 20) - 4,
                    "branch offset");
      return;
    case Opcode::kFmlaVector:
      operand_count(instr, 3);
      for (const auto& r : ops) {
        require(r.kind == RegKind::kV && r.index <= 31, ErrorCode::kInvalidOperand, instr,
                "expected Neon vector register");
        require(r.esize == ops[0].esize, ErrorCode::kInvalidOperand, instr,
                "arrangements differ");
      }
      require(ops[0].esize == ElemSize::kS || ops[0].esize == ElemSize::kD,
              ErrorCode::kInvalidOperand, instr, "only .4s and .2d arrangements");
      return;
    case Opcode::kPtrue:
      operand_count(instr, 1);
      require(ops[0].kind == RegKind::kP && ops[0].index <= 15 &&
                  ops[0].esize != ElemSize::kNone,
              ErrorCode::kInvalidOperand, instr, "expected sized predicate p0-p15");
      return;
    case Opcode::kPtruePn:
      operand_count(instr, 1);
      require_counter(instr, ops[0], true);
      return;
    case Opcode::kWhilelt:
      operand_count(instr, 3);
      require(ops[0].kind == RegKind::kP && ops[0].index <= 15 &&
                  ops[0].esize != ElemSize::kNone,
              ErrorCode::kInvalidOperand, instr, "expected sized predicate p0-p15");
      require_x(instr, ops[1], true);
      require_x(instr, ops[2], true);
      return;
    case Opcode::kWhileltPn:
      operand_count(instr, 3);
      require_counter(instr, ops[0], true);
      require_x(instr, ops[1], true);
      require_x(instr, ops[2], true);
      require(instr.vlx == 2 || instr.vlx == 4, ErrorCode::kInvalidImmediate, instr,
              "vector group multiplier must be 2 or 4");
      return;
    case Opcode::kLd1w:
    case Opcode::kSt1w:
      operand_count(instr, 3);
      require_z(instr, ops[0], ElemSize::kS);
      require_governing(instr, ops[1]);
      require_x(instr, ops[2]);
      require_range(instr, instr.imm, -8, 7, "vector offset");
      return;
    case Opcode::kLd1wMulti:
    case Opcode::kSt1wMulti:
      validate_group_memory(instr, false);
      return;
    case Opcode::kLd1wStrided:
    case Opcode::kSt1wStrided:
      validate_group_memory(instr, true);
      return;
    case Opcode::kFmopa:
      operand_count(instr, 5);
      require_tile(instr, ops[0]);
      require(ops[0].esize == ElemSize::kS || ops[0].esize == ElemSize::kD,
              ErrorCode::kInvalidOperand, instr, "non-widening FMOPA needs a .s or .d tile");
      require_governing(instr, ops[1]);
      require_governing(instr, ops[2]);
      require_z(instr, ops[3], ops[0].esize);
      require_z(instr, ops[4], ops[0].esize);
      return;
    case Opcode::kMovaToTile:
      operand_count(instr, 4);
      validate_mova_single(instr, ops[0], ops[1], ops[2], ops[3]);
      return;
    case Opcode::kMovaFromTile:
      operand_count(instr, 4);
      validate_mova_single(instr, ops[2], ops[3], ops[1], ops[0]);
      return;
    case Opcode::kMovaToTileMulti: {
      require(ops.size() == 4 || ops.size() == 6, ErrorCode::kInvalidOperand, instr,
              "expected a 2- or 4-register group");
      const int count = count_of_group(instr, 2);
      // The group sits after the tile and slice register.
      Instruction group_view = instr;
      group_view.operands.assign(ops.begin() + 2, ops.end());
      require_tile(instr, ops[0]);
      require_group(group_view, count, false, ops[0].esize);
      validate_mova_multi(instr, ops[0], ops[1], count);
      return;
    }
    case Opcode::kMovaFromTileMulti: {
      require(ops.size() == 4 || ops.size() == 6, ErrorCode::kInvalidOperand, instr,
              "expected a 2- or 4-register group");
      const int count = count_of_group(instr, 2);
      require_tile(instr, ops[count]);
      require_group(instr, count, false, ops[count].esize);
      validate_mova_multi(instr, ops[count], ops[count + 1], count);
      return;
    }
    case Opcode::kLdrZa:
    case Opcode::kStrZa:
      operand_count(instr, 3);
      require(ops[0].kind == RegKind::kZaArray, ErrorCode::kInvalidOperand, instr,
              "expected za array operand");
      require_slice_reg(instr, ops[1]);
      require_x(instr, ops[2]);
      require_range(instr, instr.imm, 0, 15, "vector offset");
      return;
  }
  fail(ErrorCode::kUnsupportedForm, instr, "not in the supported subset");
}

EncodedWord encode(const Instruction& instr) {
  validate(instr);
  const auto& ops = instr.operands;
  auto u = [](auto v) { return static_cast<std::uint32_t>(v); };
  auto sf = [&](const RegisterRef& r) { return r.kind == RegKind::kX ? 0x80000000u : 0u; };
  auto imm4 = [&](std::int64_t v) { return (u(v) & 0xFu) << 16; };

  switch (instr.op) {
    case Opcode::kRet: return 0xD65F03C0u;
    case Opcode::kSmstart: return 0xD503477Fu;
    case Opcode::kSmstartSm: return 0xD503437Fu;
    case Opcode::kSmstartZa: return 0xD503457Fu;
    case Opcode::kSmstop: return 0xD503467Fu;
    case Opcode::kSmstopSm: return 0xD503427Fu;
    case Opcode::kSmstopZa: return 0xD503447Fu;
    case Opcode::kMovz:
    case Opcode::kMovk:
      return sf(ops[0]) | (instr.op == Opcode::kMovz ? 0x52800000u : 0x72800000u) |
             u(instr.shift / 16) << 21 | u(instr.imm) << 5 | ops[0].index;
    case Opcode::kAddImm:
    case Opcode::kSubImm:
      return sf(ops[0]) | (instr.op == Opcode::kAddImm ? 0x11000000u : 0x51000000u) |
             u(instr.shift == 12) << 22 | u(instr.imm) << 10 | u(ops[1].index) << 5 |
             ops[0].index;
    case Opcode::kAddReg:
    case Opcode::kSubReg:
      return sf(ops[0]) | (instr.op == Opcode::kAddReg ? 0x0B000000u : 0x4B000000u) |
             u(ops[2].index) << 16 | u(ops[1].index) << 5 | ops[0].index;
    case Opcode::kCbnz:
      return sf(ops[0]) | 0x35000000u | (u(instr.imm / 4) & 0x7FFFFu) << 5 | ops[0].index;
    case Opcode::kFmlaVector:
      return 0x4E20CC00u | u(ops[0].esize == ElemSize::kD) << 22 | u(ops[2].index) << 16 |
             u(ops[1].index) << 5 | ops[0].index;
    case Opcode::kPtrue:
      return 0x2518E3E0u | u(size_field(ops[0].esize)) << 22 | ops[0].index;
    case Opcode::kPtruePn:
      return 0x25207810u | u(size_field(ops[0].esize)) << 22 | u(ops[0].index - 8);
    case Opcode::kWhilelt:
      return 0x25201400u | u(size_field(ops[0].esize)) << 22 | u(ops[2].index) << 16 |
             u(ops[1].index) << 5 | ops[0].index;
    case Opcode::kWhileltPn:
      return 0x25204410u | u(size_field(ops[0].esize)) << 22 | u(ops[2].index) << 16 |
             u(instr.vlx == 4) << 13 | u(ops[1].index) << 5 | u(ops[0].index - 8);
    case Opcode::kLd1w:
    case Opcode::kSt1w:
      return (instr.op == Opcode::kLd1w ? 0xA540A000u : 0xE540E000u) | imm4(instr.imm) |
             u(ops[1].index) << 10 | u(ops[2].index) << 5 | ops[0].index;
    case Opcode::kLd1wMulti:
    case Opcode::kSt1wMulti:
    case Opcode::kLd1wStrided:
    case Opcode::kSt1wStrided: {
      const int count = count_of_group(instr, 2);
      const bool strided =
          instr.op == Opcode::kLd1wStrided || instr.op == Opcode::kSt1wStrided;
      const bool store = instr.op == Opcode::kSt1wMulti || instr.op == Opcode::kSt1wStrided;
      const std::uint32_t base = (strided ? 0xA1404000u : 0xA0404000u) | (store ? 0x00200000u : 0u);
      const unsigned zt = ops[0].index;
      // Consecutive groups keep the base register in place (its low bits are
      // zero); strided groups split it into a high-half flag and a low index.
      const std::uint32_t zfield = strided ? ((zt & 16u) | (zt & 7u)) : zt;
      return base | imm4(instr.imm / count) | u(count == 4) << 15 |
             u(ops[count].index - 8) << 10 | u(ops[count + 1].index) << 5 | zfield;
    }
    case Opcode::kFmopa:
      return (ops[0].esize == ElemSize::kS ? 0x80800000u : 0x80C00000u) |
             u(ops[4].index) << 16 | u(ops[2].index) << 13 | u(ops[1].index) << 10 |
             u(ops[3].index) << 5 | ops[0].index;
    case Opcode::kMovaToTile:
    case Opcode::kMovaFromTile: {
      const bool to_tile = instr.op == Opcode::kMovaToTile;
      const auto& tile = to_tile ? ops[0] : ops[2];
      const auto& ws = to_tile ? ops[1] : ops[3];
      const auto& pg = to_tile ? ops[2] : ops[1];
      const auto& z = to_tile ? ops[3] : ops[0];
      const std::uint32_t field =
          u(tile.index) << single_offset_bits(tile.esize) | u(instr.imm);
      const std::uint32_t common = u(size_field(tile.esize)) << 22 | u(instr.vertical) << 15 |
                                   u(ws.index - 12) << 13 | u(pg.index) << 10;
      return to_tile ? 0xC0000000u | common | u(z.index) << 5 | field
                     : 0xC0020000u | common | field << 5 | z.index;
    }
    case Opcode::kMovaToTileMulti:
    case Opcode::kMovaFromTileMulti: {
      const bool to_tile = instr.op == Opcode::kMovaToTileMulti;
      const int count = count_of_group(instr, 2);
      const auto& tile = to_tile ? ops[0] : ops[count];
      const auto& ws = to_tile ? ops[1] : ops[count + 1];
      const unsigned zfirst = to_tile ? ops[2].index : ops[0].index;
      const int off_bits = multi_offset_bits(tile.esize, count);
      const std::uint32_t field = u(tile.index) << off_bits | u(instr.imm / count);
      const std::uint32_t common = u(size_field(tile.esize)) << 22 | u(instr.vertical) << 15 |
                                   u(ws.index - 12) << 13 | u(count == 4) << 10;
      return to_tile ? 0xC0040000u | common | zfirst << 5 | field
                     : 0xC0060000u | common | field << 5 | zfirst;
    }
    case Opcode::kLdrZa:
    case Opcode::kStrZa:
      return (instr.op == Opcode::kLdrZa ? 0xE1000000u : 0xE1200000u) |
             u(ops[1].index - 12) << 13 | u(ops[2].index) << 5 | u(instr.imm);
  }
  fail(ErrorCode::kUnsupportedForm, instr, "not in the supported subset");
}

namespace {

ElemSize size_from_field(std::uint32_t f) {
  switch (f & 3u) {
    case 0: return ElemSize::kB;
    case 1: return ElemSize::kH;
    case 2: return ElemSize::kS;
    default: return ElemSize::kD;
  }
}

std::int64_t sign_extend(std::uint32_t v, int bits) {
  const auto shift = 64 - bits;
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(v) << shift) >> shift;
}

constexpr std::uint32_t bits(std::uint32_t w, int hi, int lo) {
  return (w >> lo) & ((1u << (hi - lo + 1)) - 1u);
}

bool is_widening_mopa(EncodedWord w) {
  return (w & 0xFFC00000u) == 0x81800000u ||  // BFMOPA / FMOPA (widening) into .s
         (w & 0xFE800000u) == 0xA0800000u;    // SMOPA / UMOPA / SUMOPA / USMOPA
}

std::optional<Instruction> decode_candidate(EncodedWord w) {
  using namespace insn;
  auto gpr = [](bool is64, std::uint32_t i) { return is64 ? reg::x(i) : reg::w(i); };
  const bool is64 = (w >> 31) != 0;

  switch (w) {
    case 0xD65F03C0u: return ret();
    case 0xD503477Fu: return smstart();
    case 0xD503437Fu: return smstart_sm();
    case 0xD503457Fu: return smstart_za();
    case 0xD503467Fu: return smstop();
    case 0xD503427Fu: return smstop_sm();
    case 0xD503447Fu: return smstop_za();
    default: break;
  }
  if ((w & 0x7F800000u) == 0x52800000u || (w & 0x7F800000u) == 0x72800000u) {
    const auto rd = gpr(is64, bits(w, 4, 0));
    const auto imm = static_cast<std::uint16_t>(bits(w, 20, 5));
    const int shift = static_cast<int>(bits(w, 22, 21)) * 16;
    return (w & 0x20000000u) ? movk(rd, imm, shift) : movz(rd, imm, shift);
  }
  if ((w & 0x7F800000u) == 0x11000000u || (w & 0x7F800000u) == 0x51000000u) {
    const auto rd = gpr(is64, bits(w, 4, 0));
    const auto rn = gpr(is64, bits(w, 9, 5));
    const int shift = bits(w, 22, 22) ? 12 : 0;
    const std::int64_t imm = bits(w, 21, 10);
    return (w & 0x40000000u) ? sub(rd, rn, imm, shift) : add(rd, rn, imm, shift);
  }
  if ((w & 0x7F200000u) == 0x0B000000u || (w & 0x7F200000u) == 0x4B000000u) {
    const auto rd = gpr(is64, bits(w, 4, 0));
    const auto rn = gpr(is64, bits(w, 9, 5));
    const auto rm = gpr(is64, bits(w, 20, 16));
    return (w & 0x40000000u) ? sub(rd, rn, rm) : add(rd, rn, rm);
  }
  if ((w & 0x7F000000u) == 0x35000000u) {
    return cbnz(gpr(is64, bits(w, 4, 0)), sign_extend(bits(w, 23, 5), 19) * 4);
  }
  if ((w & 0xFFA0FC00u) == 0x4E20CC00u) {
    const auto e = bits(w, 22, 22) ? ElemSize::kD : ElemSize::kS;
    return fmla(reg::v(bits(w, 4, 0), e), reg::v(bits(w, 9, 5), e), reg::v(bits(w, 20, 16), e));
  }
  if ((w & 0xFF3FFFF0u) == 0x2518E3E0u) {
    return ptrue(reg::p(bits(w, 3, 0), size_from_field(bits(w, 23, 22))));
  }
  if ((w & 0xFF3FFFF8u) == 0x25207810u) {
    return ptrue(reg::pn(bits(w, 2, 0) + 8, size_from_field(bits(w, 23, 22))));
  }
  if ((w & 0xFF20FC10u) == 0x25201400u) {
    return whilelt(reg::p(bits(w, 3, 0), size_from_field(bits(w, 23, 22))),
                   reg::x(bits(w, 9, 5)), reg::x(bits(w, 20, 16)));
  }
  if ((w & 0xFF20DC18u) == 0x25204410u) {
    return whilelt(reg::pn(bits(w, 2, 0) + 8, size_from_field(bits(w, 23, 22))),
                   reg::x(bits(w, 9, 5)), reg::x(bits(w, 20, 16)), bits(w, 13, 13) ? 4 : 2);
  }
  if ((w & 0xFFF0E000u) == 0xA540A000u || (w & 0xFFF0E000u) == 0xE540E000u) {
    const auto zt = reg::z(bits(w, 4, 0));
    const auto pg = reg::p(bits(w, 12, 10));
    const auto xn = reg::x(bits(w, 9, 5));
    const auto off = sign_extend(bits(w, 19, 16), 4);
    return (w >> 30) == 3 ? st1w(zt, pg, xn, off) : ld1w(zt, pg, xn, off);
  }
  if ((w & 0xFEC06000u) == 0xA0404000u) {
    const bool strided = (w & 0x01000000u) != 0;
    const bool store = (w & 0x00200000u) != 0;
    const int count = bits(w, 15, 15) ? 4 : 2;
    const auto png = reg::pn(bits(w, 12, 10) + 8);
    const auto xn = reg::x(bits(w, 9, 5));
    const auto off = sign_extend(bits(w, 19, 16), 4) * count;
    int zt;
    if (strided) {
      zt = static_cast<int>(bits(w, 4, 4) * 16 + (count == 2 ? bits(w, 2, 0) : bits(w, 1, 0)));
    } else {
      zt = static_cast<int>(bits(w, 4, 0) & ~static_cast<std::uint32_t>(count - 1));
    }
    if (strided) {
      return store ? st1w_strided(zt, count, png, xn, off) : ld1w_strided(zt, count, png, xn, off);
    }
    return store ? st1w_multi(zt, count, png, xn, off) : ld1w_multi(zt, count, png, xn, off);
  }
  if ((w & 0xFFA00000u) == 0x80800000u && (w & 0x00400000u ? true : (w & 0x18u) == 0)) {
    const auto e = (w & 0x00400000u) ? ElemSize::kD : ElemSize::kS;
    const int tile = static_cast<int>(e == ElemSize::kD ? bits(w, 2, 0) : bits(w, 1, 0));
    return fmopa(reg::za(tile, e), reg::p(bits(w, 12, 10)), reg::p(bits(w, 15, 13)),
                 reg::z(bits(w, 9, 5), e), reg::z(bits(w, 20, 16), e));
  }
  if ((w & 0xFF380000u) == 0xC0000000u) {
    const auto e = size_from_field(bits(w, 23, 22));
    const bool vertical = bits(w, 15, 15) != 0;
    const auto ws = reg::w(bits(w, 14, 13) + 12);
    const auto pg = reg::p(bits(w, 12, 10));
    const int ob = single_offset_bits(e);
    const std::uint32_t opc = bits(w, 18, 17);
    if (opc == 0 || opc == 1) {
      const std::uint32_t field = opc == 0 ? bits(w, 3, 0) : bits(w, 8, 5);
      const auto tile = reg::za(static_cast<int>(field >> ob), e);
      const int offset = static_cast<int>(field & ((1u << ob) - 1u));
      if (opc == 0) return mova_to_tile(tile, vertical, ws, offset, pg, reg::z(bits(w, 9, 5), e));
      return mova_from_tile(reg::z(bits(w, 4, 0), e), pg, tile, vertical, ws, offset);
    }
    const int count = bits(w, 10, 10) ? 4 : 2;
    const int tb = tile_bits(e);
    const int ob_multi = multi_offset_bits(e, count);
    const int field_bits = tb + ob_multi;
    const std::uint32_t field = opc == 2 ? bits(w, 2, 0) : bits(w, 7, 5);
    const auto fmask = (1u << field_bits) - 1u;
    const auto tile = reg::za(static_cast<int>((field & fmask) >> ob_multi), e);
    const int offset = static_cast<int>(field & ((1u << ob_multi) - 1u)) * count;
    if (opc == 2) {
      const int zn = static_cast<int>(bits(w, 9, 5));
      return mova_to_tile(tile, vertical, ws, offset, zn & ~(count - 1), count);
    }
    const int zd = static_cast<int>(bits(w, 4, 0));
    return mova_from_tile(zd & ~(count - 1), count, tile, vertical, ws, offset);
  }
  if ((w & 0xFFDF9C10u) == 0xE1000000u) {
    const auto wv = reg::w(bits(w, 14, 13) + 12);
    const auto xn = reg::x(bits(w, 9, 5));
    const int off = static_cast<int>(bits(w, 3, 0));
    return (w & 0x00200000u) ? str_za(wv, off, xn) : ldr_za(wv, off, xn);
  }
  return std::nullopt;
}

}  // namespace

Instruction decode(EncodedWord word) {
  if (is_widening_mopa(word)) {
    throw Error(ErrorCode::kUnsupportedForm,
                fmt::format("{:08x}: widening outer products are not executable", word));
  }
  std::optional<Instruction> candidate;
  try {
    candidate = decode_candidate(word);
    // Reserved bits and field combinations the subset does not produce show
    // up as a mismatch on re-encoding.
    if (candidate && encode(*candidate) != word) candidate.reset();
  } catch (const Error&) {
    candidate.reset();
  }
  if (!candidate) {
    throw Error(ErrorCode::kUnknownEncoding, fmt::format("{:08x} is not in the subset", word));
  }
  return *candidate;
}

std::vector<EncodedWord> assemble(const Program& program) {
  std::vector<EncodedWord> words;
  words.reserve(program.code.size());
  for (std::size_t i = 0; i < program.code.size(); ++i) {
    const Instruction& instr = program.code[i];
    if (instr.op == Opcode::kCbnz && !instr.label.empty()) {
      auto it = program.labels.find(instr.label);
      if (it == program.labels.end()) {
        throw Error(ErrorCode::kUnresolvedLabel, fmt::format("label '{}'", instr.label));
      }
      const std::int64_t distance =
          static_cast<std::int64_t>(it->second) - static_cast<std::int64_t>(i);
      if (distance < -(1 << 18) || distance >= (1 << 18)) {
        throw Error(ErrorCode::kBranchOutOfRange,
                    fmt::format("label '{}' is {} words away", instr.label, distance));
      }
      Instruction resolved = instr;
      resolved.imm = distance * 4;
      words.push_back(encode(resolved));
    } else {
      words.push_back(encode(instr));
    }
  }
  return words;
}

CodeBuilder& CodeBuilder::emit(Instruction instr) {
  program_.code.push_back(std::move(instr));
  return *this;
}

CodeBuilder& CodeBuilder::bind(std::string_view label) {
  auto [it, inserted] = program_.labels.emplace(std::string(label), program_.code.size());
  if (!inserted) {
    throw Error(ErrorCode::kInvalidOperand, fmt::format("label '{}' bound twice", label));
  }
  return *this;
}

std::string CodeBuilder::fresh_label(std::string_view stem) {
  auto it = label_counts_.find(stem);
  if (it == label_counts_.end()) it = label_counts_.emplace(std::string(stem), 0).first;
  return fmt::format("{}_{}", stem, it->second++);
}

CodeBuilder& CodeBuilder::mov_imm(RegisterRef rd, std::uint64_t value) {
  const int chunks = rd.kind == RegKind::kX ? 4 : 2;
  bool first = true;
  for (int c = 0; c < chunks; ++c) {
    const auto part = static_cast<std::uint16_t>(value >> (16 * c));
    if (part == 0) continue;
    emit(first ? insn::movz(rd, part, 16 * c) : insn::movk(rd, part, 16 * c));
    first = false;
  }
  if (first) emit(insn::movz(rd, 0));
  return *this;
}

CodeBuilder& CodeBuilder::add_imm(RegisterRef rd, RegisterRef rn, std::uint64_t value,
                                  RegisterRef scratch) {
  if (value < 4096) {
    emit(insn::add(rd, rn, static_cast<std::int64_t>(value)));
  } else if (value % 4096 == 0 && value / 4096 < 4096) {
    emit(insn::add(rd, rn, static_cast<std::int64_t>(value / 4096), 12));
  } else {
    mov_imm(scratch, value);
    emit(insn::add(rd, rn, scratch));
  }
  return *this;
}

std::vector<std::uint8_t> to_bytes(std::span<const EncodedWord> words) {
  std::vector<std::uint8_t> out;
  out.reserve(words.size() * 4);
  for (EncodedWord w : words) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(w >> (8 * b)));
  }
  return out;
}

std::vector<EncodedWord> from_bytes(std::span<const std::uint8_t> bytes) {
  std::vector<EncodedWord> out;
  out.reserve(bytes.size() / 4);
  for (std::size_t i = 0; i + 4 <= bytes.size(); i += 4) {
    out.push_back(static_cast<EncodedWord>(bytes[i]) | static_cast<EncodedWord>(bytes[i + 1]) << 8 |
                  static_cast<EncodedWord>(bytes[i + 2]) << 16 |
                  static_cast<EncodedWord>(bytes[i + 3]) << 24);
  }
  return out;
}

}  // namespace sme_forge
