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

// Symbolic form of the AArch64 instruction subset handled by sme_forge:
// loop/ABI scaffolding, Neon FMLA (vector), the SVE predicate and contiguous
// word load/store forms, and the SME/SME2 outer-product, ZA move and ZA
// array-vector load/store forms used by the generated kernels.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sme_forge {

using EncodedWord = std::uint32_t;

enum class RegKind : std::uint8_t {
  kX,        // general-64 (index 31 is XZR where a form allows it)
  kW,        // general-32
  kZ,        // scalable vector
  kV,        // Neon vector
  kP,        // predicate
  kPn,       // predicate-as-counter, PN8-PN15
  kZaTile,   // ZA tile, element size selects the tile geometry
  kZaArray,  // the whole ZA array, addressed by vector select
};

/// Element size in bits; kNone for operands that carry no size suffix
/// (general registers, governing predicates written as `p0/m`).
enum class ElemSize : std::uint8_t { kNone = 0, kB = 8, kH = 16, kS = 32, kD = 64 };

constexpr int elem_bytes(ElemSize e) { return static_cast<int>(e) / 8; }

struct RegisterRef {
  RegKind kind = RegKind::kX;
  std::uint8_t index = 0;
  ElemSize esize = ElemSize::kNone;

  friend bool operator==(const RegisterRef&, const RegisterRef&) = default;
};

inline constexpr std::uint8_t kZeroRegister = 31;

enum class Opcode : std::uint8_t {
  kRet,
  kMovz,
  kMovk,
  kAddImm,
  kSubImm,
  kAddReg,
  kSubReg,
  kCbnz,
  kSmstart,
  kSmstartSm,
  kSmstartZa,
  kSmstop,
  kSmstopSm,
  kSmstopZa,
  kFmlaVector,
  kPtrue,
  kPtruePn,
  kWhilelt,
  kWhileltPn,
  kLd1w,
  kSt1w,
  kLd1wMulti,
  kSt1wMulti,
  kLd1wStrided,
  kSt1wStrided,
  kFmopa,
  kMovaToTile,
  kMovaFromTile,
  kMovaToTileMulti,
  kMovaFromTileMulti,
  kLdrZa,
  kStrZa,
};

inline constexpr int kOpcodeCount = static_cast<int>(Opcode::kStrZa) + 1;

const char* opcode_name(Opcode op);

/// One instruction of the subset.
///
/// Operands appear in assembly order; register lists are expanded, so
/// `ld1w { z0.s - z3.s }, pn8/z, [x0]` holds z0..z3, pn8 and x0. The meaning
/// of `imm` depends on the form:
///   movz/movk          16-bit payload (`shift` is the lsl amount)
///   add/sub immediate  12-bit payload (`shift` is 0 or 12)
///   cbnz               signed byte offset from this instruction
///   ld1w/st1w          signed offset in vectors (`mul vl` multiples)
///   mova (tile)        first slice offset
///   ldr/str za         vector-select and address offset (0..15)
struct Instruction {
  Opcode op = Opcode::kRet;
  std::vector<RegisterRef> operands;
  std::int64_t imm = 0;
  std::uint8_t shift = 0;
  std::uint8_t vlx = 0;   // whilelt pn: vector group size, 2 or 4
  bool vertical = false;  // ZA tile slice direction
  std::string label;      // cbnz target before assemble() resolves it

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

/// Register and instruction constructors. These only assemble the symbolic
/// form; legality is checked by validate()/encode().
namespace reg {

constexpr RegisterRef x(int i) { return {RegKind::kX, static_cast<std::uint8_t>(i), ElemSize::kNone}; }
constexpr RegisterRef w(int i) { return {RegKind::kW, static_cast<std::uint8_t>(i), ElemSize::kNone}; }
constexpr RegisterRef xzr() { return x(kZeroRegister); }
constexpr RegisterRef z(int i, ElemSize e = ElemSize::kS) {
  return {RegKind::kZ, static_cast<std::uint8_t>(i), e};
}
constexpr RegisterRef v(int i, ElemSize e = ElemSize::kS) {
  return {RegKind::kV, static_cast<std::uint8_t>(i), e};
}
constexpr RegisterRef p(int i, ElemSize e = ElemSize::kNone) {
  return {RegKind::kP, static_cast<std::uint8_t>(i), e};
}
constexpr RegisterRef pn(int i, ElemSize e = ElemSize::kNone) {
  return {RegKind::kPn, static_cast<std::uint8_t>(i), e};
}
constexpr RegisterRef za(int tile, ElemSize e = ElemSize::kS) {
  return {RegKind::kZaTile, static_cast<std::uint8_t>(tile), e};
}
constexpr RegisterRef za_array() { return {RegKind::kZaArray, 0, ElemSize::kNone}; }

}  // namespace reg

namespace insn {

Instruction ret();
Instruction movz(RegisterRef rd, std::uint16_t imm, int shift = 0);
Instruction movk(RegisterRef rd, std::uint16_t imm, int shift = 0);
Instruction add(RegisterRef rd, RegisterRef rn, std::int64_t imm, int shift = 0);
Instruction sub(RegisterRef rd, RegisterRef rn, std::int64_t imm, int shift = 0);
Instruction add(RegisterRef rd, RegisterRef rn, RegisterRef rm);
Instruction sub(RegisterRef rd, RegisterRef rn, RegisterRef rm);
Instruction cbnz(RegisterRef rt, std::string label);
Instruction cbnz(RegisterRef rt, std::int64_t byte_offset);
Instruction smstart();
Instruction smstart_sm();
Instruction smstart_za();
Instruction smstop();
Instruction smstop_sm();
Instruction smstop_za();
Instruction fmla(RegisterRef vd, RegisterRef vn, RegisterRef vm);
Instruction ptrue(RegisterRef pd);
Instruction whilelt(RegisterRef pd, RegisterRef xn, RegisterRef xm);
Instruction whilelt(RegisterRef pnd, RegisterRef xn, RegisterRef xm, int vlx);
Instruction ld1w(RegisterRef zt, RegisterRef pg, RegisterRef xn, std::int64_t vl_offset = 0);
Instruction st1w(RegisterRef zt, RegisterRef pg, RegisterRef xn, std::int64_t vl_offset = 0);
// Consecutive register group zt..zt+count-1.
Instruction ld1w_multi(int zt, int count, RegisterRef png, RegisterRef xn,
                       std::int64_t vl_offset = 0);
Instruction st1w_multi(int zt, int count, RegisterRef png, RegisterRef xn,
                       std::int64_t vl_offset = 0);
// Strided group {zt, zt+8} or {zt, zt+4, zt+8, zt+12}.
Instruction ld1w_strided(int zt, int count, RegisterRef png, RegisterRef xn,
                         std::int64_t vl_offset = 0);
Instruction st1w_strided(int zt, int count, RegisterRef png, RegisterRef xn,
                         std::int64_t vl_offset = 0);
Instruction fmopa(RegisterRef tile, RegisterRef pn, RegisterRef pm, RegisterRef zn,
                  RegisterRef zm);
Instruction mova_to_tile(RegisterRef tile, bool vertical, RegisterRef ws, int offset,
                         RegisterRef pg, RegisterRef zn);
Instruction mova_from_tile(RegisterRef zd, RegisterRef pg, RegisterRef tile, bool vertical,
                           RegisterRef ws, int offset);
// Four- or two-register tile moves; the register group starts at zn and uses
// the tile's element size.
Instruction mova_to_tile(RegisterRef tile, bool vertical, RegisterRef ws, int offset,
                         int zn, int count);
Instruction mova_from_tile(int zd, int count, RegisterRef tile, bool vertical,
                           RegisterRef ws, int offset);
Instruction ldr_za(RegisterRef wv, int offset, RegisterRef xn);
Instruction str_za(RegisterRef wv, int offset, RegisterRef xn);

}  // namespace insn

}  // namespace sme_forge
