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

#include "sme_forge/isa.h"

#include <utility>

namespace sme_forge {

const char* opcode_name(Opcode op) {
  switch (op) {
    case Opcode::kRet: return "ret";
    case Opcode::kMovz: return "movz";
    case Opcode::kMovk: return "movk";
    case Opcode::kAddImm: return "add(imm)";
    case Opcode::kSubImm: return "sub(imm)";
    case Opcode::kAddReg: return "add(reg)";
    case Opcode::kSubReg: return "sub(reg)";
    case Opcode::kCbnz: return "cbnz";
    case Opcode::kSmstart: return "smstart";
    case Opcode::kSmstartSm: return "smstart sm";
    case Opcode::kSmstartZa: return "smstart za";
    case Opcode::kSmstop: return "smstop";
    case Opcode::kSmstopSm: return "smstop sm";
    case Opcode::kSmstopZa: return "smstop za";
    case Opcode::kFmlaVector: return "fmla(vector)";
    case Opcode::kPtrue: return "ptrue";
    case Opcode::kPtruePn: return "ptrue(pn)";
    case Opcode::kWhilelt: return "whilelt";
    case Opcode::kWhileltPn: return "whilelt(pn)";
    case Opcode::kLd1w: return "ld1w";
    case Opcode::kSt1w: return "st1w";
    case Opcode::kLd1wMulti: return "ld1w(multi)";
    case Opcode::kSt1wMulti: return "st1w(multi)";
    case Opcode::kLd1wStrided: return "ld1w(strided)";
    case Opcode::kSt1wStrided: return "st1w(strided)";
    case Opcode::kFmopa: return "fmopa";
    case Opcode::kMovaToTile: return "mova(vector to tile)";
    case Opcode::kMovaFromTile: return "mova(tile to vector)";
    case Opcode::kMovaToTileMulti: return "mova(vectors to tile)";
    case Opcode::kMovaFromTileMulti: return "mova(tile to vectors)";
    case Opcode::kLdrZa: return "ldr(array vector)";
    case Opcode::kStrZa: return "str(array vector)";
  }
  return "?";
}

namespace insn {
namespace {

Instruction make(Opcode op, std::vector<RegisterRef> operands, std::int64_t imm = 0) {
  Instruction i;
  i.op = op;
  i.operands = std::move(operands);
  i.imm = imm;
  return i;
}

std::vector<RegisterRef> group(int first, int count, int stride, ElemSize e) {
  std::vector<RegisterRef> regs;
  for (int r = 0; r < count; ++r) regs.push_back(reg::z(first + r * stride, e));
  return regs;
}

Instruction memory_group(Opcode op, int zt, int count, int stride, RegisterRef png,
                         RegisterRef xn, std::int64_t vl_offset) {
  auto ops = group(zt, count, stride, ElemSize::kS);
  ops.push_back(png);
  ops.push_back(xn);
  return make(op, std::move(ops), vl_offset);
}

}  // namespace

Instruction ret() { return make(Opcode::kRet, {}); }

Instruction movz(RegisterRef rd, std::uint16_t imm, int shift) {
  auto i = make(Opcode::kMovz, {rd}, imm);
  i.shift = static_cast<std::uint8_t>(shift);
  return i;
}

Instruction movk(RegisterRef rd, std::uint16_t imm, int shift) {
  auto i = make(Opcode::kMovk, {rd}, imm);
  i.shift = static_cast<std::uint8_t>(shift);
  return i;
}

Instruction add(RegisterRef rd, RegisterRef rn, std::int64_t imm, int shift) {
  auto i = make(Opcode::kAddImm, {rd, rn}, imm);
  i.shift = static_cast<std::uint8_t>(shift);
  return i;
}

Instruction sub(RegisterRef rd, RegisterRef rn, std::int64_t imm, int shift) {
  auto i = make(Opcode::kSubImm, {rd, rn}, imm);
  i.shift = static_cast<std::uint8_t>(shift);
  return i;
}

Instruction add(RegisterRef rd, RegisterRef rn, RegisterRef rm) {
  return make(Opcode::kAddReg, {rd, rn, rm});
}

Instruction sub(RegisterRef rd, RegisterRef rn, RegisterRef rm) {
  return make(Opcode::kSubReg, {rd, rn, rm});
}

Instruction cbnz(RegisterRef rt, std::string label) {
  auto i = make(Opcode::kCbnz, {rt});
  i.label = std::move(label);
  return i;
}

Instruction cbnz(RegisterRef rt, std::int64_t byte_offset) {
  return make(Opcode::kCbnz, {rt}, byte_offset);
}

Instruction smstart() { return make(Opcode::kSmstart, {}); }
Instruction smstart_sm() { return make(Opcode::kSmstartSm, {}); }
Instruction smstart_za() { return make(Opcode::kSmstartZa, {}); }
Instruction smstop() { return make(Opcode::kSmstop, {}); }
Instruction smstop_sm() { return make(Opcode::kSmstopSm, {}); }
Instruction smstop_za() { return make(Opcode::kSmstopZa, {}); }

Instruction fmla(RegisterRef vd, RegisterRef vn, RegisterRef vm) {
  return make(Opcode::kFmlaVector, {vd, vn, vm});
}

Instruction ptrue(RegisterRef pd) {
  return make(pd.kind == RegKind::kPn ? Opcode::kPtruePn : Opcode::kPtrue, {pd});
}

Instruction whilelt(RegisterRef pd, RegisterRef xn, RegisterRef xm) {
  return make(Opcode::kWhilelt, {pd, xn, xm});
}

Instruction whilelt(RegisterRef pnd, RegisterRef xn, RegisterRef xm, int vlx) {
  auto i = make(Opcode::kWhileltPn, {pnd, xn, xm});
  i.vlx = static_cast<std::uint8_t>(vlx);
  return i;
}

Instruction ld1w(RegisterRef zt, RegisterRef pg, RegisterRef xn, std::int64_t vl_offset) {
  return make(Opcode::kLd1w, {zt, pg, xn}, vl_offset);
}

Instruction st1w(RegisterRef zt, RegisterRef pg, RegisterRef xn, std::int64_t vl_offset) {
  return make(Opcode::kSt1w, {zt, pg, xn}, vl_offset);
}

Instruction ld1w_multi(int zt, int count, RegisterRef png, RegisterRef xn,
                       std::int64_t vl_offset) {
  return memory_group(Opcode::kLd1wMulti, zt, count, 1, png, xn, vl_offset);
}

Instruction st1w_multi(int zt, int count, RegisterRef png, RegisterRef xn,
                       std::int64_t vl_offset) {
  return memory_group(Opcode::kSt1wMulti, zt, count, 1, png, xn, vl_offset);
}

Instruction ld1w_strided(int zt, int count, RegisterRef png, RegisterRef xn,
                         std::int64_t vl_offset) {
  return memory_group(Opcode::kLd1wStrided, zt, count, 16 / count, png, xn, vl_offset);
}

Instruction st1w_strided(int zt, int count, RegisterRef png, RegisterRef xn,
                         std::int64_t vl_offset) {
  return memory_group(Opcode::kSt1wStrided, zt, count, 16 / count, png, xn, vl_offset);
}

Instruction fmopa(RegisterRef tile, RegisterRef pn, RegisterRef pm, RegisterRef zn,
                  RegisterRef zm) {
  return make(Opcode::kFmopa, {tile, pn, pm, zn, zm});
}

Instruction mova_to_tile(RegisterRef tile, bool vertical, RegisterRef ws, int offset,
                         RegisterRef pg, RegisterRef zn) {
  auto i = make(Opcode::kMovaToTile, {tile, ws, pg, zn}, offset);
  i.vertical = vertical;
  return i;
}

Instruction mova_from_tile(RegisterRef zd, RegisterRef pg, RegisterRef tile, bool vertical,
                           RegisterRef ws, int offset) {
  auto i = make(Opcode::kMovaFromTile, {zd, pg, tile, ws}, offset);
  i.vertical = vertical;
  return i;
}

Instruction mova_to_tile(RegisterRef tile, bool vertical, RegisterRef ws, int offset, int zn,
                         int count) {
  std::vector<RegisterRef> ops{tile, ws};
  for (const auto& r : group(zn, count, 1, tile.esize)) ops.push_back(r);
  auto i = make(Opcode::kMovaToTileMulti, std::move(ops), offset);
  i.vertical = vertical;
  return i;
}

Instruction mova_from_tile(int zd, int count, RegisterRef tile, bool vertical, RegisterRef ws,
                           int offset) {
  auto ops = group(zd, count, 1, tile.esize);
  ops.push_back(tile);
  ops.push_back(ws);
  auto i = make(Opcode::kMovaFromTileMulti, std::move(ops), offset);
  i.vertical = vertical;
  return i;
}

Instruction ldr_za(RegisterRef wv, int offset, RegisterRef xn) {
  return make(Opcode::kLdrZa, {reg::za_array(), wv, xn}, offset);
}

Instruction str_za(RegisterRef wv, int offset, RegisterRef xn) {
  return make(Opcode::kStrZa, {reg::za_array(), wv, xn}, offset);
}

}  // namespace insn
}  // namespace sme_forge
