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

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sme_forge/isa.h"

namespace sme_forge {

/// Throws Error{kInvalidOperand | kInvalidImmediate | kUnsupportedForm} if the
/// instruction is not a legal member of its form.
void validate(const Instruction& instr);

/// Bit-exact A64 encoding. Pure; a CBNZ is encoded from its resolved `imm`.
EncodedWord encode(const Instruction& instr);

/// Inverse of encode() over the subset. Words outside the subset throw
/// kUnknownEncoding; widening outer products (BFMOPA, FP16 FMOPA, integer
/// MOPA) are recognized but rejected with kUnsupportedForm.
Instruction decode(EncodedWord word);

/// An instruction sequence with symbolic branch targets. A label maps to the
/// index of the instruction that follows its definition.
struct Program {
  std::vector<Instruction> code;
  std::map<std::string, std::size_t, std::less<>> labels;
};

/// Resolves CBNZ labels to word offsets and encodes every instruction.
/// Throws kUnresolvedLabel or kBranchOutOfRange.
std::vector<EncodedWord> assemble(const Program& program);

/// Appends instructions to a Program and hands out unique label names.
class CodeBuilder {
 public:
  CodeBuilder& emit(Instruction instr);
  CodeBuilder& bind(std::string_view label);
  std::string fresh_label(std::string_view stem);

  /// Loads an arbitrary 64-bit constant with MOVZ + MOVK.
  CodeBuilder& mov_imm(RegisterRef rd, std::uint64_t value);
  /// rd = rn + value, going through `scratch` when the constant does not fit
  /// an ADD immediate.
  CodeBuilder& add_imm(RegisterRef rd, RegisterRef rn, std::uint64_t value,
                       RegisterRef scratch);

  std::size_t size() const { return program_.code.size(); }
  const Program& program() const { return program_; }
  Program take() { return std::move(program_); }

 private:
  Program program_;
  std::map<std::string, int, std::less<>> label_counts_;
};

/// Serialized kernels are raw little-endian 32-bit words with no header.
std::vector<std::uint8_t> to_bytes(std::span<const EncodedWord> words);
std::vector<EncodedWord> from_bytes(std::span<const std::uint8_t> bytes);

}  // namespace sme_forge
