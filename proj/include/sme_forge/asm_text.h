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

// Assembly text for the instruction subset.
//
// format() produces the canonical spelling used by the golden fixtures (the
// same text a stock AArch64 disassembler prints). The parser is looser: commas
// and '#' are optional, immediates may be written as products (`32*512`),
// Neon arrangements may be abbreviated (`v0.s`), and `//` starts a comment.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sme_forge/encoder.h"
#include "sme_forge/isa.h"

namespace sme_forge {

std::string format(const Instruction& instr);

/// Parses one instruction. Throws Error{kAsmSyntax} on malformed text and
/// the encoder's validation errors for well-formed but illegal operands.
Instruction parse_instruction(std::string_view text);

/// Parses a program: one instruction per line, `name:` binds a label, blank
/// lines and comments are skipped.
Program parse_program(std::string_view text);

/// One canonical line per word; words outside the subset print as
/// `.inst 0x<hex>`.
std::string disassemble(const std::vector<EncodedWord>& words);

}  // namespace sme_forge
