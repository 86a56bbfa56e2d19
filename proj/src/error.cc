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

#include "sme_forge/error.h"

namespace sme_forge {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidOperand: return "InvalidOperand";
    case ErrorCode::kInvalidImmediate: return "InvalidImmediate";
    case ErrorCode::kUnsupportedForm: return "UnsupportedForm";
    case ErrorCode::kUnknownEncoding: return "UnknownEncoding";
    case ErrorCode::kUnresolvedLabel: return "UnresolvedLabel";
    case ErrorCode::kBranchOutOfRange: return "BranchOutOfRange";
    case ErrorCode::kAsmSyntax: return "AsmSyntax";
    case ErrorCode::kInvalidSvl: return "InvalidSVL";
    case ErrorCode::kModeFault: return "ModeFault";
    case ErrorCode::kStepBudgetExceeded: return "StepBudgetExceeded";
    case ErrorCode::kInvalidDimension: return "InvalidDimension";
    case ErrorCode::kInvalidMask: return "InvalidMask";
    case ErrorCode::kInvalidStrategy: return "InvalidStrategy";
    case ErrorCode::kInvalidPanel: return "InvalidPanel";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kUnsupportedDatatype: return "UnsupportedDatatype";
    case ErrorCode::kInvalidTransferSize: return "InvalidTransferSize";
    case ErrorCode::kFixtureParseError: return "FixtureParseError";
    case ErrorCode::kUnsupportedHost: return "UnsupportedHost";
  }
  return "Unknown";
}

}  // namespace sme_forge
