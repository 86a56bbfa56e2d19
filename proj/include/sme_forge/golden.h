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

// Golden encoding fixtures: `<canonical assembly> => <8 lowercase hex>`.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sme_forge/isa.h"

namespace sme_forge {

struct GoldenEntry {
  int line = 0;
  std::string text;
  EncodedWord word = 0;
};

struct GoldenMismatch {
  GoldenEntry entry;
  std::string reason;
};

/// Throws Error{kFixtureParseError} for lines that do not have the
/// `text => hex` shape. Comment (`#`) and blank lines are skipped.
std::vector<GoldenEntry> parse_golden(std::string_view contents);
std::vector<GoldenEntry> load_golden(const std::string& path);

/// Encodes every entry's text and decodes every word; an entry mismatches if
/// either direction disagrees or raises.
std::vector<GoldenMismatch> check_golden(const std::vector<GoldenEntry>& entries);

}  // namespace sme_forge
