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

#include "sme_forge/golden.h"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <sstream>

#include "sme_forge/asm_text.h"
#include "sme_forge/encoder.h"
#include "sme_forge/error.h"

namespace sme_forge {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<GoldenEntry> parse_golden(std::string_view contents) {
  std::vector<GoldenEntry> entries;
  int line_no = 0;
  std::size_t start = 0;
  while (start < contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    const std::string_view line = trim(contents.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;

    const auto arrow = line.rfind("=>");
    if (arrow == std::string_view::npos) {
      throw Error(ErrorCode::kFixtureParseError, fmt::format("line {}: missing '=>'", line_no));
    }
    const std::string_view text = trim(line.substr(0, arrow));
    const std::string_view hex = trim(line.substr(arrow + 2));
    EncodedWord word = 0;
    auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), word, 16);
    if (text.empty() || hex.size() != 8 || ec != std::errc() || ptr != hex.data() + hex.size()) {
      throw Error(ErrorCode::kFixtureParseError,
                  fmt::format("line {}: expected '<asm> => <8 hex digits>'", line_no));
    }
    entries.push_back({line_no, std::string(text), word});
  }
  return entries;
}

std::vector<GoldenEntry> load_golden(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFixtureParseError, fmt::format("cannot open {}", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_golden(buf.str());
}

std::vector<GoldenMismatch> check_golden(const std::vector<GoldenEntry>& entries) {
  std::vector<GoldenMismatch> mismatches;
  for (const auto& e : entries) {
    try {
      const EncodedWord got = encode(parse_instruction(e.text));
      if (got != e.word) {
        mismatches.push_back({e, fmt::format("encodes to {:08x}", got)});
        continue;
      }
      const std::string back = format(decode(e.word));
      if (back != e.text) mismatches.push_back({e, fmt::format("decodes to '{}'", back)});
    } catch (const Error& err) {
      mismatches.push_back({e, err.what()});
    }
  }
  return mismatches;
}

}  // namespace sme_forge
