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

#include "sme_forge/asm_text.h"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <vector>

#include "sme_forge/error.h"

namespace sme_forge {
namespace {

// ---------------------------------------------------------------------------
// Formatting

char size_suffix(ElemSize e) {
  switch (e) {
    case ElemSize::kB: return 'b';
    case ElemSize::kH: return 'h';
    case ElemSize::kS: return 's';
    case ElemSize::kD: return 'd';
    case ElemSize::kNone: break;
  }
  return '?';
}

// Small magnitudes print in decimal, everything else in hex.
std::string number(std::int64_t v) {
  if (v < 0) return "-" + number(-v);
  if (v > 9) return fmt::format("0x{:x}", v);
  return fmt::format("{}", v);
}

std::string imm(std::int64_t v) { return "#" + number(v); }

std::string reg_name(const RegisterRef& r) {
  switch (r.kind) {
    case RegKind::kX: return r.index == kZeroRegister ? "xzr" : fmt::format("x{}", r.index);
    case RegKind::kW: return r.index == kZeroRegister ? "wzr" : fmt::format("w{}", r.index);
    case RegKind::kZ: return fmt::format("z{}.{}", r.index, size_suffix(r.esize));
    case RegKind::kV:
      return fmt::format("v{}.{}", r.index, r.esize == ElemSize::kD ? "2d" : "4s");
    case RegKind::kP:
      return r.esize == ElemSize::kNone ? fmt::format("p{}", r.index)
                                        : fmt::format("p{}.{}", r.index, size_suffix(r.esize));
    case RegKind::kPn:
      return r.esize == ElemSize::kNone ? fmt::format("pn{}", r.index)
                                        : fmt::format("pn{}.{}", r.index, size_suffix(r.esize));
    case RegKind::kZaTile: return fmt::format("za{}.{}", r.index, size_suffix(r.esize));
    case RegKind::kZaArray: return "za";
  }
  return "?";
}

std::string reg_list(std::vector<RegisterRef>::const_iterator first, int count) {
  std::vector<std::string> names;
  for (int i = 0; i < count; ++i) names.push_back(reg_name(first[i]));
  const bool consecutive = count == 4 && first[3].index == first[0].index + 3;
  if (consecutive) return fmt::format("{{ {} - {} }}", names.front(), names.back());
  return fmt::format("{{ {} }}", fmt::join(names, ", "));
}

std::string slice(const RegisterRef& tile, bool vertical, const RegisterRef& ws,
                  std::int64_t offset, int count) {
  const std::string off = count == 1 ? number(offset)
                                     : number(offset) + ":" + number(offset + count - 1);
  return fmt::format("za{}{}.{}[{}, {}]", tile.index, vertical ? 'v' : 'h',
                     size_suffix(tile.esize), reg_name(ws), off);
}

std::string address(const RegisterRef& xn, std::int64_t vl_offset) {
  if (vl_offset == 0) return fmt::format("[{}]", reg_name(xn));
  return fmt::format("[{}, {}, mul vl]", reg_name(xn), imm(vl_offset));
}

std::string mov_alias(const Instruction& instr) {
  const auto& rd = instr.operands[0];
  if (instr.imm == 0 && instr.shift != 0) {
    return fmt::format("movz {}, #0, lsl #{}", reg_name(rd), instr.shift);
  }
  const std::uint64_t raw = static_cast<std::uint64_t>(instr.imm) << instr.shift;
  const std::int64_t value = rd.kind == RegKind::kX
                                 ? static_cast<std::int64_t>(raw)
                                 : static_cast<std::int64_t>(static_cast<std::int32_t>(raw));
  return fmt::format("mov {}, {}", reg_name(rd), imm(value));
}

}  // namespace

std::string format(const Instruction& instr) {
  const auto& ops = instr.operands;
  auto lsl = [&] { return instr.shift ? fmt::format(", lsl #{}", instr.shift) : std::string(); };
  switch (instr.op) {
    case Opcode::kRet: return "ret";
    case Opcode::kSmstart: return "smstart";
    case Opcode::kSmstartSm: return "smstart sm";
    case Opcode::kSmstartZa: return "smstart za";
    case Opcode::kSmstop: return "smstop";
    case Opcode::kSmstopSm: return "smstop sm";
    case Opcode::kSmstopZa: return "smstop za";
    case Opcode::kMovz: return mov_alias(instr);
    case Opcode::kMovk: return fmt::format("movk {}, {}{}", reg_name(ops[0]), imm(instr.imm), lsl());
    case Opcode::kAddImm:
    case Opcode::kSubImm:
      return fmt::format("{} {}, {}, {}{}", instr.op == Opcode::kAddImm ? "add" : "sub",
                         reg_name(ops[0]), reg_name(ops[1]), imm(instr.imm), lsl());
    case Opcode::kAddReg:
    case Opcode::kSubReg:
      return fmt::format("{} {}, {}, {}", instr.op == Opcode::kAddReg ? "add" : "sub",
                         reg_name(ops[0]), reg_name(ops[1]), reg_name(ops[2]));
    case Opcode::kCbnz:
      return fmt::format("cbnz {}, {}", reg_name(ops[0]),
                         instr.label.empty() ? imm(instr.imm) : instr.label);
    case Opcode::kFmlaVector:
      return fmt::format("fmla {}, {}, {}", reg_name(ops[0]), reg_name(ops[1]), reg_name(ops[2]));
    case Opcode::kPtrue:
    case Opcode::kPtruePn: return fmt::format("ptrue {}", reg_name(ops[0]));
    case Opcode::kWhilelt:
      return fmt::format("whilelt {}, {}, {}", reg_name(ops[0]), reg_name(ops[1]), reg_name(ops[2]));
    case Opcode::kWhileltPn:
      return fmt::format("whilelt {}, {}, {}, vlx{}", reg_name(ops[0]), reg_name(ops[1]),
                         reg_name(ops[2]), instr.vlx);
    case Opcode::kLd1w:
    case Opcode::kSt1w:
      return fmt::format("{} {{ {} }}, {}{}, {}", instr.op == Opcode::kLd1w ? "ld1w" : "st1w",
                         reg_name(ops[0]), reg_name(ops[1]),
                         instr.op == Opcode::kLd1w ? "/z" : "", address(ops[2], instr.imm));
    case Opcode::kLd1wMulti:
    case Opcode::kSt1wMulti:
    case Opcode::kLd1wStrided:
    case Opcode::kSt1wStrided: {
      const bool load = instr.op == Opcode::kLd1wMulti || instr.op == Opcode::kLd1wStrided;
      const int count = static_cast<int>(ops.size()) - 2;
      return fmt::format("{} {}, {}{}, {}", load ? "ld1w" : "st1w", reg_list(ops.begin(), count),
                         reg_name(ops[count]), load ? "/z" : "",
                         address(ops[count + 1], instr.imm));
    }
    case Opcode::kFmopa:
      return fmt::format("fmopa {}, {}/m, {}/m, {}, {}", reg_name(ops[0]), reg_name(ops[1]),
                         reg_name(ops[2]), reg_name(ops[3]), reg_name(ops[4]));
    case Opcode::kMovaToTile:
      return fmt::format("mov {}, {}/m, {}", slice(ops[0], instr.vertical, ops[1], instr.imm, 1),
                         reg_name(ops[2]), reg_name(ops[3]));
    case Opcode::kMovaFromTile:
      return fmt::format("mov {}, {}/m, {}", reg_name(ops[0]), reg_name(ops[1]),
                         slice(ops[2], instr.vertical, ops[3], instr.imm, 1));
    case Opcode::kMovaToTileMulti: {
      const int count = static_cast<int>(ops.size()) - 2;
      return fmt::format("mov {}, {}", slice(ops[0], instr.vertical, ops[1], instr.imm, count),
                         reg_list(ops.begin() + 2, count));
    }
    case Opcode::kMovaFromTileMulti: {
      const int count = static_cast<int>(ops.size()) - 2;
      return fmt::format("mov {}, {}", reg_list(ops.begin(), count),
                         slice(ops[count], instr.vertical, ops[count + 1], instr.imm, count));
    }
    case Opcode::kLdrZa:
    case Opcode::kStrZa:
      return fmt::format("{} za[{}, {}], {}", instr.op == Opcode::kLdrZa ? "ldr" : "str",
                         reg_name(ops[1]), number(instr.imm), address(ops[2], instr.imm));
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Token {
  enum Kind { kWord, kNumber, kPunct } kind;
  std::string text;
  std::int64_t value = 0;
};

[[noreturn]] void syntax(std::string_view line, std::string_view what) {
  throw Error(ErrorCode::kAsmSyntax, fmt::format("{} in '{}'", what, line));
}

std::int64_t parse_literal(std::string_view line, std::string_view s) {
  std::int64_t v = 0;
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    s.remove_prefix(2);
    base = 16;
  }
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (ec != std::errc() || ptr != s.data() + s.size()) syntax(line, "bad number");
  return v;
}

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; };
  while (i < line.size()) {
    const char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      ++i;
      continue;
    }
    const bool starts_number =
        c == '#' || std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && i + 1 < line.size() && std::isdigit(static_cast<unsigned char>(line[i + 1])));
    if (starts_number) {
      // [#] term (* term)*, each term an optionally negative literal.
      if (c == '#') ++i;
      std::int64_t product = 1;
      while (true) {
        bool negative = false;
        if (i < line.size() && line[i] == '-') {
          negative = true;
          ++i;
        }
        const std::size_t start = i;
        while (i < line.size() && std::isalnum(static_cast<unsigned char>(line[i]))) ++i;
        if (start == i) syntax(line, "expected number");
        const auto lit = parse_literal(line, line.substr(start, i - start));
        product *= negative ? -lit : lit;
        if (i < line.size() && line[i] == '*') {
          ++i;
          continue;
        }
        break;
      }
      out.push_back({Token::kNumber, std::string(), product});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = i;
      while (i < line.size() && is_word(line[i])) ++i;
      std::string word(line.substr(start, i - start));
      std::transform(word.begin(), word.end(), word.begin(),
                     [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
      out.push_back({Token::kWord, std::move(word)});
      continue;
    }
    if (std::string_view("{}[]:/-!").find(c) != std::string_view::npos) {
      out.push_back({Token::kPunct, std::string(1, c)});
      ++i;
      continue;
    }
    syntax(line, fmt::format("unexpected character '{}'", c));
  }
  return out;
}

std::optional<ElemSize> suffix_size(std::string_view s) {
  if (s == "b") return ElemSize::kB;
  if (s == "h") return ElemSize::kH;
  if (s == "s" || s == "4s") return ElemSize::kS;
  if (s == "d" || s == "2d") return ElemSize::kD;
  return std::nullopt;
}

bool parse_index(std::string_view s, int& out) {
  if (s.empty()) return false;
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return false;
  out = v;
  return true;
}

// Register names other than ZA slices. Returns nullopt if `word` is not one.
std::optional<RegisterRef> parse_register(std::string_view word) {
  if (word == "xzr") return reg::xzr();
  if (word == "wzr") return reg::w(kZeroRegister);
  std::string_view head = word;
  std::optional<ElemSize> esize = ElemSize::kNone;
  if (auto dot = word.find('.'); dot != std::string_view::npos) {
    head = word.substr(0, dot);
    esize = suffix_size(word.substr(dot + 1));
    if (!esize) return std::nullopt;
  }
  struct Prefix {
    std::string_view text;
    RegKind kind;
    int max;
  };
  static constexpr Prefix kPrefixes[] = {
      {"za", RegKind::kZaTile, 7}, {"pn", RegKind::kPn, 15}, {"x", RegKind::kX, 30},
      {"w", RegKind::kW, 30},      {"z", RegKind::kZ, 31},   {"v", RegKind::kV, 31},
      {"p", RegKind::kP, 15},
  };
  for (const auto& p : kPrefixes) {
    if (head.substr(0, p.text.size()) != p.text) continue;
    int index = 0;
    if (!parse_index(head.substr(p.text.size()), index) || index > p.max) return std::nullopt;
    const bool sized = *esize != ElemSize::kNone;
    if ((p.kind == RegKind::kX || p.kind == RegKind::kW) && sized) return std::nullopt;
    if ((p.kind == RegKind::kZ || p.kind == RegKind::kV || p.kind == RegKind::kZaTile) && !sized)
      return std::nullopt;
    return RegisterRef{p.kind, static_cast<std::uint8_t>(index), *esize};
  }
  return std::nullopt;
}

class Cursor {
 public:
  Cursor(std::string_view line, std::vector<Token> tokens)
      : line_(line), tokens_(std::move(tokens)) {}

  bool at_end() const { return pos_ >= tokens_.size(); }
  const Token* peek() const { return at_end() ? nullptr : &tokens_[pos_]; }

  bool accept(std::string_view punct) {
    const Token* t = peek();
    if (t && t->kind == Token::kPunct && t->text == punct) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(std::string_view punct) {
    if (!accept(punct)) fail(fmt::format("expected '{}'", punct));
  }
  bool accept_word(std::string_view word) {
    const Token* t = peek();
    if (t && t->kind == Token::kWord && t->text == word) {
      ++pos_;
      return true;
    }
    return false;
  }
  std::string word() {
    const Token* t = peek();
    if (!t || t->kind != Token::kWord) fail("expected a name");
    ++pos_;
    return t->text;
  }
  bool peek_number() const { return peek() && peek()->kind == Token::kNumber; }
  std::int64_t num() {
    if (!peek_number()) fail("expected an immediate");
    return tokens_[pos_++].value;
  }
  RegisterRef reg() {
    const std::string w = word();
    auto r = parse_register(w);
    if (!r) fail(fmt::format("'{}' is not a register", w));
    return *r;
  }
  RegisterRef reg_of(RegKind kind) {
    RegisterRef r = reg();
    if (r.kind != kind) fail("unexpected register kind");
    return r;
  }
  void end() {
    if (!at_end()) fail("trailing tokens");
  }
  [[noreturn]] void fail(std::string_view what) const { syntax(line_, what); }

 private:
  std::string_view line_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

// `{ z0.s, z1.s }`, `{ z0.s - z3.s }`; braces are optional for one register.
std::vector<RegisterRef> parse_group(Cursor& c) {
  std::vector<RegisterRef> regs;
  if (!c.accept("{")) {
    regs.push_back(c.reg_of(RegKind::kZ));
    return regs;
  }
  while (!c.accept("}")) {
    if (c.accept("-")) {
      if (regs.empty()) c.fail("range without start");
      const RegisterRef last = c.reg_of(RegKind::kZ);
      const RegisterRef first = regs.back();
      if (last.index <= first.index || last.esize != first.esize) c.fail("bad register range");
      for (int i = first.index + 1; i <= last.index; ++i) regs.push_back(reg::z(i, first.esize));
      continue;
    }
    regs.push_back(c.reg_of(RegKind::kZ));
  }
  if (regs.empty()) c.fail("empty register list");
  return regs;
}

struct Slice {
  RegisterRef tile;
  bool vertical = false;
  RegisterRef ws;
  std::int64_t first = 0;
  std::int64_t count = 1;
};

// `za0h.s[w12, 0]` or `za0v.s[w12, 0:3]`.
Slice parse_slice(Cursor& c) {
  const std::string w = c.word();
  const auto dot = w.find('.');
  if (w.size() < 4 || w.substr(0, 2) != "za" || dot == std::string::npos || dot < 4) {
    c.fail("expected a ZA tile slice");
  }
  const char dir = w[dot - 1];
  if (dir != 'h' && dir != 'v') c.fail("tile slice needs h or v");
  Slice s;
  s.vertical = dir == 'v';
  int index = 0;
  const auto esize = suffix_size(std::string_view(w).substr(dot + 1));
  if (!parse_index(std::string_view(w).substr(2, dot - 3), index) || !esize) {
    c.fail("bad tile name");
  }
  s.tile = reg::za(index, *esize);
  c.expect("[");
  s.ws = c.reg_of(RegKind::kW);
  s.first = c.num();
  if (c.accept(":")) s.count = c.num() - s.first + 1;
  c.expect("]");
  return s;
}

// `[x0]` or `[x0, #-2, mul vl]`.
std::int64_t parse_address(Cursor& c, RegisterRef& xn) {
  c.expect("[");
  xn = c.reg_of(RegKind::kX);
  std::int64_t offset = 0;
  if (c.peek_number()) {
    offset = c.num();
    if (!c.accept_word("mul") || !c.accept_word("vl")) c.fail("expected 'mul vl'");
  }
  c.expect("]");
  return offset;
}

int shift_suffix(Cursor& c) {
  if (!c.accept_word("lsl")) return 0;
  return static_cast<int>(c.num());
}

Instruction parse_movz_alias(Cursor& c, const RegisterRef& rd) {
  const std::int64_t value = c.num();
  c.end();
  const int width = rd.kind == RegKind::kX ? 64 : 32;
  const std::uint64_t mask = width == 64 ? ~std::uint64_t{0} : 0xFFFFFFFFu;
  if (width == 32 && (value > 0xFFFFFFFFll || value < -0x80000000ll)) {
    throw Error(ErrorCode::kInvalidImmediate, fmt::format("{} does not fit a w register", value));
  }
  const std::uint64_t bits = static_cast<std::uint64_t>(value) & mask;
  for (int shift = 0; shift < width; shift += 16) {
    if ((bits & ~(std::uint64_t{0xFFFF} << shift)) == 0) {
      return insn::movz(rd, static_cast<std::uint16_t>(bits >> shift), shift);
    }
  }
  throw Error(ErrorCode::kInvalidImmediate,
              fmt::format("{} is not a single 16-bit chunk; use movz/movk", value));
}

Instruction parse_mov(Cursor& c) {
  const Token* first = c.peek();
  if (!first) c.fail("missing operands");
  if (first->kind == Token::kPunct && first->text == "{") {
    const auto group = parse_group(c);
    const Slice s = parse_slice(c);
    c.end();
    if (s.count != static_cast<std::int64_t>(group.size())) c.fail("slice range and list differ");
    return insn::mova_from_tile(group[0].index, static_cast<int>(group.size()), s.tile,
                                s.vertical, s.ws, static_cast<int>(s.first));
  }
  if (first->kind != Token::kWord) c.fail("bad mov operand");
  if (first->text.rfind("za", 0) == 0) {
    const Slice s = parse_slice(c);
    if (c.peek() && c.peek()->kind == Token::kPunct && c.peek()->text == "{") {
      const auto group = parse_group(c);
      c.end();
      if (s.count != static_cast<std::int64_t>(group.size())) c.fail("slice range and list differ");
      return insn::mova_to_tile(s.tile, s.vertical, s.ws, static_cast<int>(s.first),
                                group[0].index, static_cast<int>(group.size()));
    }
    const RegisterRef pg = c.reg_of(RegKind::kP);
    c.expect("/");
    if (!c.accept_word("m")) c.fail("expected /m");
    const RegisterRef zn = c.reg_of(RegKind::kZ);
    c.end();
    if (s.count != 1) c.fail("single-vector move takes one slice");
    return insn::mova_to_tile(s.tile, s.vertical, s.ws, static_cast<int>(s.first), pg, zn);
  }
  const RegisterRef rd = c.reg();
  if (rd.kind == RegKind::kX || rd.kind == RegKind::kW) return parse_movz_alias(c, rd);
  if (rd.kind != RegKind::kZ) c.fail("bad mov destination");
  const RegisterRef pg = c.reg_of(RegKind::kP);
  c.expect("/");
  if (!c.accept_word("m")) c.fail("expected /m");
  const Slice s = parse_slice(c);
  c.end();
  if (s.count != 1) c.fail("single-vector move takes one slice");
  return insn::mova_from_tile(rd, pg, s.tile, s.vertical, s.ws, static_cast<int>(s.first));
}

Instruction parse_memory(Cursor& c, bool load) {
  auto group = parse_group(c);
  const RegisterRef pred = c.reg();
  if (load) {
    c.expect("/");
    if (!c.accept_word("z")) c.fail("loads take a /z predicate");
  }
  RegisterRef xn;
  const std::int64_t offset = parse_address(c, xn);
  c.end();
  const int count = static_cast<int>(group.size());
  if (count == 1) {
    if (pred.kind != RegKind::kP) c.fail("single-vector form needs p0-p7");
    return load ? insn::ld1w(group[0], pred, xn, offset) : insn::st1w(group[0], pred, xn, offset);
  }
  if (count != 2 && count != 4) c.fail("register list must hold 1, 2 or 4 vectors");
  const bool strided = group[1].index - group[0].index == 16 / count;
  Instruction i;
  if (strided) {
    i = load ? insn::ld1w_strided(group[0].index, count, pred, xn, offset)
             : insn::st1w_strided(group[0].index, count, pred, xn, offset);
  } else {
    i = load ? insn::ld1w_multi(group[0].index, count, pred, xn, offset)
             : insn::st1w_multi(group[0].index, count, pred, xn, offset);
  }
  // Keep the registers as written so validation sees malformed lists.
  std::copy(group.begin(), group.end(), i.operands.begin());
  return i;
}

Instruction parse_tokens(Cursor& c) {
  const std::string mnemonic = c.word();
  if (mnemonic == "ret") {
    c.end();
    return insn::ret();
  }
  if (mnemonic == "smstart" || mnemonic == "smstop") {
    const bool start = mnemonic == "smstart";
    Instruction i = start ? insn::smstart() : insn::smstop();
    if (c.accept_word("sm")) i = start ? insn::smstart_sm() : insn::smstop_sm();
    else if (c.accept_word("za")) i = start ? insn::smstart_za() : insn::smstop_za();
    c.end();
    return i;
  }
  if (mnemonic == "mov") return parse_mov(c);
  if (mnemonic == "movz" || mnemonic == "movk") {
    const RegisterRef rd = c.reg();
    const std::int64_t value = c.num();
    const int shift = shift_suffix(c);
    c.end();
    if (value < 0 || value > 0xFFFF) {
      throw Error(ErrorCode::kInvalidImmediate, fmt::format("{} is not a 16-bit payload", value));
    }
    const auto v16 = static_cast<std::uint16_t>(value);
    return mnemonic == "movz" ? insn::movz(rd, v16, shift) : insn::movk(rd, v16, shift);
  }
  if (mnemonic == "add" || mnemonic == "sub") {
    const bool add = mnemonic == "add";
    const RegisterRef rd = c.reg();
    const RegisterRef rn = c.reg();
    if (c.peek_number()) {
      std::int64_t value = c.num();
      int shift = shift_suffix(c);
      c.end();
      if (shift == 0 && value > 4095 && value % 4096 == 0) {
        value /= 4096;
        shift = 12;
      }
      return add ? insn::add(rd, rn, value, shift) : insn::sub(rd, rn, value, shift);
    }
    const RegisterRef rm = c.reg();
    c.end();
    return add ? insn::add(rd, rn, rm) : insn::sub(rd, rn, rm);
  }
  if (mnemonic == "cbnz") {
    const RegisterRef rt = c.reg();
    if (c.peek_number()) {
      const std::int64_t off = c.num();
      c.end();
      return insn::cbnz(rt, off);
    }
    std::string label = c.word();
    c.end();
    return insn::cbnz(rt, std::move(label));
  }
  if (mnemonic == "fmla") {
    const RegisterRef vd = c.reg_of(RegKind::kV);
    const RegisterRef vn = c.reg_of(RegKind::kV);
    const RegisterRef vm = c.reg_of(RegKind::kV);
    c.end();
    return insn::fmla(vd, vn, vm);
  }
  if (mnemonic == "ptrue") {
    const RegisterRef pd = c.reg();
    c.end();
    return insn::ptrue(pd);
  }
  if (mnemonic == "whilelt") {
    const RegisterRef pd = c.reg();
    const RegisterRef xn = c.reg();
    const RegisterRef xm = c.reg();
    if (pd.kind == RegKind::kPn) {
      int vlx = 0;
      if (c.accept_word("vlx2")) vlx = 2;
      else if (c.accept_word("vlx4")) vlx = 4;
      else c.fail("expected vlx2 or vlx4");
      c.end();
      return insn::whilelt(pd, xn, xm, vlx);
    }
    c.end();
    return insn::whilelt(pd, xn, xm);
  }
  if (mnemonic == "ld1w" || mnemonic == "st1w") return parse_memory(c, mnemonic == "ld1w");
  if (mnemonic == "fmopa") {
    const RegisterRef tile = c.reg_of(RegKind::kZaTile);
    const RegisterRef pn = c.reg_of(RegKind::kP);
    c.expect("/");
    if (!c.accept_word("m")) c.fail("expected /m");
    const RegisterRef pm = c.reg_of(RegKind::kP);
    c.expect("/");
    if (!c.accept_word("m")) c.fail("expected /m");
    const RegisterRef zn = c.reg_of(RegKind::kZ);
    const RegisterRef zm = c.reg_of(RegKind::kZ);
    c.end();
    return insn::fmopa(tile, pn, pm, zn, zm);
  }
  if (mnemonic == "ldr" || mnemonic == "str") {
    if (!c.accept_word("za")) c.fail("only the ZA array-vector form is supported");
    c.expect("[");
    const RegisterRef wv = c.reg_of(RegKind::kW);
    const std::int64_t select = c.num();
    c.expect("]");
    RegisterRef xn;
    const std::int64_t offset = parse_address(c, xn);
    c.end();
    if (offset != select) c.fail("vector select and address offset must match");
    const int off = static_cast<int>(select);
    return mnemonic == "ldr" ? insn::ldr_za(wv, off, xn) : insn::str_za(wv, off, xn);
  }
  throw Error(ErrorCode::kUnsupportedForm, fmt::format("mnemonic '{}'", mnemonic));
}

std::string_view strip_comment(std::string_view line) {
  if (auto pos = line.find("//"); pos != std::string_view::npos) line = line.substr(0, pos);
  while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
  while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
  return line;
}

}  // namespace

Instruction parse_instruction(std::string_view text) {
  const std::string_view line = strip_comment(text);
  Cursor cursor(line, tokenize(line));
  Instruction instr = parse_tokens(cursor);
  if (instr.label.empty()) validate(instr);
  return instr;
}

Program parse_program(std::string_view text) {
  CodeBuilder builder;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = strip_comment(text.substr(start, end - start));
    start = end + 1;
    // Leading `name:` binds a label; an instruction may follow on the line.
    if (auto colon = line.find(':'); colon != std::string_view::npos) {
      const std::string_view head = line.substr(0, colon);
      const bool is_label =
          !head.empty() && std::all_of(head.begin(), head.end(), [](char ch) {
            return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.';
          });
      if (is_label) {
        builder.bind(head);
        line = strip_comment(line.substr(colon + 1));
      }
    }
    if (!line.empty()) builder.emit(parse_instruction(line));
  }
  return builder.take();
}

std::string disassemble(const std::vector<EncodedWord>& words) {
  std::string out;
  for (EncodedWord w : words) {
    try {
      out += format(decode(w));
    } catch (const Error&) {
      out += fmt::format(".inst 0x{:08x}", w);
    }
    out += '\n';
  }
  return out;
}

}  // namespace sme_forge
