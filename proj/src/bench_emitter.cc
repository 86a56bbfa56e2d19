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

#include "sme_forge/bench_emitter.h"

#include <array>
#include <string>
#include <utility>

#include <fmt/format.h>

#include "sme_forge/encoder.h"
#include "sme_forge/error.h"
#include "sme_forge/machine.h"

namespace sme_forge {

namespace {

constexpr int kSvlBits = 512;

constexpr std::array<std::pair<BenchKind, std::string_view>, 4> kKinds = {{
    {BenchKind::kNeonFmla, "neon_fmla"},
    {BenchKind::kSmeFmopa, "sme_fmopa"},
    {BenchKind::kBwLoad, "bw_load"},
    {BenchKind::kBwStore, "bw_store"},
}};

constexpr std::array<std::pair<BwStrategy, std::string_view>, 4> kStrategies = {{
    {BwStrategy::kDirect, "direct"},
    {BwStrategy::kIndirect1, "1vr"},
    {BwStrategy::kIndirect2, "2vr"},
    {BwStrategy::kIndirect4, "4vr"},
}};

// Register count of an indirect strategy.
int vectors(BwStrategy s) {
  switch (s) {
    case BwStrategy::kIndirect2: return 2;
    case BwStrategy::kIndirect4: return 4;
    default: return 1;
  }
}

KernelBuffer finish(CodeBuilder& b, std::uint64_t ret) {
  b.mov_imm(reg::x(0), ret);
  b.emit(insn::ret());
  return {assemble(b.program()), 0, ret};
}

}  // namespace

std::string_view bench_kind_name(BenchKind k) {
  for (const auto& [id, name] : kKinds) {
    if (id == k) return name;
  }
  return "?";
}

std::string_view bw_strategy_name(BwStrategy s) {
  for (const auto& [id, name] : kStrategies) {
    if (id == s) return name;
  }
  return "?";
}

BenchKind parse_bench_kind(std::string_view name) {
  for (const auto& [id, n] : kKinds) {
    if (n == name) return id;
  }
  throw Error(ErrorCode::kInvalidSpec, fmt::format("unknown benchmark kind '{}'", name));
}

BwStrategy parse_bw_strategy(std::string_view name) {
  if (name == "direct_array_vector") return BwStrategy::kDirect;
  if (name.starts_with("indirect_")) name.remove_prefix(9);
  for (const auto& [id, n] : kStrategies) {
    if (n == name) return id;
  }
  throw Error(ErrorCode::kInvalidSpec, fmt::format("unknown bandwidth strategy '{}'", name));
}

int transfer_bytes(BwStrategy s) { return 64 * vectors(s); }

KernelBuffer emit_throughput_bench(const BenchSpec& spec) {
  if (spec.kind != BenchKind::kNeonFmla && spec.kind != BenchKind::kSmeFmopa) {
    throw Error(ErrorCode::kInvalidSpec, "not a throughput benchmark");
  }
  if (spec.dtype != DType::kF32 && spec.dtype != DType::kF64) {
    throw Error(ErrorCode::kUnsupportedDatatype,
                fmt::format("no non-widening {} {} kernel", dtype_name(spec.dtype),
                            bench_kind_name(spec.kind)));
  }
  const ElemSize es = spec.dtype == DType::kF32 ? ElemSize::kS : ElemSize::kD;
  const bool neon = spec.kind == BenchKind::kNeonFmla;

  CodeBuilder b;
  if (!neon) {
    b.emit(insn::smstart());
    b.emit(insn::ptrue(reg::p(0, ElemSize::kB)));
    b.emit(insn::ptrue(reg::p(1, ElemSize::kB)));
  }
  const std::string loop = b.fresh_label("repeat_loop");
  b.bind(loop);
  b.emit(insn::sub(reg::x(0), reg::x(0), 1));
  std::uint64_t ops = 0;
  if (neon) {
    // v30/v31 are the sources; every other register accumulates.
    for (int i = 0; i < 30; ++i) {
      b.emit(insn::fmla(reg::v(i, es), reg::v(30, es), reg::v(31, es)));
      ops += flops(b.program().code.back(), kSvlBits);
    }
  } else {
    const int tiles = spec.dtype == DType::kF32 ? 4 : 8;
    for (int i = 0; i < 32; ++i) {
      b.emit(insn::fmopa(reg::za(i % tiles, es), reg::p(0), reg::p(1), reg::z((2 * i) % 32, es),
                         reg::z((2 * i + 1) % 32, es)));
      ops += flops(b.program().code.back(), kSvlBits);
    }
  }
  b.emit(insn::cbnz(reg::x(0), loop));
  if (!neon) b.emit(insn::smstop());
  return finish(b, ops);
}

KernelBuffer emit_bandwidth_bench(const BenchSpec& spec) {
  if (spec.kind != BenchKind::kBwLoad && spec.kind != BenchKind::kBwStore) {
    throw Error(ErrorCode::kInvalidSpec, "not a bandwidth benchmark");
  }
  const std::uint64_t step = static_cast<std::uint64_t>(transfer_bytes(spec.strategy));
  if (spec.bytes_per_pass < step || spec.bytes_per_pass % step != 0) {
    throw Error(ErrorCode::kInvalidTransferSize,
                fmt::format("{} bytes per pass with {}-byte transfers", spec.bytes_per_pass,
                            step));
  }
  const bool load = spec.kind == BenchKind::kBwLoad;
  const int nvec = vectors(spec.strategy);
  const RegisterRef addr = reg::x(2);
  const RegisterRef left = reg::x(3);
  const RegisterRef slice = reg::w(12);
  const RegisterRef tile = reg::za(0, ElemSize::kB);

  CodeBuilder b;
  b.emit(insn::smstart());
  if (spec.strategy == BwStrategy::kIndirect1) {
    b.emit(insn::ptrue(reg::p(0, ElemSize::kB)));
  } else if (spec.strategy != BwStrategy::kDirect) {
    b.emit(insn::ptrue(reg::pn(8, ElemSize::kS)));
  }
  const std::string pass = b.fresh_label("pass_loop");
  const std::string inner = b.fresh_label("transfer_loop");
  b.bind(pass);
  b.emit(insn::sub(reg::x(0), reg::x(0), 1));
  b.emit(insn::add(addr, reg::x(1), 0));
  b.emit(insn::movz(slice, 0));
  b.mov_imm(left, spec.bytes_per_pass / step);
  b.bind(inner);
  b.emit(insn::sub(left, left, 1));
  switch (spec.strategy) {
    case BwStrategy::kDirect:
      b.emit(load ? insn::ldr_za(slice, 0, addr) : insn::str_za(slice, 0, addr));
      break;
    case BwStrategy::kIndirect1:
      if (load) {
        b.emit(insn::ld1w(reg::z(0), reg::p(0), addr));
        b.emit(insn::mova_to_tile(tile, false, slice, 0, reg::p(0), reg::z(0, ElemSize::kB)));
      } else {
        b.emit(insn::mova_from_tile(reg::z(0, ElemSize::kB), reg::p(0), tile, false, slice, 0));
        b.emit(insn::st1w(reg::z(0), reg::p(0), addr));
      }
      break;
    case BwStrategy::kIndirect2:
    case BwStrategy::kIndirect4:
      if (load) {
        b.emit(insn::ld1w_multi(0, nvec, reg::pn(8), addr));
        b.emit(insn::mova_to_tile(tile, false, slice, 0, 0, nvec));
      } else {
        b.emit(insn::mova_from_tile(0, nvec, tile, false, slice, 0));
        b.emit(insn::st1w_multi(0, nvec, reg::pn(8), addr));
      }
      break;
  }
  b.emit(insn::add(addr, addr, static_cast<std::int64_t>(step)));
  b.emit(insn::add(slice, slice, nvec));
  b.emit(insn::cbnz(left, inner));
  b.emit(insn::cbnz(reg::x(0), pass));
  b.emit(load ? insn::smstop_sm() : insn::smstop());
  return finish(b, spec.bytes_per_pass);
}

KernelBuffer emit_bench(const BenchSpec& spec) {
  switch (spec.kind) {
    case BenchKind::kNeonFmla:
    case BenchKind::kSmeFmopa: return emit_throughput_bench(spec);
    default: return emit_bandwidth_bench(spec);
  }
}

}  // namespace sme_forge
