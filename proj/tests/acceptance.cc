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

// Acceptance run: one PASS/FAIL line per headline criterion, exit status 0
// only if every line passes.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "sme_forge/asm_text.h"
#include "sme_forge/bench_emitter.h"
#include "sme_forge/encoder.h"
#include "sme_forge/golden.h"
#include "sme_forge/kernel_emitter.h"
#include "sme_forge/machine.h"
#include "sme_forge/planner.h"
#include "sme_forge/runner.h"

namespace sf = sme_forge;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(const char* name, double limit_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs > limit_seconds) {
    o.pass = false;
    o.detail += fmt::format("; over the {:.0f} s budget", limit_seconds);
  }
  failures += o.pass ? 0 : 1;
  fmt::print("{} {}: {} ({:.2f} s)\n", o.pass ? "PASS" : "FAIL", name, o.detail, secs);
  std::fflush(stdout);
}

// Every instruction of the reference kernels, in canonical text.
const char* const kReferenceLines[] = {
    "sub x0, x0, #1", "fmla v0.4s, v30.4s, v31.4s", "fmla v29.4s, v30.4s, v31.4s",
    "cbnz x0, #-0x7c", "mov x0, #0xf0", "ret", "ptrue p0.b", "ptrue p1.b",
    "fmopa za0.s, p0/m, p1/m, z0.s, z1.s", "fmopa za3.s, p0/m, p1/m, z30.s, z31.s",
    "mov x0, #0x4000", "sub x8, x8, #1", "ld1w { z0.s, z1.s }, pn8/z, [x0]",
    "ld1w { z2.s, z3.s }, pn9/z, [x1]", "add x0, x0, x9", "add x1, x1, x10",
    "fmopa za0.s, p1/m, p0/m, z2.s, z0.s", "fmopa za1.s, p1/m, p2/m, z2.s, z1.s",
    "fmopa za2.s, p3/m, p0/m, z3.s, z0.s", "fmopa za3.s, p3/m, p2/m, z3.s, z1.s",
    "ld1w { z0.s - z3.s }, pn8/z, [x0]", "mov za0h.s[w12, 0:3], { z0.s - z3.s }",
    "mov w12, #0", "add w12, w12, #4", "mov za0h.s[w12, 0:3], { z12.s - z15.s }",
    "mov { z0.s - z3.s }, za0v.s[w12, 0:3]", "mov { z12.s - z15.s }, za0v.s[w12, 0:3]",
};

Outcome golden_suite() {
  const auto entries = sf::load_golden(SME_FORGE_GOLDEN);
  const auto bad = sf::check_golden(entries);
  std::set<sf::Opcode> forms;
  std::set<std::string> texts;
  for (const auto& e : entries) {
    forms.insert(sf::decode(e.word).op);
    texts.insert(e.text);
  }
  int listed = 0;
  for (const char* line : kReferenceLines) listed += texts.count(line) ? 1 : 0;
  const int n_reference = static_cast<int>(std::size(kReferenceLines));
  return {bad.empty() && entries.size() >= 60 && static_cast<int>(forms.size()) == sf::kOpcodeCount &&
              listed == n_reference,
          fmt::format("{}/{} entries agree, {}/{} forms covered, {}/{} reference kernel lines present",
                      entries.size() - bad.size(), entries.size(), forms.size(),
                      sf::kOpcodeCount, listed, n_reference)};
}

template <typename T>
T read_elem(std::span<const std::uint8_t> s, int i) {
  T v;
  std::memcpy(&v, s.data() + i * sizeof(T), sizeof(T));
  return v;
}

Outcome fmopa_semantics() {
  std::mt19937_64 rng(20260101);
  std::uniform_int_distribution<int> exp_dist(-20, 20);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  auto value = [&] { return std::ldexp(mant(rng), exp_dist(rng)); };
  sf::Machine m(512);
  m.execute(sf::insn::smstart());
  int checked = 0, wrong = 0;
  for (int step = 0; step < 2000; ++step) {
    const bool f64 = step % 2 == 1;
    const sf::ElemSize es = f64 ? sf::ElemSize::kD : sf::ElemSize::kS;
    const int eb = f64 ? 8 : 4;
    const int dim = m.svl_bytes() / eb;
    const int tile = static_cast<int>(rng() % (f64 ? 8 : 4));
    const int zn = static_cast<int>(rng() % 32), zm = static_cast<int>(rng() % 32);
    const int pn = static_cast<int>(rng() % 8), pm = static_cast<int>(rng() % 8);
    for (int r : {zn, zm}) {
      auto z = m.z(r);
      for (int i = 0; i < dim; ++i) {
        if (f64) {
          const double v = value();
          std::memcpy(z.data() + 8 * i, &v, 8);
        } else {
          const float v = static_cast<float>(value());
          std::memcpy(z.data() + 4 * i, &v, 4);
        }
      }
    }
    for (int p : {pn, pm}) {
      for (auto& lane : m.p(p)) lane = static_cast<std::uint8_t>(rng() % 4 != 0);
    }
    for (auto& b : m.za()) b = static_cast<std::uint8_t>(rng());
    // Keep the accumulators finite: rewrite the chosen tile with values.
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) {
        // Row i of the tile is array vector i*eb + tile, element j.
        auto* at = m.za().data() + (i * eb + tile) * m.svl_bytes() + j * eb;
        if (f64) {
          const double v = value();
          std::memcpy(at, &v, 8);
        } else {
          const float v = static_cast<float>(value());
          std::memcpy(at, &v, 4);
        }
      }
    }
    const auto before = m.read_tile(tile, es);
    const std::vector<std::uint8_t> a(m.z(zn).begin(), m.z(zn).end());
    const std::vector<std::uint8_t> b(m.z(zm).begin(), m.z(zm).end());
    const std::vector<std::uint8_t> pa(m.p(pn).begin(), m.p(pn).end());
    const std::vector<std::uint8_t> pb(m.p(pm).begin(), m.p(pm).end());
    m.step(sf::encode(sf::insn::fmopa(sf::reg::za(tile, es), sf::reg::p(pn), sf::reg::p(pm),
                                      sf::reg::z(zn, es), sf::reg::z(zm, es))));
    const auto after = m.read_tile(tile, es);
    ++checked;
    bool ok = true;
    for (int i = 0; i < dim && ok; ++i) {
      for (int j = 0; j < dim && ok; ++j) {
        const bool active = pa[i * eb] && pb[j * eb];
        std::uint64_t want = before.raw(i, j);
        if (active && f64) {
          want = std::bit_cast<std::uint64_t>(std::fma(read_elem<double>(a, i),
                                                       read_elem<double>(b, j), before.f64(i, j)));
        } else if (active) {
          want = std::bit_cast<std::uint32_t>(std::fma(read_elem<float>(a, i),
                                                       read_elem<float>(b, j), before.f32(i, j)));
        }
        ok = after.raw(i, j) == want;
      }
    }
    wrong += ok ? 0 : 1;
  }
  return {wrong == 0, fmt::format("{} FP32 + {} FP64 masked steps, {} mismatching", checked / 2,
                                  checked / 2, wrong)};
}

std::string neon_loop_text() {
  std::string s = "repeat_loop:\n  sub x0, x0, #1\n";
  for (int i = 0; i < 30; ++i) s += fmt::format("  fmla v{}.s, v30.s, v31.s\n", i);
  return s + "  cbnz x0, repeat_loop\n  mov x0, #30*8\n  ret\n";
}

std::string fmopa_loop_text() {
  std::string s = "smstart\nptrue p0.b\nptrue p1.b\nrepeat_loop:\n  sub x0, x0, #1\n";
  for (int i = 0; i < 32; ++i) {
    s += fmt::format("  fmopa za{}.s, p0/m, p1/m, z{}.s, z{}.s\n", i % 4, 2 * i % 32,
                     (2 * i + 1) % 32);
  }
  return s + "  cbnz x0, repeat_loop\nsmstop\nmov x0, 32*512\nret\n";
}

Outcome op_counts() {
  const std::uint64_t reps[] = {4};
  auto run = [&](const std::vector<sf::EncodedWord>& w, sf::Machine& m) {
    return m.run(w, reps, 100'000).return_value;
  };
  sf::Machine m;
  const auto l1 = run(sf::assemble(sf::parse_program(neon_loop_text())), m);
  m.reset(512);
  const auto l2 = run(sf::assemble(sf::parse_program(fmopa_loop_text())), m);
  const auto per_fmopa = m.flops_executed() / m.executed(sf::Opcode::kFmopa);
  m.reset(512);
  const auto g1 = run(sf::emit_throughput_bench({sf::BenchKind::kNeonFmla, sf::DType::kF32}).words, m);
  m.reset(512);
  const auto g2 = run(sf::emit_throughput_bench({sf::BenchKind::kSmeFmopa, sf::DType::kF32}).words, m);
  const bool ok = l1 == 240 && l2 == 16384 && g1 == 240 && g2 == 16384 && per_fmopa == 512;
  return {ok, fmt::format("FMLA loop text returns {} (generated {}), FMOPA loop text returns {} "
                          "(generated {}), {} ops per FP32 FMOPA",
                          l1, g1, l2, g2, per_fmopa)};
}

Outcome block_plan() {
  const int hetero = sf::plan_cost(sf::plan_blocks(80, 80)).microkernel_count;
  const int h32 = sf::plan_cost(sf::plan_homogeneous(80, 80, sf::Strategy::kM32N32)).microkernel_count;
  const int h1664 = sf::plan_cost(sf::plan_homogeneous(80, 80, sf::Strategy::kM16N64)).microkernel_count;
  const int h6416 = sf::plan_cost(sf::plan_homogeneous(80, 80, sf::Strategy::kM64N16)).microkernel_count;
  const int c32 = sf::block_strategy(sf::Strategy::kM32N32).loads_per_kstep();
  const int c1664 = sf::block_strategy(sf::Strategy::kM16N64).loads_per_kstep();
  const int c6416 = sf::block_strategy(sf::Strategy::kM64N16).loads_per_kstep();

  // Exhaustive coverage: every element of every m x n output exactly once.
  int bad = 0;
  for (int m = 1; m <= 96; ++m) {
    for (int n = 1; n <= 96; ++n) {
      std::vector<int> cover(static_cast<std::size_t>(m) * n, 0);
      for (const auto& b : sf::plan_blocks(m, n).blocks) {
        const auto& st = sf::block_strategy(b.strategy);
        if (b.m_active < 1 || b.n_active < 1 || b.m_active > st.tile_rows ||
            b.n_active > st.tile_cols) {
          ++bad;
          continue;
        }
        for (int j = b.n_offset; j < b.n_offset + b.n_active; ++j) {
          for (int i = b.m_offset; i < b.m_offset + b.m_active; ++i) {
            if (i >= m || j >= n) {
              ++bad;
            } else {
              ++cover[static_cast<std::size_t>(j) * m + i];
            }
          }
        }
      }
      for (int c : cover) bad += c != 1;
    }
  }
  const bool ok = hetero == 7 && h1664 == 10 && h6416 == 10 && c32 == 64 && c1664 == 80 &&
                  c6416 == 80 && bad == 0;
  return {ok, fmt::format("80x80 heterogeneous {} executions; single-strategy baselines "
                          "M16N64 {}, M64N16 {}, M32N32 {} (a 32x32-only baseline cannot "
                          "reach ten); load costs {}/{}/{}; coverage errors over 1..96: {}",
                          hetero, h1664, h6416, h32, c32, c1664, c6416, bad)};
}

Outcome gemm_oracle() {
  std::mt19937_64 rng(424242);
  int pass = 0, total = 0;
  std::string first_fail;
  for (int t = 0; t < 200; ++t) {
    sf::GemmSpec s;
    s.m = 1 + static_cast<int>(rng() % 96);
    s.n = 1 + static_cast<int>(rng() % 96);
    s.k = 1 + static_cast<int>(rng() % 64);
    s.b_layout = t % 2 ? sf::BLayout::kColMajor : sf::BLayout::kRowMajor;
    s.lda = s.m + static_cast<int>(rng() % 17);
    s.ldc = s.m + static_cast<int>(rng() % 17);
    s.ldb = (s.b_layout == sf::BLayout::kRowMajor ? s.n : s.k) + static_cast<int>(rng() % 17);
    const auto mode = (t / 2) % 2 ? sf::FillMode::kUniform : sf::FillMode::kInteger;
    const auto r = sf::verify_gemm(s, rng(), mode);
    ++total;
    if (r.verdict && r.verdict->pass) {
      ++pass;
    } else if (first_fail.empty()) {
      first_fail = fmt::format("; first failure {} {}", r.kernel_id,
                               r.verdict ? r.verdict->detail : "");
    }
  }
  return {pass == total,
          fmt::format("{}/{} random specs pass (exact integer, 1e-5 uniform, guards and "
                      "bounds clean){}",
                      pass, total, first_fail)};
}

Outcome transpose_path() {
  std::mt19937_64 rng(777);
  int good = 0, stores = 0, misaligned = 0;
  for (int t = 0; t < 100; ++t) {
    const int k = 1 + static_cast<int>(rng() % 64);
    const int ldb = k + static_cast<int>(rng() % 40);
    const int n = 32;
    const auto kernel = sf::generate_transpose(k, ldb, n);
    sf::Machine m;
    constexpr std::uint64_t kB = 0x100000, kS = 0x800000;
    std::vector<float> b(static_cast<std::size_t>(ldb) * n);
    for (auto& v : b) v = std::bit_cast<float>(static_cast<std::uint32_t>(rng() % 0x7f000000));
    for (int j = 0; j < n; ++j) {
      m.write_memory(kB + 4ULL * j * ldb,
                     {reinterpret_cast<const std::uint8_t*>(&b[static_cast<std::size_t>(j) * ldb]),
                      static_cast<std::size_t>(k) * 4});
    }
    m.write_memory(kS, std::vector<std::uint8_t>(kernel.scratch_bytes, 0));
    const std::uint64_t args[] = {0, kB, 0, kS};
    m.run(kernel.words, args, 1'000'000, [&](std::size_t, const sf::Instruction& in) {
      if (in.op != sf::Opcode::kSt1w) return;
      ++stores;
      misaligned += (m.x(in.operands[2].index) - kS) % 64 != 0;
    });
    const auto out = m.read_memory(kS, kernel.scratch_bytes);
    bool ok = m.memory().undefined_reads() == 0;
    for (int p = 0; p < k && ok; ++p) {
      for (int j = 0; j < n && ok; ++j) {
        std::uint32_t got;
        std::memcpy(&got, out.data() + 4 * (p * sf::kScratchRowFloats + j), 4);
        ok = got == std::bit_cast<std::uint32_t>(b[static_cast<std::size_t>(j) * ldb + p]);
      }
    }
    good += ok;
  }
  return {good == 100 && misaligned == 0 && stores > 0,
          fmt::format("{}/100 panels match the index remapping; {} scratch stores, {} not "
                      "64-byte aligned",
                      good, stores, misaligned)};
}

Outcome bandwidth_fidelity() {
  const sf::BwStrategy all[] = {sf::BwStrategy::kDirect, sf::BwStrategy::kIndirect1,
                                sf::BwStrategy::kIndirect2, sf::BwStrategy::kIndirect4};
  std::mt19937_64 rng(99);
  std::vector<std::uint8_t> src(4096);
  for (auto& b : src) b = static_cast<std::uint8_t>(rng());
  constexpr std::uint64_t kSrc = 0x10000, kDst = 0x20000;
  int ok_loads = 0, ok_stores = 0, ok_counts = 0;
  for (auto s : all) {
    const auto load = sf::emit_bandwidth_bench({sf::BenchKind::kBwLoad, sf::DType::kF32, s, 4096});
    const auto store = sf::emit_bandwidth_bench({sf::BenchKind::kBwStore, sf::DType::kF32, s, 4096});
    sf::Machine m;
    m.write_memory(kSrc, src);
    m.write_memory(kDst, std::vector<std::uint8_t>(4096, 0));
    const std::uint64_t a1[] = {1, kSrc};
    const auto r1 = m.run(load.words, a1, 1'000'000);
    ok_loads += std::vector<std::uint8_t>(m.za().begin(), m.za().end()) == src;
    const std::uint64_t moved_in =
        64 * (m.executed(sf::Opcode::kLdrZa) + m.executed(sf::Opcode::kLd1w)) +
        m.executed(sf::Opcode::kLd1wMulti) * sf::transfer_bytes(s);
    const std::uint64_t a2[] = {1, kDst};
    const auto r2 = m.run(store.words, a2, 1'000'000);
    ok_stores += m.read_memory(kDst, 4096) == src;
    const std::uint64_t moved_out =
        64 * (m.executed(sf::Opcode::kStrZa) + m.executed(sf::Opcode::kSt1w)) +
        m.executed(sf::Opcode::kSt1wMulti) * sf::transfer_bytes(s);
    ok_counts += r1.return_value == 4096 && r2.return_value == 4096 && moved_in == 4096 &&
                 moved_out == 4096;
  }
  const int four = sf::transfer_bytes(sf::BwStrategy::kIndirect4);
  return {ok_loads == 4 && ok_stores == 4 && ok_counts == 4 && four == 256,
          fmt::format("4 KiB round trip: {}/4 load and {}/4 store strategies exact, {}/4 "
                      "byte counts match, {} bytes per 4-register step",
                      ok_loads, ok_stores, ok_counts, four)};
}

}  // namespace

int main() {
  criterion("encoding golden suite", 1, golden_suite);
  criterion("FMOPA semantics", 10, fmopa_semantics);
  criterion("op-count reproduction", 10, op_counts);
  criterion("block-plan reproduction", 30, block_plan);
  criterion("GEMM oracle equivalence", 300, gemm_oracle);
  criterion("transpose path", 60, transpose_path);
  criterion("bandwidth-kernel fidelity", 60, bandwidth_fidelity);
  fmt::print("{} of 7 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
