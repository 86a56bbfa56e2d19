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

// sme_forge command-line front end.
//
// Exit codes: 0 success, 1 verification or execution failure, 2 usage error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "sme_forge/asm_text.h"
#include "sme_forge/bench_emitter.h"
#include "sme_forge/encoder.h"
#include "sme_forge/error.h"
#include "sme_forge/kernel_emitter.h"
#include "sme_forge/machine.h"
#include "sme_forge/planner.h"
#include "sme_forge/runner.h"

namespace sf = sme_forge;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

int svl_from_env() {
  const char* env = std::getenv("SME_FORGE_SVL");
  if (env == nullptr || *env == '\0') return 512;
  try {
    std::size_t used = 0;
    const int v = std::stoi(env, &used);
    if (used == std::string(env).size()) return v;
  } catch (const std::exception&) {
  }
  throw sf::Error(sf::ErrorCode::kInvalidSvl, fmt::format("SME_FORGE_SVL='{}'", env));
}

bool is_usage_error(sf::ErrorCode c) {
  using E = sf::ErrorCode;
  switch (c) {
    case E::kInvalidSvl:
    case E::kInvalidDimension:
    case E::kInvalidMask:
    case E::kInvalidStrategy:
    case E::kInvalidPanel:
    case E::kInvalidSpec:
    case E::kUnsupportedDatatype:
    case E::kInvalidTransferSize:
    case E::kAsmSyntax:
    case E::kFixtureParseError:
      return true;
    default:
      return false;
  }
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_kernel(const sf::KernelBuffer& k, const std::string& path) {
  write_file(path, sf::to_bytes(k.words));
  std::ofstream manifest(path + ".manifest");
  manifest << fmt::format("scratch_bytes={}\nflops={}\nwords={}\n", k.scratch_bytes,
                          k.return_value, k.words.size());
}

struct GemmArgs {
  int m = 0, n = 0, k = 0;
  int lda = 0, ldb = 0, ldc = 0;
  std::string layout = "row";

  void add(CLI::App* cmd) {
    cmd->add_option("--m", m, "rows of A and C")->required();
    cmd->add_option("--n", n, "columns of B and C")->required();
    cmd->add_option("--k", k, "contraction length")->required();
    cmd->add_option("--lda", lda, "leading dimension of A (default m)");
    cmd->add_option("--ldb", ldb, "leading dimension of B (default n or k)");
    cmd->add_option("--ldc", ldc, "leading dimension of C (default m)");
    cmd->add_option("--b-layout", layout, "storage of B")->check(CLI::IsMember({"row", "col"}));
  }

  sf::GemmSpec spec() const {
    auto s = sf::make_spec(m, n, k, layout == "col" ? sf::BLayout::kColMajor
                                                    : sf::BLayout::kRowMajor);
    if (lda) s.lda = lda;
    if (ldb) s.ldb = ldb;
    if (ldc) s.ldc = ldc;
    return s;
  }
};

struct BenchArgs {
  std::string kind = "sme_fmopa";
  std::string dtype = "fp32";
  std::string strategy = "direct";
  std::uint64_t bytes = 4096;

  void add(CLI::App* cmd) {
    cmd->add_option("--kind", kind, "neon_fmla, sme_fmopa, bw_load or bw_store");
    cmd->add_option("--dtype", dtype, "fp32, fp64, fp16 or bf16");
    cmd->add_option("--strategy", strategy, "direct, 1vr, 2vr or 4vr");
    cmd->add_option("--bytes", bytes, "bytes per pass (bandwidth kinds)");
  }

  sf::BenchSpec spec() const {
    sf::BenchSpec s;
    s.kind = sf::parse_bench_kind(kind);
    s.dtype = sf::parse_dtype(dtype);
    s.strategy = sf::parse_bw_strategy(strategy);
    s.bytes_per_pass = bytes;
    return s;
  }
};

void print_report(const sf::RunReport& r) {
  fmt::print("kernel: {}\nmode: {}\nsteps: {}\nreturn: {}\n", r.kernel_id, r.mode, r.steps,
             r.return_value);
  if (r.mode == "native") fmt::print("seconds: {:.3f}\nrate: {:.4g}/s\n", r.seconds, r.rate);
  if (r.verdict) {
    fmt::print("max_error: {:.3g}\nverdict: {}\n", r.verdict->max_error,
               r.verdict->pass ? "PASS" : "FAIL");
    if (!r.verdict->detail.empty()) fmt::print("detail: {}\n", r.verdict->detail);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SME small-GEMM and microbenchmark kernel generator"};
  app.require_subcommand(1);
  int exit_code = 0;

  GemmArgs gen_args;
  std::string gen_out;
  bool gen_asm = false;
  auto* gen = app.add_subcommand("gen", "generate a GEMM kernel");
  gen_args.add(gen);
  gen->add_option("--out", gen_out, "raw little-endian words; a .manifest is written next to it");
  gen->add_flag("--asm", gen_asm, "print the disassembly");
  gen->callback([&] {
    const auto k = sf::generate_gemm(gen_args.spec());
    if (!gen_out.empty()) write_kernel(k, gen_out);
    if (gen_asm) fmt::print("{}", sf::disassemble(k.words));
    fmt::print("words={} scratch_bytes={} flops={}\n", k.words.size(), k.scratch_bytes,
               k.return_value);
  });

  int plan_m = 0, plan_n = 0;
  std::string plan_homog;
  auto* dump = app.add_subcommand("dump-plan", "print the block plan for an M x N output");
  dump->add_option("--m", plan_m)->required();
  dump->add_option("--n", plan_n)->required();
  dump->add_option("--homogeneous", plan_homog, "single-strategy plan (M32N32, M16N64, M64N16)");
  dump->callback([&] {
    const auto plan = plan_homog.empty()
                          ? sf::plan_blocks(plan_m, plan_n)
                          : sf::plan_homogeneous(plan_m, plan_n, sf::parse_strategy(plan_homog));
    for (const auto& b : plan.blocks) {
      fmt::print("{} m={} n={} active={}x{}\n", sf::block_strategy(b.strategy).name, b.m_offset,
                 b.n_offset, b.m_active, b.n_active);
    }
    const auto cost = sf::plan_cost(plan);
    fmt::print("executions={} loads_per_kstep={}\n", cost.microkernel_count,
               cost.operand_loads_per_kstep);
  });

  GemmArgs ver_args;
  std::uint64_t seed = 1;
  std::string mode = "uniform";
  auto* verify = app.add_subcommand("verify", "run a GEMM kernel in the emulator against a reference");
  ver_args.add(verify);
  verify->add_option("--seed", seed);
  verify->add_option("--mode", mode)->check(CLI::IsMember({"int", "uniform"}));
  verify->callback([&] {
    const auto r = sf::verify_gemm(ver_args.spec(), seed,
                                   mode == "int" ? sf::FillMode::kInteger : sf::FillMode::kUniform,
                                   svl_from_env());
    print_report(r);
    if (!r.verdict->pass) exit_code = kExitFail;
  });

  auto* bench = app.add_subcommand("bench", "microbenchmark kernels");
  bench->require_subcommand(1);
  BenchArgs emit_args;
  std::string emit_out;
  auto* bemit = bench->add_subcommand("emit", "write a benchmark kernel");
  emit_args.add(bemit);
  bemit->add_option("--out", emit_out)->required();
  bemit->callback([&] {
    const auto k = sf::emit_bench(emit_args.spec());
    write_kernel(k, emit_out);
    fmt::print("words={} returns={}\n", k.words.size(), k.return_value);
  });

  BenchArgs run_args;
  std::uint64_t reps = 1;
  bool native = false;
  double min_seconds = 1.0;
  auto* brun = bench->add_subcommand("run", "run a benchmark kernel (emulated unless --native)");
  run_args.add(brun);
  brun->add_option("--reps", reps, "repetitions (throughput) or passes (bandwidth)");
  brun->add_flag("--native", native, "execute on this host; needs SME");
  brun->add_option("--min-seconds", min_seconds);
  brun->callback([&] {
    const auto spec = run_args.spec();
    const auto k = sf::emit_bench(spec);
    const bool bandwidth =
        spec.kind == sf::BenchKind::kBwLoad || spec.kind == sf::BenchKind::kBwStore;
    if (native) {
      std::vector<std::uint8_t> data(bandwidth ? spec.bytes_per_pass : 0);
      const std::vector<std::uint64_t> args = {
          reps, reinterpret_cast<std::uint64_t>(data.data())};
      print_report(sf::native_execute(k, args, min_seconds, bandwidth ? 1 : reps));
      return;
    }
    sf::Machine m(svl_from_env());
    constexpr std::uint64_t kData = 0x100000;
    if (bandwidth) m.write_memory(kData, std::vector<std::uint8_t>(spec.bytes_per_pass, 0));
    if (spec.kind == sf::BenchKind::kBwStore) m.execute(sf::insn::smstart_za());
    const std::uint64_t args[] = {reps, kData};
    const auto res = m.run(k.words, args, 1ULL << 32);
    sf::RunReport r;
    r.kernel_id = fmt::format("{} {}", sf::bench_kind_name(spec.kind),
                              bandwidth ? sf::bw_strategy_name(spec.strategy)
                                        : sf::dtype_name(spec.dtype));
    r.mode = "emulated";
    r.steps = res.steps;
    r.return_value = res.return_value;
    print_report(r);
    fmt::print("flops_executed: {}\n", m.flops_executed());
  });

  std::string fixture = SME_FORGE_GOLDEN;
  auto* golden = app.add_subcommand("golden-check", "check encodings against a fixture file");
  golden->add_option("fixture", fixture, "fixture path");
  golden->callback([&] {
    const auto entries = sf::load_golden(fixture);
    const auto bad = sf::check_golden(entries);
    for (const auto& mm : bad) {
      fmt::print("line {}: {} => {:08x}: {}\n", mm.entry.line, mm.entry.text, mm.entry.word,
                 mm.reason);
    }
    fmt::print("{} entries, {} mismatches\n", entries.size(), bad.size());
    if (!bad.empty()) exit_code = kExitFail;
  });

  std::string emu_file;
  bool emu_text = false;
  bool emu_trace = false;
  std::vector<std::uint64_t> emu_args;
  std::uint64_t emu_steps = 10'000'000;
  auto* emulate = app.add_subcommand("emulate", "run a kernel file in the emulator");
  emulate->add_option("kernel", emu_file, "raw words, or assembly with --asm")->required();
  emulate->add_flag("--asm", emu_text, "input is assembly text");
  emulate->add_flag("--trace", emu_trace, "print every executed instruction");
  emulate->add_option("--args", emu_args, "values for x0..x7")->delimiter(',');
  emulate->add_option("--max-steps", emu_steps);
  emulate->callback([&] {
    const auto bytes = read_file(emu_file);
    const auto words = emu_text ? sf::assemble(sf::parse_program(
                                      std::string(bytes.begin(), bytes.end())))
                                : sf::from_bytes(bytes);
    sf::Machine m(svl_from_env());
    sf::Machine::Trace trace;
    if (emu_trace) {
      trace = [](std::size_t pc, const sf::Instruction& in) {
        fmt::print("pc={} {}\n", pc, sf::format(in));
      };
    }
    const auto r = m.run(words, emu_args, emu_steps, trace);
    fmt::print("return: {}\nsteps: {}\n", r.return_value, r.steps);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const sf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_usage_error(e.code()) ? kExitUsage : kExitFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return exit_code;
}
