// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "weaver/campaign.hpp"
#include "weaver/lifter.hpp"
#include "weaver/profile.hpp"

namespace {

weaver::Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return weaver::Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weaver: greybox fuzzing of the JS-Wasm interaction boundary"};
  app.require_subcommand(1);

  // --- fuzz ---
  weaver::CampaignConfig campaign;
  weaver::EngineConfig engine;
  auto* fuzz = app.add_subcommand("fuzz", "run a fuzzing campaign against a JS shell");
  fuzz->add_option("--engine", engine.shell_path, "path to the JS shell")->required();
  fuzz->add_option("--engine-arg", engine.extra_args, "extra shell argument (repeatable)");
  fuzz->add_option("--timeout-ms", engine.timeout_ms, "per-execution timeout (default 600)");
  fuzz->add_option("--profile", engine.profile_name,
                   "engine profile: jsc|v8|spidermonkey|generic");
  fuzz->add_option("--seed", campaign.seed, "campaign seed");
  fuzz->add_option("--corpus", campaign.corpus_dir, "corpus directory");
  fuzz->add_option("--crashes", campaign.crash_dir, "crash artifact directory");
  fuzz->add_option("--stats", campaign.stats_path, "stats JSON path");
  fuzz->add_option("--max-execs", campaign.max_executions, "execution budget");
  fuzz->add_option("--wasm-amplification", campaign.wasm_amplification,
                   "weight multiplier for Wasm generator arms");
  fuzz->add_option("--rebalance-interval", campaign.rebalance_interval,
                   "executions between weight recalculations");
  fuzz->add_option("--synthesizer", campaign.synthesizer_spec, "builtin | cmd:PATH");
  fuzz->add_option("--workers", campaign.workers, "worker process count");
  fuzz->add_option("--gen-target", campaign.generative_phase_target,
                   "corpus size that ignites the mutation phase");
  fuzz->add_option("--builtins", campaign.builtins_path, "builtin catalog JSON override");
  fuzz->add_option("--transcript", campaign.transcript_path,
                   "write a deterministic per-execution transcript");
  fuzz->add_option("--coverage-dump", engine.coverage_dump_path,
                   "per-run coverage dump path (enables coverage feedback)");
  fuzz->add_option("--memory-page-cap", campaign.budget.memory_page_cap, "max initial pages");
  fuzz->add_option("--table-size-cap", campaign.budget.table_size_cap, "max initial elements");

  // --- generate ---
  size_t gen_count = 10;
  std::string gen_out_dir = ".";
  uint64_t gen_seed = 1;
  std::string gen_profile = "generic";
  std::string gen_synth = "builtin";
  std::string gen_builtins;
  bool gen_emit_ir = false;
  auto* generate = app.add_subcommand("generate", "emit lifted .js test cases");
  generate->add_option("-n,--count", gen_count, "number of programs");
  generate->add_option("-o,--out", gen_out_dir, "output directory")->required();
  generate->add_option("--seed", gen_seed, "generation seed");
  generate->add_option("--profile", gen_profile, "engine profile");
  generate->add_option("--synthesizer", gen_synth, "builtin | cmd:PATH");
  generate->add_option("--builtins", gen_builtins, "builtin catalog JSON override");
  generate->add_flag("--emit-ir", gen_emit_ir, "also write .wvil corpus entries");

  // --- lift ---
  std::string lift_path;
  auto* lift_cmd = app.add_subcommand("lift", "lift a .wvil corpus entry to JavaScript");
  lift_cmd->add_option("file", lift_path, "corpus entry")->required();

  // --- stats ---
  std::string stats_path;
  auto* stats_cmd = app.add_subcommand("stats", "summarize a stats JSON file");
  stats_cmd->add_option("file", stats_path, "stats file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fuzz) {
      weaver::CampaignTotals totals = weaver::fuzz_loop(campaign, engine);
      std::cout << "executions=" << totals.executions << " valid=" << totals.valid
                << " runtimeError=" << totals.runtime_error << " timeout=" << totals.timeout
                << " crash=" << totals.crash << " corpus=" << totals.corpus_size
                << " validityRate=" << totals.validity_rate() << "\n";
      return 0;
    }
    if (*generate) {
      std::filesystem::create_directories(gen_out_dir);
      auto env = gen_builtins.empty() ? weaver::StaticTypeEnvironment::default_catalog()
                                      : weaver::StaticTypeEnvironment::from_json_file(gen_builtins);
      weaver::GenerationBudget budget;
      auto synthesizer = weaver::make_synthesizer(gen_synth, budget);
      auto programs = weaver::generate_corpus(gen_count, gen_seed,
                                              weaver::EngineProfile::by_name(gen_profile), budget,
                                              *synthesizer, env);
      for (size_t i = 0; i < programs.size(); ++i) {
        std::string base = gen_out_dir + "/program-" + std::to_string(i);
        std::ofstream(base + ".js", std::ios::binary) << weaver::lift(programs[i]);
        if (gen_emit_ir) {
          weaver::Bytes bytes = weaver::serialize(programs[i]);
          std::ofstream out(base + ".wvil", std::ios::binary);
          out.write(reinterpret_cast<const char*>(bytes.data()),
                    static_cast<std::streamsize>(bytes.size()));
        }
      }
      std::cout << "wrote " << programs.size() << " programs to " << gen_out_dir << "\n";
      return 0;
    }
    if (*lift_cmd) {
      weaver::Program program = weaver::deserialize(read_file(lift_path));
      std::cout << weaver::lift(program);
      return 0;
    }
    if (*stats_cmd) {
      nlohmann::json j = nlohmann::json::parse(read_file(stats_path));
      std::cout << "executions:   " << j.value("executions", 0ull) << "\n"
                << "valid:        " << j.value("valid", 0ull) << "\n"
                << "runtimeError: " << j.value("runtimeError", 0ull) << "\n"
                << "timeout:      " << j.value("timeout", 0ull) << "\n"
                << "crash:        " << j.value("crash", 0ull) << "\n"
                << "validityRate: " << j.value("validityRate", 0.0) << "\n"
                << "corpusSize:   " << j.value("corpusSize", 0ull) << "\n";
      if (j.contains("generatorArms")) {
        std::cout << "generator arms (valid/total, weight):\n";
        for (const auto& arm : j["generatorArms"]) {
          std::cout << "  " << arm.value("name", "?") << ": " << arm.value("valid", 0ull) << "/"
                    << arm.value("total", 0ull) << ", " << arm.value("weight", 0.0) << "\n";
        }
      }
      if (j.contains("mutatorArms")) {
        std::cout << "mutator arms (valid/total, weight):\n";
        for (const auto& arm : j["mutatorArms"]) {
          std::cout << "  " << arm.value("name", "?") << ": " << arm.value("valid", 0ull) << "/"
                    << arm.value("total", 0ull) << ", " << arm.value("weight", 0.0) << "\n";
        }
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
