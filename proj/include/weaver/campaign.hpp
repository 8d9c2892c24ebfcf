// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "weaver/executor.hpp"
#include "weaver/feedback.hpp"
#include "weaver/js_codegen.hpp"
#include "weaver/mutation.hpp"

namespace weaver {

struct CampaignConfig {
  uint64_t seed = 1;
  size_t generative_phase_target = 200;  // corpus size that ignites mutation
  uint64_t max_executions = 10000;
  uint64_t rebalance_interval = 2000;
  double wasm_amplification = 4.0;
  GenerationBudget budget;
  std::string corpus_dir = "corpus";
  std::string crash_dir = "crashes";
  std::string stats_path = "stats.json";
  std::string transcript_path;  // optional: deterministic per-execution log
  std::string builtins_path;    // optional: builtin catalog override (JSON)
  std::string synthesizer_spec = "builtin";  // builtin | cmd:PATH
  double phase2_generation_share = 0.10;
  int min_program_length = 10;
  int max_program_length = 60;
  int workers = 1;
  uint64_t stats_interval = 500;
};

struct CampaignTotals {
  uint64_t executions = 0;
  uint64_t valid = 0;
  uint64_t runtime_error = 0;
  uint64_t timeout = 0;
  uint64_t crash = 0;
  size_t corpus_size = 0;

  double validity_rate() const {
    uint64_t non_timeout = executions - timeout;
    return non_timeout == 0 ? 0.0 : static_cast<double>(valid) / non_timeout;
  }
};

std::unique_ptr<ModuleSynthesizer> make_synthesizer(const std::string& spec,
                                                    const GenerationBudget& budget);

// The fuzzing loop: generative phase until the corpus reaches its target,
// then a 90/10 mutation/generation mix; every execution recorded in the
// matching scheduler; novel outcomes preserved; crashes persisted with
// content-hash filenames. With workers > 1, independent worker processes
// run full pipelines and a coordinator merges corpora by structural-novelty
// re-evaluation through the filesystem.
CampaignTotals fuzz_loop(const CampaignConfig& campaign_cfg, const EngineConfig& engine_cfg);

// Seed-less generative construction of `count` programs (the `generate`
// subcommand and the lift-validity gate).
std::vector<Program> generate_corpus(size_t count, uint64_t seed, const EngineProfile& profile,
                                     const GenerationBudget& budget,
                                     ModuleSynthesizer& synthesizer,
                                     const StaticTypeEnvironment& env,
                                     int min_length = 10, int max_length = 60);

}  // namespace weaver
