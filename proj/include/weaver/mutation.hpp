// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include "weaver/analyzer.hpp"
#include "weaver/scheduler.hpp"
#include "weaver/wasm_codegen.hpp"

namespace weaver {

struct MutationEnv {
  const StaticTypeEnvironment* env = nullptr;
  EngineProfile profile;
  GenerationBudget budget;
};

// One variable substitution performed by splice, kept so callers can audit
// dual-type compatibility at the remapped site after re-analysis.
struct SpliceRemap {
  Variable donor_variable;   // id in the output program (the slice definition)
  Variable target_variable;  // the substituted-in variable
};

struct SpliceResult {
  Program program;
  std::vector<SpliceRemap> remaps;
  size_t insertion_index = 0;
  size_t slice_length = 0;
};

// Inserts a self-contained donor slice (an instruction plus its definition
// closure, block spans included whole) at a random top-level point of the
// target, remapping a random subset of the slice's variables to target
// variables compatible on both the JS type and the Wasm value sets. Donor
// Wasm types re-intern into the target's record on re-analysis.
std::optional<SpliceResult> splice(const Program& target, const Program& donor, Rng& rng,
                                   const MutationEnv& env);

// Replaces one instruction's payload within its opcode family, preserving
// arity.
std::optional<Program> operation_mutator(const Program& program, Rng& rng,
                                         const MutationEnv& env);

// Rewires one input to another dual-type-compatible visible variable.
std::optional<Program> input_mutator(const Program& program, Rng& rng, const MutationEnv& env);

// Concatenates two programs with variable renumbering.
Program combine(const Program& p, const Program& q);

const std::vector<const char*>& mutator_names();  // arm order for the scheduler

struct MutationOutcome {
  Program program;
  std::vector<size_t> applied_arms;  // every mutator in the chain
  bool noop = false;
};

// Applies k in [1,5] consecutive mutations chosen by the mutator scheduler;
// failed applications are skipped. When nothing applies, the seed comes back
// unchanged with the noop marker set.
MutationOutcome mutate_pipeline(const Program& seed, Rng& rng, SchedulerState& mutator_scheduler,
                                const std::vector<Program>& donors, const MutationEnv& env);

}  // namespace weaver
