// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "weaver/analyzer.hpp"
#include "weaver/wasm_binary.hpp"

namespace weaver {

// Caps keeping single executions inside the campaign timeout; large initial
// sizes are the dominant timeout cause.
struct GenerationBudget {
  uint64_t memory_page_cap = 16;
  uint64_t table_size_cap = 64;
  uint32_t max_type_defs = 4;
  uint32_t max_imports = 4;
  uint32_t max_exports = 6;
};

// Backend realizing a module shape as a concrete binary module. The output's
// import and export sections must match the shape exactly (same order, names
// and canonical types). Implementations must be safe to call from multiple
// workers concurrently.
class ModuleSynthesizer {
 public:
  virtual ~ModuleSynthesizer() = default;
  virtual Bytes synthesize(const ModuleShape& shape, uint64_t seed) = 0;
  virtual std::string describe() const = 0;
};

// Built-in synthesizer: stub bodies returning default values. Deterministic
// for a given shape; the seed only varies re-export choices.
Bytes synthesize_minimal(const ModuleShape& shape, uint64_t seed,
                         const GenerationBudget& budget = {});

class MinimalSynthesizer final : public ModuleSynthesizer {
 public:
  explicit MinimalSynthesizer(GenerationBudget budget = {}) : budget_(budget) {}
  Bytes synthesize(const ModuleShape& shape, uint64_t seed) override {
    return synthesize_minimal(shape, seed, budget_);
  }
  std::string describe() const override { return "builtin"; }

 private:
  GenerationBudget budget_;
};

// External backend invoked as a command: the shape is piped to stdin encoded
// as a minimal shape-module, the realized module is read from stdout, and
// the seed is passed as argv[1]. Output is gate-checked by parse_shape
// before use.
class CommandSynthesizer final : public ModuleSynthesizer {
 public:
  explicit CommandSynthesizer(std::string command) : command_(std::move(command)) {}
  Bytes synthesize(const ModuleShape& shape, uint64_t seed) override;
  std::string describe() const override { return "cmd:" + command_; }

 private:
  std::string command_;
};

// --- the five Wasm generators ---
//
// Each appends instructions to the context and returns the defined
// variable(s), or nullopt when preconditions are not met.

std::optional<Variable> gen_wasm_memory(Rng& rng, GenerationContext& ctx,
                                        const GenerationBudget& budget);
std::optional<Variable> gen_wasm_table(Rng& rng, GenerationContext& ctx,
                                       const GenerationBudget& budget);
std::optional<Variable> gen_wasm_global(Rng& rng, GenerationContext& ctx);
std::optional<Variable> gen_wasm_tag(Rng& rng, GenerationContext& ctx);

ModuleShape gen_module_shape(Rng& rng, GenerationContext& ctx, const GenerationBudget& budget);

std::optional<std::vector<Variable>> gen_instance_and_exports(Rng& rng, GenerationContext& ctx,
                                                              const GenerationBudget& budget,
                                                              ModuleSynthesizer& synthesizer);

// The six value types the standalone object generators draw from.
const std::vector<ValueType>& basic_value_types();

}  // namespace weaver
