// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "weaver/analyzer.hpp"
#include "weaver/wasm_codegen.hpp"

namespace weaver {

struct CodegenOptions {
  GenerationBudget budget;
  ModuleSynthesizer* synthesizer = nullptr;
  int max_wrap_depth = 2;
};

// One selectable arm. `apply` appends instructions and returns true, or
// returns false without touching the program when its preconditions fail
// (insufficient context, feature disabled, nesting too deep).
struct Generator {
  std::string name;
  bool is_wasm = false;
  std::function<bool(Rng&, GenerationContext&, const CodegenOptions&)> apply;
};

// The fixed arm list: 14 JS generators followed by the 5 Wasm generators.
const std::vector<Generator>& generator_registry();

// --- individual JS generators ---

bool builtin_generator(Rng& rng, GenerationContext& ctx);
bool primitive_literal_generator(Rng& rng, GenerationContext& ctx);
bool bigint_literal_generator(Rng& rng, GenerationContext& ctx);
bool object_literal_generator(Rng& rng, GenerationContext& ctx);
bool array_literal_generator(Rng& rng, GenerationContext& ctx);
bool property_get_generator(Rng& rng, GenerationContext& ctx);
bool property_set_generator(Rng& rng, GenerationContext& ctx);
bool call_generator(Rng& rng, GenerationContext& ctx);
bool construct_generator(Rng& rng, GenerationContext& ctx);
bool function_definition_generator(Rng& rng, GenerationContext& ctx);
bool prototype_overwrite_generator(Rng& rng, GenerationContext& ctx);
bool builtin_overwrite_generator(Rng& rng, GenerationContext& ctx);
bool try_wrap_generator(Rng& rng, GenerationContext& ctx, const CodegenOptions& opts);
bool loop_wrap_generator(Rng& rng, GenerationContext& ctx, const CodegenOptions& opts);

}  // namespace weaver
