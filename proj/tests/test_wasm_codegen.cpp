// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/stat.h>

#include <algorithm>
#include <fstream>

#include "doctest.h"
#include "wasm_ref_validator.hpp"
#include "weaver/analyzer.hpp"
#include "weaver/wasm_codegen.hpp"

using namespace weaver;

namespace {

const StaticTypeEnvironment& env() {
  static StaticTypeEnvironment e = StaticTypeEnvironment::default_catalog();
  return e;
}

GenerationContext make_ctx(EngineProfile profile = EngineProfile::generic()) {
  return GenerationContext(&env(), std::move(profile));
}

// A context with a few objects worth adopting/importing.
GenerationContext rich_ctx(Rng& rng, EngineProfile profile = EngineProfile::v8()) {
  GenerationContext ctx(&env(), std::move(profile));
  ctx.append(Opcode::LoadBuiltin, {}, NamePayload{"Reflect"});
  ctx.append(Opcode::LoadNumber, {}, NumberPayload{7});
  ctx.append(Opcode::LoadBigInt, {}, BigIntPayload{1});
  GenerationBudget budget;
  gen_wasm_memory(rng, ctx, budget);
  gen_wasm_table(rng, ctx, budget);
  gen_wasm_global(rng, ctx);
  gen_wasm_tag(rng, ctx);
  ctx.append(Opcode::BeginFunction, {}, FunctionPayload{0});
  ctx.append(Opcode::EndFunction, {});
  return ctx;
}

}  // namespace

TEST_CASE("memory generator respects budget, profile and shared-implies-max") {
  Rng rng(0xfeed0001);
  GenerationBudget budget;
  budget.memory_page_cap = 16;
  for (int iter = 0; iter < 300; ++iter) {
    auto ctx = make_ctx();  // generic profile: no memory64
    auto v = gen_wasm_memory(rng, ctx, budget);
    REQUIRE(v);
    const auto& payload = std::get<WasmMemoryType>(ctx.program().instructions.back().payload);
    CHECK(payload.initial <= 16);
    CHECK(payload.addrtype == AddrType::Addr32);
    if (payload.shared) CHECK(payload.maximum.has_value());
    if (payload.maximum) CHECK(*payload.maximum >= payload.initial);
    CHECK(payload.valid());
    CHECK(validate_program(ctx.program()).ok());
  }
  // jsc-style profile keeps addr32 even when 64-bit would be rolled.
  Rng rng2(0xfeed0002);
  for (int iter = 0; iter < 100; ++iter) {
    auto ctx = make_ctx(EngineProfile::jsc());
    gen_wasm_memory(rng2, ctx, budget);
    CHECK(std::get<WasmMemoryType>(ctx.program().instructions.back().payload).addrtype ==
          AddrType::Addr32);
  }
  // With memory64 enabled, 64-bit memories eventually appear.
  Rng rng3(0xfeed0003);
  bool saw64 = false;
  for (int iter = 0; iter < 200 && !saw64; ++iter) {
    auto ctx = make_ctx(EngineProfile::v8());
    gen_wasm_memory(rng3, ctx, budget);
    saw64 = std::get<WasmMemoryType>(ctx.program().instructions.back().payload).addrtype ==
            AddrType::Addr64;
  }
  CHECK(saw64);
}

TEST_CASE("table generator limits elements to funcref/externref and wires initializers") {
  Rng rng(0xfeed0010);
  GenerationBudget budget;
  bool saw_initializer = false, saw_default = false;
  for (int iter = 0; iter < 300; ++iter) {
    auto ctx = make_ctx();
    Variable builtin = ctx.append(Opcode::LoadBuiltin, {}, NamePayload{"Math"}).outputs[0];
    auto v = gen_wasm_table(rng, ctx, budget);
    REQUIRE(v);
    const Instruction& instr = ctx.program().instructions.back();
    const auto& payload = std::get<WasmTableType>(instr.payload);
    bool is_func = payload.element_type == ValueType::funcref();
    bool is_extern = payload.element_type == ValueType::externref();
    CHECK((is_func || is_extern));
    CHECK(payload.initial <= budget.table_size_cap);
    if (is_extern) {
      // The builtin is externref-compatible, so it must be used.
      REQUIRE(instr.inputs.size() == 1);
      CHECK(instr.inputs[0] == builtin);
      saw_initializer = true;
    }
    if (instr.inputs.empty()) saw_default = true;
    CHECK(validate_program(ctx.program()).ok());
  }
  CHECK(saw_initializer);
  CHECK(saw_default);  // funcref tables with no function in scope
}

TEST_CASE("global generator draws from the six allowed types and finds initializers") {
  Rng rng(0xfeed0020);
  bool saw_i64_init = false;
  for (int iter = 0; iter < 400; ++iter) {
    auto ctx = make_ctx();
    Variable big = ctx.append(Opcode::LoadBigInt, {}, BigIntPayload{5}).outputs[0];
    auto v = gen_wasm_global(rng, ctx);
    REQUIRE(v);
    const Instruction& instr = ctx.program().instructions.back();
    const auto& payload = std::get<WasmGlobalType>(instr.payload);
    CHECK(std::find(basic_value_types().begin(), basic_value_types().end(),
                    payload.content_type) != basic_value_types().end());
    if (payload.content_type == ValueType::i64()) {
      REQUIRE(instr.inputs.size() == 1);
      CHECK(instr.inputs[0] == big);
      saw_i64_init = true;
    }
    CHECK(validate_program(ctx.program()).ok());
  }
  CHECK(saw_i64_init);
}

TEST_CASE("tag generator emits 0-4 parameters from the allowed list, never v128") {
  Rng rng(0xfeed0030);
  bool saw_empty = false;
  for (int iter = 0; iter < 200; ++iter) {
    auto ctx = make_ctx();
    auto v = gen_wasm_tag(rng, ctx);
    REQUIRE(v);
    const auto& payload = std::get<WasmTagType>(ctx.program().instructions.back().payload);
    CHECK(payload.parameters.size() <= 4);
    if (payload.parameters.empty()) saw_empty = true;
    for (const auto& p : payload.parameters) {
      CHECK_FALSE(p == ValueType::v128());
      CHECK(std::find(basic_value_types().begin(), basic_value_types().end(), p) !=
            basic_value_types().end());
    }
    // Round-trips through the record.
    WasmTypeRecord record;
    uint32_t idx = record.intern_tag(payload);
    CHECK(record.tags()[idx] == payload);
  }
  CHECK(saw_empty);

  // Exceptions disabled: the generator declines.
  auto profile = EngineProfile::generic();
  profile.exceptions = false;
  auto ctx = make_ctx(profile);
  CHECK_FALSE(gen_wasm_tag(rng, ctx).has_value());
}

TEST_CASE("synthesize_minimal: empty shape is a bare header that validates") {
  ModuleShape empty;
  Bytes bytes = synthesize_minimal(empty, 0);
  REQUIRE(bytes.size() == 8);
  CHECK(bytes[0] == 0x00);
  CHECK(bytes[1] == 0x61);
  CHECK(bytes[2] == 0x73);
  CHECK(bytes[3] == 0x6D);
  auto result = refval::validate(bytes);
  CHECK_MESSAGE(result.ok, result.error);
  CHECK(parse_shape(bytes).imports.empty());
  CHECK(parse_shape(bytes).exports.empty());
}

TEST_CASE("synthesize_minimal: function exports get default-value stub bodies") {
  ModuleShape shape;
  shape.exports.push_back(
      {"e0", WasmExternType{WasmFunctionType{{ValueType::i32()}, {ValueType::i64()}}}});
  Bytes bytes = synthesize_minimal(shape, 0);
  auto result = refval::validate(bytes);
  CHECK_MESSAGE(result.ok, result.error);
  ModuleShape parsed = parse_shape(bytes);
  CHECK(shapes_equal(parsed, canonicalize_shape(shape)));
}

TEST_CASE("synthesize_minimal enforces budget caps") {
  GenerationBudget budget;
  ModuleShape shape;
  shape.exports.push_back(
      {"m", WasmExternType{WasmMemoryType{budget.memory_page_cap + 1, std::nullopt,
                                          AddrType::Addr32, false}}});
  CHECK_THROWS_AS(synthesize_minimal(shape, 0, budget), ShapeTooLarge);

  ModuleShape too_many;
  for (uint32_t i = 0; i < budget.max_exports + 1; ++i)
    too_many.exports.push_back(
        {"e" + std::to_string(i), WasmExternType{WasmGlobalType{ValueType::i32(), false}}});
  CHECK_THROWS_AS(synthesize_minimal(too_many, 0, budget), ShapeTooLarge);
}

TEST_CASE("parse_shape rejects malformed modules with an offset") {
  CHECK_THROWS_AS(parse_shape(Bytes{0x00, 0x61, 0x73}), MalformedModule);

  // Truncated LEB inside the import section.
  ModuleShape shape;
  shape.imports.push_back({"m0", "f0", WasmExternType{WasmMemoryType{1, 2, AddrType::Addr32,
                                                                     false}}});
  Bytes bytes = synthesize_minimal(shape, 0);
  Bytes truncated(bytes.begin(), bytes.end() - 3);
  try {
    parse_shape(truncated);
    CHECK(false);
  } catch (const MalformedModule& e) {
    CHECK(e.offset() > 8);
  }

  Bytes garbage = bytes;
  garbage.push_back(0x63);  // dangling extra byte outside any section
  CHECK_THROWS_AS(parse_shape(garbage), MalformedModule);
}

TEST_CASE("module shape generation: four-step postconditions") {
  GenerationBudget budget;
  Rng rng(0xfeed0040);
  int adopted_memory_import = 0;
  for (int iter = 0; iter < 300; ++iter) {
    auto ctx = rich_ctx(rng);
    ModuleShape shape = gen_module_shape(rng, ctx, budget);
    CHECK(shape.type_defs.size() <= budget.max_type_defs);
    CHECK(shape.imports.size() <= budget.max_imports);
    CHECK(shape.exports.size() <= budget.max_exports);

    std::set<std::string> export_names;
    for (const auto& exp : shape.exports) {
      CHECK(export_names.insert(exp.field).second);  // unique names
      CHECK_FALSE(mentions_excluded_type(exp.type, shape.type_defs));
    }
    std::set<std::pair<std::string, std::string>> import_pairs;
    for (const auto& imp : shape.imports) {
      CHECK(import_pairs.insert({imp.module, imp.field}).second);
      CHECK_FALSE(mentions_excluded_type(imp.type, shape.type_defs));
      if (imp.type.kind() == ExternKind::Memory) {
        // Adopted memory types mirror a context object exactly.
        const auto& memories = ctx.record().memories();
        for (const auto& m : memories)
          if (m == imp.type.memory()) ++adopted_memory_import;
      }
    }
  }
  CHECK(adopted_memory_import > 0);

  // Zero imports and exports is legal: the minimal module.
  ModuleShape minimal;
  CHECK(refval::validate(synthesize_minimal(minimal, 1)).ok);
}

TEST_CASE("generated shapes synthesize, validate and round-trip (per-profile)") {
  GenerationBudget budget;
  for (auto profile : {EngineProfile::generic(), EngineProfile::v8()}) {
    Rng rng(0xfeed0050 + (profile.gc ? 1 : 0));
    for (int iter = 0; iter < 150; ++iter) {
      auto ctx = rich_ctx(rng, profile);
      ModuleShape shape = gen_module_shape(rng, ctx, budget);
      Bytes bytes;
      try {
        bytes = synthesize_minimal(shape, rng.next());
      } catch (const SynthesisError& e) {
        // Shape generation is budget-bounded; synthesis must not refuse.
        FAIL("synthesis refused generated shape: ", e.what());
        continue;
      }
      auto result = refval::validate(bytes);
      REQUIRE_MESSAGE(result.ok, result.error, " at offset ", result.offset);
      ModuleShape parsed = parse_shape(bytes);
      CHECK_MESSAGE(shapes_equal(parsed, canonicalize_shape(shape)),
                    "round-trip mismatch:\n", shape_fingerprint(parsed), "\nvs\n",
                    shape_fingerprint(canonicalize_shape(shape)));
    }
  }
}

TEST_CASE("instance generation wires imports, instantiates, and projects exports") {
  GenerationBudget budget;
  MinimalSynthesizer synthesizer(budget);
  Rng rng(0xfeed0060);
  int instances = 0, projected = 0, import_inputs = 0;
  for (int iter = 0; iter < 150; ++iter) {
    auto ctx = rich_ctx(rng);
    auto defined = gen_instance_and_exports(rng, ctx, budget, synthesizer);
    if (!defined) continue;
    ++instances;
    REQUIRE(validate_program(ctx.program()).ok());

    // Locate the shape and the instantiate instruction.
    const Program& p = ctx.program();
    const Instruction* compile = nullptr;
    const Instruction* instantiate = nullptr;
    for (const auto& instr : p.instructions) {
      if (instr.op == Opcode::CompileWasmModule) compile = &instr;
      if (instr.op == Opcode::InstantiateWasmModule) instantiate = &instr;
    }
    REQUIRE(compile);
    REQUIRE(instantiate);
    const auto& payload = std::get<WasmModulePayload>(compile->payload);
    CHECK(refval::validate(payload.bytes).ok);
    CHECK(instantiate->inputs.size() == 1 + payload.shape.imports.size());
    import_inputs += static_cast<int>(payload.shape.imports.size());

    // Every projection annotates with its category and is discoverable.
    size_t exports_seen = 0;
    for (const auto& instr : p.instructions) {
      if (instr.op != Opcode::WasmInstanceExport) continue;
      ++exports_seen;
      const auto& exp = std::get<WasmExportPayload>(instr.payload);
      const TypeAnnotation& ann = ctx.annotation(instr.outputs[0]);
      switch (exp.type.kind()) {
        case ExternKind::Memory:
          CHECK_FALSE(ann.wasm.of(TypeCategory::Memory).empty());
          break;
        case ExternKind::Table:
          CHECK_FALSE(ann.wasm.of(TypeCategory::Table).empty());
          break;
        case ExternKind::Global:
          CHECK_FALSE(ann.wasm.of(TypeCategory::Global).empty());
          break;
        case ExternKind::Tag:
          CHECK_FALSE(ann.wasm.of(TypeCategory::Tag).empty());
          break;
        case ExternKind::Function: {
          CHECK_FALSE(ann.wasm.of(TypeCategory::Function).empty());
          CHECK(ann.js_type.has(JSType::kFunction));
          ++projected;
          break;
        }
      }
    }
    CHECK(exports_seen == payload.shape.exports.size());
  }
  CHECK(instances > 100);
  CHECK(projected > 0);
  CHECK(import_inputs > 0);
}

TEST_CASE("instantiation inputs satisfy the import types they feed") {
  GenerationBudget budget;
  MinimalSynthesizer synthesizer(budget);
  Rng rng(0xfeed0070);
  int checked_globals = 0;
  for (int iter = 0; iter < 200; ++iter) {
    auto ctx = rich_ctx(rng);
    auto defined = gen_instance_and_exports(rng, ctx, budget, synthesizer);
    if (!defined) continue;
    const Program& p = ctx.program();
    const Instruction* compile = nullptr;
    const Instruction* instantiate = nullptr;
    for (const auto& instr : p.instructions) {
      if (instr.op == Opcode::CompileWasmModule) compile = &instr;
      if (instr.op == Opcode::InstantiateWasmModule) instantiate = &instr;
    }
    const auto& shape = std::get<WasmModulePayload>(compile->payload).shape;
    for (size_t i = 0; i < shape.imports.size(); ++i) {
      const WasmImport& imp = shape.imports[i];
      Variable arg = instantiate->inputs[1 + i];
      const TypeAnnotation& ann = ctx.annotation(arg);
      if (imp.type.kind() == ExternKind::Global && !imp.type.global().mutability) {
        // Value-satisfied immutable global: some value type must match.
        ValueType want = ctx.record().canonicalize(imp.type.global().content_type,
                                                   shape.type_defs);
        bool object_match = !ann.wasm.of(TypeCategory::Global).empty();
        bool value_match = false;
        for (uint32_t idx : ann.wasm.of(TypeCategory::Value))
          if (matches(want, ctx.record().values()[idx], ctx.record())) value_match = true;
        CHECK((object_match || value_match));
        ++checked_globals;
      }
      if (imp.type.kind() == ExternKind::Function) {
        bool is_wasm_function = !ann.wasm.of(TypeCategory::Function).empty();
        bool is_js_function = ann.js_type.has(JSType::kFunction);
        CHECK((is_wasm_function || is_js_function));
      }
    }
  }
  CHECK(checked_globals > 0);
}

TEST_CASE("command synthesizer round-trips through an external process") {
  // An echoing backend is a degenerate but shape-faithful synthesizer: the
  // shape-module itself realizes the shape by construction. The wrapper
  // swallows the seed argument the protocol passes as argv[1].
  std::string script = "/tmp/weaver-test-echo-synth.sh";
  {
    std::ofstream out(script);
    out << "#!/bin/sh\nexec cat\n";
  }
  chmod(script.c_str(), 0755);
  CommandSynthesizer echo(script);
  ModuleShape shape;
  shape.exports.push_back({"g", WasmExternType{WasmGlobalType{ValueType::f64(), true}}});
  Bytes bytes = echo.synthesize(shape, 42);
  CHECK(shapes_equal(parse_shape(bytes), canonicalize_shape(shape)));

  CommandSynthesizer broken("/bin/false");
  CHECK_THROWS_AS(broken.synthesize(shape, 0), SynthesisError);
}
