// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <set>

#include "doctest.h"
#include "weaver/analyzer.hpp"
#include "weaver/campaign.hpp"
#include "weaver/lifter.hpp"

using namespace weaver;

namespace {

std::string strip_whitespace(const std::string& s) {
  std::string out;
  for (char c : s)
    if (c != ' ' && c != '\n' && c != '\t') out += c;
  return out;
}

bool contains_modulo_whitespace(const std::string& text, const std::string& fragment) {
  return strip_whitespace(text).find(strip_whitespace(fragment)) != std::string::npos;
}

// Token-level syntax sanity: bracket balance and string termination, same
// rules the stub shell uses for its parse check.
bool syntax_plausible(const std::string& src) {
  std::vector<char> stack;
  bool in_string = false, escaped = false;
  for (char c : src) {
    if (in_string) {
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      else if (c == '\n') return false;
      continue;
    }
    switch (c) {
      case '"': in_string = true; break;
      case '(': case '[': case '{': stack.push_back(c); break;
      case ')':
        if (stack.empty() || stack.back() != '(') return false;
        stack.pop_back();
        break;
      case ']':
        if (stack.empty() || stack.back() != '[') return false;
        stack.pop_back();
        break;
      case '}':
        if (stack.empty() || stack.back() != '{') return false;
        stack.pop_back();
        break;
      default: break;
    }
  }
  return stack.empty() && !in_string;
}

}  // namespace

TEST_CASE("the running example lifts to the expected text") {
  // Arrange ids so the builtin lands in v1, matching the worked listing.
  ProgramBuilder b;
  b.append(Opcode::LoadUndefined, {});
  auto v1 = b.append(Opcode::LoadBuiltin, {}, NamePayload{"Reflect"}).outputs[0];
  WasmTableType table;
  table.element_type = ValueType::externref();
  table.initial = 4;
  auto v2 = b.append(Opcode::CreateWasmTable, {v1}, table).outputs[0];
  b.append(Opcode::SetProperty, {v1, v2}, NamePayload{"__proto__"});
  std::string text = lift(b.take());

  CHECK(contains_modulo_whitespace(
      text, "new WebAssembly.Table({element:\"externref\", initial:4}, v1)"));
  CHECK(contains_modulo_whitespace(text, "const v1 = Reflect;"));
  CHECK(contains_modulo_whitespace(text, "v1.__proto__ = v2;"));
  CHECK(text.back() == '\n');
}

TEST_CASE("memory descriptors include only present fields") {
  ProgramBuilder b;
  b.append(Opcode::CreateWasmMemory, {}, WasmMemoryType{63, std::nullopt, AddrType::Addr32,
                                                        false});
  std::string text = lift(b.take());
  CHECK(contains_modulo_whitespace(text, "new WebAssembly.Memory({initial:63})"));

  ProgramBuilder b2;
  b2.append(Opcode::CreateWasmMemory, {}, WasmMemoryType{1, 4, AddrType::Addr64, true});
  std::string text2 = lift(b2.take());
  CHECK(contains_modulo_whitespace(
      text2, "new WebAssembly.Memory({initial:1, maximum:4, shared:true, address:\"i64\"})"));
}

TEST_CASE("funcref tables and globals use the compatible anyfunc spelling") {
  ProgramBuilder b;
  WasmTableType table;
  table.element_type = ValueType::funcref();
  table.initial = 2;
  b.append(Opcode::CreateWasmTable, {}, table);
  b.append(Opcode::CreateWasmGlobal, {}, WasmGlobalType{ValueType::funcref(), true});
  std::string text = lift(b.take());
  CHECK(contains_modulo_whitespace(text, "{element:\"anyfunc\", initial:2}"));
  CHECK(contains_modulo_whitespace(text, "new WebAssembly.Global({value:\"anyfunc\", mutable:true})"));
}

TEST_CASE("bigint literals carry the n suffix; numbers render deterministically") {
  ProgramBuilder b;
  b.append(Opcode::LoadBigInt, {}, BigIntPayload{-7});
  b.append(Opcode::LoadNumber, {}, NumberPayload{3.14});
  b.append(Opcode::LoadNumber, {}, NumberPayload{-0.0});
  b.append(Opcode::LoadNumber, {}, NumberPayload{1e21});
  std::string text = lift(b.take());
  CHECK(text.find("const v0 = -7n;") != std::string::npos);
  CHECK(text.find("const v1 = 3.14;") != std::string::npos);
  CHECK(text.find("const v2 = -0;") != std::string::npos);
  CHECK(text.find("const v3 = 1e+21;") != std::string::npos);

  // An i64-typed global initialized from a bigint keeps the suffix form.
  ProgramBuilder b2;
  auto big = b2.append(Opcode::LoadBigInt, {}, BigIntPayload{5}).outputs[0];
  b2.append(Opcode::CreateWasmGlobal, {big}, WasmGlobalType{ValueType::i64(), false});
  std::string text2 = lift(b2.take());
  CHECK(contains_modulo_whitespace(text2, "new WebAssembly.Global({value:\"i64\"}, v0)"));
}

TEST_CASE("module bytes embed as a Uint8Array literal and imports group by module") {
  ProgramBuilder b;
  WasmModuleType shape;
  shape.imports.push_back({"m0", "f0", WasmExternType{WasmMemoryType{1, 2, AddrType::Addr32,
                                                                     false}}});
  shape.imports.push_back({"m0", "g", WasmExternType{WasmGlobalType{ValueType::i32(), false}}});
  shape.imports.push_back({"other", "f", WasmExternType{WasmTagType{{}}}});
  auto mod =
      b.append(Opcode::CompileWasmModule, {}, WasmModulePayload{{0x00, 0x61, 0x73, 0x6D,
                                                                 0x01, 0x00, 0x00, 0x00},
                                                                shape})
          .outputs[0];
  auto mem = b.append(Opcode::CreateWasmMemory, {}, WasmMemoryType{1, 2, AddrType::Addr32,
                                                                   false})
                 .outputs[0];
  auto num = b.append(Opcode::LoadNumber, {}, NumberPayload{0}).outputs[0];
  auto tag = b.append(Opcode::CreateWasmTag, {}, WasmTagType{{}}).outputs[0];
  auto inst = b.append(Opcode::InstantiateWasmModule, {mod, mem, num, tag}).outputs[0];
  b.append(Opcode::WasmInstanceExport, {inst},
           WasmExportPayload{"e0", WasmExternType{WasmMemoryType{1, 2, AddrType::Addr32, false}},
                             {}});
  std::string text = lift(b.take());

  CHECK(contains_modulo_whitespace(text,
                                   "new WebAssembly.Module(new Uint8Array([0,97,115,109,1,0,0,0]))"));
  CHECK(contains_modulo_whitespace(
      text, "new WebAssembly.Instance(v0, {\"m0\": {\"f0\": v1, \"g\": v2}, \"other\": {\"f\": v3}})"));
  CHECK(contains_modulo_whitespace(text, "const v5 = v4.exports.e0;"));
}

TEST_CASE("control flow lifts with balanced braces and block-scoped names") {
  ProgramBuilder b;
  auto fn = b.append(Opcode::BeginFunction, {}, FunctionPayload{2});
  Variable f = fn.outputs[0], p0 = fn.outputs[1], p1 = fn.outputs[2];
  auto sum = b.append(Opcode::BinaryOp, {p0, p1}, OperatorPayload{"+"}).outputs[0];
  b.append(Opcode::Return, {sum});
  b.append(Opcode::EndFunction, {});
  b.append(Opcode::BeginTry, {});
  b.append(Opcode::CallFunction, {f});
  b.append(Opcode::BeginCatch, {});
  b.append(Opcode::EndTry, {});
  b.append(Opcode::BeginForLoop, {}, LoopPayload{150});
  b.append(Opcode::CallFunction, {f});
  b.append(Opcode::EndForLoop, {});
  Program p = b.take();
  REQUIRE(validate_program(p).ok());
  std::string text = lift(p);

  CHECK(contains_modulo_whitespace(text, "const v0 = function (v1, v2) {"));
  CHECK(contains_modulo_whitespace(text, "return v3;"));
  CHECK(contains_modulo_whitespace(text, "try {"));
  CHECK(contains_modulo_whitespace(text, "} catch (v5) {"));
  CHECK(contains_modulo_whitespace(text, "for (let v6 = 0; v6 < 150; v6++) {"));
  CHECK(syntax_plausible(text));
}

TEST_CASE("string escaping stays inside double quotes") {
  ProgramBuilder b;
  b.append(Opcode::LoadString, {}, StringPayload{"a\"b\\c\nd\te"});
  auto obj = b.append(Opcode::CreateObject, {}, PropertyListPayload{}).outputs[0];
  b.append(Opcode::GetProperty, {obj}, NamePayload{"weird name"});
  std::string text = lift(b.take());
  CHECK(text.find("\"a\\\"b\\\\c\\nd\\te\"") != std::string::npos);
  CHECK(text.find("v1[\"weird name\"]") != std::string::npos);
  CHECK(syntax_plausible(text));
}

TEST_CASE("lift is deterministic") {
  StaticTypeEnvironment env = StaticTypeEnvironment::default_catalog();
  GenerationBudget budget;
  MinimalSynthesizer synthesizer(budget);
  auto programs = generate_corpus(20, 0x11f7, EngineProfile::generic(), budget, synthesizer, env);
  for (const auto& p : programs) {
    CHECK(lift(p) == lift(p));
    Program copy = p;
    CHECK(lift(copy) == lift(p));
  }
}

TEST_CASE("property: generated programs lift to plausible syntax, injectively") {
  StaticTypeEnvironment env = StaticTypeEnvironment::default_catalog();
  GenerationBudget budget;
  MinimalSynthesizer synthesizer(budget);
  auto programs = generate_corpus(200, 0x11f8, EngineProfile::v8(), budget, synthesizer, env);
  std::set<std::string> texts;
  std::set<Bytes> encodings;
  for (const auto& p : programs) {
    REQUIRE(validate_program(p).ok());
    std::string text = lift(p);
    CHECK(syntax_plausible(text));
    bool fresh_program = encodings.insert(serialize(p)).second;
    bool fresh_text = texts.insert(text).second;
    // Distinct instruction sequences yield distinct texts.
    CHECK(fresh_program == fresh_text);
  }
}
