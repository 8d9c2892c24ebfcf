// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "weaver/ir.hpp"

using namespace weaver;

namespace {

// The three-instruction running example: a builtin, a table initialized from
// it, and a prototype overwrite connecting the two.
Program running_example() {
  ProgramBuilder b;
  auto v0 = b.append(Opcode::LoadBuiltin, {}, NamePayload{"Reflect"}).outputs[0];
  WasmTableType table;
  table.element_type = ValueType::externref();
  table.initial = 4;
  auto v1 = b.append(Opcode::CreateWasmTable, {v0}, table).outputs[0];
  b.append(Opcode::SetProperty, {v0, v1}, NamePayload{"__proto__"});
  return b.take();
}

}  // namespace

TEST_CASE("append defines fresh variables and enforces def-before-use") {
  ProgramBuilder b;
  const Instruction& first = b.append(Opcode::LoadBuiltin, {}, NamePayload{"Reflect"});
  CHECK(first.outputs.size() == 1);
  CHECK(first.outputs[0].id == 0);
  CHECK(first.outputs[0].name() == "v0");
  CHECK(b.program().size() == 1);

  // Using an undefined variable is rejected.
  CHECK_THROWS_AS(b.append(Opcode::SetProperty, {Variable{0}, Variable{7}}, NamePayload{"x"}),
                  AppendError);
  // Arity violations are rejected.
  CHECK_THROWS_AS(b.append(Opcode::GetProperty, {}, NamePayload{"x"}), AppendError);
  // Payload mismatches are rejected.
  CHECK_THROWS_AS(b.append(Opcode::LoadBuiltin, {}, NumberPayload{1.0}), AppendError);
}

TEST_CASE("the running example encodes as three instructions and validates") {
  Program p = running_example();
  REQUIRE(p.size() == 3);
  CHECK(p.instructions[0].op == Opcode::LoadBuiltin);
  CHECK(p.instructions[1].op == Opcode::CreateWasmTable);
  CHECK(p.instructions[2].op == Opcode::SetProperty);
  CHECK(std::get<NamePayload>(p.instructions[2].payload).name == "__proto__");
  CHECK(p.next_variable_id == 2);
  CHECK(validate_program(p).ok());
}

TEST_CASE("validation flags unbalanced blocks") {
  Program p = running_example();
  Instruction open_try;
  open_try.op = Opcode::BeginTry;
  p.instructions.push_back(open_try);
  auto report = validate_program(p);
  REQUIRE_FALSE(report.ok());
  CHECK(report.violations[0].kind == ViolationKind::UnbalancedBlock);
  CHECK(report.violations[0].instruction_index == 3);
}

TEST_CASE("validation flags def-before-use violations") {
  Program p;
  p.next_variable_id = 6;
  Instruction use;
  use.op = Opcode::GetProperty;
  use.inputs = {Variable{5}};
  use.outputs = {Variable{0}};
  use.payload = NamePayload{"x"};
  p.instructions.push_back(use);
  auto report = validate_program(p);
  REQUIRE_FALSE(report.ok());
  bool has_undefined_input = false;
  for (const auto& v : report.violations)
    if (v.kind == ViolationKind::UndefinedInput) has_undefined_input = true;
  CHECK(has_undefined_input);
}

TEST_CASE("validation flags misplaced returns and catches") {
  Program p;
  p.next_variable_id = 1;
  {
    Instruction load;
    load.op = Opcode::LoadNumber;
    load.payload = NumberPayload{1};
    load.outputs = {Variable{0}};
    p.instructions.push_back(load);
    Instruction ret;
    ret.op = Opcode::Return;
    ret.inputs = {Variable{0}};
    p.instructions.push_back(ret);
  }
  auto report = validate_program(p);
  REQUIRE_FALSE(report.ok());
  CHECK(report.violations[0].kind == ViolationKind::ReturnOutsideFunction);

  Program q;
  q.next_variable_id = 1;
  Instruction c;
  c.op = Opcode::BeginCatch;
  c.outputs = {Variable{0}};
  q.instructions.push_back(c);
  CHECK_FALSE(validate_program(q).ok());
}

TEST_CASE("scope-aware visibility: block-local variables hide at close") {
  ProgramBuilder b;
  b.append(Opcode::BeginTry, {});
  auto inner = b.append(Opcode::LoadNumber, {}, NumberPayload{1}).outputs[0];
  CHECK(b.is_visible(inner));
  b.append(Opcode::BeginCatch, {});
  CHECK_FALSE(b.is_visible(inner));  // try-block vars do not survive into catch
  b.append(Opcode::EndTry, {});
  CHECK_THROWS_AS(b.append(Opcode::UnaryOp, {inner}, OperatorPayload{"!"}), AppendError);

  // Function parameters are visible inside only; the function itself outside.
  auto fn_instr = b.append(Opcode::BeginFunction, {}, FunctionPayload{2});
  Variable fn = fn_instr.outputs[0];
  Variable param = fn_instr.outputs[1];
  CHECK(b.is_visible(param));
  b.append(Opcode::Return, {param});
  b.append(Opcode::EndFunction, {});
  CHECK(b.is_visible(fn));
  CHECK_FALSE(b.is_visible(param));

  CHECK(validate_program(b.program()).ok());
}

TEST_CASE("visible_variables_at replays scopes") {
  ProgramBuilder b;
  auto v0 = b.append(Opcode::LoadNumber, {}, NumberPayload{1}).outputs[0];
  b.append(Opcode::BeginForLoop, {}, LoopPayload{100});
  auto v2 = b.append(Opcode::LoadNumber, {}, NumberPayload{2}).outputs[0];
  b.append(Opcode::EndForLoop, {});
  Program p = b.take();

  auto at_end = visible_variables_at(p, p.size());
  REQUIRE(at_end.size() == 1);
  CHECK(at_end[0] == v0);

  auto inside = visible_variables_at(p, 3);
  CHECK(inside.size() == 3);  // v0, loop counter, v2
  CHECK(inside[0] == v2);     // most recent first
}

TEST_CASE("serialize/deserialize round-trips the running example") {
  Program p = running_example();
  Bytes bytes = serialize(p);
  Program q = deserialize(bytes);
  CHECK(p == q);
  // Determinism: two serializations are byte-identical.
  CHECK(serialize(p) == serialize(q));
  // Magic header is in place.
  REQUIRE(bytes.size() > 5);
  CHECK(bytes[0] == 'W');
  CHECK(bytes[1] == 'V');
  CHECK(bytes[2] == 'I');
  CHECK(bytes[3] == 'L');
  CHECK(bytes[4] == 0x01);
}

TEST_CASE("deserialize rejects corrupt input") {
  Program p = running_example();
  Bytes bytes = serialize(p);

  Bytes truncated(bytes.begin(), bytes.begin() + bytes.size() / 2);
  CHECK_THROWS_AS(deserialize(truncated), MalformedEncoding);

  Bytes bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(deserialize(bad_magic), MalformedEncoding);

  Bytes bad_version = bytes;
  bad_version[4] = 0x7F;
  CHECK_THROWS_AS(deserialize(bad_version), MalformedEncoding);

  Bytes trailing = bytes;
  trailing.push_back(0x00);
  CHECK_THROWS_AS(deserialize(trailing), MalformedEncoding);
}

TEST_CASE("every payload kind round-trips") {
  ProgramBuilder b;
  auto v0 = b.append(Opcode::LoadNumber, {}, NumberPayload{-0.0}).outputs[0];
  b.append(Opcode::LoadBigInt, {}, BigIntPayload{-9007199254740993ll});
  b.append(Opcode::LoadString, {}, StringPayload{"with \"quotes\" and \n newlines"});
  b.append(Opcode::LoadBoolean, {}, BooleanPayload{true});
  b.append(Opcode::LoadNull, {});
  b.append(Opcode::LoadUndefined, {});
  b.append(Opcode::CreateObject, {v0, v0}, PropertyListPayload{{"a", "b"}});
  b.append(Opcode::CreateArray, {v0});
  b.append(Opcode::GetProperty, {v0}, NamePayload{"x"});
  b.append(Opcode::StoreBuiltin, {v0}, NamePayload{"Math"});
  b.append(Opcode::BinaryOp, {v0, v0}, OperatorPayload{"+"});
  b.append(Opcode::UnaryOp, {v0}, OperatorPayload{"typeof"});
  WasmMemoryType mem{1, 4, AddrType::Addr64, true};
  b.append(Opcode::CreateWasmMemory, {}, mem);
  WasmGlobalType global{ValueType::i64(), true};
  b.append(Opcode::CreateWasmGlobal, {}, global);
  WasmTagType tag{{ValueType::i32(), ValueType::externref()}};
  b.append(Opcode::CreateWasmTag, {}, tag);

  WasmModuleType shape;
  shape.type_defs.push_back({FuncShape{{ValueType::i32()}, {ValueType::i64()}}});
  shape.imports.push_back({"m0", "f0", WasmExternType{WasmMemoryType{1, 2, AddrType::Addr32,
                                                                     false}}});
  shape.exports.push_back(
      {"e0", WasmExternType{WasmFunctionType{{ValueType::i32()}, {ValueType::i64()}}}});
  auto mod = b.append(Opcode::CompileWasmModule, {},
                      WasmModulePayload{{0x00, 0x61, 0x73, 0x6D, 1, 0, 0, 0}, shape});
  auto mem_var = b.append(Opcode::CreateWasmMemory, {},
                          WasmMemoryType{1, 2, AddrType::Addr32, false});
  auto inst =
      b.append(Opcode::InstantiateWasmModule, {mod.outputs[0], mem_var.outputs[0]});
  b.append(Opcode::WasmInstanceExport, {inst.outputs[0]},
           WasmExportPayload{"e0",
                             WasmExternType{WasmFunctionType{{ValueType::i32()},
                                                             {ValueType::i64()}}},
                             shape.type_defs});

  Program p = b.take();
  REQUIRE(validate_program(p).ok());
  Program q = deserialize(serialize(p));
  CHECK(p == q);
  CHECK(serialize(p) == serialize(q));
}

TEST_CASE("opcode contracts are total") {
  for (int i = 0; i < kOpcodeCount; ++i) {
    Opcode op = static_cast<Opcode>(i);
    const OpcodeContract& c = opcode_contract(op);
    CHECK(c.min_inputs >= 0);
    CHECK((c.max_inputs == -1 || c.max_inputs >= c.min_inputs));
    CHECK(c.outputs >= 0);
    CHECK(std::string(opcode_name(op)) != "?");
  }
}
