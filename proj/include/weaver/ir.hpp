// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "weaver/common.hpp"
#include "weaver/wasm_types.hpp"

namespace weaver {

// SSA-style numbered variable. Variable k lifts to the identifier "v" + k.
struct Variable {
  uint32_t id = 0;

  std::string name() const { return "v" + std::to_string(id); }
  friend bool operator==(const Variable&, const Variable&) = default;
};

enum class Opcode : uint8_t {
  // JS kinds
  LoadBuiltin,
  LoadNumber,
  LoadBigInt,
  LoadString,
  LoadBoolean,
  LoadNull,
  LoadUndefined,
  CreateObject,
  CreateArray,
  GetProperty,
  SetProperty,
  StoreBuiltin,
  CallFunction,
  CallMethod,
  Construct,
  BinaryOp,
  UnaryOp,
  BeginFunction,
  EndFunction,
  Return,
  BeginTry,
  BeginCatch,
  EndTry,
  BeginForLoop,
  EndForLoop,
  // Wasm kinds
  CreateWasmMemory,
  CreateWasmTable,
  CreateWasmGlobal,
  CreateWasmTag,
  CompileWasmModule,
  InstantiateWasmModule,
  WasmInstanceExport,
};

inline constexpr int kOpcodeCount = static_cast<int>(Opcode::WasmInstanceExport) + 1;

const char* opcode_name(Opcode op);
bool is_wasm_opcode(Opcode op);

// --- payloads ---

struct NamePayload {
  std::string name;
  friend bool operator==(const NamePayload&, const NamePayload&) = default;
};

struct NumberPayload {
  double value = 0;
  friend bool operator==(const NumberPayload& a, const NumberPayload& b) {
    // Bit-exact so that -0.0 and NaN round-trip faithfully.
    uint64_t x, y;
    static_assert(sizeof(double) == 8);
    __builtin_memcpy(&x, &a.value, 8);
    __builtin_memcpy(&y, &b.value, 8);
    return x == y;
  }
};

struct BigIntPayload {
  int64_t value = 0;
  friend bool operator==(const BigIntPayload&, const BigIntPayload&) = default;
};

struct StringPayload {
  std::string value;
  friend bool operator==(const StringPayload&, const StringPayload&) = default;
};

struct BooleanPayload {
  bool value = false;
  friend bool operator==(const BooleanPayload&, const BooleanPayload&) = default;
};

// Property names for CreateObject; arity must equal the input count.
struct PropertyListPayload {
  std::vector<std::string> names;
  friend bool operator==(const PropertyListPayload&, const PropertyListPayload&) = default;
};

struct OperatorPayload {
  std::string op;
  friend bool operator==(const OperatorPayload&, const OperatorPayload&) = default;
};

struct FunctionPayload {
  uint32_t param_count = 0;
  friend bool operator==(const FunctionPayload&, const FunctionPayload&) = default;
};

struct LoopPayload {
  uint32_t iterations = 1;
  friend bool operator==(const LoopPayload&, const LoopPayload&) = default;
};

struct WasmModulePayload {
  Bytes bytes;
  WasmModuleType shape;
  friend bool operator==(const WasmModulePayload&, const WasmModulePayload&) = default;
};

struct WasmExportPayload {
  std::string field;
  WasmExternType type;
  TypeDefs defs;  // resolution context for concrete refs in `type`
  friend bool operator==(const WasmExportPayload&, const WasmExportPayload&) = default;
};

using Payload =
    std::variant<std::monostate, NamePayload, NumberPayload, BigIntPayload, StringPayload,
                 BooleanPayload, PropertyListPayload, OperatorPayload, FunctionPayload,
                 LoopPayload, WasmMemoryType, WasmTableType, WasmGlobalType, WasmTagType,
                 WasmModulePayload, WasmExportPayload>;

// --- opcode contracts ---

enum class PayloadKind : uint8_t {
  None, Name, Number, BigInt, String, Boolean, PropertyList, Operator, Function, Loop,
  WasmMemory, WasmTable, WasmGlobal, WasmTag, WasmModule, WasmExport,
};

enum class BlockRole : uint8_t {
  Plain,
  OpenFunction, CloseFunction,
  OpenTry, CatchTransition, CloseTry,
  OpenLoop, CloseLoop,
  RequiresFunction,  // Return
};

struct OpcodeContract {
  int min_inputs = 0;
  int max_inputs = 0;  // -1 = unbounded
  int outputs = 0;     // fixed count; BeginFunction adds payload params
  PayloadKind payload = PayloadKind::None;
  BlockRole role = BlockRole::Plain;
};

const OpcodeContract& opcode_contract(Opcode op);
bool payload_matches(PayloadKind kind, const Payload& payload);

struct Instruction {
  Opcode op = Opcode::LoadUndefined;
  std::vector<Variable> inputs;
  std::vector<Variable> outputs;
  Payload payload;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

// --- program ---

struct Program {
  std::vector<Instruction> instructions;
  uint32_t next_variable_id = 0;

  size_t size() const { return instructions.size(); }
  bool empty() const { return instructions.empty(); }

  friend bool operator==(const Program&, const Program&) = default;
};

enum class ViolationKind : uint8_t {
  UndefinedInput,
  ArityMismatch,
  PayloadMismatch,
  DuplicateDefinition,
  UnbalancedBlock,
  ReturnOutsideFunction,
  NonDenseIds,
};

const char* violation_kind_name(ViolationKind k);

struct Violation {
  size_t instruction_index = 0;  // or program size for end-of-program issues
  ViolationKind kind = ViolationKind::UndefinedInput;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

ValidationReport validate_program(const Program& program);

// Thrown by append() on contract violations.
class AppendError : public std::runtime_error {
 public:
  enum class Kind { UndefinedInput, ArityMismatch };
  AppendError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Incremental program construction with scope-aware visibility tracking.
// Output variables are allocated automatically from next_variable_id.
class ProgramBuilder {
 public:
  ProgramBuilder();
  explicit ProgramBuilder(Program resume_from);  // replays scopes

  // Appends an instruction with the given inputs; outputs are allocated and
  // returned through the instruction reference. Throws AppendError when an
  // input is not visible or arity/payload contracts are violated.
  const Instruction& append(Opcode op, std::vector<Variable> inputs, Payload payload = {});

  const Program& program() const { return program_; }
  Program take() { return std::move(program_); }

  // Variables visible at the current point, most recent definition first.
  std::vector<Variable> visible_variables() const;
  bool is_visible(Variable v) const;
  size_t scope_depth() const { return scopes_.size() - 1; }
  bool inside_function() const;

 private:
  void open_scope();
  void close_scope();
  Variable define();

  Program program_;
  struct Scope {
    BlockRole opener = BlockRole::Plain;
    bool in_catch = false;
    std::vector<Variable> vars;
  };
  std::vector<Scope> scopes_;
  std::vector<bool> visible_;
};

// Variables visible just before program.instructions[index] executes
// (index == size() means end of program), most recent first.
std::vector<Variable> visible_variables_at(const Program& program, size_t index);

// Nesting depth of the position just before instruction `index`.
size_t block_depth_at(const Program& program, size_t index);

// --- persistence (corpus entry format: magic "WVIL", version 0x01) ---

class MalformedEncoding : public std::runtime_error {
 public:
  explicit MalformedEncoding(const std::string& what) : std::runtime_error(what) {}
};

Bytes serialize(const Program& program);
Program deserialize(std::span<const uint8_t> bytes);

}  // namespace weaver
