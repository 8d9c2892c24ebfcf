// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#include "weaver/ir.hpp"

#include <algorithm>
#include <cassert>

namespace weaver {

const char* opcode_name(Opcode op) {
  switch (op) {
    case Opcode::LoadBuiltin: return "LoadBuiltin";
    case Opcode::LoadNumber: return "LoadNumber";
    case Opcode::LoadBigInt: return "LoadBigInt";
    case Opcode::LoadString: return "LoadString";
    case Opcode::LoadBoolean: return "LoadBoolean";
    case Opcode::LoadNull: return "LoadNull";
    case Opcode::LoadUndefined: return "LoadUndefined";
    case Opcode::CreateObject: return "CreateObject";
    case Opcode::CreateArray: return "CreateArray";
    case Opcode::GetProperty: return "GetProperty";
    case Opcode::SetProperty: return "SetProperty";
    case Opcode::StoreBuiltin: return "StoreBuiltin";
    case Opcode::CallFunction: return "CallFunction";
    case Opcode::CallMethod: return "CallMethod";
    case Opcode::Construct: return "Construct";
    case Opcode::BinaryOp: return "BinaryOp";
    case Opcode::UnaryOp: return "UnaryOp";
    case Opcode::BeginFunction: return "BeginFunction";
    case Opcode::EndFunction: return "EndFunction";
    case Opcode::Return: return "Return";
    case Opcode::BeginTry: return "BeginTry";
    case Opcode::BeginCatch: return "BeginCatch";
    case Opcode::EndTry: return "EndTry";
    case Opcode::BeginForLoop: return "BeginForLoop";
    case Opcode::EndForLoop: return "EndForLoop";
    case Opcode::CreateWasmMemory: return "CreateWasmMemory";
    case Opcode::CreateWasmTable: return "CreateWasmTable";
    case Opcode::CreateWasmGlobal: return "CreateWasmGlobal";
    case Opcode::CreateWasmTag: return "CreateWasmTag";
    case Opcode::CompileWasmModule: return "CompileWasmModule";
    case Opcode::InstantiateWasmModule: return "InstantiateWasmModule";
    case Opcode::WasmInstanceExport: return "WasmInstanceExport";
  }
  return "?";
}

bool is_wasm_opcode(Opcode op) {
  switch (op) {
    case Opcode::CreateWasmMemory:
    case Opcode::CreateWasmTable:
    case Opcode::CreateWasmGlobal:
    case Opcode::CreateWasmTag:
    case Opcode::CompileWasmModule:
    case Opcode::InstantiateWasmModule:
    case Opcode::WasmInstanceExport:
      return true;
    default:
      return false;
  }
}

const OpcodeContract& opcode_contract(Opcode op) {
  static const OpcodeContract kContracts[kOpcodeCount] = {
      /* LoadBuiltin */ {0, 0, 1, PayloadKind::Name, BlockRole::Plain},
      /* LoadNumber */ {0, 0, 1, PayloadKind::Number, BlockRole::Plain},
      /* LoadBigInt */ {0, 0, 1, PayloadKind::BigInt, BlockRole::Plain},
      /* LoadString */ {0, 0, 1, PayloadKind::String, BlockRole::Plain},
      /* LoadBoolean */ {0, 0, 1, PayloadKind::Boolean, BlockRole::Plain},
      /* LoadNull */ {0, 0, 1, PayloadKind::None, BlockRole::Plain},
      /* LoadUndefined */ {0, 0, 1, PayloadKind::None, BlockRole::Plain},
      /* CreateObject */ {0, -1, 1, PayloadKind::PropertyList, BlockRole::Plain},
      /* CreateArray */ {0, -1, 1, PayloadKind::None, BlockRole::Plain},
      /* GetProperty */ {1, 1, 1, PayloadKind::Name, BlockRole::Plain},
      /* SetProperty */ {2, 2, 0, PayloadKind::Name, BlockRole::Plain},
      /* StoreBuiltin */ {1, 1, 0, PayloadKind::Name, BlockRole::Plain},
      /* CallFunction */ {1, -1, 1, PayloadKind::None, BlockRole::Plain},
      /* CallMethod */ {1, -1, 1, PayloadKind::Name, BlockRole::Plain},
      /* Construct */ {1, -1, 1, PayloadKind::None, BlockRole::Plain},
      /* BinaryOp */ {2, 2, 1, PayloadKind::Operator, BlockRole::Plain},
      /* UnaryOp */ {1, 1, 1, PayloadKind::Operator, BlockRole::Plain},
      /* BeginFunction */ {0, 0, 1, PayloadKind::Function, BlockRole::OpenFunction},
      /* EndFunction */ {0, 0, 0, PayloadKind::None, BlockRole::CloseFunction},
      /* Return */ {1, 1, 0, PayloadKind::None, BlockRole::RequiresFunction},
      /* BeginTry */ {0, 0, 0, PayloadKind::None, BlockRole::OpenTry},
      /* BeginCatch */ {0, 0, 1, PayloadKind::None, BlockRole::CatchTransition},
      /* EndTry */ {0, 0, 0, PayloadKind::None, BlockRole::CloseTry},
      /* BeginForLoop */ {0, 0, 1, PayloadKind::Loop, BlockRole::OpenLoop},
      /* EndForLoop */ {0, 0, 0, PayloadKind::None, BlockRole::CloseLoop},
      /* CreateWasmMemory */ {0, 0, 1, PayloadKind::WasmMemory, BlockRole::Plain},
      /* CreateWasmTable */ {0, 1, 1, PayloadKind::WasmTable, BlockRole::Plain},
      /* CreateWasmGlobal */ {0, 1, 1, PayloadKind::WasmGlobal, BlockRole::Plain},
      /* CreateWasmTag */ {0, 0, 1, PayloadKind::WasmTag, BlockRole::Plain},
      /* CompileWasmModule */ {0, 0, 1, PayloadKind::WasmModule, BlockRole::Plain},
      /* InstantiateWasmModule */ {1, -1, 1, PayloadKind::None, BlockRole::Plain},
      /* WasmInstanceExport */ {1, 1, 1, PayloadKind::WasmExport, BlockRole::Plain},
  };
  return kContracts[static_cast<int>(op)];
}

bool payload_matches(PayloadKind kind, const Payload& payload) {
  switch (kind) {
    case PayloadKind::None: return std::holds_alternative<std::monostate>(payload);
    case PayloadKind::Name: return std::holds_alternative<NamePayload>(payload);
    case PayloadKind::Number: return std::holds_alternative<NumberPayload>(payload);
    case PayloadKind::BigInt: return std::holds_alternative<BigIntPayload>(payload);
    case PayloadKind::String: return std::holds_alternative<StringPayload>(payload);
    case PayloadKind::Boolean: return std::holds_alternative<BooleanPayload>(payload);
    case PayloadKind::PropertyList: return std::holds_alternative<PropertyListPayload>(payload);
    case PayloadKind::Operator: return std::holds_alternative<OperatorPayload>(payload);
    case PayloadKind::Function: return std::holds_alternative<FunctionPayload>(payload);
    case PayloadKind::Loop: return std::holds_alternative<LoopPayload>(payload);
    case PayloadKind::WasmMemory: return std::holds_alternative<WasmMemoryType>(payload);
    case PayloadKind::WasmTable: return std::holds_alternative<WasmTableType>(payload);
    case PayloadKind::WasmGlobal: return std::holds_alternative<WasmGlobalType>(payload);
    case PayloadKind::WasmTag: return std::holds_alternative<WasmTagType>(payload);
    case PayloadKind::WasmModule: return std::holds_alternative<WasmModulePayload>(payload);
    case PayloadKind::WasmExport: return std::holds_alternative<WasmExportPayload>(payload);
  }
  return false;
}

const char* violation_kind_name(ViolationKind k) {
  switch (k) {
    case ViolationKind::UndefinedInput: return "UndefinedInput";
    case ViolationKind::ArityMismatch: return "ArityMismatch";
    case ViolationKind::PayloadMismatch: return "PayloadMismatch";
    case ViolationKind::DuplicateDefinition: return "DuplicateDefinition";
    case ViolationKind::UnbalancedBlock: return "UnbalancedBlock";
    case ViolationKind::ReturnOutsideFunction: return "ReturnOutsideFunction";
    case ViolationKind::NonDenseIds: return "NonDenseIds";
  }
  return "?";
}

std::string ValidationReport::to_string() const {
  std::string s;
  for (const auto& v : violations) {
    s += "[" + std::to_string(v.instruction_index) + "] " +
         violation_kind_name(v.kind) + ": " + v.message + "\n";
  }
  return s;
}

namespace {

// Expected input arity, taking payload-driven arities into account.
bool input_arity_ok(const Instruction& instr) {
  const auto& c = opcode_contract(instr.op);
  int n = static_cast<int>(instr.inputs.size());
  if (n < c.min_inputs) return false;
  if (c.max_inputs >= 0 && n > c.max_inputs) return false;
  if (instr.op == Opcode::CreateObject) {
    const auto* p = std::get_if<PropertyListPayload>(&instr.payload);
    if (p && p->names.size() != instr.inputs.size()) return false;
  }
  return true;
}

int expected_outputs(const Instruction& instr) {
  const auto& c = opcode_contract(instr.op);
  int n = c.outputs;
  if (instr.op == Opcode::BeginFunction) {
    if (const auto* p = std::get_if<FunctionPayload>(&instr.payload))
      n += static_cast<int>(p->param_count);
  }
  return n;
}

struct ScopeState {
  struct Frame {
    BlockRole opener;
    bool in_catch = false;
    size_t open_index = 0;
  };
  std::vector<Frame> frames;

  bool inside_function() const {
    return std::any_of(frames.begin(), frames.end(),
                       [](const Frame& f) { return f.opener == BlockRole::OpenFunction; });
  }
};

}  // namespace

ValidationReport validate_program(const Program& program) {
  ValidationReport report;
  auto violation = [&](size_t idx, ViolationKind kind, std::string msg) {
    report.violations.push_back({idx, kind, std::move(msg)});
  };

  std::vector<uint8_t> defined(program.next_variable_id, 0);
  std::vector<uint8_t> visible(program.next_variable_id, 0);
  ScopeState scopes;
  std::vector<std::vector<uint32_t>> frame_vars(1);
  scopes.frames.push_back({BlockRole::Plain, false, 0});

  auto define = [&](size_t idx, Variable v, bool top_frame) {
    if (v.id >= program.next_variable_id) {
      violation(idx, ViolationKind::NonDenseIds,
                "output " + v.name() + " outside [0, next_variable_id)");
      return;
    }
    if (defined[v.id]) {
      violation(idx, ViolationKind::DuplicateDefinition, v.name() + " defined twice");
      return;
    }
    defined[v.id] = 1;
    visible[v.id] = 1;
    frame_vars[top_frame ? frame_vars.size() - 1 : frame_vars.size() - 2].push_back(v.id);
  };

  auto close_frame = [&]() {
    for (uint32_t id : frame_vars.back()) visible[id] = 0;
    frame_vars.pop_back();
    scopes.frames.pop_back();
  };

  for (size_t idx = 0; idx < program.size(); ++idx) {
    const Instruction& instr = program.instructions[idx];
    const auto& contract = opcode_contract(instr.op);

    if (!payload_matches(contract.payload, instr.payload))
      violation(idx, ViolationKind::PayloadMismatch,
                std::string("payload does not fit ") + opcode_name(instr.op));
    if (!input_arity_ok(instr))
      violation(idx, ViolationKind::ArityMismatch,
                std::string(opcode_name(instr.op)) + " given " +
                    std::to_string(instr.inputs.size()) + " inputs");
    if (static_cast<int>(instr.outputs.size()) != expected_outputs(instr))
      violation(idx, ViolationKind::ArityMismatch,
                std::string(opcode_name(instr.op)) + " given " +
                    std::to_string(instr.outputs.size()) + " outputs");

    for (const Variable& in : instr.inputs) {
      if (in.id >= program.next_variable_id || !defined[in.id] || !visible[in.id])
        violation(idx, ViolationKind::UndefinedInput, in.name() + " used before definition");
    }

    switch (contract.role) {
      case BlockRole::Plain:
        for (const Variable& out : instr.outputs) define(idx, out, true);
        break;
      case BlockRole::OpenFunction: {
        if (!instr.outputs.empty()) define(idx, instr.outputs[0], true);
        scopes.frames.push_back({BlockRole::OpenFunction, false, idx});
        frame_vars.emplace_back();
        for (size_t i = 1; i < instr.outputs.size(); ++i) define(idx, instr.outputs[i], true);
        break;
      }
      case BlockRole::CloseFunction:
        if (scopes.frames.back().opener != BlockRole::OpenFunction)
          violation(idx, ViolationKind::UnbalancedBlock, "EndFunction without open function");
        else
          close_frame();
        break;
      case BlockRole::OpenTry:
        scopes.frames.push_back({BlockRole::OpenTry, false, idx});
        frame_vars.emplace_back();
        break;
      case BlockRole::CatchTransition:
        if (scopes.frames.back().opener != BlockRole::OpenTry || scopes.frames.back().in_catch) {
          violation(idx, ViolationKind::UnbalancedBlock, "BeginCatch without open try");
        } else {
          close_frame();
          scopes.frames.push_back({BlockRole::OpenTry, true, idx});
          frame_vars.emplace_back();
        }
        for (const Variable& out : instr.outputs) define(idx, out, true);
        break;
      case BlockRole::CloseTry:
        if (scopes.frames.back().opener != BlockRole::OpenTry)
          violation(idx, ViolationKind::UnbalancedBlock, "EndTry without open try");
        else
          close_frame();
        break;
      case BlockRole::OpenLoop:
        scopes.frames.push_back({BlockRole::OpenLoop, false, idx});
        frame_vars.emplace_back();
        for (const Variable& out : instr.outputs) define(idx, out, true);
        break;
      case BlockRole::CloseLoop:
        if (scopes.frames.back().opener != BlockRole::OpenLoop)
          violation(idx, ViolationKind::UnbalancedBlock, "EndForLoop without open loop");
        else
          close_frame();
        break;
      case BlockRole::RequiresFunction:
        if (!scopes.inside_function())
          violation(idx, ViolationKind::ReturnOutsideFunction, "Return outside a function body");
        break;
    }
  }

  while (scopes.frames.size() > 1) {
    violation(scopes.frames.back().open_index, ViolationKind::UnbalancedBlock,
              "block opened here is never closed");
    close_frame();
  }

  for (uint32_t id = 0; id < program.next_variable_id; ++id) {
    if (!defined[id])
      violation(program.size(), ViolationKind::NonDenseIds,
                "v" + std::to_string(id) + " never defined");
  }

  return report;
}

// --- ProgramBuilder ---

ProgramBuilder::ProgramBuilder() {
  scopes_.push_back({BlockRole::Plain, false, {}});
}

ProgramBuilder::ProgramBuilder(Program resume_from) {
  scopes_.push_back({BlockRole::Plain, false, {}});
  Program source = std::move(resume_from);
  for (auto& instr : source.instructions) {
    // Replay through append to rebuild scope state; ids are preserved
    // because allocation order matches the original construction order.
    Instruction copy = instr;
    const Instruction& appended = append(copy.op, copy.inputs, copy.payload);
    assert(appended.outputs == instr.outputs);
    (void)appended;
  }
  assert(program_.next_variable_id == source.next_variable_id);
}

Variable ProgramBuilder::define() {
  Variable v{program_.next_variable_id++};
  visible_.push_back(true);
  return v;
}

void ProgramBuilder::open_scope() { scopes_.push_back({}); }

void ProgramBuilder::close_scope() {
  for (Variable v : scopes_.back().vars) visible_[v.id] = false;
  scopes_.pop_back();
}

bool ProgramBuilder::inside_function() const {
  return std::any_of(scopes_.begin(), scopes_.end(),
                     [](const Scope& s) { return s.opener == BlockRole::OpenFunction; });
}

const Instruction& ProgramBuilder::append(Opcode op, std::vector<Variable> inputs,
                                          Payload payload) {
  const auto& contract = opcode_contract(op);
  if (!payload_matches(contract.payload, payload))
    throw AppendError(AppendError::Kind::ArityMismatch,
                      std::string("payload does not fit ") + opcode_name(op));
  for (const Variable& in : inputs) {
    if (in.id >= visible_.size() || !visible_[in.id])
      throw AppendError(AppendError::Kind::UndefinedInput,
                        in.name() + " is not visible here");
  }

  Instruction instr;
  instr.op = op;
  instr.inputs = std::move(inputs);
  instr.payload = std::move(payload);
  if (!input_arity_ok(instr))
    throw AppendError(AppendError::Kind::ArityMismatch,
                      std::string(opcode_name(op)) + " given " +
                          std::to_string(instr.inputs.size()) + " inputs");

  switch (contract.role) {
    case BlockRole::Plain:
    case BlockRole::RequiresFunction: {
      if (contract.role == BlockRole::RequiresFunction && !inside_function())
        throw AppendError(AppendError::Kind::ArityMismatch, "Return outside a function body");
      for (int i = 0; i < contract.outputs; ++i) {
        Variable v = define();
        instr.outputs.push_back(v);
        scopes_.back().vars.push_back(v);
      }
      break;
    }
    case BlockRole::OpenFunction: {
      Variable fn = define();
      instr.outputs.push_back(fn);
      scopes_.back().vars.push_back(fn);
      open_scope();
      scopes_.back().opener = BlockRole::OpenFunction;
      uint32_t params = std::get<FunctionPayload>(instr.payload).param_count;
      for (uint32_t i = 0; i < params; ++i) {
        Variable p = define();
        instr.outputs.push_back(p);
        scopes_.back().vars.push_back(p);
      }
      break;
    }
    case BlockRole::CloseFunction:
      if (scopes_.size() < 2 || scopes_.back().opener != BlockRole::OpenFunction)
        throw AppendError(AppendError::Kind::ArityMismatch, "EndFunction without open function");
      close_scope();
      break;
    case BlockRole::OpenTry:
      open_scope();
      scopes_.back().opener = BlockRole::OpenTry;
      break;
    case BlockRole::CatchTransition: {
      if (scopes_.size() < 2 || scopes_.back().opener != BlockRole::OpenTry ||
          scopes_.back().in_catch)
        throw AppendError(AppendError::Kind::ArityMismatch, "BeginCatch without open try");
      close_scope();
      open_scope();
      scopes_.back().opener = BlockRole::OpenTry;
      scopes_.back().in_catch = true;
      Variable e = define();
      instr.outputs.push_back(e);
      scopes_.back().vars.push_back(e);
      break;
    }
    case BlockRole::CloseTry:
      if (scopes_.size() < 2 || scopes_.back().opener != BlockRole::OpenTry)
        throw AppendError(AppendError::Kind::ArityMismatch, "EndTry without open try");
      close_scope();
      break;
    case BlockRole::OpenLoop: {
      open_scope();
      scopes_.back().opener = BlockRole::OpenLoop;
      Variable counter = define();
      instr.outputs.push_back(counter);
      scopes_.back().vars.push_back(counter);
      break;
    }
    case BlockRole::CloseLoop:
      if (scopes_.size() < 2 || scopes_.back().opener != BlockRole::OpenLoop)
        throw AppendError(AppendError::Kind::ArityMismatch, "EndForLoop without open loop");
      close_scope();
      break;
  }

  program_.instructions.push_back(std::move(instr));
  return program_.instructions.back();
}

std::vector<Variable> ProgramBuilder::visible_variables() const {
  std::vector<Variable> out;
  for (uint32_t id = static_cast<uint32_t>(visible_.size()); id-- > 0;) {
    if (visible_[id]) out.push_back(Variable{id});
  }
  return out;
}

bool ProgramBuilder::is_visible(Variable v) const {
  return v.id < visible_.size() && visible_[v.id];
}

std::vector<Variable> visible_variables_at(const Program& program, size_t index) {
  // Scope replay over the recorded instruction outputs. Unlike a builder
  // replay this works for programs whose variable ids are not in definition
  // order (splice introduces those).
  struct Frame {
    BlockRole opener = BlockRole::Plain;
    std::vector<uint32_t> vars;
  };
  std::vector<Frame> frames(1);
  std::vector<uint32_t> definition_order;
  std::vector<uint8_t> visible;
  auto define = [&](Variable v) {
    if (v.id >= visible.size()) visible.resize(v.id + 1, 0);
    visible[v.id] = 1;
    definition_order.push_back(v.id);
    frames.back().vars.push_back(v.id);
  };
  auto close = [&]() {
    for (uint32_t id : frames.back().vars) visible[id] = 0;
    frames.pop_back();
  };

  for (size_t i = 0; i < index && i < program.size(); ++i) {
    const Instruction& instr = program.instructions[i];
    switch (opcode_contract(instr.op).role) {
      case BlockRole::Plain:
      case BlockRole::RequiresFunction:
        for (const Variable& out : instr.outputs) define(out);
        break;
      case BlockRole::OpenFunction:
        if (!instr.outputs.empty()) define(instr.outputs[0]);
        frames.push_back({BlockRole::OpenFunction, {}});
        for (size_t k = 1; k < instr.outputs.size(); ++k) define(instr.outputs[k]);
        break;
      case BlockRole::OpenTry:
        frames.push_back({BlockRole::OpenTry, {}});
        break;
      case BlockRole::CatchTransition:
        if (frames.size() > 1) close();
        frames.push_back({BlockRole::OpenTry, {}});
        for (const Variable& out : instr.outputs) define(out);
        break;
      case BlockRole::OpenLoop:
        frames.push_back({BlockRole::OpenLoop, {}});
        for (const Variable& out : instr.outputs) define(out);
        break;
      case BlockRole::CloseFunction:
      case BlockRole::CloseTry:
      case BlockRole::CloseLoop:
        if (frames.size() > 1) close();
        break;
    }
  }

  std::vector<Variable> out;
  for (size_t i = definition_order.size(); i-- > 0;) {
    uint32_t id = definition_order[i];
    if (id < visible.size() && visible[id]) {
      out.push_back(Variable{id});
      visible[id] = 0;  // deduplicate while preserving recency order
    }
  }
  return out;
}

size_t block_depth_at(const Program& program, size_t index) {
  size_t depth = 0;
  for (size_t i = 0; i < index && i < program.size(); ++i) {
    switch (opcode_contract(program.instructions[i].op).role) {
      case BlockRole::OpenFunction:
      case BlockRole::OpenTry:
      case BlockRole::OpenLoop:
        ++depth;
        break;
      case BlockRole::CloseFunction:
      case BlockRole::CloseTry:
      case BlockRole::CloseLoop:
        if (depth > 0) --depth;
        break;
      default:
        break;
    }
  }
  return depth;
}

// --- serialization ---

namespace {

constexpr uint8_t kMagic[4] = {'W', 'V', 'I', 'L'};
constexpr uint8_t kVersion = 0x01;
constexpr uint32_t kSanityCap = 1u << 20;

void write_value_type(ByteWriter& w, const ValueType& t) {
  switch (t.kind) {
    case ValueType::Kind::Num:
      w.u8(static_cast<uint8_t>(t.num));
      return;
    case ValueType::Kind::V128:
      w.u8(4);
      return;
    case ValueType::Kind::Ref:
      w.u8(5);
      w.u8(t.ref.nullable ? 1 : 0);
      if (t.ref.heap.is_abstract) {
        w.u8(1);
        w.u8(static_cast<uint8_t>(t.ref.heap.abstract_kind));
      } else {
        w.u8(0);
        w.uleb(t.ref.heap.index);
      }
      return;
  }
}

ValueType read_value_type(ByteReader& r) {
  uint8_t tag = r.u8();
  switch (tag) {
    case 0: return ValueType::i32();
    case 1: return ValueType::i64();
    case 2: return ValueType::f32();
    case 3: return ValueType::f64();
    case 4: return ValueType::v128();
    case 5: {
      bool nullable = r.u8() != 0;
      bool abstract = r.u8() != 0;
      if (abstract) {
        uint8_t kind = r.u8();
        if (kind > static_cast<uint8_t>(AbstractHeap::NoExn)) r.fail("bad abstract heap");
        return ValueType::ref_abstract(static_cast<AbstractHeap>(kind), nullable);
      }
      return ValueType::ref_type(HeapType::concrete(r.uleb32()), nullable);
    }
    default:
      r.fail("bad value type tag");
  }
}

void write_field(ByteWriter& w, const FieldType& f) {
  w.u8(static_cast<uint8_t>(f.storage.packed));
  if (f.storage.packed == StorageType::Packed::None) write_value_type(w, f.storage.value);
  w.u8(f.mutable_ ? 1 : 0);
}

FieldType read_field(ByteReader& r) {
  FieldType f;
  uint8_t packed = r.u8();
  if (packed > 2) r.fail("bad storage tag");
  f.storage.packed = static_cast<StorageType::Packed>(packed);
  if (f.storage.packed == StorageType::Packed::None) f.storage.value = read_value_type(r);
  f.mutable_ = r.u8() != 0;
  return f;
}

void write_defs(ByteWriter& w, const TypeDefs& defs) {
  w.uleb(defs.size());
  for (const auto& def : defs) {
    if (const auto* s = std::get_if<StructShape>(&def.shape)) {
      w.u8(0);
      w.uleb(s->fields.size());
      for (const auto& f : s->fields) write_field(w, f);
    } else if (const auto* a = std::get_if<ArrayShape>(&def.shape)) {
      w.u8(1);
      write_field(w, a->element);
    } else {
      const auto& f = std::get<FuncShape>(def.shape);
      w.u8(2);
      w.uleb(f.params.size());
      for (const auto& p : f.params) write_value_type(w, p);
      w.uleb(f.results.size());
      for (const auto& res : f.results) write_value_type(w, res);
    }
  }
}

TypeDefs read_defs(ByteReader& r) {
  uint32_t n = r.uleb32();
  if (n > kSanityCap) r.fail("defs count too large");
  TypeDefs defs;
  defs.reserve(n);
  for (uint32_t i = 0; i < n; ++i) {
    uint8_t tag = r.u8();
    CompositeDef def;
    if (tag == 0) {
      StructShape s;
      uint32_t fields = r.uleb32();
      if (fields > kSanityCap) r.fail("field count too large");
      for (uint32_t j = 0; j < fields; ++j) s.fields.push_back(read_field(r));
      def.shape = std::move(s);
    } else if (tag == 1) {
      def.shape = ArrayShape{read_field(r)};
    } else if (tag == 2) {
      FuncShape f;
      uint32_t params = r.uleb32();
      if (params > kSanityCap) r.fail("param count too large");
      for (uint32_t j = 0; j < params; ++j) f.params.push_back(read_value_type(r));
      uint32_t results = r.uleb32();
      if (results > kSanityCap) r.fail("result count too large");
      for (uint32_t j = 0; j < results; ++j) f.results.push_back(read_value_type(r));
      def.shape = std::move(f);
    } else {
      r.fail("bad composite tag");
    }
    defs.push_back(std::move(def));
  }
  return defs;
}

void write_memory_type(ByteWriter& w, const WasmMemoryType& m) {
  w.uleb(m.initial);
  w.u8(m.maximum ? 1 : 0);
  if (m.maximum) w.uleb(*m.maximum);
  w.u8(m.addrtype == AddrType::Addr64 ? 1 : 0);
  w.u8(m.shared ? 1 : 0);
}

WasmMemoryType read_memory_type(ByteReader& r) {
  WasmMemoryType m;
  m.initial = r.uleb();
  if (r.u8()) m.maximum = r.uleb();
  m.addrtype = r.u8() ? AddrType::Addr64 : AddrType::Addr32;
  m.shared = r.u8() != 0;
  return m;
}

void write_table_type(ByteWriter& w, const WasmTableType& t) {
  write_value_type(w, t.element_type);
  w.uleb(t.initial);
  w.u8(t.maximum ? 1 : 0);
  if (t.maximum) w.uleb(*t.maximum);
  w.u8(t.addrtype == AddrType::Addr64 ? 1 : 0);
  w.u8(t.shared ? 1 : 0);
}

WasmTableType read_table_type(ByteReader& r) {
  WasmTableType t;
  t.element_type = read_value_type(r);
  t.initial = r.uleb();
  if (r.u8()) t.maximum = r.uleb();
  t.addrtype = r.u8() ? AddrType::Addr64 : AddrType::Addr32;
  t.shared = r.u8() != 0;
  return t;
}

void write_global_type(ByteWriter& w, const WasmGlobalType& g) {
  write_value_type(w, g.content_type);
  w.u8(g.mutability ? 1 : 0);
}

WasmGlobalType read_global_type(ByteReader& r) {
  WasmGlobalType g;
  g.content_type = read_value_type(r);
  g.mutability = r.u8() != 0;
  return g;
}

void write_function_type(ByteWriter& w, const WasmFunctionType& f) {
  w.uleb(f.parameters.size());
  for (const auto& p : f.parameters) write_value_type(w, p);
  w.uleb(f.results.size());
  for (const auto& res : f.results) write_value_type(w, res);
}

WasmFunctionType read_function_type(ByteReader& r) {
  WasmFunctionType f;
  uint32_t params = r.uleb32();
  if (params > kSanityCap) r.fail("param count too large");
  for (uint32_t i = 0; i < params; ++i) f.parameters.push_back(read_value_type(r));
  uint32_t results = r.uleb32();
  if (results > kSanityCap) r.fail("result count too large");
  for (uint32_t i = 0; i < results; ++i) f.results.push_back(read_value_type(r));
  return f;
}

void write_tag_type(ByteWriter& w, const WasmTagType& t) {
  w.uleb(t.parameters.size());
  for (const auto& p : t.parameters) write_value_type(w, p);
}

WasmTagType read_tag_type(ByteReader& r) {
  WasmTagType t;
  uint32_t params = r.uleb32();
  if (params > kSanityCap) r.fail("param count too large");
  for (uint32_t i = 0; i < params; ++i) t.parameters.push_back(read_value_type(r));
  return t;
}

void write_extern_type(ByteWriter& w, const WasmExternType& t) {
  w.u8(static_cast<uint8_t>(t.kind()));
  switch (t.kind()) {
    case ExternKind::Function: write_function_type(w, t.function()); break;
    case ExternKind::Table: write_table_type(w, t.table()); break;
    case ExternKind::Memory: write_memory_type(w, t.memory()); break;
    case ExternKind::Global: write_global_type(w, t.global()); break;
    case ExternKind::Tag: write_tag_type(w, t.tag()); break;
  }
}

WasmExternType read_extern_type(ByteReader& r) {
  uint8_t kind = r.u8();
  WasmExternType t;
  switch (kind) {
    case 0: t.type = read_function_type(r); break;
    case 1: t.type = read_table_type(r); break;
    case 2: t.type = read_memory_type(r); break;
    case 3: t.type = read_global_type(r); break;
    case 4: t.type = read_tag_type(r); break;
    default: r.fail("bad extern kind");
  }
  return t;
}

void write_module_type(ByteWriter& w, const WasmModuleType& m) {
  write_defs(w, m.type_defs);
  w.uleb(m.imports.size());
  for (const auto& imp : m.imports) {
    w.name(imp.module);
    w.name(imp.field);
    write_extern_type(w, imp.type);
  }
  w.uleb(m.exports.size());
  for (const auto& exp : m.exports) {
    w.name(exp.field);
    write_extern_type(w, exp.type);
  }
}

WasmModuleType read_module_type(ByteReader& r) {
  WasmModuleType m;
  m.type_defs = read_defs(r);
  uint32_t imports = r.uleb32();
  if (imports > kSanityCap) r.fail("import count too large");
  for (uint32_t i = 0; i < imports; ++i) {
    WasmImport imp;
    imp.module = r.name();
    imp.field = r.name();
    imp.type = read_extern_type(r);
    m.imports.push_back(std::move(imp));
  }
  uint32_t exports = r.uleb32();
  if (exports > kSanityCap) r.fail("export count too large");
  for (uint32_t i = 0; i < exports; ++i) {
    WasmExport exp;
    exp.field = r.name();
    exp.type = read_extern_type(r);
    m.exports.push_back(std::move(exp));
  }
  return m;
}

void write_payload(ByteWriter& w, const Instruction& instr) {
  switch (opcode_contract(instr.op).payload) {
    case PayloadKind::None:
      break;
    case PayloadKind::Name:
      w.name(std::get<NamePayload>(instr.payload).name);
      break;
    case PayloadKind::Number: {
      double v = std::get<NumberPayload>(instr.payload).value;
      uint64_t bits;
      __builtin_memcpy(&bits, &v, 8);
      w.u64_fixed(bits);
      break;
    }
    case PayloadKind::BigInt:
      w.u64_fixed(static_cast<uint64_t>(std::get<BigIntPayload>(instr.payload).value));
      break;
    case PayloadKind::String:
      w.name(std::get<StringPayload>(instr.payload).value);
      break;
    case PayloadKind::Boolean:
      w.u8(std::get<BooleanPayload>(instr.payload).value ? 1 : 0);
      break;
    case PayloadKind::PropertyList: {
      const auto& p = std::get<PropertyListPayload>(instr.payload);
      w.uleb(p.names.size());
      for (const auto& n : p.names) w.name(n);
      break;
    }
    case PayloadKind::Operator:
      w.name(std::get<OperatorPayload>(instr.payload).op);
      break;
    case PayloadKind::Function:
      w.uleb(std::get<FunctionPayload>(instr.payload).param_count);
      break;
    case PayloadKind::Loop:
      w.uleb(std::get<LoopPayload>(instr.payload).iterations);
      break;
    case PayloadKind::WasmMemory:
      write_memory_type(w, std::get<WasmMemoryType>(instr.payload));
      break;
    case PayloadKind::WasmTable:
      write_table_type(w, std::get<WasmTableType>(instr.payload));
      break;
    case PayloadKind::WasmGlobal:
      write_global_type(w, std::get<WasmGlobalType>(instr.payload));
      break;
    case PayloadKind::WasmTag:
      write_tag_type(w, std::get<WasmTagType>(instr.payload));
      break;
    case PayloadKind::WasmModule: {
      const auto& p = std::get<WasmModulePayload>(instr.payload);
      w.uleb(p.bytes.size());
      w.raw(p.bytes);
      write_module_type(w, p.shape);
      break;
    }
    case PayloadKind::WasmExport: {
      const auto& p = std::get<WasmExportPayload>(instr.payload);
      w.name(p.field);
      write_extern_type(w, p.type);
      write_defs(w, p.defs);
      break;
    }
  }
}

Payload read_payload(ByteReader& r, Opcode op) {
  switch (opcode_contract(op).payload) {
    case PayloadKind::None:
      return std::monostate{};
    case PayloadKind::Name:
      return NamePayload{r.name()};
    case PayloadKind::Number: {
      uint64_t bits = r.u64_fixed();
      double v;
      __builtin_memcpy(&v, &bits, 8);
      return NumberPayload{v};
    }
    case PayloadKind::BigInt:
      return BigIntPayload{static_cast<int64_t>(r.u64_fixed())};
    case PayloadKind::String:
      return StringPayload{r.name()};
    case PayloadKind::Boolean:
      return BooleanPayload{r.u8() != 0};
    case PayloadKind::PropertyList: {
      PropertyListPayload p;
      uint32_t n = r.uleb32();
      if (n > kSanityCap) r.fail("property count too large");
      for (uint32_t i = 0; i < n; ++i) p.names.push_back(r.name());
      return p;
    }
    case PayloadKind::Operator:
      return OperatorPayload{r.name()};
    case PayloadKind::Function:
      return FunctionPayload{r.uleb32()};
    case PayloadKind::Loop:
      return LoopPayload{r.uleb32()};
    case PayloadKind::WasmMemory:
      return read_memory_type(r);
    case PayloadKind::WasmTable:
      return read_table_type(r);
    case PayloadKind::WasmGlobal:
      return read_global_type(r);
    case PayloadKind::WasmTag:
      return read_tag_type(r);
    case PayloadKind::WasmModule: {
      WasmModulePayload p;
      uint32_t len = r.uleb32();
      if (len > kSanityCap) r.fail("module bytes too large");
      p.bytes = r.raw(len);
      p.shape = read_module_type(r);
      return p;
    }
    case PayloadKind::WasmExport: {
      WasmExportPayload p;
      p.field = r.name();
      p.type = read_extern_type(r);
      p.defs = read_defs(r);
      return p;
    }
  }
  r.fail("bad payload kind");
}

}  // namespace

Bytes serialize(const Program& program) {
  ByteWriter w;
  w.raw(std::span<const uint8_t>(kMagic, 4));
  w.u8(kVersion);
  w.u32_fixed(static_cast<uint32_t>(program.instructions.size()));
  for (const Instruction& instr : program.instructions) {
    w.u8(static_cast<uint8_t>(instr.op));
    w.uleb(instr.inputs.size());
    for (const Variable& v : instr.inputs) w.uleb(v.id);
    w.uleb(instr.outputs.size());
    for (const Variable& v : instr.outputs) w.uleb(v.id);
    write_payload(w, instr);
  }
  w.u32_fixed(program.next_variable_id);
  return w.take();
}

Program deserialize(std::span<const uint8_t> bytes) {
  try {
    ByteReader r(bytes);
    for (uint8_t m : kMagic) {
      if (r.u8() != m) throw MalformedEncoding("bad magic");
    }
    if (r.u8() != kVersion) throw MalformedEncoding("unsupported version");
    uint32_t count = r.u32_fixed();
    if (count > kSanityCap) throw MalformedEncoding("instruction count too large");
    Program program;
    program.instructions.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
      Instruction instr;
      uint8_t op = r.u8();
      if (op >= kOpcodeCount) throw MalformedEncoding("bad opcode");
      instr.op = static_cast<Opcode>(op);
      uint32_t nin = r.uleb32();
      if (nin > kSanityCap) throw MalformedEncoding("input count too large");
      for (uint32_t j = 0; j < nin; ++j) instr.inputs.push_back(Variable{r.uleb32()});
      uint32_t nout = r.uleb32();
      if (nout > kSanityCap) throw MalformedEncoding("output count too large");
      for (uint32_t j = 0; j < nout; ++j) instr.outputs.push_back(Variable{r.uleb32()});
      instr.payload = read_payload(r, instr.op);
      program.instructions.push_back(std::move(instr));
    }
    program.next_variable_id = r.u32_fixed();
    if (!r.done()) throw MalformedEncoding("trailing bytes");
    return program;
  } catch (const DecodeError& e) {
    throw MalformedEncoding(e.what());
  }
}

}  // namespace weaver
