// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#include "weaver/analyzer.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"

namespace weaver {

void WasmTypeAnnotation::add(TypeCategory c, uint32_t index) {
  auto& v = of(c);
  if (std::find(v.begin(), v.end(), index) == v.end()) v.push_back(index);
}

bool WasmTypeAnnotation::empty() const {
  for (const auto& s : sets)
    if (!s.empty()) return false;
  return true;
}

// --- static type environment ---

namespace {

JSType fn(std::vector<JSType> params, JSType ret) {
  return JSType::function(std::move(params), std::move(ret));
}

JSType math_template() {
  auto n1 = fn({JSType::number()}, JSType::number());
  auto n2 = fn({JSType::number(), JSType::number()}, JSType::number());
  return JSType::object(
      {"PI", "E"}, {"abs", "floor", "ceil", "max", "min", "random", "sqrt", "pow", "sin", "log"},
      {{"PI", JSType::number()},
       {"E", JSType::number()},
       {"abs", n1},
       {"floor", n1},
       {"ceil", n1},
       {"max", n2},
       {"min", n2},
       {"random", fn({}, JSType::number())},
       {"sqrt", n1},
       {"pow", n2},
       {"sin", n1},
       {"log", n1}});
}

JSType reflect_template() {
  return JSType::object(
      {}, {"apply", "construct", "get", "set", "has", "ownKeys", "getPrototypeOf"},
      {{"apply", fn({JSType::function(), JSType::anything(), JSType::object()}, JSType::anything())},
       {"construct", fn({JSType::function(), JSType::object()}, JSType::object())},
       {"get", fn({JSType::object(), JSType::string()}, JSType::anything())},
       {"set", fn({JSType::object(), JSType::string(), JSType::anything()}, JSType::boolean())},
       {"has", fn({JSType::object(), JSType::string()}, JSType::boolean())},
       {"ownKeys", fn({JSType::object()}, js_array_type())},
       {"getPrototypeOf", fn({JSType::object()}, JSType::object())}});
}

JSType webassembly_template() {
  // Constructor members return the Table-1 templates; the analyzer cannot
  // know the constructed Wasm type statically, so no category annotation is
  // attached through this path.
  return JSType::object(
      {"Memory", "Table", "Global", "Tag", "Module", "Instance", "CompileError", "LinkError",
       "RuntimeError"},
      {"validate", "compile", "instantiate"},
      {{"Memory", fn({JSType::object()}, memory_js_type())},
       {"Table", fn({JSType::object()}, table_js_type())},
       {"Global", fn({JSType::object()}, global_js_type())},
       {"Tag", fn({JSType::object()}, tag_js_type())},
       {"Module", fn({JSType::object()}, module_js_type())},
       {"Instance", fn({JSType::object()}, instance_js_type())},
       {"CompileError", fn({JSType::string()}, JSType::object())},
       {"LinkError", fn({JSType::string()}, JSType::object())},
       {"RuntimeError", fn({JSType::string()}, JSType::object())},
       {"validate", fn({JSType::object()}, JSType::boolean())},
       {"compile", fn({JSType::object()}, JSType::object())},
       {"instantiate", fn({JSType::object(), JSType::object()}, JSType::object())}});
}

}  // namespace

StaticTypeEnvironment StaticTypeEnvironment::default_catalog() {
  StaticTypeEnvironment env;
  auto obj = [&](std::vector<std::string> props, std::vector<std::string> methods,
                 std::map<std::string, JSType> members = {}) {
    return JSType::object(std::move(props), std::move(methods), std::move(members));
  };

  env.set_template("Object", obj({}, {"keys", "values", "assign", "freeze", "entries"},
                                 {{"keys", fn({JSType::object()}, js_array_type())},
                                  {"values", fn({JSType::object()}, js_array_type())},
                                  {"assign", fn({JSType::object(), JSType::object()},
                                                JSType::object())},
                                  {"freeze", fn({JSType::object()}, JSType::object())},
                                  {"entries", fn({JSType::object()}, js_array_type())}}));
  env.set_template("Reflect", reflect_template());
  env.set_template("Math", math_template());
  env.set_template("Array", fn({JSType::number()}, js_array_type()));
  env.set_template("JSON", obj({}, {"stringify", "parse"},
                               {{"stringify", fn({JSType::anything()}, JSType::string())},
                                {"parse", fn({JSType::string()}, JSType::anything())}}));
  env.set_template("Date", fn({}, obj({}, {"getTime", "toISOString"},
                                      {{"getTime", fn({}, JSType::number())},
                                       {"toISOString", fn({}, JSType::string())}})));
  env.set_template("Promise", obj({}, {"resolve", "reject", "all"},
                                  {{"resolve", fn({JSType::anything()}, JSType::object())},
                                   {"reject", fn({JSType::anything()}, JSType::object())},
                                   {"all", fn({JSType::object()}, JSType::object())}}));
  env.set_template("Proxy", fn({JSType::object(), JSType::object()}, JSType::object()));
  env.set_template("Symbol", obj({"iterator", "toStringTag"}, {"for"},
                                 {{"for", fn({JSType::string()}, JSType::anything())}}));
  env.set_template("Number",
                   obj({"MAX_SAFE_INTEGER", "EPSILON"}, {"isInteger", "isFinite", "parseFloat"},
                       {{"MAX_SAFE_INTEGER", JSType::integer()},
                        {"EPSILON", JSType::number()},
                        {"isInteger", fn({JSType::anything()}, JSType::boolean())},
                        {"isFinite", fn({JSType::anything()}, JSType::boolean())},
                        {"parseFloat", fn({JSType::string()}, JSType::number())}}));
  env.set_template("BigInt", obj({}, {"asIntN", "asUintN"},
                                 {{"asIntN", fn({JSType::number(), JSType::bigint()},
                                                JSType::bigint())},
                                  {"asUintN", fn({JSType::number(), JSType::bigint()},
                                                 JSType::bigint())}}));
  env.set_template("String", fn({JSType::anything()}, JSType::string()));
  env.set_template("Boolean", fn({JSType::anything()}, JSType::boolean()));
  env.set_template("Error", fn({JSType::string()},
                               obj({"message", "name"}, {},
                                   {{"message", JSType::string()}, {"name", JSType::string()}})));
  env.set_template("ArrayBuffer", fn({JSType::number()}, js_array_buffer_type()));
  env.set_template("DataView",
                   fn({js_array_buffer_type()},
                      obj({"byteLength", "buffer"}, {"getUint8", "setUint8", "getBigInt64"},
                          {{"byteLength", JSType::integer()},
                           {"buffer", js_array_buffer_type()},
                           {"getUint8", fn({JSType::number()}, JSType::number())},
                           {"setUint8", fn({JSType::number(), JSType::number()},
                                           JSType::nullish())},
                           {"getBigInt64", fn({JSType::number()}, JSType::bigint())}})));
  env.set_template("Atomics", obj({}, {"add", "and", "or", "load", "store"},
                                  {{"add", fn({JSType::object(), JSType::number(),
                                               JSType::number()}, JSType::number())},
                                   {"and", fn({JSType::object(), JSType::number(),
                                               JSType::number()}, JSType::number())},
                                   {"or", fn({JSType::object(), JSType::number(),
                                              JSType::number()}, JSType::number())},
                                   {"load", fn({JSType::object(), JSType::number()},
                                               JSType::number())},
                                   {"store", fn({JSType::object(), JSType::number(),
                                                 JSType::number()}, JSType::number())}}));
  env.set_template("WeakMap", fn({}, obj({}, {"get", "set", "has", "delete"},
                                         {{"get", fn({JSType::object()}, JSType::anything())},
                                          {"set", fn({JSType::object(), JSType::anything()},
                                                     JSType::object())},
                                          {"has", fn({JSType::object()}, JSType::boolean())},
                                          {"delete", fn({JSType::object()},
                                                        JSType::boolean())}})));
  env.set_template("Function", fn({JSType::string()}, JSType::function()));
  env.set_template("WebAssembly", webassembly_template());
  return env;
}

void StaticTypeEnvironment::set_template(const std::string& name, JSType type) {
  if (templates_.emplace(name, type).second) {
    names_.push_back(name);
  } else {
    templates_[name] = std::move(type);
  }
}

std::optional<JSType> StaticTypeEnvironment::lookup(const std::string& name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) return std::nullopt;
  return it->second;
}

namespace {

JSType js_type_from_json(const nlohmann::json& j);

ObjectShape shape_from_json(const nlohmann::json& j) {
  ObjectShape shape;
  if (j.contains("properties"))
    for (const auto& p : j["properties"]) shape.properties.push_back(p.get<std::string>());
  if (j.contains("methods"))
    for (const auto& m : j["methods"]) shape.methods.push_back(m.get<std::string>());
  if (j.contains("members"))
    for (const auto& [name, t] : j["members"].items())
      shape.members.emplace(name, js_type_from_json(t));
  return shape;
}

JSType js_type_from_json(const nlohmann::json& j) {
  JSType out = JSType::nothing();
  bool object = false, function = false;
  if (j.contains("flags")) {
    for (const auto& f : j["flags"]) {
      std::string name = f.get<std::string>();
      if (name == "number") out = out.union_with(JSType::number());
      else if (name == "integer") out = out.union_with(JSType::integer());
      else if (name == "bigint") out = out.union_with(JSType::bigint());
      else if (name == "string") out = out.union_with(JSType::string());
      else if (name == "boolean") out = out.union_with(JSType::boolean());
      else if (name == "nullish") out = out.union_with(JSType::nullish());
      else if (name == "anything") out = out.union_with(JSType::anything());
      else if (name == "object") object = true;
      else if (name == "function") function = true;
    }
  }
  if (object || j.contains("properties") || j.contains("methods") || j.contains("members")) {
    ObjectShape shape = shape_from_json(j);
    out = out.union_with(
        JSType::object(std::move(shape.properties), std::move(shape.methods),
                       std::move(shape.members)));
  }
  if (function || j.contains("signature")) {
    if (j.contains("signature")) {
      std::vector<JSType> params;
      for (const auto& p : j["signature"]["params"]) params.push_back(js_type_from_json(p));
      JSType ret = j["signature"].contains("ret") ? js_type_from_json(j["signature"]["ret"])
                                                  : JSType::anything();
      out = out.union_with(JSType::function(std::move(params), std::move(ret)));
    } else {
      out = out.union_with(JSType::function());
    }
  }
  return out;
}

}  // namespace

StaticTypeEnvironment StaticTypeEnvironment::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open builtin catalog: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  StaticTypeEnvironment env;
  for (const auto& [name, t] : j.items()) env.set_template(name, js_type_from_json(t));
  return env;
}

// --- analyzer ---

Analyzer::Analyzer(const StaticTypeEnvironment* env, WasmTypeRecord* record)
    : env_(env), record_(record) {}

const TypeAnnotation& Analyzer::annotation(Variable v) const {
  static const TypeAnnotation kUnknown{JSType::anything(), {}};
  if (v.id >= annotations_.size()) return kUnknown;
  return annotations_[v.id];
}

void Analyzer::annotate(Variable v, JSType js) {
  if (annotations_.size() <= v.id) annotations_.resize(v.id + 1);
  TypeAnnotation& ann = annotations_[v.id];
  ann.js_type = js;
  ann.wasm = {};
  for (const ValueType& t : to_wasm_value_types(js)) {
    ann.wasm.add(TypeCategory::Value, record_->intern_value(t));
  }
}

void Analyzer::annotate_wasm_object(Variable v, JSType js, TypeCategory cat, uint32_t index) {
  annotate(v, std::move(js));
  annotations_[v.id].wasm.add(cat, index);
}

JSType Analyzer::js_type_of(Variable v) const { return annotation(v).js_type; }

void Analyzer::step(const Instruction& instr) {
  auto in_type = [&](size_t i) {
    return i < instr.inputs.size() ? js_type_of(instr.inputs[i]) : JSType::anything();
  };
  auto out = [&](size_t i) { return instr.outputs[i]; };

  switch (instr.op) {
    case Opcode::LoadBuiltin: {
      const auto& name = std::get<NamePayload>(instr.payload).name;
      auto it = builtin_overrides_.find(name);
      JSType js = it != builtin_overrides_.end()
                      ? it->second
                      : env_->lookup(name).value_or(JSType::anything());
      annotate(out(0), js);
      break;
    }
    case Opcode::LoadNumber: {
      double v = std::get<NumberPayload>(instr.payload).value;
      bool integral = v == static_cast<double>(static_cast<int64_t>(v)) &&
                      v >= -9007199254740992.0 && v <= 9007199254740992.0;
      annotate(out(0), integral ? JSType::integer() : JSType::number());
      break;
    }
    case Opcode::LoadBigInt:
      annotate(out(0), JSType::bigint());
      break;
    case Opcode::LoadString:
      annotate(out(0), JSType::string());
      break;
    case Opcode::LoadBoolean:
      annotate(out(0), JSType::boolean());
      break;
    case Opcode::LoadNull:
    case Opcode::LoadUndefined:
      annotate(out(0), JSType::nullish());
      break;
    case Opcode::CreateObject: {
      const auto& names = std::get<PropertyListPayload>(instr.payload).names;
      std::map<std::string, JSType> members;
      for (size_t i = 0; i < names.size() && i < instr.inputs.size(); ++i)
        members.emplace(names[i], in_type(i));
      annotate(out(0), JSType::object(names, {}, std::move(members)));
      break;
    }
    case Opcode::CreateArray:
      annotate(out(0), js_array_type());
      break;
    case Opcode::GetProperty: {
      const auto& name = std::get<NamePayload>(instr.payload).name;
      JSType base = in_type(0);
      JSType result = JSType::anything();
      if (base.shape()) {
        if (auto member = base.shape()->member_type(name)) result = *member;
      }
      annotate(out(0), result);
      break;
    }
    case Opcode::SetProperty:
    case Opcode::Return:
      break;
    case Opcode::StoreBuiltin: {
      const auto& name = std::get<NamePayload>(instr.payload).name;
      builtin_overrides_[name] = in_type(0);
      break;
    }
    case Opcode::CallFunction: {
      JSType callee = in_type(0);
      annotate(out(0), callee.signature() ? callee.signature()->ret : JSType::anything());
      break;
    }
    case Opcode::CallMethod: {
      const auto& name = std::get<NamePayload>(instr.payload).name;
      JSType base = in_type(0);
      JSType result = JSType::anything();
      if (base.shape()) {
        if (auto member = base.shape()->member_type(name)) {
          result = member->signature() ? member->signature()->ret : JSType::anything();
        }
      }
      annotate(out(0), result);
      break;
    }
    case Opcode::Construct: {
      JSType callee = in_type(0);
      JSType result = JSType::object();
      if (callee.signature()) {
        const JSType& ret = callee.signature()->ret;
        if (ret.has(JSType::kObject) || ret.has(JSType::kFunction)) result = ret;
      }
      annotate(out(0), result);
      break;
    }
    case Opcode::BinaryOp: {
      const auto& op = std::get<OperatorPayload>(instr.payload).op;
      JSType a = in_type(0), b = in_type(1);
      JSType result;
      if (op == "==" || op == "===" || op == "!=" || op == "!==" || op == "<" || op == ">" ||
          op == "<=" || op == ">=" || op == "instanceof" || op == "in") {
        result = JSType::boolean();
      } else if (op == "&&" || op == "||") {
        result = a.union_with(b);
      } else if (op == "+") {
        if (a.has(JSType::kString) || b.has(JSType::kString)) result = JSType::string();
        else if (a.has(JSType::kBigInt) && b.has(JSType::kBigInt) && !a.has(JSType::kNumber) &&
                 !b.has(JSType::kNumber))
          result = JSType::bigint();
        else result = JSType::number();
      } else {
        if (a.has(JSType::kBigInt) && b.has(JSType::kBigInt) && !a.has(JSType::kNumber) &&
            !b.has(JSType::kNumber))
          result = JSType::bigint();
        else result = JSType::number();
      }
      annotate(out(0), result);
      break;
    }
    case Opcode::UnaryOp: {
      const auto& op = std::get<OperatorPayload>(instr.payload).op;
      JSType a = in_type(0);
      JSType result;
      if (op == "!") result = JSType::boolean();
      else if (op == "typeof") result = JSType::string();
      else if (op == "void") result = JSType::nullish();
      else if (a.has(JSType::kBigInt) && !a.has(JSType::kNumber)) result = JSType::bigint();
      else result = JSType::number();
      annotate(out(0), result);
      break;
    }
    case Opcode::BeginFunction: {
      uint32_t params = std::get<FunctionPayload>(instr.payload).param_count;
      std::vector<JSType> param_types(params, JSType::anything());
      annotate(out(0), JSType::function(param_types, JSType::anything()));
      for (uint32_t i = 0; i < params; ++i) annotate(out(1 + i), JSType::anything());
      break;
    }
    case Opcode::EndFunction:
    case Opcode::BeginTry:
    case Opcode::EndTry:
    case Opcode::EndForLoop:
      break;
    case Opcode::BeginCatch:
      annotate(out(0), JSType::anything());
      break;
    case Opcode::BeginForLoop:
      annotate(out(0), JSType::integer());
      break;
    case Opcode::CreateWasmMemory: {
      const auto& m = std::get<WasmMemoryType>(instr.payload);
      annotate_wasm_object(out(0), memory_js_type(), TypeCategory::Memory,
                           record_->intern_memory(m));
      break;
    }
    case Opcode::CreateWasmTable: {
      const auto& t = std::get<WasmTableType>(instr.payload);
      annotate_wasm_object(out(0), table_js_type(), TypeCategory::Table,
                           record_->intern_table(t));
      break;
    }
    case Opcode::CreateWasmGlobal: {
      const auto& g = std::get<WasmGlobalType>(instr.payload);
      annotate_wasm_object(out(0), global_js_type(), TypeCategory::Global,
                           record_->intern_global(g));
      break;
    }
    case Opcode::CreateWasmTag: {
      const auto& t = std::get<WasmTagType>(instr.payload);
      annotate_wasm_object(out(0), tag_js_type(), TypeCategory::Tag, record_->intern_tag(t));
      break;
    }
    case Opcode::CompileWasmModule: {
      const auto& p = std::get<WasmModulePayload>(instr.payload);
      annotate_wasm_object(out(0), module_js_type(), TypeCategory::Module,
                           record_->intern_module(p.shape));
      break;
    }
    case Opcode::InstantiateWasmModule: {
      JSType js = instance_js_type();
      const auto& module_set =
          instr.inputs.empty()
              ? std::vector<uint32_t>{}
              : annotation(instr.inputs[0]).wasm.of(TypeCategory::Module);
      if (!module_set.empty()) {
        WasmInstanceType inst{record_->modules()[module_set.front()], true};
        annotate_wasm_object(out(0), js, TypeCategory::Instance, record_->intern_instance(inst));
      } else {
        annotate(out(0), js);
      }
      break;
    }
    case Opcode::WasmInstanceExport: {
      const auto& p = std::get<WasmExportPayload>(instr.payload);
      JSType js = JSType::anything();
      try {
        js = wasm_object_to_js_type(p.type, p.defs);
      } catch (const UnsupportedTypeError&) {
        // Exports with excluded types never come from our generators; keep
        // the analysis total anyway.
      }
      TypeCategory cat;
      uint32_t index = 0;
      switch (p.type.kind()) {
        case ExternKind::Memory:
          cat = TypeCategory::Memory;
          index = record_->intern_memory(p.type.memory());
          break;
        case ExternKind::Table:
          cat = TypeCategory::Table;
          index = record_->intern_table(p.type.table(), p.defs);
          break;
        case ExternKind::Global:
          cat = TypeCategory::Global;
          index = record_->intern_global(p.type.global(), p.defs);
          break;
        case ExternKind::Tag:
          cat = TypeCategory::Tag;
          index = record_->intern_tag(p.type.tag(), p.defs);
          break;
        case ExternKind::Function:
          cat = TypeCategory::Function;
          index = record_->intern_function(p.type.function(), p.defs);
          break;
      }
      annotate_wasm_object(out(0), js, cat, index);
      break;
    }
  }
}

std::vector<TypeAnnotation> analyze(const Program& program, const StaticTypeEnvironment& env,
                                    WasmTypeRecord& record) {
  Analyzer analyzer(&env, &record);
  for (const Instruction& instr : program.instructions) analyzer.step(instr);
  std::vector<TypeAnnotation> out;
  out.reserve(program.next_variable_id);
  for (uint32_t id = 0; id < program.next_variable_id; ++id)
    out.push_back(analyzer.annotation(Variable{id}));
  return out;
}

// --- generation context ---

GenerationContext::GenerationContext(const StaticTypeEnvironment* env, EngineProfile profile)
    : env_(env), profile_(std::move(profile)), analyzer_(env_, &record_) {}

GenerationContext GenerationContext::from_program(const Program& program,
                                                  const StaticTypeEnvironment* env,
                                                  EngineProfile profile) {
  GenerationContext ctx(env, std::move(profile));
  for (const Instruction& instr : program.instructions) {
    ctx.builder_.append(instr.op, instr.inputs, instr.payload);
    ctx.analyzer_.step(instr);
  }
  return ctx;
}

const Instruction& GenerationContext::append(Opcode op, std::vector<Variable> inputs,
                                             Payload payload) {
  const Instruction& instr = builder_.append(op, std::move(inputs), std::move(payload));
  analyzer_.step(instr);
  return instr;
}

std::vector<Variable> GenerationContext::query_js(const JSType& want) const {
  std::vector<Variable> out;
  for (Variable v : builder_.visible_variables()) {
    if (analyzer_.annotation(v).js_type.intersects(want)) out.push_back(v);
  }
  return out;
}

std::vector<Variable> GenerationContext::query_wasm_value(const ValueType& want) const {
  std::vector<Variable> out;
  for (Variable v : builder_.visible_variables()) {
    const auto& values = analyzer_.annotation(v).wasm.of(TypeCategory::Value);
    for (uint32_t idx : values) {
      if (matches(want, record_.values()[idx], record_)) {
        out.push_back(v);
        break;
      }
    }
  }
  return out;
}

std::vector<Variable> GenerationContext::query_wasm_object(
    TypeCategory category, const std::function<bool(uint32_t)>& constraint) const {
  std::vector<Variable> out;
  for (Variable v : builder_.visible_variables()) {
    const auto& set = analyzer_.annotation(v).wasm.of(category);
    for (uint32_t idx : set) {
      if (!constraint || constraint(idx)) {
        out.push_back(v);
        break;
      }
    }
  }
  return out;
}

}  // namespace weaver
