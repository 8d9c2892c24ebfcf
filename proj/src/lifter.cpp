// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#include "weaver/lifter.hpp"

#include <charconv>
#include <cmath>
#include <map>

namespace weaver {

namespace {

bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  auto head = [](char c) { return isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$'; };
  auto tail = [&](char c) { return head(c) || isdigit(static_cast<unsigned char>(c)); };
  if (!head(s[0])) return false;
  for (size_t i = 1; i < s.size(); ++i)
    if (!tail(s[i])) return false;
  return true;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20 || c >= 0x7F) {
          char buf[8];
          snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
  return out;
}

std::string number_literal(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
  if (v == 0.0 && std::signbit(v)) return "-0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string member(const std::string& base, const std::string& name) {
  if (is_identifier(name)) return base + "." + name;
  return base + "[" + quote(name) + "]";
}

// JS API string for a value type in descriptor position. The historical
// "anyfunc" spelling keeps minimal shells happy.
std::string value_type_string(const ValueType& t) {
  if (t.is_num()) {
    switch (t.num) {
      case NumKind::I32: return "i32";
      case NumKind::I64: return "i64";
      case NumKind::F32: return "f32";
      case NumKind::F64: return "f64";
    }
  }
  if (t.is_v128()) return "v128";
  if (t.is_ref() && t.ref.heap.is_abstract) {
    switch (t.ref.heap.abstract_kind) {
      case AbstractHeap::Func: return "anyfunc";
      case AbstractHeap::Extern: return "externref";
      case AbstractHeap::Any: return "anyref";
      case AbstractHeap::Eq: return "eqref";
      case AbstractHeap::I31: return "i31ref";
      case AbstractHeap::Struct: return "structref";
      case AbstractHeap::Array: return "arrayref";
      case AbstractHeap::None: return "nullref";
      case AbstractHeap::NoFunc: return "nullfuncref";
      case AbstractHeap::NoExtern: return "nullexternref";
      case AbstractHeap::Exn: return "exnref";
      case AbstractHeap::NoExn: return "nullexnref";
    }
  }
  return "externref";
}

std::string memory_descriptor(const WasmMemoryType& m) {
  std::string s = "{initial:" + std::to_string(m.initial);
  if (m.maximum) s += ", maximum:" + std::to_string(*m.maximum);
  if (m.shared) s += ", shared:true";
  if (m.addrtype == AddrType::Addr64) s += ", address:\"i64\"";
  s += "}";
  return s;
}

std::string table_descriptor(const WasmTableType& t) {
  std::string s = "{element:" + quote(value_type_string(t.element_type));
  s += ", initial:" + std::to_string(t.initial);
  if (t.maximum) s += ", maximum:" + std::to_string(*t.maximum);
  if (t.addrtype == AddrType::Addr64) s += ", address:\"i64\"";
  s += "}";
  return s;
}

std::string global_descriptor(const WasmGlobalType& g) {
  std::string s = "{value:" + quote(value_type_string(g.content_type));
  if (g.mutability) s += ", mutable:true";
  s += "}";
  return s;
}

std::string tag_descriptor(const WasmTagType& t) {
  std::string s = "{parameters:[";
  for (size_t i = 0; i < t.parameters.size(); ++i) {
    if (i) s += ", ";
    s += quote(value_type_string(t.parameters[i]));
  }
  s += "]}";
  return s;
}

std::string byte_array_literal(const Bytes& bytes) {
  std::string s = "new Uint8Array([";
  for (size_t i = 0; i < bytes.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(bytes[i]);
  }
  s += "])";
  return s;
}

class Lifter {
 public:
  explicit Lifter(const Program& program) : program_(program) {
    for (const Instruction& instr : program.instructions) {
      for (const Variable& out : instr.outputs) def_.emplace(out.id, &instr);
    }
  }

  std::string run() {
    for (const Instruction& instr : program_.instructions) emit(instr);
    return std::move(out_);
  }

 private:
  void line(const std::string& text) {
    for (int i = 0; i < depth_; ++i) out_ += "  ";
    out_ += text;
    out_ += '\n';
  }

  static std::string args_list(const std::vector<Variable>& vars, size_t from) {
    std::string s;
    for (size_t i = from; i < vars.size(); ++i) {
      if (i > from) s += ", ";
      s += vars[i].name();
    }
    return s;
  }

  void emit_const(Variable out, const std::string& expr) {
    line("const " + out.name() + " = " + expr + ";");
  }

  void emit(const Instruction& instr) {
    auto in = [&](size_t i) {
      if (i >= instr.inputs.size()) throw UnliftableProgram("missing input");
      return instr.inputs[i].name();
    };
    auto out0 = [&]() {
      if (instr.outputs.empty()) throw UnliftableProgram("missing output");
      return instr.outputs[0];
    };
    switch (instr.op) {
      case Opcode::LoadBuiltin:
        emit_const(out0(), std::get<NamePayload>(instr.payload).name);
        break;
      case Opcode::LoadNumber:
        emit_const(out0(), number_literal(std::get<NumberPayload>(instr.payload).value));
        break;
      case Opcode::LoadBigInt: {
        int64_t v = std::get<BigIntPayload>(instr.payload).value;
        emit_const(out0(), std::to_string(v) + "n");
        break;
      }
      case Opcode::LoadString:
        emit_const(out0(), quote(std::get<StringPayload>(instr.payload).value));
        break;
      case Opcode::LoadBoolean:
        emit_const(out0(), std::get<BooleanPayload>(instr.payload).value ? "true" : "false");
        break;
      case Opcode::LoadNull:
        emit_const(out0(), "null");
        break;
      case Opcode::LoadUndefined:
        emit_const(out0(), "undefined");
        break;
      case Opcode::CreateObject: {
        const auto& names = std::get<PropertyListPayload>(instr.payload).names;
        std::string obj = "{";
        for (size_t i = 0; i < names.size(); ++i) {
          if (i) obj += ", ";
          obj += quote(names[i]) + ": " + in(i);
        }
        obj += "}";
        emit_const(out0(), obj);
        break;
      }
      case Opcode::CreateArray:
        emit_const(out0(), "[" + args_list(instr.inputs, 0) + "]");
        break;
      case Opcode::GetProperty:
        emit_const(out0(), member(in(0), std::get<NamePayload>(instr.payload).name));
        break;
      case Opcode::SetProperty:
        line(member(in(0), std::get<NamePayload>(instr.payload).name) + " = " + in(1) + ";");
        break;
      case Opcode::StoreBuiltin: {
        const auto& name = std::get<NamePayload>(instr.payload).name;
        if (is_identifier(name)) line(name + " = " + in(0) + ";");
        else line("globalThis[" + quote(name) + "] = " + in(0) + ";");
        break;
      }
      case Opcode::CallFunction:
        emit_const(out0(), in(0) + "(" + args_list(instr.inputs, 1) + ")");
        break;
      case Opcode::CallMethod:
        emit_const(out0(), member(in(0), std::get<NamePayload>(instr.payload).name) + "(" +
                               args_list(instr.inputs, 1) + ")");
        break;
      case Opcode::Construct:
        emit_const(out0(), "new " + in(0) + "(" + args_list(instr.inputs, 1) + ")");
        break;
      case Opcode::BinaryOp: {
        const auto& op = std::get<OperatorPayload>(instr.payload).op;
        emit_const(out0(), in(0) + " " + op + " " + in(1));
        break;
      }
      case Opcode::UnaryOp: {
        const auto& op = std::get<OperatorPayload>(instr.payload).op;
        bool word = isalpha(static_cast<unsigned char>(op[0]));
        emit_const(out0(), op + (word ? " " : "") + in(0));
        break;
      }
      case Opcode::BeginFunction: {
        line("const " + out0().name() + " = function (" +
             args_list(instr.outputs, 1) + ") {");
        ++depth_;
        break;
      }
      case Opcode::EndFunction:
        --depth_;
        line("};");
        break;
      case Opcode::Return:
        line("return " + in(0) + ";");
        break;
      case Opcode::BeginTry:
        line("try {");
        ++depth_;
        break;
      case Opcode::BeginCatch:
        --depth_;
        line("} catch (" + out0().name() + ") {");
        ++depth_;
        break;
      case Opcode::EndTry:
        --depth_;
        line("}");
        break;
      case Opcode::BeginForLoop: {
        uint32_t n = std::get<LoopPayload>(instr.payload).iterations;
        std::string counter = out0().name();
        line("for (let " + counter + " = 0; " + counter + " < " + std::to_string(n) + "; " +
             counter + "++) {");
        ++depth_;
        break;
      }
      case Opcode::EndForLoop:
        --depth_;
        line("}");
        break;
      case Opcode::CreateWasmMemory:
        emit_const(out0(), "new WebAssembly.Memory(" +
                               memory_descriptor(std::get<WasmMemoryType>(instr.payload)) + ")");
        break;
      case Opcode::CreateWasmTable: {
        std::string expr = "new WebAssembly.Table(" +
                           table_descriptor(std::get<WasmTableType>(instr.payload));
        if (!instr.inputs.empty()) expr += ", " + in(0);
        expr += ")";
        emit_const(out0(), expr);
        break;
      }
      case Opcode::CreateWasmGlobal: {
        std::string expr = "new WebAssembly.Global(" +
                           global_descriptor(std::get<WasmGlobalType>(instr.payload));
        if (!instr.inputs.empty()) expr += ", " + in(0);
        expr += ")";
        emit_const(out0(), expr);
        break;
      }
      case Opcode::CreateWasmTag:
        emit_const(out0(), "new WebAssembly.Tag(" +
                               tag_descriptor(std::get<WasmTagType>(instr.payload)) + ")");
        break;
      case Opcode::CompileWasmModule:
        emit_const(out0(), "new WebAssembly.Module(" +
                               byte_array_literal(std::get<WasmModulePayload>(instr.payload).bytes) +
                               ")");
        break;
      case Opcode::InstantiateWasmModule: {
        std::string expr = "new WebAssembly.Instance(" + in(0);
        const WasmModuleType* shape = nullptr;
        auto it = def_.find(instr.inputs[0].id);
        if (it != def_.end() && it->second->op == Opcode::CompileWasmModule)
          shape = &std::get<WasmModulePayload>(it->second->payload).shape;
        if (shape && !shape->imports.empty()) {
          // Group the import object by module name, first appearance order.
          std::vector<std::pair<std::string, std::string>> groups;
          size_t arg = 1;
          for (const auto& imp : shape->imports) {
            if (arg >= instr.inputs.size()) break;
            std::string entry = quote(imp.field) + ": " + instr.inputs[arg].name();
            ++arg;
            bool found = false;
            for (auto& [mod, body] : groups) {
              if (mod == imp.module) {
                body += ", " + entry;
                found = true;
                break;
              }
            }
            if (!found) groups.emplace_back(imp.module, entry);
          }
          expr += ", {";
          for (size_t i = 0; i < groups.size(); ++i) {
            if (i) expr += ", ";
            expr += quote(groups[i].first) + ": {" + groups[i].second + "}";
          }
          expr += "}";
        } else if (instr.inputs.size() > 1) {
          expr += ", {}";
        }
        expr += ")";
        emit_const(out0(), expr);
        break;
      }
      case Opcode::WasmInstanceExport: {
        const auto& p = std::get<WasmExportPayload>(instr.payload);
        emit_const(out0(), member(in(0) + ".exports", p.field));
        break;
      }
    }
  }

  const Program& program_;
  std::map<uint32_t, const Instruction*> def_;
  std::string out_;
  int depth_ = 0;
};

}  // namespace

std::string lift(const Program& program) { return Lifter(program).run(); }

}  // namespace weaver
