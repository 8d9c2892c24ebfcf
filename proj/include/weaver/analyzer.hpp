// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "weaver/conversion.hpp"
#include "weaver/ir.hpp"
#include "weaver/profile.hpp"
#include "weaver/wasm_types.hpp"

namespace weaver {

// Per-variable Wasm annotation: one index set per type category. Indices are
// subscripts into the session's WasmTypeRecord.
struct WasmTypeAnnotation {
  std::array<std::vector<uint32_t>, kTypeCategoryCount> sets;

  std::vector<uint32_t>& of(TypeCategory c) { return sets[static_cast<int>(c)]; }
  const std::vector<uint32_t>& of(TypeCategory c) const { return sets[static_cast<int>(c)]; }
  void add(TypeCategory c, uint32_t index);
  bool empty() const;
};

struct TypeAnnotation {
  JSType js_type;
  WasmTypeAnnotation wasm;
};

// Static templates for JS builtins plus the Table-1 templates for Wasm
// object categories. Immutable after construction and shareable.
class StaticTypeEnvironment {
 public:
  static StaticTypeEnvironment default_catalog();
  // Replaces the builtin catalog from a JSON file (name -> template), so a
  // tighter engine profile can trim what generation may reference.
  static StaticTypeEnvironment from_json_file(const std::string& path);

  std::optional<JSType> lookup(const std::string& name) const;
  const std::vector<std::string>& builtin_names() const { return names_; }

  void set_template(const std::string& name, JSType type);

 private:
  std::map<std::string, JSType> templates_;
  std::vector<std::string> names_;
};

// Flow-sensitive forward pass assigning each defined variable a JSType and a
// WasmTypeAnnotation. Depends only on the instruction prefix; unknowns
// degrade to anything and never fail.
class Analyzer {
 public:
  Analyzer(const StaticTypeEnvironment* env, WasmTypeRecord* record);

  void step(const Instruction& instr);

  const TypeAnnotation& annotation(Variable v) const;
  bool has_annotation(Variable v) const {
    return v.id < annotations_.size();
  }
  bool builtin_overridden(const std::string& name) const {
    return builtin_overrides_.count(name) != 0;
  }
  const WasmTypeRecord& record() const { return *record_; }

 private:
  JSType js_type_of(Variable v) const;
  void annotate(Variable v, JSType js);
  void annotate_wasm_object(Variable v, JSType js, TypeCategory cat, uint32_t index);

  const StaticTypeEnvironment* env_;
  WasmTypeRecord* record_;
  std::map<std::string, JSType> builtin_overrides_;
  std::vector<TypeAnnotation> annotations_;
};

// One-shot whole-program analysis. The record accumulates every type the
// program mentions; annotation index sets refer to it.
std::vector<TypeAnnotation> analyze(const Program& program, const StaticTypeEnvironment& env,
                                    WasmTypeRecord& record);

// Generation/analysis session: a program under construction, its analysis,
// and the session type record. This is the "ctx" consumed by generators and
// the query API.
class GenerationContext {
 public:
  GenerationContext(const StaticTypeEnvironment* env, EngineProfile profile);

  // Rebuilds a context positioned at the end of an existing program.
  static GenerationContext from_program(const Program& program,
                                        const StaticTypeEnvironment* env, EngineProfile profile);

  const Instruction& append(Opcode op, std::vector<Variable> inputs, Payload payload = {});

  const Program& program() const { return builder_.program(); }
  Program take_program() { return builder_.take(); }
  const StaticTypeEnvironment& env() const { return *env_; }
  const EngineProfile& profile() const { return profile_; }
  WasmTypeRecord& record() { return record_; }
  const WasmTypeRecord& record() const { return record_; }
  const TypeAnnotation& annotation(Variable v) const { return analyzer_.annotation(v); }

  std::vector<Variable> visible_variables() const { return builder_.visible_variables(); }
  size_t scope_depth() const { return builder_.scope_depth(); }
  bool inside_function() const { return builder_.inside_function(); }
  // False once a builtin's template has been degraded by an overwrite; the
  // Wasm generators bail out when the WebAssembly namespace is gone.
  bool builtin_intact(const std::string& name) const {
    return !analyzer_.builtin_overridden(name);
  }

  // Variables whose JS type intersects `want`, most recent first.
  std::vector<Variable> query_js(const JSType& want) const;
  // Variables holding some Wasm value type that satisfies `want`.
  std::vector<Variable> query_wasm_value(const ValueType& want) const;
  // Variables with a nonempty index set in `category`, optionally filtered
  // by a predicate over the record subscript.
  std::vector<Variable> query_wasm_object(
      TypeCategory category, const std::function<bool(uint32_t)>& constraint = {}) const;

  // Count of argument slots that fell back to any-typed variables; kept for
  // validity attribution.
  int fallback_count = 0;

 private:
  const StaticTypeEnvironment* env_;
  EngineProfile profile_;
  WasmTypeRecord record_;
  ProgramBuilder builder_;
  Analyzer analyzer_;
};

}  // namespace weaver
