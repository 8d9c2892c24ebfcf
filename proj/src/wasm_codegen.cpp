// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#include "weaver/wasm_codegen.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <set>

namespace weaver {

const std::vector<ValueType>& basic_value_types() {
  static const std::vector<ValueType> kTypes = {
      ValueType::i32(), ValueType::i64(), ValueType::f32(),
      ValueType::f64(), ValueType::funcref(), ValueType::externref(),
  };
  return kTypes;
}

// --- synthesizers ---

Bytes synthesize_minimal(const ModuleShape& shape, uint64_t seed, const GenerationBudget& budget) {
  if (shape.type_defs.size() > budget.max_type_defs)
    throw ShapeTooLarge("too many type definitions");
  if (shape.imports.size() > budget.max_imports) throw ShapeTooLarge("too many imports");
  if (shape.exports.size() > budget.max_exports) throw ShapeTooLarge("too many exports");
  auto check_limits = [&](uint64_t initial, uint64_t cap, const char* what) {
    if (initial > cap) throw ShapeTooLarge(std::string(what) + " initial size exceeds budget");
  };
  auto check_extern = [&](const WasmExternType& t) {
    if (t.kind() == ExternKind::Memory)
      check_limits(t.memory().initial, budget.memory_page_cap, "memory");
    if (t.kind() == ExternKind::Table)
      check_limits(t.table().initial, budget.table_size_cap, "table");
  };
  for (const auto& imp : shape.imports) check_extern(imp.type);
  for (const auto& exp : shape.exports) check_extern(exp.type);
  return encode_shape_module(shape, seed);
}

Bytes CommandSynthesizer::synthesize(const ModuleShape& shape, uint64_t seed) {
  Bytes shape_module = encode_shape_module(shape, 0);

  int in_pipe[2], out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
    throw SynthesisError("pipe() failed");
  pid_t pid = fork();
  if (pid < 0) throw SynthesisError("fork() failed");
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]); close(in_pipe[1]);
    close(out_pipe[0]); close(out_pipe[1]);
    std::string seed_arg = std::to_string(seed);
    execl(command_.c_str(), command_.c_str(), seed_arg.c_str(), nullptr);
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);

  size_t written = 0;
  while (written < shape_module.size()) {
    ssize_t n = write(in_pipe[1], shape_module.data() + written, shape_module.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      break;
    }
    written += static_cast<size_t>(n);
  }
  close(in_pipe[1]);

  Bytes output;
  uint8_t buf[4096];
  while (true) {
    ssize_t n = read(out_pipe[0], buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    output.insert(output.end(), buf, buf + n);
  }
  close(out_pipe[0]);

  int status = 0;
  waitpid(pid, &status, 0);
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
    throw SynthesisError("external synthesizer failed: " + command_);
  if (output.empty()) throw SynthesisError("external synthesizer produced no output");
  return output;
}

// --- standalone object generators ---

namespace {

// Uniform pick from a query result; empty -> nullopt. Sampling uniformly is
// the documented candidate-selection knob.
std::optional<Variable> pick_var(Rng& rng, const std::vector<Variable>& candidates) {
  if (candidates.empty()) return std::nullopt;
  return candidates[rng.below(candidates.size())];
}

// Initializer candidates for a slot of the given value type. For func
// references only genuine Wasm functions (or null) coerce at the JS API, so
// plain JS functions are filtered out despite their funcref-compatible
// annotation.
std::optional<Variable> pick_initializer(Rng& rng, GenerationContext& ctx, const ValueType& t) {
  auto candidates = ctx.query_wasm_value(t);
  if (t.is_ref() && t.ref.heap.is_abstract &&
      t.ref.heap.abstract_kind == AbstractHeap::Func) {
    std::vector<Variable> usable;
    for (Variable v : candidates) {
      const auto& ann = ctx.annotation(v);
      if (!ann.wasm.of(TypeCategory::Function).empty() ||
          !ann.js_type.may_not_be_nullish())
        usable.push_back(v);
    }
    candidates = std::move(usable);
  }
  return pick_var(rng, candidates);
}

}  // namespace

std::optional<Variable> gen_wasm_memory(Rng& rng, GenerationContext& ctx,
                                        const GenerationBudget& budget) {
  if (!ctx.builtin_intact("WebAssembly")) return std::nullopt;
  WasmMemoryType m;
  m.shared = rng.chance(0.25);
  m.addrtype = ctx.profile().memory64 && rng.chance(0.25) ? AddrType::Addr64 : AddrType::Addr32;
  m.initial = rng.below(budget.memory_page_cap + 1);
  if (m.shared || rng.chance(0.5)) {
    // Headroom above the initial size keeps grow() calls viable; the bound
    // stays within [initial, 2 * cap].
    uint64_t cap = 2 * budget.memory_page_cap;
    m.maximum = std::min<uint64_t>(m.initial + 4 + rng.below(budget.memory_page_cap + 1), cap);
    if (*m.maximum < m.initial) m.maximum = m.initial;
  }
  const Instruction& instr = ctx.append(Opcode::CreateWasmMemory, {}, m);
  return instr.outputs[0];
}

std::optional<Variable> gen_wasm_table(Rng& rng, GenerationContext& ctx,
                                       const GenerationBudget& budget) {
  if (!ctx.builtin_intact("WebAssembly")) return std::nullopt;
  WasmTableType t;
  // The JS API limits constructible element types to funcref and externref.
  t.element_type = rng.chance(0.5) ? ValueType::funcref() : ValueType::externref();
  t.initial = rng.below(budget.table_size_cap + 1);
  if (rng.chance(0.5)) t.initial = rng.below(8);  // small tables dominate
  if (rng.chance(0.5)) t.maximum = t.initial + rng.below(budget.table_size_cap + 1);
  t.addrtype = ctx.profile().memory64 && rng.chance(0.1) ? AddrType::Addr64 : AddrType::Addr32;

  std::vector<Variable> inputs;
  auto init = pick_initializer(rng, ctx, t.element_type);
  if (init) inputs.push_back(*init);
  const Instruction& instr = ctx.append(Opcode::CreateWasmTable, std::move(inputs), t);
  return instr.outputs[0];
}

std::optional<Variable> gen_wasm_global(Rng& rng, GenerationContext& ctx) {
  if (!ctx.builtin_intact("WebAssembly")) return std::nullopt;
  WasmGlobalType g;
  g.content_type = basic_value_types()[rng.below(basic_value_types().size())];
  g.mutability = rng.chance(0.5);

  std::vector<Variable> inputs;
  auto init = pick_initializer(rng, ctx, g.content_type);
  if (init) inputs.push_back(*init);
  const Instruction& instr = ctx.append(Opcode::CreateWasmGlobal, std::move(inputs), g);
  return instr.outputs[0];
}

std::optional<Variable> gen_wasm_tag(Rng& rng, GenerationContext& ctx) {
  if (!ctx.profile().exceptions) return std::nullopt;
  if (!ctx.builtin_intact("WebAssembly")) return std::nullopt;
  WasmTagType t;
  size_t params = rng.below(5);
  for (size_t i = 0; i < params; ++i)
    t.parameters.push_back(basic_value_types()[rng.below(basic_value_types().size())]);
  const Instruction& instr = ctx.append(Opcode::CreateWasmTag, {}, t);
  return instr.outputs[0];
}

// --- module shape generation ---

namespace {

// Copies the definition subgraph behind `v` from the session record into the
// shape's local typeDefs, returning the rewritten type.
ValueType import_value_into_shape(const ValueType& v, const WasmTypeRecord& record,
                                  TypeDefs& defs, std::map<uint32_t, uint32_t>& id_map) {
  if (!v.is_ref() || v.ref.heap.is_abstract) return v;
  uint32_t record_id = v.ref.heap.index;
  auto it = id_map.find(record_id);
  uint32_t local;
  if (it != id_map.end()) {
    local = it->second;
  } else {
    local = static_cast<uint32_t>(defs.size());
    id_map.emplace(record_id, local);
    defs.emplace_back();  // placeholder while the subgraph is copied
    CompositeDef copy = record.defs().at(record_id);
    auto rewrite_value = [&](ValueType x) {
      return import_value_into_shape(x, record, defs, id_map);
    };
    if (auto* s = std::get_if<StructShape>(&copy.shape)) {
      for (auto& f : s->fields)
        if (f.storage.packed == StorageType::Packed::None)
          f.storage.value = rewrite_value(f.storage.value);
    } else if (auto* a = std::get_if<ArrayShape>(&copy.shape)) {
      if (a->element.storage.packed == StorageType::Packed::None)
        a->element.storage.value = rewrite_value(a->element.storage.value);
    } else {
      auto& f = std::get<FuncShape>(copy.shape);
      for (auto& p : f.params) p = rewrite_value(p);
      for (auto& r : f.results) r = rewrite_value(r);
    }
    defs[local] = std::move(copy);
  }
  ValueType out = v;
  out.ref.heap.index = local;
  return out;
}

WasmExternType import_extern_into_shape(const WasmExternType& t, const WasmTypeRecord& record,
                                        TypeDefs& defs) {
  std::map<uint32_t, uint32_t> id_map;
  WasmExternType out = t;
  switch (t.kind()) {
    case ExternKind::Memory:
      break;
    case ExternKind::Table: {
      auto tt = t.table();
      tt.element_type = import_value_into_shape(tt.element_type, record, defs, id_map);
      out.type = tt;
      break;
    }
    case ExternKind::Global: {
      auto g = t.global();
      g.content_type = import_value_into_shape(g.content_type, record, defs, id_map);
      out.type = g;
      break;
    }
    case ExternKind::Function: {
      auto f = t.function();
      for (auto& p : f.parameters) p = import_value_into_shape(p, record, defs, id_map);
      for (auto& r : f.results) r = import_value_into_shape(r, record, defs, id_map);
      out.type = f;
      break;
    }
    case ExternKind::Tag: {
      auto g = t.tag();
      for (auto& p : g.parameters) p = import_value_into_shape(p, record, defs, id_map);
      out.type = g;
      break;
    }
  }
  return out;
}

class ShapeGenerator {
 public:
  ShapeGenerator(Rng& rng, GenerationContext& ctx, const GenerationBudget& budget)
      : rng_(rng), ctx_(ctx), budget_(budget), profile_(ctx.profile()) {}

  ModuleShape generate() {
    generate_type_defs();
    generate_imports();
    auto candidates = generate_export_candidates();
    select_exports(std::move(candidates));
    return std::move(shape_);
  }

 private:
  // Nullable reference types usable in module-internal and export positions.
  std::vector<ValueType> rich_value_types(bool defaultable_only) {
    std::vector<ValueType> types = basic_value_types();
    if (profile_.gc) {
      types.push_back(ValueType::anyref());
      types.push_back(ValueType::ref_abstract(AbstractHeap::Eq, true));
      types.push_back(ValueType::i31ref());
      types.push_back(ValueType::ref_abstract(AbstractHeap::Struct, true));
      types.push_back(ValueType::ref_abstract(AbstractHeap::Array, true));
      types.push_back(ValueType::ref_abstract(AbstractHeap::None, true));
      for (uint32_t i = 0; i < shape_.type_defs.size(); ++i)
        types.push_back(ValueType::ref_type(HeapType::concrete(i), true));
      if (!defaultable_only) {
        types.push_back(ValueType::ref_abstract(AbstractHeap::I31, false));
        types.push_back(ValueType::ref_abstract(AbstractHeap::Extern, false));
        types.push_back(ValueType::ref_abstract(AbstractHeap::Any, false));
      }
    }
    return types;
  }

  ValueType pick_type(const std::vector<ValueType>& from) { return from[rng_.below(from.size())]; }

  void generate_type_defs() {
    if (!profile_.gc) return;
    uint32_t n = static_cast<uint32_t>(rng_.below(budget_.max_type_defs + 1));
    for (uint32_t i = 0; i < n; ++i) {
      // Fields may reference any slot in [0, n), so recursive and mutually
      // recursive groups arise naturally.
      auto ref_or_basic = [&]() -> ValueType {
        double roll = rng_.unit();
        if (roll < 0.35 && n > 0)
          return ValueType::ref_type(HeapType::concrete(static_cast<uint32_t>(rng_.below(n))),
                                     true);
        if (roll < 0.5) return ValueType::ref_abstract(AbstractHeap::Eq, true);
        static const std::vector<ValueType> numeric = {ValueType::i32(), ValueType::i64(),
                                                       ValueType::f32(), ValueType::f64()};
        return numeric[rng_.below(numeric.size())];
      };
      auto field = [&]() {
        FieldType f;
        double roll = rng_.unit();
        if (roll < 0.15) f.storage = StorageType::i8();
        else if (roll < 0.25) f.storage = StorageType::i16();
        else f.storage = StorageType::of(ref_or_basic());
        f.mutable_ = rng_.chance(0.5);
        return f;
      };
      CompositeDef def;
      double kind = rng_.unit();
      if (kind < 0.4) {
        StructShape s;
        size_t fields = 1 + rng_.below(3);
        for (size_t j = 0; j < fields; ++j) s.fields.push_back(field());
        def.shape = std::move(s);
      } else if (kind < 0.7) {
        def.shape = ArrayShape{field()};
      } else {
        FuncShape f;
        size_t params = rng_.below(4);
        for (size_t j = 0; j < params; ++j) f.params.push_back(ref_or_basic());
        size_t results = rng_.below(3);
        for (size_t j = 0; j < results; ++j) f.results.push_back(ref_or_basic());
        def.shape = std::move(f);
      }
      shape_.type_defs.push_back(std::move(def));
    }
  }

  std::vector<ExternKind> importable_kinds() {
    std::vector<ExternKind> kinds = {ExternKind::Memory, ExternKind::Table, ExternKind::Global,
                                     ExternKind::Function};
    if (profile_.exceptions) kinds.push_back(ExternKind::Tag);
    return kinds;
  }

  WasmMemoryType random_memory_type() {
    WasmMemoryType m;
    m.shared = rng_.chance(0.2);
    m.addrtype = profile_.memory64 && rng_.chance(0.2) ? AddrType::Addr64 : AddrType::Addr32;
    m.initial = rng_.below(budget_.memory_page_cap + 1);
    if (m.shared || rng_.chance(0.5))
      m.maximum = m.initial + rng_.below(budget_.memory_page_cap + 1);
    return m;
  }

  WasmTableType random_table_type(bool unrestricted) {
    WasmTableType t;
    if (unrestricted && profile_.gc) {
      std::vector<ValueType> elems = {ValueType::funcref(), ValueType::externref(),
                                      ValueType::anyref(), ValueType::i31ref(),
                                      ValueType::ref_abstract(AbstractHeap::Struct, true)};
      for (uint32_t i = 0; i < shape_.type_defs.size(); ++i)
        elems.push_back(ValueType::ref_type(HeapType::concrete(i), true));
      t.element_type = pick_type(elems);
    } else {
      t.element_type = rng_.chance(0.5) ? ValueType::funcref() : ValueType::externref();
    }
    t.initial = rng_.below(budget_.table_size_cap + 1);
    if (rng_.chance(0.5)) t.maximum = t.initial + rng_.below(budget_.table_size_cap + 1);
    return t;
  }

  WasmGlobalType random_global_type(bool unrestricted) {
    WasmGlobalType g;
    g.content_type =
        unrestricted ? pick_type(rich_value_types(true)) : pick_type(basic_value_types());
    g.mutability = rng_.chance(0.5);
    return g;
  }

  WasmTagType random_tag_type(bool unrestricted) {
    WasmTagType t;
    size_t n = rng_.below(4);
    const auto pool = unrestricted ? rich_value_types(false) : basic_value_types();
    for (size_t i = 0; i < n; ++i) t.parameters.push_back(pick_type(pool));
    return t;
  }

  WasmFunctionType random_function_type(bool unrestricted) {
    WasmFunctionType f;
    size_t params = rng_.below(4);
    const auto param_pool = unrestricted ? rich_value_types(false) : basic_value_types();
    for (size_t i = 0; i < params; ++i) f.parameters.push_back(pick_type(param_pool));
    // Results must be stub-defaultable.
    size_t results = rng_.below(unrestricted ? 3 : 2);
    const auto result_pool = rich_value_types(true);
    for (size_t i = 0; i < results; ++i) f.results.push_back(pick_type(result_pool));
    return f;
  }

  void generate_imports() {
    uint32_t n = static_cast<uint32_t>(rng_.below(budget_.max_imports + 1));
    auto kinds = importable_kinds();
    for (uint32_t i = 0; i < n; ++i) {
      ExternKind kind = kinds[rng_.below(kinds.size())];
      if (kind == ExternKind::Memory && !profile_.multi_memory && memory_count_ >= 1) continue;
      WasmExternType type;
      bool adopted = false;
      if (rng_.chance(0.7)) adopted = adopt_from_context(kind, &type);
      if (!adopted) {
        switch (kind) {
          case ExternKind::Memory: type.type = random_memory_type(); break;
          case ExternKind::Table: type.type = random_table_type(false); break;
          case ExternKind::Global: type.type = random_global_type(false); break;
          case ExternKind::Tag: type.type = random_tag_type(false); break;
          case ExternKind::Function: type.type = random_function_type(false); break;
        }
      }
      if (mentions_excluded_type(type, shape_.type_defs)) continue;
      if (kind == ExternKind::Memory) ++memory_count_;
      shape_.imports.push_back({"m" + std::to_string(shape_.imports.size()),
                                "f" + std::to_string(shape_.imports.size()), std::move(type)});
    }
  }

  // Preferentially adopts a type already held by a context variable, which
  // guarantees at least one satisfying candidate at instantiation time.
  bool adopt_from_context(ExternKind kind, WasmExternType* out) {
    const WasmTypeRecord& record = ctx_.record();
    auto adopt_object = [&](TypeCategory cat) -> bool {
      auto vars = ctx_.query_wasm_object(cat);
      if (vars.empty()) return false;
      Variable v = vars[rng_.below(vars.size())];
      const auto& set = ctx_.annotation(v).wasm.of(cat);
      uint32_t idx = set[rng_.below(set.size())];
      WasmExternType t;
      switch (cat) {
        case TypeCategory::Memory: t.type = record.memories()[idx]; break;
        case TypeCategory::Table: t.type = record.tables()[idx]; break;
        case TypeCategory::Global: t.type = record.globals()[idx]; break;
        case TypeCategory::Tag: t.type = record.tags()[idx]; break;
        case TypeCategory::Function: t.type = record.functions()[idx]; break;
        default: return false;
      }
      *out = import_extern_into_shape(t, record, shape_.type_defs);
      return true;
    };
    switch (kind) {
      case ExternKind::Memory: return adopt_object(TypeCategory::Memory);
      case ExternKind::Table: return adopt_object(TypeCategory::Table);
      case ExternKind::Tag: return adopt_object(TypeCategory::Tag);
      case ExternKind::Global: {
        if (rng_.chance(0.5) && adopt_object(TypeCategory::Global)) return true;
        // Any value-typed variable can stand in for an immutable global of
        // one of its value types.
        auto vars = ctx_.visible_variables();
        if (vars.empty()) return false;
        Variable v = vars[rng_.below(vars.size())];
        const auto& values = ctx_.annotation(v).wasm.of(TypeCategory::Value);
        std::vector<ValueType> usable;
        for (uint32_t idx : values) {
          const ValueType& t = record.values()[idx];
          if (is_excluded_from_interaction(t)) continue;
          if (t.is_ref() && !profile_.gc) {
            // Pre-GC engines only know nullable funcref/externref.
            if (!t.ref.nullable || !t.ref.heap.is_abstract) continue;
            if (t.ref.heap.abstract_kind != AbstractHeap::Func &&
                t.ref.heap.abstract_kind != AbstractHeap::Extern)
              continue;
          }
          usable.push_back(t);
        }
        if (usable.empty()) return false;
        WasmExternType t;
        t.type = WasmGlobalType{usable[rng_.below(usable.size())], false};
        *out = import_extern_into_shape(t, record, shape_.type_defs);
        return true;
      }
      case ExternKind::Function: {
        if (rng_.chance(0.5) && adopt_object(TypeCategory::Function)) return true;
        // Any JS function casts to a Wasm function with an arbitrary
        // signature.
        auto fns = ctx_.query_js(JSType::function());
        if (fns.empty()) return false;
        WasmExternType t;
        WasmFunctionType sig;
        size_t params = rng_.below(4);
        for (size_t i = 0; i < params; ++i)
          sig.parameters.push_back(basic_value_types()[rng_.below(basic_value_types().size())]);
        if (rng_.chance(0.5))
          sig.results.push_back(basic_value_types()[rng_.below(basic_value_types().size())]);
        t.type = std::move(sig);
        *out = t;
        return true;
      }
    }
    return false;
  }

  std::vector<WasmExternType> generate_export_candidates() {
    std::vector<WasmExternType> candidates;
    size_t n = rng_.below(budget_.max_exports + 3);
    auto kinds = importable_kinds();
    for (size_t i = 0; i < n; ++i) {
      ExternKind kind = kinds[rng_.below(kinds.size())];
      WasmExternType t;
      switch (kind) {
        case ExternKind::Memory: t.type = random_memory_type(); break;
        case ExternKind::Table: t.type = random_table_type(true); break;
        case ExternKind::Global: t.type = random_global_type(true); break;
        case ExternKind::Tag: t.type = random_tag_type(true); break;
        case ExternKind::Function: t.type = random_function_type(true); break;
      }
      candidates.push_back(std::move(t));
    }
    // Re-exportable import types are candidates too.
    for (const auto& imp : shape_.imports) {
      if (rng_.chance(0.25)) candidates.push_back(imp.type);
    }
    return candidates;
  }

  void select_exports(std::vector<WasmExternType> candidates) {
    // Fisher-Yates with the session rng keeps selection deterministic.
    for (size_t i = candidates.size(); i > 1; --i) {
      size_t j = rng_.below(i);
      std::swap(candidates[i - 1], candidates[j]);
    }
    size_t take = rng_.below(std::min<size_t>(candidates.size(), budget_.max_exports) + 1);
    for (size_t i = 0; i < candidates.size() && shape_.exports.size() < take; ++i) {
      const WasmExternType& t = candidates[i];
      if (mentions_excluded_type(t, shape_.type_defs)) continue;
      if (t.kind() == ExternKind::Memory && !profile_.multi_memory && memory_count_ >= 1)
        continue;
      if (t.kind() == ExternKind::Tag && !profile_.exceptions) continue;
      if (t.kind() == ExternKind::Memory) ++memory_count_;
      shape_.exports.push_back({"e" + std::to_string(shape_.exports.size()), t});
    }
  }

  Rng& rng_;
  GenerationContext& ctx_;
  const GenerationBudget& budget_;
  const EngineProfile& profile_;
  ModuleShape shape_;
  int memory_count_ = 0;
};

}  // namespace

ModuleShape gen_module_shape(Rng& rng, GenerationContext& ctx, const GenerationBudget& budget) {
  return ShapeGenerator(rng, ctx, budget).generate();
}

// --- instance generation ---

namespace {

std::vector<Variable> import_satisfiers(GenerationContext& ctx, const WasmImport& imp,
                                        const TypeDefs& shape_defs) {
  WasmTypeRecord& record = ctx.record();
  std::string want = canonical_key(ctx.record().canonicalize(imp.type, shape_defs),
                                   ctx.record().defs());
  auto by_key = [&](TypeCategory cat) {
    return ctx.query_wasm_object(
        cat, [&](uint32_t idx) { return record.key_of(cat, idx) == want; });
  };
  switch (imp.type.kind()) {
    case ExternKind::Memory: return by_key(TypeCategory::Memory);
    case ExternKind::Table: return by_key(TypeCategory::Table);
    case ExternKind::Tag: return by_key(TypeCategory::Tag);
    case ExternKind::Global: {
      std::vector<Variable> out = by_key(TypeCategory::Global);
      if (!imp.type.global().mutability) {
        // Immutable global imports accept any variable holding a matching
        // value type; func-reference contents additionally need a genuine
        // Wasm function (or null) to coerce.
        ValueType content = record.canonicalize(imp.type.global().content_type, shape_defs);
        bool func_ref = content.is_ref() && content.ref.heap.is_abstract &&
                        content.ref.heap.abstract_kind == AbstractHeap::Func;
        for (Variable v : ctx.query_wasm_value(content)) {
          if (func_ref) {
            const auto& ann = ctx.annotation(v);
            if (ann.wasm.of(TypeCategory::Function).empty() &&
                ann.js_type.may_not_be_nullish())
              continue;
          }
          if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
        }
      }
      return out;
    }
    case ExternKind::Function: {
      std::vector<Variable> out = by_key(TypeCategory::Function);
      for (Variable v : ctx.query_js(JSType::function())) {
        // The cast needs a genuine callable; anything-typed variables only
        // nominally carry the function flag.
        if (ctx.annotation(v).js_type.is_anything()) continue;
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
      }
      return out;
    }
  }
  return {};
}

}  // namespace

std::optional<std::vector<Variable>> gen_instance_and_exports(Rng& rng, GenerationContext& ctx,
                                                              const GenerationBudget& budget,
                                                              ModuleSynthesizer& synthesizer) {
  if (!ctx.builtin_intact("WebAssembly")) return std::nullopt;
  ModuleShape shape = gen_module_shape(rng, ctx, budget);

  // Unsatisfiable imports are dropped before synthesis rather than failing
  // at instantiation.
  ModuleShape pruned;
  pruned.type_defs = shape.type_defs;
  std::vector<std::vector<Variable>> satisfier_sets;
  for (const auto& imp : shape.imports) {
    auto candidates = import_satisfiers(ctx, imp, shape.type_defs);
    if (candidates.empty()) continue;
    pruned.imports.push_back(imp);
    satisfier_sets.push_back(std::move(candidates));
  }
  pruned.exports = shape.exports;

  Bytes bytes;
  for (int attempt = 0;; ++attempt) {
    try {
      bytes = synthesizer.synthesize(pruned, rng.next());
      if (!shapes_equal(parse_shape(bytes), canonicalize_shape(pruned)))
        throw SynthesisError("synthesizer output does not realize the requested shape");
      break;
    } catch (const SynthesisError&) {
      if (attempt >= 2) return std::nullopt;
      // Retry with a smaller shape.
      pruned.exports.resize(pruned.exports.size() / 2);
    } catch (const MalformedModule&) {
      if (attempt >= 2) return std::nullopt;
      pruned.exports.resize(pruned.exports.size() / 2);
    }
  }

  std::vector<Variable> defined;
  Variable module_var =
      ctx.append(Opcode::CompileWasmModule, {}, WasmModulePayload{bytes, pruned}).outputs[0];
  defined.push_back(module_var);

  std::vector<Variable> inst_inputs = {module_var};
  for (const auto& candidates : satisfier_sets)
    inst_inputs.push_back(candidates[rng.below(candidates.size())]);
  Variable instance_var =
      ctx.append(Opcode::InstantiateWasmModule, std::move(inst_inputs)).outputs[0];
  defined.push_back(instance_var);

  for (const auto& exp : pruned.exports) {
    defined.push_back(ctx.append(Opcode::WasmInstanceExport, {instance_var},
                                 WasmExportPayload{exp.field, exp.type, pruned.type_defs})
                          .outputs[0]);
  }
  return defined;
}

}  // namespace weaver
