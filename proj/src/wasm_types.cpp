// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#include "weaver/wasm_types.hpp"

#include <algorithm>
#include <cassert>
#include <set>

namespace weaver {

const char* abstract_heap_name(AbstractHeap h) {
  switch (h) {
    case AbstractHeap::Any: return "any";
    case AbstractHeap::Eq: return "eq";
    case AbstractHeap::I31: return "i31";
    case AbstractHeap::Struct: return "struct";
    case AbstractHeap::Array: return "array";
    case AbstractHeap::Func: return "func";
    case AbstractHeap::Extern: return "extern";
    case AbstractHeap::Exn: return "exn";
    case AbstractHeap::None: return "none";
    case AbstractHeap::NoFunc: return "nofunc";
    case AbstractHeap::NoExtern: return "noextern";
    case AbstractHeap::NoExn: return "noexn";
  }
  return "?";
}

const char* extern_kind_name(ExternKind k) {
  switch (k) {
    case ExternKind::Function: return "function";
    case ExternKind::Table: return "table";
    case ExternKind::Memory: return "memory";
    case ExternKind::Global: return "global";
    case ExternKind::Tag: return "tag";
  }
  return "?";
}

const char* type_category_name(TypeCategory c) {
  switch (c) {
    case TypeCategory::Value: return "value";
    case TypeCategory::Memory: return "memory";
    case TypeCategory::Table: return "table";
    case TypeCategory::Global: return "global";
    case TypeCategory::Function: return "function";
    case TypeCategory::Tag: return "tag";
    case TypeCategory::Module: return "module";
    case TypeCategory::Instance: return "instance";
  }
  return "?";
}

namespace {

void check_index(uint32_t index, const TypeDefs& defs) {
  if (index >= defs.size()) throw UnresolvedTypeIndex(index);
}

// Bisimulation classes over a definition graph (Moore-style partition
// refinement). Two definitions land in the same class iff their unfoldings
// are equal regular trees, so the resulting class keys are invariant under
// renumbering and under merging of duplicate definitions.
std::vector<uint32_t> bisim_classes(const TypeDefs& defs) {
  const size_t n = defs.size();
  std::vector<uint32_t> cls(n, 0);

  auto signature = [&](const CompositeDef& def) {
    std::string sig;
    auto add_value = [&](const ValueType& v) {
      switch (v.kind) {
        case ValueType::Kind::Num:
          sig += "nifd"[static_cast<int>(v.num)];
          break;
        case ValueType::Kind::V128:
          sig += 'v';
          break;
        case ValueType::Kind::Ref:
          sig += v.ref.nullable ? 'R' : 'r';
          if (v.ref.heap.is_abstract) {
            sig += abstract_heap_name(v.ref.heap.abstract_kind);
          } else {
            check_index(v.ref.heap.index, defs);
            sig += '@';
            sig += std::to_string(cls[v.ref.heap.index]);
          }
          break;
      }
      sig += ';';
    };
    auto add_field = [&](const FieldType& f) {
      sig += f.mutable_ ? 'm' : 'c';
      switch (f.storage.packed) {
        case StorageType::Packed::I8: sig += "p8;"; break;
        case StorageType::Packed::I16: sig += "p16;"; break;
        case StorageType::Packed::None: add_value(f.storage.value); break;
      }
    };
    if (const auto* s = std::get_if<StructShape>(&def.shape)) {
      sig += "s(";
      for (const auto& f : s->fields) add_field(f);
      sig += ')';
    } else if (const auto* a = std::get_if<ArrayShape>(&def.shape)) {
      sig += "a(";
      add_field(a->element);
      sig += ')';
    } else {
      const auto& f = std::get<FuncShape>(def.shape);
      sig += "f(";
      for (const auto& p : f.params) add_value(p);
      sig += "->";
      for (const auto& r : f.results) add_value(r);
      sig += ')';
    }
    return sig;
  };

  for (size_t round = 0; round <= n; ++round) {
    std::map<std::string, uint32_t> groups;
    std::vector<uint32_t> next(n);
    for (size_t i = 0; i < n; ++i) {
      auto sig = signature(defs[i]);
      auto [it, _] = groups.emplace(sig, static_cast<uint32_t>(groups.size()));
      next[i] = it->second;
    }
    if (next == cls) break;
    cls = std::move(next);
  }
  return cls;
}

// Key of one bisimulation class: the unfolding of its regular tree, with a
// back reference emitted whenever a class already on the expansion path
// recurs.
struct KeyBuilder {
  const TypeDefs& defs;
  const std::vector<uint32_t>& cls;
  std::vector<uint32_t> rep;  // class -> representative def index
  std::vector<uint32_t> path;

  KeyBuilder(const TypeDefs& d, const std::vector<uint32_t>& c) : defs(d), cls(c) {
    uint32_t count = 0;
    for (auto x : c) count = std::max(count, x + 1);
    rep.assign(count, UINT32_MAX);
    for (uint32_t i = 0; i < c.size(); ++i)
      if (rep[c[i]] == UINT32_MAX) rep[c[i]] = i;
  }

  std::string value(const ValueType& v) {
    switch (v.kind) {
      case ValueType::Kind::Num:
        switch (v.num) {
          case NumKind::I32: return "i32";
          case NumKind::I64: return "i64";
          case NumKind::F32: return "f32";
          case NumKind::F64: return "f64";
        }
        return "?";
      case ValueType::Kind::V128:
        return "v128";
      case ValueType::Kind::Ref: {
        std::string s = v.ref.nullable ? "(rn " : "(r ";
        s += heap(v.ref.heap);
        s += ')';
        return s;
      }
    }
    return "?";
  }

  std::string heap(const HeapType& h) {
    if (h.is_abstract) return abstract_heap_name(h.abstract_kind);
    check_index(h.index, defs);
    return def_key(cls[h.index]);
  }

  std::string field(const FieldType& f) {
    std::string s = f.mutable_ ? "m:" : "c:";
    switch (f.storage.packed) {
      case StorageType::Packed::I8: return s + "i8";
      case StorageType::Packed::I16: return s + "i16";
      case StorageType::Packed::None: return s + value(f.storage.value);
    }
    return s;
  }

  std::string def_key(uint32_t c) {
    for (size_t d = 0; d < path.size(); ++d) {
      if (path[path.size() - 1 - d] == c) return "mu" + std::to_string(d);
    }
    path.push_back(c);
    const CompositeDef& def = defs[rep[c]];
    std::string s;
    if (const auto* st = std::get_if<StructShape>(&def.shape)) {
      s = "struct(";
      for (size_t i = 0; i < st->fields.size(); ++i) {
        if (i) s += ',';
        s += field(st->fields[i]);
      }
      s += ')';
    } else if (const auto* a = std::get_if<ArrayShape>(&def.shape)) {
      s = "array(" + field(a->element) + ')';
    } else {
      const auto& f = std::get<FuncShape>(def.shape);
      s = "func(";
      for (size_t i = 0; i < f.params.size(); ++i) {
        if (i) s += ',';
        s += value(f.params[i]);
      }
      s += "->";
      for (size_t i = 0; i < f.results.size(); ++i) {
        if (i) s += ',';
        s += value(f.results[i]);
      }
      s += ')';
    }
    path.pop_back();
    return s;
  }
};

std::string list_key(const std::vector<ValueType>& ts, const TypeDefs& defs) {
  std::string s;
  for (size_t i = 0; i < ts.size(); ++i) {
    if (i) s += ',';
    s += canonical_key(ts[i], defs);
  }
  return s;
}

std::string limits_key(uint64_t initial, const std::optional<uint64_t>& maximum, AddrType addr,
                       bool shared) {
  std::string s = std::to_string(initial) + ",";
  s += maximum ? std::to_string(*maximum) : "none";
  s += addr == AddrType::Addr64 ? ",a64" : ",a32";
  s += shared ? ",shared" : ",unshared";
  return s;
}

}  // namespace

std::string canonical_key(const ValueType& t, const TypeDefs& defs) {
  auto cls = bisim_classes(defs);
  KeyBuilder kb(defs, cls);
  return kb.value(t);
}

std::string canonical_key(const CompositeDef& def, const TypeDefs& defs) {
  // The def must be a member of `defs` for cycles to resolve; accept both a
  // member and a detached copy of one.
  auto cls = bisim_classes(defs);
  for (uint32_t i = 0; i < defs.size(); ++i) {
    if (defs[i] == def) {
      KeyBuilder kb(defs, cls);
      return kb.def_key(cls[i]);
    }
  }
  TypeDefs extended = defs;
  extended.push_back(def);
  auto cls2 = bisim_classes(extended);
  KeyBuilder kb(extended, cls2);
  return kb.def_key(cls2[extended.size() - 1]);
}

std::string canonical_key(const WasmMemoryType& t) {
  return "memory(" + limits_key(t.initial, t.maximum, t.addrtype, t.shared) + ')';
}

std::string canonical_key(const WasmTableType& t, const TypeDefs& defs) {
  return "table(" + canonical_key(t.element_type, defs) + ';' +
         limits_key(t.initial, t.maximum, t.addrtype, t.shared) + ')';
}

std::string canonical_key(const WasmGlobalType& t, const TypeDefs& defs) {
  return std::string("global(") + (t.mutability ? "mut;" : "const;") +
         canonical_key(t.content_type, defs) + ')';
}

std::string canonical_key(const WasmFunctionType& t, const TypeDefs& defs) {
  return "function(" + list_key(t.parameters, defs) + "->" + list_key(t.results, defs) + ')';
}

std::string canonical_key(const WasmTagType& t, const TypeDefs& defs) {
  return "tag(" + list_key(t.parameters, defs) + ')';
}

std::string canonical_key(const WasmExternType& t, const TypeDefs& defs) {
  switch (t.kind()) {
    case ExternKind::Function: return canonical_key(t.function(), defs);
    case ExternKind::Table: return canonical_key(t.table(), defs);
    case ExternKind::Memory: return canonical_key(t.memory());
    case ExternKind::Global: return canonical_key(t.global(), defs);
    case ExternKind::Tag: return canonical_key(t.tag(), defs);
  }
  return "?";
}

std::string canonical_key(const WasmModuleType& t) {
  std::string s = "module(imports[";
  for (size_t i = 0; i < t.imports.size(); ++i) {
    if (i) s += ',';
    s += '(' + t.imports[i].module + ':' + t.imports[i].field + ':' +
         canonical_key(t.imports[i].type, t.type_defs) + ')';
  }
  s += "],exports[";
  for (size_t i = 0; i < t.exports.size(); ++i) {
    if (i) s += ',';
    s += '(' + t.exports[i].field + ':' + canonical_key(t.exports[i].type, t.type_defs) + ')';
  }
  s += "])";
  return s;
}

std::string canonical_key(const WasmInstanceType& t) {
  return "instance(" + canonical_key(t.module) + ')';
}

// --- WasmTypeRecord ---

std::vector<uint32_t> WasmTypeRecord::intern_defs(const TypeDefs& source_defs) {
  const size_t n = source_defs.size();
  std::vector<uint32_t> mapping(n, 0);
  if (n == 0) return mapping;
  if (&source_defs == &defs_) {
    // Record definitions are already canonical.
    for (size_t i = 0; i < n; ++i) mapping[i] = static_cast<uint32_t>(i);
    return mapping;
  }

  auto cls = bisim_classes(source_defs);
  KeyBuilder kb(source_defs, cls);

  uint32_t class_count = 0;
  for (auto c : cls) class_count = std::max(class_count, c + 1);

  std::vector<std::string> class_key(class_count);
  std::vector<uint32_t> class_id(class_count, UINT32_MAX);
  std::vector<bool> is_new(class_count, false);
  for (uint32_t c = 0; c < class_count; ++c) {
    class_key[c] = kb.def_key(c);
    auto it = def_index_.find(class_key[c]);
    if (it != def_index_.end()) {
      class_id[c] = it->second;
    } else {
      class_id[c] = static_cast<uint32_t>(defs_.size());
      defs_.emplace_back();  // placeholder, filled below
      def_index_.emplace(class_key[c], class_id[c]);
      is_new[c] = true;
    }
  }

  // Fill in new definitions with edges rewritten to record ids.
  auto rewrite_value = [&](const ValueType& v) {
    if (v.is_ref() && !v.ref.heap.is_abstract) {
      check_index(v.ref.heap.index, source_defs);
      ValueType out = v;
      out.ref.heap.index = class_id[cls[v.ref.heap.index]];
      return out;
    }
    return v;
  };
  auto rewrite_field = [&](const FieldType& f) {
    FieldType out = f;
    if (f.storage.packed == StorageType::Packed::None)
      out.storage.value = rewrite_value(f.storage.value);
    return out;
  };
  for (uint32_t c = 0; c < class_count; ++c) {
    if (!is_new[c]) continue;
    const CompositeDef& src = source_defs[kb.rep[c]];
    CompositeDef out;
    if (const auto* s = std::get_if<StructShape>(&src.shape)) {
      StructShape ss;
      for (const auto& f : s->fields) ss.fields.push_back(rewrite_field(f));
      out.shape = std::move(ss);
    } else if (const auto* a = std::get_if<ArrayShape>(&src.shape)) {
      out.shape = ArrayShape{rewrite_field(a->element)};
    } else {
      const auto& f = std::get<FuncShape>(src.shape);
      FuncShape fs;
      for (const auto& p : f.params) fs.params.push_back(rewrite_value(p));
      for (const auto& r : f.results) fs.results.push_back(rewrite_value(r));
      out.shape = std::move(fs);
    }
    defs_[class_id[c]] = std::move(out);
  }

  for (size_t i = 0; i < n; ++i) mapping[i] = class_id[cls[i]];
  return mapping;
}

ValueType WasmTypeRecord::canonicalize(const ValueType& t, const TypeDefs& source_defs) {
  if (!t.is_ref() || t.ref.heap.is_abstract) return t;
  if (source_defs.empty() || &source_defs == &defs_) {
    // No source context: the reference is already record-relative.
    check_index(t.ref.heap.index, defs_);
    return t;
  }
  auto mapping = intern_defs(source_defs);
  check_index(t.ref.heap.index, source_defs);
  ValueType out = t;
  out.ref.heap.index = mapping[t.ref.heap.index];
  return out;
}

WasmMemoryType WasmTypeRecord::canonicalize(const WasmMemoryType& t, const TypeDefs&) {
  return t;
}

WasmTableType WasmTypeRecord::canonicalize(const WasmTableType& t, const TypeDefs& source_defs) {
  WasmTableType out = t;
  out.element_type = canonicalize(t.element_type, source_defs);
  return out;
}

WasmGlobalType WasmTypeRecord::canonicalize(const WasmGlobalType& t, const TypeDefs& source_defs) {
  WasmGlobalType out = t;
  out.content_type = canonicalize(t.content_type, source_defs);
  return out;
}

WasmFunctionType WasmTypeRecord::canonicalize(const WasmFunctionType& t,
                                              const TypeDefs& source_defs) {
  WasmFunctionType out;
  for (const auto& p : t.parameters) out.parameters.push_back(canonicalize(p, source_defs));
  for (const auto& r : t.results) out.results.push_back(canonicalize(r, source_defs));
  return out;
}

WasmTagType WasmTypeRecord::canonicalize(const WasmTagType& t, const TypeDefs& source_defs) {
  WasmTagType out;
  for (const auto& p : t.parameters) out.parameters.push_back(canonicalize(p, source_defs));
  return out;
}

WasmExternType WasmTypeRecord::canonicalize(const WasmExternType& t, const TypeDefs& source_defs) {
  WasmExternType out;
  switch (t.kind()) {
    case ExternKind::Function: out.type = canonicalize(t.function(), source_defs); break;
    case ExternKind::Table: out.type = canonicalize(t.table(), source_defs); break;
    case ExternKind::Memory: out.type = canonicalize(t.memory(), source_defs); break;
    case ExternKind::Global: out.type = canonicalize(t.global(), source_defs); break;
    case ExternKind::Tag: out.type = canonicalize(t.tag(), source_defs); break;
  }
  return out;
}

WasmModuleType WasmTypeRecord::canonicalize(const WasmModuleType& t) {
  WasmModuleType out;
  // Definitions are absorbed into the record; imports and exports reference
  // record ids afterwards.
  for (const auto& imp : t.imports)
    out.imports.push_back({imp.module, imp.field, canonicalize(imp.type, t.type_defs)});
  for (const auto& exp : t.exports)
    out.exports.push_back({exp.field, canonicalize(exp.type, t.type_defs)});
  return out;
}

WasmInstanceType WasmTypeRecord::canonicalize(const WasmInstanceType& t) {
  return {canonicalize(t.module), t.instantiated};
}

template <typename T>
uint32_t WasmTypeRecord::intern_in(std::vector<T>& list, std::map<std::string, uint32_t>& index,
                                   const T& canonical, const std::string& key) {
  auto it = index.find(key);
  if (it != index.end()) return it->second;
  uint32_t id = static_cast<uint32_t>(list.size());
  list.push_back(canonical);
  index.emplace(key, id);
  return id;
}

uint32_t WasmTypeRecord::intern_value(const ValueType& t, const TypeDefs& source_defs) {
  ValueType c = canonicalize(t, source_defs);
  return intern_in(values_, value_index_, c, canonical_key(c, defs_));
}

uint32_t WasmTypeRecord::intern_memory(const WasmMemoryType& t) {
  return intern_in(memories_, memory_index_, t, canonical_key(t));
}

uint32_t WasmTypeRecord::intern_table(const WasmTableType& t, const TypeDefs& source_defs) {
  WasmTableType c = canonicalize(t, source_defs);
  return intern_in(tables_, table_index_, c, canonical_key(c, defs_));
}

uint32_t WasmTypeRecord::intern_global(const WasmGlobalType& t, const TypeDefs& source_defs) {
  WasmGlobalType c = canonicalize(t, source_defs);
  return intern_in(globals_, global_index_, c, canonical_key(c, defs_));
}

uint32_t WasmTypeRecord::intern_function(const WasmFunctionType& t, const TypeDefs& source_defs) {
  WasmFunctionType c = canonicalize(t, source_defs);
  return intern_in(functions_, function_index_, c, canonical_key(c, defs_));
}

uint32_t WasmTypeRecord::intern_tag(const WasmTagType& t, const TypeDefs& source_defs) {
  WasmTagType c = canonicalize(t, source_defs);
  return intern_in(tags_, tag_index_, c, canonical_key(c, defs_));
}

std::string WasmTypeRecord::module_key(const WasmModuleType& canonical_module) const {
  std::string key = "module(imports[";
  for (size_t i = 0; i < canonical_module.imports.size(); ++i) {
    if (i) key += ',';
    key += '(' + canonical_module.imports[i].module + ':' + canonical_module.imports[i].field +
           ':' + canonical_key(canonical_module.imports[i].type, defs_) + ')';
  }
  key += "],exports[";
  for (size_t i = 0; i < canonical_module.exports.size(); ++i) {
    if (i) key += ',';
    key += '(' + canonical_module.exports[i].field + ':' +
           canonical_key(canonical_module.exports[i].type, defs_) + ')';
  }
  key += "])";
  return key;
}

uint32_t WasmTypeRecord::intern_module(const WasmModuleType& t) {
  WasmModuleType c = canonicalize(t);
  return intern_in(modules_, module_index_, c, module_key(c));
}

uint32_t WasmTypeRecord::intern_instance(const WasmInstanceType& t) {
  WasmInstanceType c = canonicalize(t);
  std::string key = "instance(" + module_key(c.module) + ')';
  return intern_in(instances_, instance_index_, c, key);
}

size_t WasmTypeRecord::category_size(TypeCategory c) const {
  switch (c) {
    case TypeCategory::Value: return values_.size();
    case TypeCategory::Memory: return memories_.size();
    case TypeCategory::Table: return tables_.size();
    case TypeCategory::Global: return globals_.size();
    case TypeCategory::Function: return functions_.size();
    case TypeCategory::Tag: return tags_.size();
    case TypeCategory::Module: return modules_.size();
    case TypeCategory::Instance: return instances_.size();
  }
  return 0;
}

std::string WasmTypeRecord::key_of(TypeCategory c, uint32_t index) const {
  switch (c) {
    case TypeCategory::Value: return canonical_key(values_.at(index), defs_);
    case TypeCategory::Memory: return canonical_key(memories_.at(index));
    case TypeCategory::Table: return canonical_key(tables_.at(index), defs_);
    case TypeCategory::Global: return canonical_key(globals_.at(index), defs_);
    case TypeCategory::Function: return canonical_key(functions_.at(index), defs_);
    case TypeCategory::Tag: return canonical_key(tags_.at(index), defs_);
    case TypeCategory::Module: return module_key(modules_.at(index));
    case TypeCategory::Instance:
      return "instance(" + module_key(instances_.at(index).module) + ')';
  }
  return "?";
}

// --- subtyping ---

bool heap_subtype(const HeapType& sub, const HeapType& super, const WasmTypeRecord& record) {
  if (sub == super) return true;
  if (super.is_abstract) {
    auto is_concrete_struct = [&](const HeapType& h) {
      return !h.is_abstract && h.index < record.defs().size() &&
             record.defs()[h.index].is_struct();
    };
    auto is_concrete_array = [&](const HeapType& h) {
      return !h.is_abstract && h.index < record.defs().size() && record.defs()[h.index].is_array();
    };
    auto is_concrete_func = [&](const HeapType& h) {
      return !h.is_abstract && h.index < record.defs().size() && record.defs()[h.index].is_func();
    };
    auto sub_is = [&](AbstractHeap k) { return sub.is_abstract && sub.abstract_kind == k; };
    switch (super.abstract_kind) {
      case AbstractHeap::Any:
        return sub_is(AbstractHeap::Eq) || sub_is(AbstractHeap::I31) ||
               sub_is(AbstractHeap::Struct) || sub_is(AbstractHeap::Array) ||
               sub_is(AbstractHeap::None) || is_concrete_struct(sub) || is_concrete_array(sub);
      case AbstractHeap::Eq:
        return sub_is(AbstractHeap::I31) || sub_is(AbstractHeap::Struct) ||
               sub_is(AbstractHeap::Array) || sub_is(AbstractHeap::None) ||
               is_concrete_struct(sub) || is_concrete_array(sub);
      case AbstractHeap::I31:
        return sub_is(AbstractHeap::None);
      case AbstractHeap::Struct:
        return sub_is(AbstractHeap::None) || is_concrete_struct(sub);
      case AbstractHeap::Array:
        return sub_is(AbstractHeap::None) || is_concrete_array(sub);
      case AbstractHeap::Func:
        return sub_is(AbstractHeap::NoFunc) || is_concrete_func(sub);
      case AbstractHeap::Extern:
        return sub_is(AbstractHeap::NoExtern);
      case AbstractHeap::Exn:
        return sub_is(AbstractHeap::NoExn);
      default:
        return false;
    }
  }
  // Concrete supertypes: only structural identity (deliberately
  // conservative; declared subtype chains are not modeled).
  return false;
}

bool matches(const ValueType& required, const ValueType& provided, const WasmTypeRecord& record) {
  if (required == provided) return true;
  if (!required.is_ref() || !provided.is_ref()) return false;
  if (provided.ref.nullable && !required.ref.nullable) return false;
  return heap_subtype(provided.ref.heap, required.ref.heap, record);
}

bool is_excluded_from_interaction(const ValueType& t) {
  if (t.is_v128()) return true;
  if (t.is_ref() && t.ref.heap.is_abstract) {
    auto k = t.ref.heap.abstract_kind;
    return k == AbstractHeap::Exn || k == AbstractHeap::NoExn;
  }
  return false;
}

namespace {

bool mentions_excluded_value(const ValueType& t, const TypeDefs& defs, std::set<uint32_t>& seen);

bool mentions_excluded_field(const FieldType& f, const TypeDefs& defs, std::set<uint32_t>& seen) {
  if (f.storage.packed != StorageType::Packed::None) return false;
  return mentions_excluded_value(f.storage.value, defs, seen);
}

bool mentions_excluded_def(uint32_t index, const TypeDefs& defs, std::set<uint32_t>& seen) {
  check_index(index, defs);
  if (!seen.insert(index).second) return false;
  const CompositeDef& def = defs[index];
  if (const auto* s = std::get_if<StructShape>(&def.shape)) {
    for (const auto& f : s->fields)
      if (mentions_excluded_field(f, defs, seen)) return true;
    return false;
  }
  if (const auto* a = std::get_if<ArrayShape>(&def.shape))
    return mentions_excluded_field(a->element, defs, seen);
  const auto& f = std::get<FuncShape>(def.shape);
  for (const auto& p : f.params)
    if (mentions_excluded_value(p, defs, seen)) return true;
  for (const auto& r : f.results)
    if (mentions_excluded_value(r, defs, seen)) return true;
  return false;
}

bool mentions_excluded_value(const ValueType& t, const TypeDefs& defs, std::set<uint32_t>& seen) {
  if (is_excluded_from_interaction(t)) return true;
  if (t.is_ref() && !t.ref.heap.is_abstract)
    return mentions_excluded_def(t.ref.heap.index, defs, seen);
  return false;
}

}  // namespace

bool mentions_excluded_type(const WasmExternType& t, const TypeDefs& defs) {
  std::set<uint32_t> seen;
  switch (t.kind()) {
    case ExternKind::Memory:
      return false;
    case ExternKind::Table:
      return mentions_excluded_value(t.table().element_type, defs, seen);
    case ExternKind::Global:
      return mentions_excluded_value(t.global().content_type, defs, seen);
    case ExternKind::Function: {
      for (const auto& p : t.function().parameters)
        if (mentions_excluded_value(p, defs, seen)) return true;
      for (const auto& r : t.function().results)
        if (mentions_excluded_value(r, defs, seen)) return true;
      return false;
    }
    case ExternKind::Tag: {
      for (const auto& p : t.tag().parameters)
        if (mentions_excluded_value(p, defs, seen)) return true;
      return false;
    }
  }
  return false;
}

}  // namespace weaver
