// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#include "weaver/wasm_binary.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace weaver {

namespace {

// Section ids.
constexpr uint8_t kSecCustom = 0;
constexpr uint8_t kSecType = 1;
constexpr uint8_t kSecImport = 2;
constexpr uint8_t kSecFunction = 3;
constexpr uint8_t kSecTable = 4;
constexpr uint8_t kSecMemory = 5;
constexpr uint8_t kSecGlobal = 6;
constexpr uint8_t kSecExport = 7;
constexpr uint8_t kSecStart = 8;
constexpr uint8_t kSecElem = 9;
constexpr uint8_t kSecCode = 10;
constexpr uint8_t kSecData = 11;
constexpr uint8_t kSecDataCount = 12;
constexpr uint8_t kSecTag = 13;

// Value/heap type codes.
constexpr uint8_t kI32 = 0x7F, kI64 = 0x7E, kF32 = 0x7D, kF64 = 0x7C, kV128 = 0x7B;
constexpr uint8_t kI8 = 0x78, kI16 = 0x77;
constexpr uint8_t kRefNonNull = 0x64, kRefNull = 0x63;
constexpr uint8_t kFuncComposite = 0x60, kStructComposite = 0x5F, kArrayComposite = 0x5E;
constexpr uint8_t kRecGroup = 0x4E, kSub = 0x50, kSubFinal = 0x4F;

int64_t abstract_heap_code(AbstractHeap h) {
  switch (h) {
    case AbstractHeap::Func: return -0x10;
    case AbstractHeap::Extern: return -0x11;
    case AbstractHeap::Any: return -0x12;
    case AbstractHeap::Eq: return -0x13;
    case AbstractHeap::I31: return -0x14;
    case AbstractHeap::Struct: return -0x15;
    case AbstractHeap::Array: return -0x16;
    case AbstractHeap::Exn: return -0x17;
    case AbstractHeap::None: return -0x0F;
    case AbstractHeap::NoExtern: return -0x0E;
    case AbstractHeap::NoFunc: return -0x0D;
    case AbstractHeap::NoExn: return -0x0C;
  }
  return -0x12;
}

bool abstract_heap_from_code(int64_t code, AbstractHeap* out) {
  switch (code) {
    case -0x10: *out = AbstractHeap::Func; return true;
    case -0x11: *out = AbstractHeap::Extern; return true;
    case -0x12: *out = AbstractHeap::Any; return true;
    case -0x13: *out = AbstractHeap::Eq; return true;
    case -0x14: *out = AbstractHeap::I31; return true;
    case -0x15: *out = AbstractHeap::Struct; return true;
    case -0x16: *out = AbstractHeap::Array; return true;
    case -0x17: *out = AbstractHeap::Exn; return true;
    case -0x0F: *out = AbstractHeap::None; return true;
    case -0x0E: *out = AbstractHeap::NoExtern; return true;
    case -0x0D: *out = AbstractHeap::NoFunc; return true;
    case -0x0C: *out = AbstractHeap::NoExn; return true;
    default: return false;
  }
}

void write_heap_type(ByteWriter& w, const HeapType& h) {
  if (h.is_abstract) {
    w.sleb(abstract_heap_code(h.abstract_kind));
  } else {
    w.sleb(static_cast<int64_t>(h.index));
  }
}

void write_value_type(ByteWriter& w, const ValueType& t) {
  switch (t.kind) {
    case ValueType::Kind::Num:
      switch (t.num) {
        case NumKind::I32: w.u8(kI32); return;
        case NumKind::I64: w.u8(kI64); return;
        case NumKind::F32: w.u8(kF32); return;
        case NumKind::F64: w.u8(kF64); return;
      }
      return;
    case ValueType::Kind::V128:
      w.u8(kV128);
      return;
    case ValueType::Kind::Ref:
      if (t.ref.heap.is_abstract && t.ref.nullable) {
        // Shorthand form for nullable abstract references.
        w.u8(static_cast<uint8_t>(abstract_heap_code(t.ref.heap.abstract_kind) & 0x7F));
        return;
      }
      w.u8(t.ref.nullable ? kRefNull : kRefNonNull);
      write_heap_type(w, t.ref.heap);
      return;
  }
}

void write_limits(ByteWriter& w, uint64_t initial, const std::optional<uint64_t>& maximum,
                  AddrType addr, bool shared) {
  uint8_t flags = 0;
  if (maximum) flags |= 0x01;
  if (shared) flags |= 0x02;
  if (addr == AddrType::Addr64) flags |= 0x04;
  w.u8(flags);
  w.uleb(initial);
  if (maximum) w.uleb(*maximum);
}

void write_table_type(ByteWriter& w, const WasmTableType& t) {
  write_value_type(w, t.element_type);
  write_limits(w, t.initial, t.maximum, t.addrtype, t.shared);
}

void write_global_type(ByteWriter& w, const WasmGlobalType& g) {
  write_value_type(w, g.content_type);
  w.u8(g.mutability ? 1 : 0);
}

void write_storage_type(ByteWriter& w, const StorageType& s) {
  switch (s.packed) {
    case StorageType::Packed::I8: w.u8(kI8); return;
    case StorageType::Packed::I16: w.u8(kI16); return;
    case StorageType::Packed::None: write_value_type(w, s.value); return;
  }
}

void write_composite(ByteWriter& w, const CompositeDef& def) {
  if (const auto* s = std::get_if<StructShape>(&def.shape)) {
    w.u8(kStructComposite);
    w.uleb(s->fields.size());
    for (const auto& f : s->fields) {
      write_storage_type(w, f.storage);
      w.u8(f.mutable_ ? 1 : 0);
    }
  } else if (const auto* a = std::get_if<ArrayShape>(&def.shape)) {
    w.u8(kArrayComposite);
    write_storage_type(w, a->element.storage);
    w.u8(a->element.mutable_ ? 1 : 0);
  } else {
    const auto& f = std::get<FuncShape>(def.shape);
    w.u8(kFuncComposite);
    w.uleb(f.params.size());
    for (const auto& p : f.params) write_value_type(w, p);
    w.uleb(f.results.size());
    for (const auto& r : f.results) write_value_type(w, r);
  }
}

void write_section(ByteWriter& out, uint8_t id, const Bytes& payload) {
  out.u8(id);
  out.uleb(payload.size());
  out.raw(payload);
}

// Emits an expression producing the default value for `t`, or throws when
// the type is not defaultable by a stub body.
void emit_default_value(ByteWriter& w, const ValueType& t, const TypeDefs& defs) {
  switch (t.kind) {
    case ValueType::Kind::Num:
      switch (t.num) {
        case NumKind::I32: w.u8(0x41); w.sleb(0); return;
        case NumKind::I64: w.u8(0x42); w.sleb(0); return;
        case NumKind::F32: w.u8(0x43); for (int i = 0; i < 4; ++i) w.u8(0); return;
        case NumKind::F64: w.u8(0x44); for (int i = 0; i < 8; ++i) w.u8(0); return;
      }
      return;
    case ValueType::Kind::V128:
      w.u8(0xFD); w.uleb(12); for (int i = 0; i < 16; ++i) w.u8(0);
      return;
    case ValueType::Kind::Ref: {
      if (t.ref.nullable) {
        w.u8(0xD0);
        write_heap_type(w, t.ref.heap);
        return;
      }
      // Non-nullable references: a few constructible cases.
      if (t.ref.heap.is_abstract) {
        switch (t.ref.heap.abstract_kind) {
          case AbstractHeap::I31:
          case AbstractHeap::Eq:
          case AbstractHeap::Any:
            w.u8(0x41); w.sleb(0);
            w.u8(0xFB); w.uleb(28);  // ref.i31
            return;
          case AbstractHeap::Extern:
            w.u8(0x41); w.sleb(0);
            w.u8(0xFB); w.uleb(28);  // ref.i31
            w.u8(0xFB); w.uleb(27);  // extern.convert_any
            return;
          default:
            throw SynthesisError(std::string("non-defaultable reference to ") +
                                 abstract_heap_name(t.ref.heap.abstract_kind));
        }
      }
      if (t.ref.heap.index >= defs.size())
        throw SynthesisError("dangling concrete heap index");
      const CompositeDef& def = defs[t.ref.heap.index];
      auto field_defaultable = [](const FieldType& f) {
        if (f.storage.packed != StorageType::Packed::None) return true;
        const ValueType& v = f.storage.value;
        return !v.is_ref() || v.ref.nullable;
      };
      if (const auto* s = std::get_if<StructShape>(&def.shape)) {
        if (!std::all_of(s->fields.begin(), s->fields.end(), field_defaultable))
          throw SynthesisError("struct with non-defaultable fields");
        w.u8(0xFB); w.uleb(1);  // struct.new_default
        w.uleb(t.ref.heap.index);
        return;
      }
      if (const auto* a = std::get_if<ArrayShape>(&def.shape)) {
        if (!field_defaultable(a->element))
          throw SynthesisError("array with non-defaultable element");
        w.u8(0x41); w.sleb(0);   // length
        w.u8(0xFB); w.uleb(7);   // array.new_default
        w.uleb(t.ref.heap.index);
        return;
      }
      throw SynthesisError("non-defaultable function reference result");
    }
  }
}

}  // namespace

// --- canonical shape form ---

ModuleShape canonicalize_shape(const ModuleShape& shape) {
  WasmTypeRecord record;
  WasmModuleType canonical = record.canonicalize(shape);

  // Renumber record ids reachable from the interaction surface in pre-order.
  std::map<uint32_t, uint32_t> renumber;
  std::vector<uint32_t> order;
  auto visit_def = [&](auto&& self, uint32_t id) -> void {
    if (renumber.count(id)) return;
    renumber[id] = static_cast<uint32_t>(order.size());
    order.push_back(id);
    const CompositeDef& def = record.defs()[id];
    auto visit_value = [&](const ValueType& v) {
      if (v.is_ref() && !v.ref.heap.is_abstract) self(self, v.ref.heap.index);
    };
    auto visit_field = [&](const FieldType& f) {
      if (f.storage.packed == StorageType::Packed::None) visit_value(f.storage.value);
    };
    if (const auto* s = std::get_if<StructShape>(&def.shape)) {
      for (const auto& f : s->fields) visit_field(f);
    } else if (const auto* a = std::get_if<ArrayShape>(&def.shape)) {
      visit_field(a->element);
    } else {
      const auto& f = std::get<FuncShape>(def.shape);
      for (const auto& p : f.params) visit_value(p);
      for (const auto& r : f.results) visit_value(r);
    }
  };
  auto visit_extern = [&](const WasmExternType& t) {
    auto visit_value = [&](const ValueType& v) {
      if (v.is_ref() && !v.ref.heap.is_abstract) visit_def(visit_def, v.ref.heap.index);
    };
    switch (t.kind()) {
      case ExternKind::Table: visit_value(t.table().element_type); break;
      case ExternKind::Global: visit_value(t.global().content_type); break;
      case ExternKind::Function:
        for (const auto& p : t.function().parameters) visit_value(p);
        for (const auto& r : t.function().results) visit_value(r);
        break;
      case ExternKind::Tag:
        for (const auto& p : t.tag().parameters) visit_value(p);
        break;
      case ExternKind::Memory: break;
    }
  };
  for (const auto& imp : canonical.imports) visit_extern(imp.type);
  for (const auto& exp : canonical.exports) visit_extern(exp.type);

  auto remap_value = [&](ValueType v) {
    if (v.is_ref() && !v.ref.heap.is_abstract) v.ref.heap.index = renumber.at(v.ref.heap.index);
    return v;
  };
  auto remap_extern = [&](WasmExternType t) {
    switch (t.kind()) {
      case ExternKind::Table: {
        auto tt = t.table();
        tt.element_type = remap_value(tt.element_type);
        t.type = tt;
        break;
      }
      case ExternKind::Global: {
        auto g = t.global();
        g.content_type = remap_value(g.content_type);
        t.type = g;
        break;
      }
      case ExternKind::Function: {
        auto f = t.function();
        for (auto& p : f.parameters) p = remap_value(p);
        for (auto& r : f.results) r = remap_value(r);
        t.type = f;
        break;
      }
      case ExternKind::Tag: {
        auto g = t.tag();
        for (auto& p : g.parameters) p = remap_value(p);
        t.type = g;
        break;
      }
      case ExternKind::Memory:
        break;
    }
    return t;
  };

  ModuleShape out;
  for (uint32_t id : order) {
    const CompositeDef& def = record.defs()[id];
    CompositeDef copy = def;
    if (auto* s = std::get_if<StructShape>(&copy.shape)) {
      for (auto& f : s->fields)
        if (f.storage.packed == StorageType::Packed::None)
          f.storage.value = remap_value(f.storage.value);
    } else if (auto* a = std::get_if<ArrayShape>(&copy.shape)) {
      if (a->element.storage.packed == StorageType::Packed::None)
        a->element.storage.value = remap_value(a->element.storage.value);
    } else {
      auto& f = std::get<FuncShape>(copy.shape);
      for (auto& p : f.params) p = remap_value(p);
      for (auto& r : f.results) r = remap_value(r);
    }
    out.type_defs.push_back(std::move(copy));
  }
  for (const auto& imp : canonical.imports)
    out.imports.push_back({imp.module, imp.field, remap_extern(imp.type)});
  for (const auto& exp : canonical.exports)
    out.exports.push_back({exp.field, remap_extern(exp.type)});
  return out;
}

std::string shape_fingerprint(const ModuleShape& shape) { return canonical_key(shape); }

bool shapes_equal(const ModuleShape& a, const ModuleShape& b) {
  return shape_fingerprint(a) == shape_fingerprint(b);
}

// --- encoder ---

namespace {

// Assigns type-section indices: the shape's own definitions first, then any
// extra function types required by function/tag imports and exports.
struct TypeTable {
  TypeDefs defs;
  std::map<std::string, uint32_t> key_to_index;

  explicit TypeTable(const TypeDefs& shape_defs) : defs(shape_defs) {
    for (uint32_t i = 0; i < defs.size(); ++i)
      key_to_index.emplace(canonical_key(defs[i], defs), i);
  }

  uint32_t func_index(const std::vector<ValueType>& params,
                      const std::vector<ValueType>& results) {
    CompositeDef def;
    def.shape = FuncShape{params, results};
    std::string key = canonical_key(def, defs);
    auto it = key_to_index.find(key);
    if (it != key_to_index.end()) {
      // Only a func definition can back a function/tag; identical keys imply
      // identical composite kinds.
      return it->second;
    }
    uint32_t index = static_cast<uint32_t>(defs.size());
    defs.push_back(def);
    key_to_index.emplace(std::move(key), index);
    return index;
  }
};

bool has_forward_ref(const TypeDefs& defs) {
  for (uint32_t i = 0; i < defs.size(); ++i) {
    bool forward = false;
    auto check_value = [&](const ValueType& v) {
      if (v.is_ref() && !v.ref.heap.is_abstract && v.ref.heap.index >= i) forward = true;
    };
    auto check_field = [&](const FieldType& f) {
      if (f.storage.packed == StorageType::Packed::None) check_value(f.storage.value);
    };
    const CompositeDef& def = defs[i];
    if (const auto* s = std::get_if<StructShape>(&def.shape)) {
      for (const auto& f : s->fields) check_field(f);
    } else if (const auto* a = std::get_if<ArrayShape>(&def.shape)) {
      check_field(a->element);
    } else {
      const auto& f = std::get<FuncShape>(def.shape);
      for (const auto& p : f.params) check_value(p);
      for (const auto& r : f.results) check_value(r);
    }
    if (forward) return true;
  }
  return false;
}

}  // namespace

Bytes encode_shape_module(const ModuleShape& shape, uint64_t seed) {
  TypeTable types(shape.type_defs);

  // Imports, with type indices resolved up front.
  struct PendingImport {
    const WasmImport* import;
    uint32_t type_index = 0;  // functions and tags
  };
  std::vector<PendingImport> imports;
  int import_count_by_kind[5] = {0, 0, 0, 0, 0};
  for (const auto& imp : shape.imports) {
    PendingImport p{&imp, 0};
    if (imp.type.kind() == ExternKind::Function)
      p.type_index = types.func_index(imp.type.function().parameters, imp.type.function().results);
    if (imp.type.kind() == ExternKind::Tag)
      p.type_index = types.func_index(imp.type.tag().parameters, {});
    imports.push_back(p);
    import_count_by_kind[static_cast<int>(imp.type.kind())]++;
  }

  // One definition per export, unless the seed picks an identically typed
  // import to re-export.
  struct PendingExport {
    const WasmExport* exp;
    bool reexport = false;
    uint32_t index = 0;  // within the kind's index space
  };
  std::vector<PendingExport> exports;
  std::vector<const WasmFunctionType*> defined_funcs;
  std::vector<uint32_t> defined_func_types;
  std::vector<const WasmTableType*> defined_tables;
  std::vector<const WasmMemoryType*> defined_memories;
  std::vector<const WasmGlobalType*> defined_globals;
  std::vector<uint32_t> defined_tag_types;

  for (size_t i = 0; i < shape.exports.size(); ++i) {
    const WasmExport& exp = shape.exports[i];
    PendingExport pe{&exp, false, 0};
    const int kind = static_cast<int>(exp.type.kind());
    if ((seed >> (i % 64)) & 1) {
      std::string want = canonical_key(exp.type, shape.type_defs);
      int ordinal = 0;
      for (const auto& imp : shape.imports) {
        if (imp.type.kind() != exp.type.kind()) continue;
        if (canonical_key(imp.type, shape.type_defs) == want) {
          pe.reexport = true;
          pe.index = static_cast<uint32_t>(ordinal);
          break;
        }
        ++ordinal;
      }
    }
    if (!pe.reexport) {
      switch (exp.type.kind()) {
        case ExternKind::Function:
          pe.index = static_cast<uint32_t>(import_count_by_kind[kind] + defined_funcs.size());
          defined_funcs.push_back(&exp.type.function());
          defined_func_types.push_back(
              types.func_index(exp.type.function().parameters, exp.type.function().results));
          break;
        case ExternKind::Table:
          pe.index = static_cast<uint32_t>(import_count_by_kind[kind] + defined_tables.size());
          if (exp.type.table().element_type.is_ref() &&
              !exp.type.table().element_type.ref.nullable)
            throw SynthesisError("table with non-nullable element type");
          defined_tables.push_back(&exp.type.table());
          break;
        case ExternKind::Memory:
          pe.index = static_cast<uint32_t>(import_count_by_kind[kind] + defined_memories.size());
          defined_memories.push_back(&exp.type.memory());
          break;
        case ExternKind::Global:
          pe.index = static_cast<uint32_t>(import_count_by_kind[kind] + defined_globals.size());
          defined_globals.push_back(&exp.type.global());
          break;
        case ExternKind::Tag:
          pe.index = static_cast<uint32_t>(import_count_by_kind[kind] + defined_tag_types.size());
          defined_tag_types.push_back(types.func_index(exp.type.tag().parameters, {}));
          break;
      }
    }
    exports.push_back(pe);
  }

  ByteWriter out;
  out.u8(0x00); out.u8(0x61); out.u8(0x73); out.u8(0x6D);
  out.u8(0x01); out.u8(0x00); out.u8(0x00); out.u8(0x00);

  if (!types.defs.empty()) {
    ByteWriter sec;
    // Mutually recursive groups must stay in one rec group; plain function
    // types keep the MVP encoding for engines without GC support.
    bool rec = has_forward_ref(types.defs);
    if (rec) {
      sec.uleb(1);
      sec.u8(kRecGroup);
      sec.uleb(types.defs.size());
      for (const auto& def : types.defs) write_composite(sec, def);
    } else {
      sec.uleb(types.defs.size());
      for (const auto& def : types.defs) write_composite(sec, def);
    }
    write_section(out, kSecType, sec.bytes());
  }

  if (!imports.empty()) {
    ByteWriter sec;
    sec.uleb(imports.size());
    for (const auto& p : imports) {
      sec.name(p.import->module);
      sec.name(p.import->field);
      switch (p.import->type.kind()) {
        case ExternKind::Function:
          sec.u8(0x00);
          sec.uleb(p.type_index);
          break;
        case ExternKind::Table:
          sec.u8(0x01);
          write_table_type(sec, p.import->type.table());
          break;
        case ExternKind::Memory:
          sec.u8(0x02);
          write_limits(sec, p.import->type.memory().initial, p.import->type.memory().maximum,
                       p.import->type.memory().addrtype, p.import->type.memory().shared);
          break;
        case ExternKind::Global:
          sec.u8(0x03);
          write_global_type(sec, p.import->type.global());
          break;
        case ExternKind::Tag:
          sec.u8(0x04);
          sec.u8(0x00);
          sec.uleb(p.type_index);
          break;
      }
    }
    write_section(out, kSecImport, sec.bytes());
  }

  if (!defined_funcs.empty()) {
    ByteWriter sec;
    sec.uleb(defined_funcs.size());
    for (uint32_t t : defined_func_types) sec.uleb(t);
    write_section(out, kSecFunction, sec.bytes());
  }

  if (!defined_tables.empty()) {
    ByteWriter sec;
    sec.uleb(defined_tables.size());
    for (const auto* t : defined_tables) write_table_type(sec, *t);
    write_section(out, kSecTable, sec.bytes());
  }

  if (!defined_memories.empty()) {
    ByteWriter sec;
    sec.uleb(defined_memories.size());
    for (const auto* m : defined_memories)
      write_limits(sec, m->initial, m->maximum, m->addrtype, m->shared);
    write_section(out, kSecMemory, sec.bytes());
  }

  if (!defined_tag_types.empty()) {
    ByteWriter sec;
    sec.uleb(defined_tag_types.size());
    for (uint32_t t : defined_tag_types) {
      sec.u8(0x00);
      sec.uleb(t);
    }
    write_section(out, kSecTag, sec.bytes());
  }

  if (!defined_globals.empty()) {
    ByteWriter sec;
    sec.uleb(defined_globals.size());
    for (const auto* g : defined_globals) {
      write_global_type(sec, *g);
      emit_default_value(sec, g->content_type, types.defs);
      sec.u8(0x0B);
    }
    write_section(out, kSecGlobal, sec.bytes());
  }

  if (!exports.empty()) {
    ByteWriter sec;
    sec.uleb(exports.size());
    for (const auto& pe : exports) {
      sec.name(pe.exp->field);
      switch (pe.exp->type.kind()) {
        case ExternKind::Function: sec.u8(0); break;
        case ExternKind::Table: sec.u8(1); break;
        case ExternKind::Memory: sec.u8(2); break;
        case ExternKind::Global: sec.u8(3); break;
        case ExternKind::Tag: sec.u8(4); break;
      }
      sec.uleb(pe.index);
    }
    write_section(out, kSecExport, sec.bytes());
  }

  if (!defined_funcs.empty()) {
    ByteWriter sec;
    sec.uleb(defined_funcs.size());
    for (const auto* fn : defined_funcs) {
      ByteWriter body;
      body.uleb(0);  // no locals
      for (const auto& r : fn->results) emit_default_value(body, r, types.defs);
      body.u8(0x0B);
      sec.uleb(body.size());
      sec.raw(body.bytes());
    }
    write_section(out, kSecCode, sec.bytes());
  }

  return out.take();
}

// --- parser ---

namespace {

class ShapeParser {
 public:
  explicit ShapeParser(std::span<const uint8_t> bytes) : data_(bytes), reader_(bytes) {}

  ModuleShape parse() {
    expect_header();
    int last_rank = 0;
    while (!reader_.done()) {
      uint8_t id = reader_.u8();
      uint32_t size = reader_.uleb32();
      size_t start = reader_.pos();
      if (size > reader_.remaining()) fail("section exceeds input", start);
      if (id != kSecCustom) {
        int rank = section_rank(id);
        if (rank < 0) fail("unknown section id " + std::to_string(id), start);
        if (rank <= last_rank) fail("section out of order", start);
        last_rank = rank;
      }
      switch (id) {
        case kSecType: parse_type_section(size); break;
        case kSecImport: parse_import_section(size); break;
        case kSecFunction: parse_function_section(size); break;
        case kSecTable: parse_table_section(size); break;
        case kSecMemory: parse_memory_section(size); break;
        case kSecGlobal: parse_global_section(size); break;
        case kSecTag: parse_tag_section(size); break;
        case kSecExport: parse_export_section(size); break;
        default: reader_.skip(size); break;
      }
      if (reader_.pos() != start + size) fail("section size mismatch", reader_.pos());
    }
    return std::move(shape_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg, size_t offset) const {
    throw MalformedModule(msg, offset);
  }
  [[noreturn]] void fail(const std::string& msg) const { fail(msg, reader_.pos()); }

  static int section_rank(uint8_t id) {
    switch (id) {
      case kSecType: return 1;
      case kSecImport: return 2;
      case kSecFunction: return 3;
      case kSecTable: return 4;
      case kSecMemory: return 5;
      case kSecTag: return 6;
      case kSecGlobal: return 7;
      case kSecExport: return 8;
      case kSecStart: return 9;
      case kSecElem: return 10;
      case kSecDataCount: return 11;
      case kSecCode: return 12;
      case kSecData: return 13;
      default: return -1;
    }
  }

  void expect_header() {
    static const uint8_t kHeader[8] = {0x00, 0x61, 0x73, 0x6D, 0x01, 0x00, 0x00, 0x00};
    for (uint8_t b : kHeader) {
      if (reader_.done() || reader_.u8() != b) fail("bad module header");
    }
  }

  HeapType read_heap_type() {
    int64_t code = reader_.sleb(33);
    if (code >= 0) {
      if (code > UINT32_MAX) fail("type index out of range");
      return HeapType::concrete(static_cast<uint32_t>(code));
    }
    AbstractHeap abs;
    if (!abstract_heap_from_code(code, &abs)) fail("unknown heap type");
    return HeapType::abstract(abs);
  }

  ValueType read_value_type() {
    uint8_t b = reader_.peek();
    switch (b) {
      case kI32: reader_.u8(); return ValueType::i32();
      case kI64: reader_.u8(); return ValueType::i64();
      case kF32: reader_.u8(); return ValueType::f32();
      case kF64: reader_.u8(); return ValueType::f64();
      case kV128: reader_.u8(); return ValueType::v128();
      case kRefNull: reader_.u8(); return ValueType::ref_type(read_heap_type(), true);
      case kRefNonNull: reader_.u8(); return ValueType::ref_type(read_heap_type(), false);
      default: {
        AbstractHeap abs;
        int64_t code = static_cast<int64_t>(b) - 0x80;
        if (abstract_heap_from_code(code, &abs)) {
          reader_.u8();
          return ValueType::ref_abstract(abs, true);
        }
        fail("unknown value type 0x" + std::to_string(b));
      }
    }
  }

  StorageType read_storage_type() {
    uint8_t b = reader_.peek();
    if (b == kI8) { reader_.u8(); return StorageType::i8(); }
    if (b == kI16) { reader_.u8(); return StorageType::i16(); }
    return StorageType::of(read_value_type());
  }

  FieldType read_field_type() {
    FieldType f;
    f.storage = read_storage_type();
    uint8_t mut = reader_.u8();
    if (mut > 1) fail("bad mutability flag");
    f.mutable_ = mut != 0;
    return f;
  }

  CompositeDef read_composite() {
    uint8_t b = reader_.u8();
    CompositeDef def;
    if (b == kStructComposite) {
      StructShape s;
      uint32_t n = reader_.uleb32();
      if (n > 10000) fail("field count too large");
      for (uint32_t i = 0; i < n; ++i) s.fields.push_back(read_field_type());
      def.shape = std::move(s);
    } else if (b == kArrayComposite) {
      def.shape = ArrayShape{read_field_type()};
    } else if (b == kFuncComposite) {
      FuncShape f;
      uint32_t np = reader_.uleb32();
      if (np > 10000) fail("param count too large");
      for (uint32_t i = 0; i < np; ++i) f.params.push_back(read_value_type());
      uint32_t nr = reader_.uleb32();
      if (nr > 10000) fail("result count too large");
      for (uint32_t i = 0; i < nr; ++i) f.results.push_back(read_value_type());
      def.shape = std::move(f);
    } else {
      fail("unknown composite type 0x" + std::to_string(b));
    }
    return def;
  }

  void read_subtype() {
    uint8_t b = reader_.peek();
    if (b == kSub || b == kSubFinal) {
      reader_.u8();
      uint32_t supers = reader_.uleb32();
      if (supers > 1000) fail("supertype count too large");
      for (uint32_t i = 0; i < supers; ++i) reader_.uleb32();  // declared supers ignored
    }
    shape_.type_defs.push_back(read_composite());
  }

  void parse_type_section(uint32_t) {
    uint32_t groups = reader_.uleb32();
    if (groups > 100000) fail("type count too large");
    for (uint32_t g = 0; g < groups; ++g) {
      if (reader_.peek() == kRecGroup) {
        reader_.u8();
        uint32_t members = reader_.uleb32();
        if (members > 100000) fail("rec group too large");
        for (uint32_t i = 0; i < members; ++i) read_subtype();
      } else {
        read_subtype();
      }
    }
  }

  WasmFunctionType func_type_at(uint32_t index) {
    if (index >= shape_.type_defs.size()) fail("type index out of range");
    if (!shape_.type_defs[index].is_func()) fail("type index is not a function type");
    const FuncShape& f = shape_.type_defs[index].func();
    return WasmFunctionType{f.params, f.results};
  }

  std::pair<uint64_t, std::optional<uint64_t>> read_limits(AddrType* addr, bool* shared) {
    uint8_t flags = reader_.u8();
    if (flags > 0x07) fail("bad limits flags");
    *addr = (flags & 0x04) ? AddrType::Addr64 : AddrType::Addr32;
    *shared = (flags & 0x02) != 0;
    uint64_t initial = reader_.uleb();
    std::optional<uint64_t> maximum;
    if (flags & 0x01) maximum = reader_.uleb();
    if (*shared && !maximum) fail("shared without maximum");
    return {initial, maximum};
  }

  WasmMemoryType read_memory_type() {
    WasmMemoryType m;
    auto [initial, maximum] = read_limits(&m.addrtype, &m.shared);
    m.initial = initial;
    m.maximum = maximum;
    return m;
  }

  WasmTableType read_table_type() {
    WasmTableType t;
    t.element_type = read_value_type();
    if (!t.element_type.is_ref()) fail("table element is not a reference type");
    auto [initial, maximum] = read_limits(&t.addrtype, &t.shared);
    t.initial = initial;
    t.maximum = maximum;
    return t;
  }

  WasmGlobalType read_global_type() {
    WasmGlobalType g;
    g.content_type = read_value_type();
    uint8_t mut = reader_.u8();
    if (mut > 1) fail("bad global mutability");
    g.mutability = mut != 0;
    return g;
  }

  WasmTagType read_tag() {
    uint8_t attr = reader_.u8();
    if (attr != 0) fail("bad tag attribute");
    WasmFunctionType ft = func_type_at(reader_.uleb32());
    if (!ft.results.empty()) fail("tag type has results");
    return WasmTagType{ft.parameters};
  }

  // Decodes one constant expression, including the terminating end opcode.
  void skip_const_expr() {
    while (true) {
      uint8_t op = reader_.u8();
      switch (op) {
        case 0x0B: return;                              // end
        case 0x41: reader_.sleb(32); break;             // i32.const
        case 0x42: reader_.sleb(64); break;             // i64.const
        case 0x43: reader_.skip(4); break;              // f32.const
        case 0x44: reader_.skip(8); break;              // f64.const
        case 0xD0: read_heap_type(); break;             // ref.null
        case 0xD2: reader_.uleb32(); break;             // ref.func
        case 0x23: reader_.uleb32(); break;             // global.get
        case 0x6A: case 0x6B: case 0x6C: break;         // i32 add/sub/mul
        case 0x7C: case 0x7D: case 0x7E: break;         // i64 add/sub/mul
        case 0xFB: {
          uint32_t sub = reader_.uleb32();
          switch (sub) {
            case 0: case 1: case 6: case 7: reader_.uleb32(); break;
            case 8: reader_.uleb32(); reader_.uleb32(); break;
            case 26: case 27: case 28: break;
            default: fail("unsupported gc opcode in constant expression");
          }
          break;
        }
        case 0xFD: {
          uint32_t sub = reader_.uleb32();
          if (sub != 12) fail("unsupported simd opcode in constant expression");
          reader_.skip(16);
          break;
        }
        default:
          fail("unsupported opcode in constant expression");
      }
    }
  }

  void parse_import_section(uint32_t) {
    uint32_t n = reader_.uleb32();
    if (n > 100000) fail("import count too large");
    for (uint32_t i = 0; i < n; ++i) {
      WasmImport imp;
      imp.module = reader_.name();
      imp.field = reader_.name();
      uint8_t kind = reader_.u8();
      switch (kind) {
        case 0x00: imp.type.type = func_type_at(reader_.uleb32()); break;
        case 0x01: imp.type.type = read_table_type(); break;
        case 0x02: imp.type.type = read_memory_type(); break;
        case 0x03: imp.type.type = read_global_type(); break;
        case 0x04: imp.type.type = read_tag(); break;
        default: fail("bad import kind");
      }
      switch (imp.type.kind()) {
        case ExternKind::Function: imported_funcs_.push_back(imp.type.function()); break;
        case ExternKind::Table: imported_tables_.push_back(imp.type.table()); break;
        case ExternKind::Memory: imported_memories_.push_back(imp.type.memory()); break;
        case ExternKind::Global: imported_globals_.push_back(imp.type.global()); break;
        case ExternKind::Tag: imported_tags_.push_back(imp.type.tag()); break;
      }
      shape_.imports.push_back(std::move(imp));
    }
  }

  void parse_function_section(uint32_t) {
    uint32_t n = reader_.uleb32();
    if (n > 100000) fail("function count too large");
    for (uint32_t i = 0; i < n; ++i) defined_funcs_.push_back(func_type_at(reader_.uleb32()));
  }

  void parse_table_section(uint32_t) {
    uint32_t n = reader_.uleb32();
    if (n > 100000) fail("table count too large");
    for (uint32_t i = 0; i < n; ++i) {
      if (reader_.peek() == 0x40) {
        reader_.u8();
        if (reader_.u8() != 0x00) fail("bad table-with-init encoding");
        defined_tables_.push_back(read_table_type());
        skip_const_expr();
      } else {
        defined_tables_.push_back(read_table_type());
      }
    }
  }

  void parse_memory_section(uint32_t) {
    uint32_t n = reader_.uleb32();
    if (n > 100000) fail("memory count too large");
    for (uint32_t i = 0; i < n; ++i) defined_memories_.push_back(read_memory_type());
  }

  void parse_global_section(uint32_t) {
    uint32_t n = reader_.uleb32();
    if (n > 100000) fail("global count too large");
    for (uint32_t i = 0; i < n; ++i) {
      defined_globals_.push_back(read_global_type());
      skip_const_expr();
    }
  }

  void parse_tag_section(uint32_t) {
    uint32_t n = reader_.uleb32();
    if (n > 100000) fail("tag count too large");
    for (uint32_t i = 0; i < n; ++i) defined_tags_.push_back(read_tag());
  }

  template <typename T>
  WasmExternType resolve(const std::vector<T>& imported, const std::vector<T>& defined,
                         uint32_t index) {
    WasmExternType t;
    if (index < imported.size()) {
      t.type = imported[index];
      return t;
    }
    index -= static_cast<uint32_t>(imported.size());
    if (index >= defined.size()) fail("export index out of range");
    t.type = defined[index];
    return t;
  }

  void parse_export_section(uint32_t) {
    uint32_t n = reader_.uleb32();
    if (n > 100000) fail("export count too large");
    std::set<std::string> seen;
    for (uint32_t i = 0; i < n; ++i) {
      WasmExport exp;
      exp.field = reader_.name();
      if (!seen.insert(exp.field).second) fail("duplicate export name");
      uint8_t kind = reader_.u8();
      uint32_t index = reader_.uleb32();
      switch (kind) {
        case 0: exp.type = resolve(imported_funcs_, defined_funcs_, index); break;
        case 1: exp.type = resolve(imported_tables_, defined_tables_, index); break;
        case 2: exp.type = resolve(imported_memories_, defined_memories_, index); break;
        case 3: exp.type = resolve(imported_globals_, defined_globals_, index); break;
        case 4: exp.type = resolve(imported_tags_, defined_tags_, index); break;
        default: fail("bad export kind");
      }
      shape_.exports.push_back(std::move(exp));
    }
  }

  std::span<const uint8_t> data_;
  ByteReader reader_;
  ModuleShape shape_;
  std::vector<WasmFunctionType> imported_funcs_, defined_funcs_;
  std::vector<WasmTableType> imported_tables_, defined_tables_;
  std::vector<WasmMemoryType> imported_memories_, defined_memories_;
  std::vector<WasmGlobalType> imported_globals_, defined_globals_;
  std::vector<WasmTagType> imported_tags_, defined_tags_;
};

}  // namespace

ModuleShape parse_shape(std::span<const uint8_t> bytes) {
  try {
    ShapeParser parser(bytes);
    return canonicalize_shape(parser.parse());
  } catch (const DecodeError& e) {
    throw MalformedModule(e.what(), e.offset());
  }
}

}  // namespace weaver
