// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace weaver {

// --- value types ---

enum class NumKind : uint8_t { I32, I64, F32, F64 };

enum class AbstractHeap : uint8_t {
  Any, Eq, I31, Struct, Array, Func, Extern, Exn,
  None, NoFunc, NoExtern, NoExn,
};

const char* abstract_heap_name(AbstractHeap h);

// Either an abstract heap kind or an index into a type-definition list.
// For types held in a WasmTypeRecord the index refers to the record's
// canonical definition list; for types inside a ModuleShape it refers to the
// shape's local typeDefs.
struct HeapType {
  bool is_abstract = true;
  AbstractHeap abstract_kind = AbstractHeap::Any;
  uint32_t index = 0;

  static HeapType abstract(AbstractHeap k) { return {true, k, 0}; }
  static HeapType concrete(uint32_t idx) { return {false, AbstractHeap::Any, idx}; }

  friend bool operator==(const HeapType&, const HeapType&) = default;
};

struct RefType {
  HeapType heap;
  bool nullable = true;

  friend bool operator==(const RefType&, const RefType&) = default;
};

struct ValueType {
  // Exactly one of the alternatives; v128 modeled as its own kind.
  enum class Kind : uint8_t { Num, V128, Ref } kind = Kind::Num;
  NumKind num = NumKind::I32;
  RefType ref{};

  static ValueType i32() { return {Kind::Num, NumKind::I32, {}}; }
  static ValueType i64() { return {Kind::Num, NumKind::I64, {}}; }
  static ValueType f32() { return {Kind::Num, NumKind::F32, {}}; }
  static ValueType f64() { return {Kind::Num, NumKind::F64, {}}; }
  static ValueType v128() { return {Kind::V128, NumKind::I32, {}}; }
  static ValueType ref_type(HeapType heap, bool nullable) {
    return {Kind::Ref, NumKind::I32, {heap, nullable}};
  }
  static ValueType ref_abstract(AbstractHeap h, bool nullable) {
    return ref_type(HeapType::abstract(h), nullable);
  }

  // The shorthand aliases resolve structurally.
  static ValueType externref() { return ref_abstract(AbstractHeap::Extern, true); }
  static ValueType anyref() { return ref_abstract(AbstractHeap::Any, true); }
  static ValueType funcref() { return ref_abstract(AbstractHeap::Func, true); }
  static ValueType i31ref() { return ref_abstract(AbstractHeap::I31, true); }
  static ValueType exnref() { return ref_abstract(AbstractHeap::Exn, true); }
  static ValueType nullexnref() { return ref_abstract(AbstractHeap::NoExn, true); }

  bool is_num() const { return kind == Kind::Num; }
  bool is_v128() const { return kind == Kind::V128; }
  bool is_ref() const { return kind == Kind::Ref; }

  friend bool operator==(const ValueType&, const ValueType&) = default;
};

// --- composite type definitions (struct / array / func shapes) ---

struct StorageType {
  enum class Packed : uint8_t { None, I8, I16 } packed = Packed::None;
  ValueType value = ValueType::i32();  // meaningful when packed == None

  static StorageType of(ValueType v) { return {Packed::None, v}; }
  static StorageType i8() { return {Packed::I8, ValueType::i32()}; }
  static StorageType i16() { return {Packed::I16, ValueType::i32()}; }

  friend bool operator==(const StorageType&, const StorageType&) = default;
};

struct FieldType {
  StorageType storage;
  bool mutable_ = false;

  friend bool operator==(const FieldType&, const FieldType&) = default;
};

struct StructShape {
  std::vector<FieldType> fields;
  friend bool operator==(const StructShape&, const StructShape&) = default;
};

struct ArrayShape {
  FieldType element;
  friend bool operator==(const ArrayShape&, const ArrayShape&) = default;
};

struct FuncShape {
  std::vector<ValueType> params;
  std::vector<ValueType> results;
  friend bool operator==(const FuncShape&, const FuncShape&) = default;
};

struct CompositeDef {
  std::variant<StructShape, ArrayShape, FuncShape> shape;

  bool is_struct() const { return std::holds_alternative<StructShape>(shape); }
  bool is_array() const { return std::holds_alternative<ArrayShape>(shape); }
  bool is_func() const { return std::holds_alternative<FuncShape>(shape); }
  const FuncShape& func() const { return std::get<FuncShape>(shape); }

  friend bool operator==(const CompositeDef&, const CompositeDef&) = default;
};

// Resolution context for concrete heap indices.
using TypeDefs = std::vector<CompositeDef>;

// --- the seven JS-visible Wasm object type categories ---

enum class AddrType : uint8_t { Addr32, Addr64 };

struct WasmMemoryType {
  uint64_t initial = 0;               // pages
  std::optional<uint64_t> maximum;    // pages
  AddrType addrtype = AddrType::Addr32;
  bool shared = false;

  bool valid() const {
    if (maximum && *maximum < initial) return false;
    if (shared && !maximum) return false;
    return true;
  }
  friend bool operator==(const WasmMemoryType&, const WasmMemoryType&) = default;
};

struct WasmTableType {
  uint64_t initial = 0;
  std::optional<uint64_t> maximum;
  AddrType addrtype = AddrType::Addr32;
  bool shared = false;
  ValueType element_type = ValueType::funcref();

  bool valid() const {
    if (!element_type.is_ref()) return false;
    if (maximum && *maximum < initial) return false;
    return true;
  }
  friend bool operator==(const WasmTableType&, const WasmTableType&) = default;
};

struct WasmGlobalType {
  ValueType content_type = ValueType::i32();
  bool mutability = false;
  friend bool operator==(const WasmGlobalType&, const WasmGlobalType&) = default;
};

struct WasmFunctionType {
  std::vector<ValueType> parameters;
  std::vector<ValueType> results;
  friend bool operator==(const WasmFunctionType&, const WasmFunctionType&) = default;
};

struct WasmTagType {
  // Results are definitionally empty.
  std::vector<ValueType> parameters;
  friend bool operator==(const WasmTagType&, const WasmTagType&) = default;
};

enum class ExternKind : uint8_t { Function, Table, Memory, Global, Tag };

const char* extern_kind_name(ExternKind k);

struct WasmExternType {
  std::variant<WasmFunctionType, WasmTableType, WasmMemoryType, WasmGlobalType, WasmTagType> type;

  ExternKind kind() const {
    switch (type.index()) {
      case 0: return ExternKind::Function;
      case 1: return ExternKind::Table;
      case 2: return ExternKind::Memory;
      case 3: return ExternKind::Global;
      default: return ExternKind::Tag;
    }
  }
  const WasmFunctionType& function() const { return std::get<WasmFunctionType>(type); }
  const WasmTableType& table() const { return std::get<WasmTableType>(type); }
  const WasmMemoryType& memory() const { return std::get<WasmMemoryType>(type); }
  const WasmGlobalType& global() const { return std::get<WasmGlobalType>(type); }
  const WasmTagType& tag() const { return std::get<WasmTagType>(type); }

  friend bool operator==(const WasmExternType&, const WasmExternType&) = default;
};

struct WasmImport {
  std::string module;
  std::string field;
  WasmExternType type;
  friend bool operator==(const WasmImport&, const WasmImport&) = default;
};

struct WasmExport {
  std::string field;
  WasmExternType type;
  friend bool operator==(const WasmExport&, const WasmExport&) = default;
};

struct WasmModuleType {
  TypeDefs type_defs;
  std::vector<WasmImport> imports;
  std::vector<WasmExport> exports;
  friend bool operator==(const WasmModuleType&, const WasmModuleType&) = default;
};

struct WasmInstanceType {
  WasmModuleType module;
  bool instantiated = true;
  friend bool operator==(const WasmInstanceType&, const WasmInstanceType&) = default;
};

// --- canonical keys ---
//
// A canonical key is a self-contained string describing a type's structure.
// Concrete heap indices are expanded recursively; cycles become de Bruijn
// style back references, so two definitions with bisimilar unfoldings get the
// same key regardless of how their local indices are numbered.

class UnresolvedTypeIndex : public std::runtime_error {
 public:
  explicit UnresolvedTypeIndex(uint32_t index)
      : std::runtime_error("unresolved type index " + std::to_string(index)), index_(index) {}
  uint32_t index() const { return index_; }

 private:
  uint32_t index_;
};

std::string canonical_key(const ValueType& t, const TypeDefs& defs);
std::string canonical_key(const CompositeDef& def, const TypeDefs& defs);
std::string canonical_key(const WasmMemoryType& t);
std::string canonical_key(const WasmTableType& t, const TypeDefs& defs);
std::string canonical_key(const WasmGlobalType& t, const TypeDefs& defs);
std::string canonical_key(const WasmFunctionType& t, const TypeDefs& defs);
std::string canonical_key(const WasmTagType& t, const TypeDefs& defs);
std::string canonical_key(const WasmExternType& t, const TypeDefs& defs);
std::string canonical_key(const WasmModuleType& t);
std::string canonical_key(const WasmInstanceType& t);

// --- the per-session type record ---

enum class TypeCategory : uint8_t {
  Value, Memory, Table, Global, Function, Tag, Module, Instance
};
inline constexpr int kTypeCategoryCount = 8;

const char* type_category_name(TypeCategory c);

// One append-only canonical list per category plus canonical composite
// definitions shared by all of them. Subscripts are stable for the lifetime
// of the record.
class WasmTypeRecord {
 public:
  // Rewrites t so concrete heap indices point into this record's canonical
  // definition list. Types already expressed against the record pass through
  // unchanged (canonicalize is a projection); an empty source context means
  // the type is already record-relative.
  ValueType canonicalize(const ValueType& t, const TypeDefs& source_defs);
  WasmMemoryType canonicalize(const WasmMemoryType& t, const TypeDefs& source_defs);
  WasmTableType canonicalize(const WasmTableType& t, const TypeDefs& source_defs);
  WasmGlobalType canonicalize(const WasmGlobalType& t, const TypeDefs& source_defs);
  WasmFunctionType canonicalize(const WasmFunctionType& t, const TypeDefs& source_defs);
  WasmTagType canonicalize(const WasmTagType& t, const TypeDefs& source_defs);
  WasmExternType canonicalize(const WasmExternType& t, const TypeDefs& source_defs);
  WasmModuleType canonicalize(const WasmModuleType& t);
  WasmInstanceType canonicalize(const WasmInstanceType& t);

  // Interning: returns the existing subscript when the canonical form is
  // already present, else appends. Input types may reference source_defs.
  uint32_t intern_value(const ValueType& t, const TypeDefs& source_defs = {});
  uint32_t intern_memory(const WasmMemoryType& t);
  uint32_t intern_table(const WasmTableType& t, const TypeDefs& source_defs = {});
  uint32_t intern_global(const WasmGlobalType& t, const TypeDefs& source_defs = {});
  uint32_t intern_function(const WasmFunctionType& t, const TypeDefs& source_defs = {});
  uint32_t intern_tag(const WasmTagType& t, const TypeDefs& source_defs = {});
  uint32_t intern_module(const WasmModuleType& t);
  uint32_t intern_instance(const WasmInstanceType& t);

  // Interns a whole local definition list; returns local index -> record id.
  std::vector<uint32_t> intern_defs(const TypeDefs& source_defs);

  const TypeDefs& defs() const { return defs_; }
  const std::vector<ValueType>& values() const { return values_; }
  const std::vector<WasmMemoryType>& memories() const { return memories_; }
  const std::vector<WasmTableType>& tables() const { return tables_; }
  const std::vector<WasmGlobalType>& globals() const { return globals_; }
  const std::vector<WasmFunctionType>& functions() const { return functions_; }
  const std::vector<WasmTagType>& tags() const { return tags_; }
  const std::vector<WasmModuleType>& modules() const { return modules_; }
  const std::vector<WasmInstanceType>& instances() const { return instances_; }

  size_t category_size(TypeCategory c) const;

  // Canonical key of the entry at `index` in category `c`; used for
  // cross-record comparisons (e.g. splicing between two programs).
  std::string key_of(TypeCategory c, uint32_t index) const;

 private:
  template <typename T>
  uint32_t intern_in(std::vector<T>& list, std::map<std::string, uint32_t>& index,
                     const T& canonical, const std::string& key);

  std::string module_key(const WasmModuleType& canonical_module) const;

  TypeDefs defs_;
  std::map<std::string, uint32_t> def_index_;

  std::vector<ValueType> values_;
  std::vector<WasmMemoryType> memories_;
  std::vector<WasmTableType> tables_;
  std::vector<WasmGlobalType> globals_;
  std::vector<WasmFunctionType> functions_;
  std::vector<WasmTagType> tags_;
  std::vector<WasmModuleType> modules_;
  std::vector<WasmInstanceType> instances_;

  std::map<std::string, uint32_t> value_index_, memory_index_, table_index_, global_index_,
      function_index_, tag_index_, module_index_, instance_index_;
};

// Simplified, deliberately conservative Wasm subtyping between canonical
// value types expressed against the same record. `provided` satisfies
// `required` when it is identical, or is a reference whose heap type sits
// below required's in the abstract hierarchy and whose nullability is
// compatible (non-nullable satisfies nullable, not vice versa).
bool matches(const ValueType& required, const ValueType& provided, const WasmTypeRecord& record);

// Heap-level subtype check against the abstract hierarchy.
bool heap_subtype(const HeapType& sub, const HeapType& super, const WasmTypeRecord& record);

// True for types excluded from the JS interaction surface: v128 and
// references whose heap is exn or noexn.
bool is_excluded_from_interaction(const ValueType& t);

// True when any value type reachable from the extern type (through concrete
// defs) is excluded. Used when filtering export candidates.
bool mentions_excluded_type(const WasmExternType& t, const TypeDefs& defs);

}  // namespace weaver
