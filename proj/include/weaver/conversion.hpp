// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "weaver/wasm_types.hpp"

namespace weaver {

struct ObjectShape;
struct FunctionSignature;

// Lattice of JS types used by type-aware generation: a union of primitive
// flags, optionally refined by an object shape and/or a function signature.
class JSType {
 public:
  enum Flag : uint16_t {
    kNumber = 1 << 0,
    kInteger = 1 << 1,  // refinement; implies kNumber
    kBigInt = 1 << 2,
    kString = 1 << 3,
    kBoolean = 1 << 4,
    kNullish = 1 << 5,  // undefined and null, deliberately conflated
    kObject = 1 << 6,
    kFunction = 1 << 7,
  };
  static constexpr uint16_t kAllFlags =
      kNumber | kInteger | kBigInt | kString | kBoolean | kNullish | kObject | kFunction;

  JSType() = default;

  static JSType nothing() { return JSType(); }
  static JSType anything();
  static JSType number() { return JSType(kNumber); }
  static JSType integer() { return JSType(kNumber | kInteger); }
  static JSType bigint() { return JSType(kBigInt); }
  static JSType string() { return JSType(kString); }
  static JSType boolean() { return JSType(kBoolean); }
  static JSType nullish() { return JSType(kNullish); }
  static JSType object();  // object with empty shape
  static JSType object(std::vector<std::string> properties, std::vector<std::string> methods,
                       std::map<std::string, JSType> members = {});
  static JSType function();  // function with unknown signature
  static JSType function(std::vector<JSType> params, JSType ret);

  uint16_t flags() const { return flags_; }
  bool has(Flag f) const { return flags_ & f; }
  bool is_nothing() const { return flags_ == 0; }
  bool is_anything() const { return (flags_ & kAllFlags) == kAllFlags; }
  bool may_be_nullish() const { return has(kNullish); }
  bool may_not_be_nullish() const { return (flags_ & ~kNullish) != 0; }

  const ObjectShape* shape() const { return shape_.get(); }
  const FunctionSignature* signature() const { return signature_.get(); }

  JSType union_with(const JSType& other) const;
  JSType intersect_flags(const JSType& other) const;
  bool intersects(const JSType& other) const { return (flags_ & other.flags_) != 0; }
  // Flagwise sub-union check.
  bool sub_union_of(const JSType& other) const { return (flags_ & ~other.flags_) == 0; }

  std::string describe() const;

  friend bool operator==(const JSType& a, const JSType& b);

 private:
  explicit JSType(uint16_t flags) : flags_(normalize(flags)) {}
  static uint16_t normalize(uint16_t flags) {
    if (flags & kInteger) flags |= kNumber;
    return flags;
  }

  uint16_t flags_ = 0;
  std::shared_ptr<const ObjectShape> shape_;
  std::shared_ptr<const FunctionSignature> signature_;
};

struct ObjectShape {
  std::vector<std::string> properties;
  std::vector<std::string> methods;
  std::map<std::string, JSType> members;  // annotations for both kinds

  bool has_member(const std::string& name) const;
  std::optional<JSType> member_type(const std::string& name) const;

  friend bool operator==(const ObjectShape&, const ObjectShape&);
};

struct FunctionSignature {
  std::vector<JSType> params;
  JSType ret;

  friend bool operator==(const FunctionSignature&, const FunctionSignature&);
};

// Raised only for v128, exnref and nullexnref (and their alias forms).
class UnsupportedTypeError : public std::runtime_error {
 public:
  explicit UnsupportedTypeError(const ValueType& offending)
      : std::runtime_error("unsupported type at the JS-Wasm interaction surface"),
        offending_(offending) {}
  const ValueType& offending() const { return offending_; }

 private:
  ValueType offending_;
};

// Shared JS shapes referenced by the conversion rules.
JSType js_array_type();
JSType js_array_buffer_type();

// Abstract view of a heap type: concrete struct/array/func definitions map
// to their abstract supertypes; abstract kinds map to themselves.
AbstractHeap convert_to_abstract_type(const HeapType& heap, const TypeDefs& defs);

// Wasm value type -> JS type. Throws UnsupportedTypeError for v128 and for
// references whose heap is exn or noexn.
JSType to_js_type(const ValueType& val_type, const TypeDefs& defs);

// Wasm object types -> JS templates.
JSType memory_js_type();
JSType table_js_type();
JSType global_js_type();
JSType tag_js_type();
JSType module_js_type();
JSType instance_js_type();
JSType function_js_type(const WasmFunctionType& fn, const TypeDefs& defs);
JSType wasm_object_to_js_type(const WasmExternType& t, const TypeDefs& defs);
JSType wasm_object_to_js_type(const WasmModuleType& t);
JSType wasm_object_to_js_type(const WasmInstanceType& t);

// JS type -> set of Wasm value types it can inhabit. Never returns v128 or
// exn-family references; the empty set is legal (e.g. for nothing).
std::vector<ValueType> to_wasm_value_types(const JSType& js_type);

// The abstract heap kinds eligible for (ref null H) under the nullish rule.
const std::vector<AbstractHeap>& supported_abstract_heaps();

}  // namespace weaver
