// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#include "weaver/conversion.hpp"

#include <algorithm>

namespace weaver {

bool ObjectShape::has_member(const std::string& name) const {
  return std::find(properties.begin(), properties.end(), name) != properties.end() ||
         std::find(methods.begin(), methods.end(), name) != methods.end();
}

std::optional<JSType> ObjectShape::member_type(const std::string& name) const {
  auto it = members.find(name);
  if (it != members.end()) return it->second;
  return std::nullopt;
}

bool operator==(const ObjectShape& a, const ObjectShape& b) {
  return a.properties == b.properties && a.methods == b.methods && a.members == b.members;
}

bool operator==(const FunctionSignature& a, const FunctionSignature& b) {
  return a.params == b.params && a.ret == b.ret;
}

bool operator==(const JSType& a, const JSType& b) {
  if (a.flags_ != b.flags_) return false;
  auto ptr_eq = [](const auto& x, const auto& y) {
    if (!x && !y) return true;
    if (!x || !y) return false;
    return *x == *y;
  };
  return ptr_eq(a.shape_, b.shape_) && ptr_eq(a.signature_, b.signature_);
}

JSType JSType::anything() {
  JSType t(kAllFlags);
  return t;
}

JSType JSType::object() {
  JSType t(kObject);
  t.shape_ = std::make_shared<const ObjectShape>();
  return t;
}

JSType JSType::object(std::vector<std::string> properties, std::vector<std::string> methods,
                      std::map<std::string, JSType> members) {
  JSType t(kObject);
  t.shape_ = std::make_shared<const ObjectShape>(
      ObjectShape{std::move(properties), std::move(methods), std::move(members)});
  return t;
}

JSType JSType::function() { return JSType(kFunction); }

JSType JSType::function(std::vector<JSType> params, JSType ret) {
  JSType t(kFunction);
  t.signature_ =
      std::make_shared<const FunctionSignature>(FunctionSignature{std::move(params), std::move(ret)});
  return t;
}

JSType JSType::union_with(const JSType& other) const {
  JSType out(static_cast<uint16_t>(flags_ | other.flags_));
  // Keep a shape when only one side carries one; when both do, keep the
  // common members (imprecision over wrong precision).
  if (shape_ && other.shape_) {
    ObjectShape merged;
    for (const auto& p : shape_->properties)
      if (other.shape_->has_member(p)) merged.properties.push_back(p);
    for (const auto& m : shape_->methods)
      if (other.shape_->has_member(m)) merged.methods.push_back(m);
    for (const auto& [name, ty] : shape_->members)
      if (merged.properties.size() + merged.methods.size() > 0 &&
          (std::find(merged.properties.begin(), merged.properties.end(), name) !=
               merged.properties.end() ||
           std::find(merged.methods.begin(), merged.methods.end(), name) != merged.methods.end()))
        merged.members.emplace(name, ty);
    out.shape_ = std::make_shared<const ObjectShape>(std::move(merged));
  } else if (shape_) {
    out.shape_ = shape_;
  } else if (other.shape_) {
    out.shape_ = other.shape_;
  }
  if (signature_ && other.signature_) {
    if (*signature_ == *other.signature_) out.signature_ = signature_;
  } else if (signature_) {
    out.signature_ = signature_;
  } else if (other.signature_) {
    out.signature_ = other.signature_;
  }
  return out;
}

JSType JSType::intersect_flags(const JSType& other) const {
  return JSType(static_cast<uint16_t>(flags_ & other.flags_));
}

std::string JSType::describe() const {
  if (is_nothing()) return "nothing";
  if (is_anything()) return "anything";
  std::string s;
  auto add = [&](const char* name) {
    if (!s.empty()) s += '|';
    s += name;
  };
  if (has(kInteger)) add("integer");
  else if (has(kNumber)) add("number");
  if (has(kBigInt)) add("bigint");
  if (has(kString)) add("string");
  if (has(kBoolean)) add("boolean");
  if (has(kNullish)) add("nullish");
  if (has(kObject)) add("object");
  if (has(kFunction)) add("function");
  return s;
}

JSType js_array_type() {
  return JSType::object({"length"}, {"at", "push", "pop", "slice", "indexOf"},
                        {{"length", JSType::integer()}});
}

JSType js_array_buffer_type() {
  return JSType::object({"byteLength"}, {"slice"}, {{"byteLength", JSType::integer()}});
}

AbstractHeap convert_to_abstract_type(const HeapType& heap, const TypeDefs& defs) {
  if (heap.is_abstract) return heap.abstract_kind;
  if (heap.index >= defs.size()) throw UnresolvedTypeIndex(heap.index);
  const CompositeDef& def = defs[heap.index];
  if (def.is_struct()) return AbstractHeap::Struct;
  if (def.is_array()) return AbstractHeap::Array;
  return AbstractHeap::Func;
}

JSType to_js_type(const ValueType& val_type, const TypeDefs& defs) {
  switch (val_type.kind) {
    case ValueType::Kind::Num:
      switch (val_type.num) {
        case NumKind::I32:
        case NumKind::F32:
        case NumKind::F64:
          return JSType::number();
        case NumKind::I64:
          return JSType::bigint();
      }
      break;
    case ValueType::Kind::V128:
      throw UnsupportedTypeError(val_type);
    case ValueType::Kind::Ref: {
      const RefType& ref = val_type.ref;
      if (ref.heap.is_abstract && (ref.heap.abstract_kind == AbstractHeap::Exn ||
                                   ref.heap.abstract_kind == AbstractHeap::NoExn)) {
        throw UnsupportedTypeError(val_type);
      }
      JSType js = JSType::nothing();
      switch (convert_to_abstract_type(ref.heap, defs)) {
        case AbstractHeap::Struct:
        case AbstractHeap::Array:
          js = JSType::object();
          break;
        case AbstractHeap::Func:
          js = JSType::function();
          break;
        case AbstractHeap::I31:
          js = JSType::number();
          break;
        default:
          js = JSType::anything();
          break;
      }
      if (ref.nullable) js = js.union_with(JSType::nullish());
      return js;
    }
  }
  return JSType::nothing();
}

JSType memory_js_type() {
  return JSType::object({"buffer"}, {"grow", "toResizableBuffer", "toFixedLengthBuffer"},
                        {{"buffer", js_array_buffer_type()},
                         {"grow", JSType::function({JSType::number()}, JSType::number())},
                         {"toResizableBuffer", JSType::function({}, js_array_buffer_type())},
                         {"toFixedLengthBuffer", JSType::function({}, js_array_buffer_type())}});
}

JSType table_js_type() {
  return JSType::object({"length"}, {"get", "grow", "set"},
                        {{"length", JSType::integer()},
                         {"get", JSType::function({JSType::number()}, JSType::anything())},
                         {"grow", JSType::function({JSType::number()}, JSType::number())},
                         {"set", JSType::function({JSType::number(), JSType::anything()},
                                                  JSType::nullish())}});
}

JSType global_js_type() {
  return JSType::object({"value"}, {"valueOf"},
                        {{"value", JSType::anything()},
                         {"valueOf", JSType::function({}, JSType::anything())}});
}

JSType tag_js_type() { return JSType::object(); }

JSType module_js_type() { return JSType::object(); }

JSType instance_js_type() {
  return JSType::object({"exports"}, {}, {{"exports", JSType::object()}});
}

JSType function_js_type(const WasmFunctionType& fn, const TypeDefs& defs) {
  std::vector<JSType> params;
  for (const auto& p : fn.parameters) params.push_back(to_js_type(p, defs));
  JSType ret = JSType::nullish();  // zero results -> undefined
  if (fn.results.size() == 1) {
    ret = to_js_type(fn.results[0], defs);
  } else if (fn.results.size() >= 2) {
    ret = js_array_type();
  }
  return JSType::function(std::move(params), std::move(ret));
}

JSType wasm_object_to_js_type(const WasmExternType& t, const TypeDefs& defs) {
  switch (t.kind()) {
    case ExternKind::Memory: return memory_js_type();
    case ExternKind::Table: return table_js_type();
    case ExternKind::Global: return global_js_type();
    case ExternKind::Tag: return tag_js_type();
    case ExternKind::Function: return function_js_type(t.function(), defs);
  }
  return JSType::object();
}

JSType wasm_object_to_js_type(const WasmModuleType&) { return module_js_type(); }

JSType wasm_object_to_js_type(const WasmInstanceType&) { return instance_js_type(); }

const std::vector<AbstractHeap>& supported_abstract_heaps() {
  static const std::vector<AbstractHeap> kHeaps = {
      AbstractHeap::Any,  AbstractHeap::Eq,      AbstractHeap::I31,   AbstractHeap::Struct,
      AbstractHeap::Array, AbstractHeap::Func,   AbstractHeap::Extern, AbstractHeap::None,
      AbstractHeap::NoFunc, AbstractHeap::NoExtern,
  };
  return kHeaps;
}

std::vector<ValueType> to_wasm_value_types(const JSType& js_type) {
  std::vector<ValueType> out;
  auto add = [&](const ValueType& t) {
    if (is_excluded_from_interaction(t)) return;
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  };

  if (js_type.may_be_nullish()) {
    for (AbstractHeap h : supported_abstract_heaps()) add(ValueType::ref_abstract(h, true));
  }
  if (js_type.has(JSType::kInteger)) {
    add(ValueType::i32());
    add(ValueType::f32());
    add(ValueType::f64());
    add(ValueType::ref_abstract(AbstractHeap::I31, false));
    add(ValueType::ref_abstract(AbstractHeap::I31, true));
  }
  if (js_type.may_not_be_nullish()) {
    add(ValueType::ref_abstract(AbstractHeap::Any, false));
    add(ValueType::ref_abstract(AbstractHeap::Extern, false));
    add(ValueType::ref_abstract(AbstractHeap::Any, true));
    add(ValueType::ref_abstract(AbstractHeap::Extern, true));
  }
  if (js_type.has(JSType::kNumber)) {
    add(ValueType::f32());
    add(ValueType::f64());
  }
  if (js_type.has(JSType::kBigInt)) {
    add(ValueType::i64());
  }
  if (js_type.has(JSType::kFunction)) {
    add(ValueType::ref_abstract(AbstractHeap::Func, false));
    add(ValueType::ref_abstract(AbstractHeap::Func, true));
  }
  return out;
}

}  // namespace weaver
