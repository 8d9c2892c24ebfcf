// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Test-only oracles, written independently of the implementations they
// check. Keep this file free of calls into the canonicalizer, the subtyping
// routine, or the conversion algorithms.

#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "weaver/wasm_types.hpp"

namespace weaver::oracles {

// --- structural-isomorphism oracle for composite definitions ---
//
// Coinductive equivalence on type graphs: two definitions are equivalent iff
// no finite unfolding distinguishes them. The assumption set makes cyclic
// graphs terminate (standard bisimulation check by candidate pairs).

class DefEquivalence {
 public:
  DefEquivalence(const TypeDefs& a, const TypeDefs& b) : a_(a), b_(b) {}

  bool equivalent(uint32_t ia, uint32_t ib) {
    assumed_.clear();
    return defs_eq(ia, ib);
  }

  bool values_equivalent(const ValueType& va, const ValueType& vb) {
    assumed_.clear();
    return value_eq(va, vb);
  }

 private:
  bool defs_eq(uint32_t ia, uint32_t ib) {
    if (ia >= a_.size() || ib >= b_.size()) return false;
    auto key = std::make_pair(ia, ib);
    if (assumed_.count(key)) return true;
    assumed_.insert(key);
    const CompositeDef& da = a_[ia];
    const CompositeDef& db = b_[ib];
    if (da.shape.index() != db.shape.index()) return false;
    if (const auto* sa = std::get_if<StructShape>(&da.shape)) {
      const auto& sb = std::get<StructShape>(db.shape);
      if (sa->fields.size() != sb.fields.size()) return false;
      for (size_t i = 0; i < sa->fields.size(); ++i)
        if (!field_eq(sa->fields[i], sb.fields[i])) return false;
      return true;
    }
    if (const auto* aa = std::get_if<ArrayShape>(&da.shape)) {
      return field_eq(aa->element, std::get<ArrayShape>(db.shape).element);
    }
    const auto& fa = std::get<FuncShape>(da.shape);
    const auto& fb = std::get<FuncShape>(db.shape);
    if (fa.params.size() != fb.params.size() || fa.results.size() != fb.results.size())
      return false;
    for (size_t i = 0; i < fa.params.size(); ++i)
      if (!value_eq(fa.params[i], fb.params[i])) return false;
    for (size_t i = 0; i < fa.results.size(); ++i)
      if (!value_eq(fa.results[i], fb.results[i])) return false;
    return true;
  }

  bool field_eq(const FieldType& fa, const FieldType& fb) {
    if (fa.mutable_ != fb.mutable_) return false;
    if (fa.storage.packed != fb.storage.packed) return false;
    if (fa.storage.packed != StorageType::Packed::None) return true;
    return value_eq(fa.storage.value, fb.storage.value);
  }

  bool value_eq(const ValueType& va, const ValueType& vb) {
    if (va.kind != vb.kind) return false;
    if (va.is_num()) return va.num == vb.num;
    if (va.is_v128()) return true;
    if (va.ref.nullable != vb.ref.nullable) return false;
    if (va.ref.heap.is_abstract != vb.ref.heap.is_abstract) return false;
    if (va.ref.heap.is_abstract) return va.ref.heap.abstract_kind == vb.ref.heap.abstract_kind;
    return defs_eq(va.ref.heap.index, vb.ref.heap.index);
  }

  const TypeDefs& a_;
  const TypeDefs& b_;
  std::set<std::pair<uint32_t, uint32_t>> assumed_;
};

// --- abstract-heap subtype oracle matrix ---
//
// Hand-written truth table for "sub <= super" over the abstract hierarchy,
// transcribed directly from the modeled rules: reflexivity; none below i31,
// struct, array (and through them eq, any); eq below any; nofunc below func;
// noextern below extern; noexn below exn.

inline bool abstract_subtype_matrix(AbstractHeap sub, AbstractHeap super) {
  using H = AbstractHeap;
  if (sub == super) return true;
  switch (super) {
    case H::Any:
      return sub == H::Eq || sub == H::I31 || sub == H::Struct || sub == H::Array ||
             sub == H::None;
    case H::Eq:
      return sub == H::I31 || sub == H::Struct || sub == H::Array || sub == H::None;
    case H::I31:
    case H::Struct:
    case H::Array:
      return sub == H::None;
    case H::Func:
      return sub == H::NoFunc;
    case H::Extern:
      return sub == H::NoExtern;
    case H::Exn:
      return sub == H::NoExn;
    default:
      return false;
  }
}

inline const std::vector<AbstractHeap>& all_abstract_heaps() {
  static const std::vector<AbstractHeap> kAll = {
      AbstractHeap::Any,    AbstractHeap::Eq,       AbstractHeap::I31,  AbstractHeap::Struct,
      AbstractHeap::Array,  AbstractHeap::Func,     AbstractHeap::Extern, AbstractHeap::Exn,
      AbstractHeap::None,   AbstractHeap::NoFunc,   AbstractHeap::NoExtern,
      AbstractHeap::NoExn,
  };
  return kAll;
}

// Value-type oracle on top of the matrix. Only covers abstract-heap
// references and numeric/v128 types; concrete refs are exercised through
// dedicated tests.
inline bool value_matches_matrix(const ValueType& required, const ValueType& provided) {
  auto same_num = [](const ValueType& x, const ValueType& y) {
    return x.is_num() && y.is_num() && x.num == y.num;
  };
  if (same_num(required, provided)) return true;
  if (required.is_v128() && provided.is_v128()) return true;
  if (!required.is_ref() || !provided.is_ref()) return false;
  if (!required.ref.heap.is_abstract || !provided.ref.heap.is_abstract) return false;
  if (provided.ref.nullable && !required.ref.nullable) return false;
  return abstract_subtype_matrix(provided.ref.heap.abstract_kind,
                                 required.ref.heap.abstract_kind);
}

// --- JS -> Wasm coercion oracle ---
//
// Independent transcription of the JS-to-Wasm coercion table: for each
// primitive flag, the exact set of Wasm value types it may inhabit. Built as
// literal lists, not by running the conversion algorithm.

struct CoercionEntry {
  const char* flag_name;
  std::vector<ValueType> contributed;
};

inline std::vector<CoercionEntry> coercion_matrix() {
  using V = ValueType;
  using H = AbstractHeap;
  auto rn = [](H h) { return V::ref_abstract(h, true); };
  auto r = [](H h) { return V::ref_abstract(h, false); };
  std::vector<CoercionEntry> rows;
  rows.push_back({"nullish",
                  {rn(H::Any), rn(H::Eq), rn(H::I31), rn(H::Struct), rn(H::Array), rn(H::Func),
                   rn(H::Extern), rn(H::None), rn(H::NoFunc), rn(H::NoExtern)}});
  rows.push_back({"integer", {V::i32(), V::f32(), V::f64(), r(H::I31), rn(H::I31)}});
  rows.push_back({"number", {V::f32(), V::f64()}});
  rows.push_back({"bigint", {V::i64()}});
  rows.push_back({"string", {}});
  rows.push_back({"boolean", {}});
  rows.push_back({"object", {}});
  rows.push_back({"function", {r(H::Func), rn(H::Func)}});
  // Any non-nullish flag present additionally contributes the generic
  // external/internal reference quartet.
  rows.push_back({"<non-nullish>", {r(H::Any), r(H::Extern), rn(H::Any), rn(H::Extern)}});
  return rows;
}

}  // namespace weaver::oracles
