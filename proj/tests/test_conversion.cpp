// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>

#include "doctest.h"
#include "oracles.hpp"
#include "weaver/common.hpp"
#include "weaver/conversion.hpp"

using namespace weaver;

namespace {

bool contains(const std::vector<ValueType>& set, const ValueType& t) {
  return std::find(set.begin(), set.end(), t) != set.end();
}

bool has_method(const JSType& t, const std::string& name) {
  return t.shape() && std::find(t.shape()->methods.begin(), t.shape()->methods.end(), name) !=
                          t.shape()->methods.end();
}

bool has_property(const JSType& t, const std::string& name) {
  return t.shape() && std::find(t.shape()->properties.begin(), t.shape()->properties.end(),
                                name) != t.shape()->properties.end();
}

}  // namespace

TEST_CASE("JSType lattice basics") {
  CHECK(JSType::integer().has(JSType::kNumber));  // integer refines number
  CHECK(JSType::nothing().is_nothing());
  CHECK(JSType::anything().is_anything());
  CHECK(JSType::number().union_with(JSType::string()).has(JSType::kString));
  CHECK(JSType::number().intersects(JSType::integer()));
  CHECK_FALSE(JSType::number().intersects(JSType::bigint()));
  CHECK(JSType::anything().intersects(JSType::bigint()));
  CHECK(JSType::integer().sub_union_of(JSType::anything()));

  // Lattice laws on the flag component.
  std::vector<JSType> samples = {JSType::number(),  JSType::integer(), JSType::bigint(),
                                 JSType::string(),  JSType::boolean(), JSType::nullish(),
                                 JSType::object(),  JSType::function(), JSType::anything(),
                                 JSType::nothing()};
  for (const auto& a : samples) {
    CHECK(a.union_with(a).flags() == a.flags());
    CHECK(a.intersect_flags(a).flags() == a.flags());
    for (const auto& b : samples) {
      CHECK(a.union_with(b).flags() == b.union_with(a).flags());
      CHECK(a.intersect_flags(b).flags() == b.intersect_flags(a).flags());
      CHECK(a.union_with(a.intersect_flags(b)).flags() == a.flags());  // absorption
    }
  }
}

TEST_CASE("value type conversion follows the case table") {
  TypeDefs no_defs;
  CHECK(to_js_type(ValueType::i32(), no_defs) == JSType::number());
  CHECK(to_js_type(ValueType::f32(), no_defs) == JSType::number());
  CHECK(to_js_type(ValueType::f64(), no_defs) == JSType::number());
  CHECK(to_js_type(ValueType::i64(), no_defs) == JSType::bigint());
  CHECK_THROWS_AS(to_js_type(ValueType::v128(), no_defs), UnsupportedTypeError);

  // Reference dispatch on the abstract heap.
  JSType struct_ref = to_js_type(ValueType::ref_abstract(AbstractHeap::Struct, false), no_defs);
  CHECK(struct_ref.has(JSType::kObject));
  CHECK_FALSE(struct_ref.has(JSType::kNullish));

  JSType nullable_struct =
      to_js_type(ValueType::ref_abstract(AbstractHeap::Struct, true), no_defs);
  CHECK(nullable_struct.has(JSType::kObject));
  CHECK(nullable_struct.has(JSType::kNullish));

  JSType array_ref = to_js_type(ValueType::ref_abstract(AbstractHeap::Array, false), no_defs);
  CHECK(array_ref.has(JSType::kObject));

  JSType func_ref = to_js_type(ValueType::ref_abstract(AbstractHeap::Func, false), no_defs);
  CHECK(func_ref.has(JSType::kFunction));

  JSType i31_ref = to_js_type(ValueType::ref_abstract(AbstractHeap::I31, false), no_defs);
  CHECK(i31_ref == JSType::number());

  // Default arm: anything (extern and the remaining abstract kinds).
  CHECK(to_js_type(ValueType::ref_abstract(AbstractHeap::Extern, false), no_defs).is_anything());
  CHECK(to_js_type(ValueType::ref_abstract(AbstractHeap::Any, false), no_defs).is_anything());
  CHECK(to_js_type(ValueType::ref_abstract(AbstractHeap::None, false), no_defs).is_anything());

  // The exn family raises in both alias and expanded spelling.
  CHECK_THROWS_AS(to_js_type(ValueType::exnref(), no_defs), UnsupportedTypeError);
  CHECK_THROWS_AS(to_js_type(ValueType::nullexnref(), no_defs), UnsupportedTypeError);
  CHECK_THROWS_AS(to_js_type(ValueType::ref_abstract(AbstractHeap::Exn, false), no_defs),
                  UnsupportedTypeError);
  CHECK_THROWS_AS(to_js_type(ValueType::ref_abstract(AbstractHeap::NoExn, false), no_defs),
                  UnsupportedTypeError);
}

TEST_CASE("concrete heap types convert through their abstract supertypes") {
  TypeDefs defs;
  defs.push_back({StructShape{{FieldType{StorageType::of(ValueType::i32()), false}}}});
  defs.push_back({ArrayShape{FieldType{StorageType::of(ValueType::i64()), true}}});
  defs.push_back({FuncShape{{ValueType::i32()}, {ValueType::i32()}}});

  CHECK(convert_to_abstract_type(HeapType::abstract(AbstractHeap::I31), defs) ==
        AbstractHeap::I31);
  CHECK(convert_to_abstract_type(HeapType::concrete(0), defs) == AbstractHeap::Struct);
  CHECK(convert_to_abstract_type(HeapType::concrete(1), defs) == AbstractHeap::Array);
  CHECK(convert_to_abstract_type(HeapType::concrete(2), defs) == AbstractHeap::Func);
  CHECK_THROWS_AS(convert_to_abstract_type(HeapType::concrete(5), defs), UnresolvedTypeIndex);

  JSType via_concrete = to_js_type(ValueType::ref_type(HeapType::concrete(0), false), defs);
  CHECK(via_concrete.has(JSType::kObject));
}

TEST_CASE("object type conversion matches the conversion-rule table") {
  TypeDefs no_defs;

  JSType memory = memory_js_type();
  CHECK(memory.shape()->properties == std::vector<std::string>{"buffer"});
  CHECK(memory.shape()->methods ==
        std::vector<std::string>{"grow", "toResizableBuffer", "toFixedLengthBuffer"});
  CHECK(memory.shape()->member_type("buffer")->has(JSType::kObject));

  JSType table = table_js_type();
  CHECK(table.shape()->properties == std::vector<std::string>{"length"});
  CHECK(table.shape()->methods == std::vector<std::string>{"get", "grow", "set"});
  CHECK(table.shape()->member_type("get")->signature()->ret.is_anything());
  CHECK(table.shape()->member_type("set")->signature()->params.size() == 2);

  JSType global = global_js_type();
  CHECK(global.shape()->properties == std::vector<std::string>{"value"});
  CHECK(global.shape()->methods == std::vector<std::string>{"valueOf"});
  CHECK(global.shape()->member_type("value")->is_anything());  // deliberately imprecise
  CHECK(global.shape()->member_type("valueOf")->signature()->ret.is_anything());

  JSType tag = tag_js_type();
  CHECK(tag.shape()->properties.empty());
  CHECK(tag.shape()->methods.empty());

  JSType module = module_js_type();
  CHECK(module.shape()->properties.empty());
  CHECK(module.shape()->methods.empty());

  JSType instance = instance_js_type();
  CHECK(instance.shape()->properties == std::vector<std::string>{"exports"});
  CHECK(instance.shape()->methods.empty());
  CHECK(instance.shape()->member_type("exports")->has(JSType::kObject));

  // Function rows: zero, one, many results.
  JSType f0 = function_js_type(WasmFunctionType{{ValueType::i32()}, {}}, no_defs);
  REQUIRE(f0.signature());
  CHECK(f0.signature()->params.size() == 1);
  CHECK(f0.signature()->params[0] == JSType::number());
  CHECK(f0.signature()->ret == JSType::nullish());  // undefined

  JSType f1 = function_js_type(WasmFunctionType{{ValueType::i32()}, {ValueType::i64()}}, no_defs);
  CHECK(f1.signature()->ret == JSType::bigint());

  JSType f2 = function_js_type(
      WasmFunctionType{{}, {ValueType::i32(), ValueType::i32()}}, no_defs);
  CHECK(f2.signature()->ret == js_array_type());

  // Unsupported signature members propagate the error.
  CHECK_THROWS_AS(function_js_type(WasmFunctionType{{ValueType::v128()}, {}}, no_defs),
                  UnsupportedTypeError);

  WasmExternType as_extern;
  as_extern.type = WasmMemoryType{1, std::nullopt, AddrType::Addr32, false};
  CHECK(wasm_object_to_js_type(as_extern, no_defs) == memory_js_type());
}

TEST_CASE("JS-to-Wasm conversion agrees with the hand-built coercion matrix") {
  auto rows = oracles::coercion_matrix();
  auto row = [&](const std::string& name) -> const oracles::CoercionEntry& {
    for (const auto& r : rows)
      if (name == r.flag_name) return r;
    REQUIRE(false);
    static oracles::CoercionEntry dummy{"", {}};
    return dummy;
  };

  SUBCASE("nullish") {
    auto set = to_wasm_value_types(JSType::nullish());
    for (const auto& t : row("nullish").contributed) CHECK(contains(set, t));
    CHECK(set.size() == row("nullish").contributed.size());
  }

  SUBCASE("integer") {
    auto set = to_wasm_value_types(JSType::integer());
    for (const auto& t : row("integer").contributed) CHECK(contains(set, t));
    for (const auto& t : row("<non-nullish>").contributed) CHECK(contains(set, t));
    // number flag is implied by integer
    for (const auto& t : row("number").contributed) CHECK(contains(set, t));
    CHECK_FALSE(contains(set, ValueType::i64()));
  }

  SUBCASE("plain number excludes i32 and i31") {
    auto set = to_wasm_value_types(JSType::number());
    CHECK(contains(set, ValueType::f32()));
    CHECK(contains(set, ValueType::f64()));
    CHECK_FALSE(contains(set, ValueType::i32()));
    CHECK_FALSE(contains(set, ValueType::ref_abstract(AbstractHeap::I31, false)));
  }

  SUBCASE("bigint") {
    auto set = to_wasm_value_types(JSType::bigint());
    CHECK(contains(set, ValueType::i64()));
    CHECK(contains(set, ValueType::ref_abstract(AbstractHeap::Any, false)));
    CHECK(contains(set, ValueType::ref_abstract(AbstractHeap::Extern, false)));
    CHECK_FALSE(contains(set, ValueType::i32()));
  }

  SUBCASE("function shapes add func references") {
    auto set = to_wasm_value_types(JSType::function());
    CHECK(contains(set, ValueType::ref_abstract(AbstractHeap::Func, false)));
    CHECK(contains(set, ValueType::funcref()));
  }

  SUBCASE("exhaustive flag-union agreement with the matrix") {
    // Every union of primitive flags; expected set assembled from the matrix
    // rows independently of the implementation.
    for (uint16_t mask = 0; mask < 256; ++mask) {
      JSType t = JSType::nothing();
      if (mask & 1) t = t.union_with(JSType::number());
      if (mask & 2) t = t.union_with(JSType::integer());
      if (mask & 4) t = t.union_with(JSType::bigint());
      if (mask & 8) t = t.union_with(JSType::string());
      if (mask & 16) t = t.union_with(JSType::boolean());
      if (mask & 32) t = t.union_with(JSType::nullish());
      if (mask & 64) t = t.union_with(JSType::object());
      if (mask & 128) t = t.union_with(JSType::function());

      std::vector<ValueType> expected;
      auto add_row = [&](const char* name) {
        for (const auto& v : row(name).contributed)
          if (!contains(expected, v)) expected.push_back(v);
      };
      if (t.has(JSType::kNullish)) add_row("nullish");
      if (t.has(JSType::kInteger)) add_row("integer");
      if ((t.flags() & ~JSType::kNullish) != 0) add_row("<non-nullish>");
      if (t.has(JSType::kNumber)) add_row("number");
      if (t.has(JSType::kBigInt)) add_row("bigint");
      if (t.has(JSType::kFunction)) add_row("function");

      auto actual = to_wasm_value_types(t);
      CHECK(actual.size() == expected.size());
      for (const auto& v : expected) CHECK(contains(actual, v));
    }
  }
}

TEST_CASE("conversion output never contains excluded types") {
  Rng rng(0x5eedc0de);
  for (int iter = 0; iter < 2000; ++iter) {
    JSType t = JSType::nothing();
    if (rng.chance(0.3)) t = t.union_with(JSType::number());
    if (rng.chance(0.3)) t = t.union_with(JSType::integer());
    if (rng.chance(0.3)) t = t.union_with(JSType::bigint());
    if (rng.chance(0.3)) t = t.union_with(JSType::string());
    if (rng.chance(0.3)) t = t.union_with(JSType::nullish());
    if (rng.chance(0.3)) t = t.union_with(JSType::object());
    if (rng.chance(0.3)) t = t.union_with(JSType::function());
    for (const auto& v : to_wasm_value_types(t)) {
      CHECK_FALSE(is_excluded_from_interaction(v));
      CHECK_FALSE(v == ValueType::v128());
      CHECK_FALSE(v == ValueType::exnref());
      CHECK_FALSE(v == ValueType::nullexnref());
    }
  }
}

TEST_CASE("round-trip containment between the two conversion directions") {
  TypeDefs no_defs;
  CHECK(contains(to_wasm_value_types(JSType::integer()), ValueType::i32()));
  CHECK(contains(to_wasm_value_types(JSType::bigint()), ValueType::i64()));
  // Every supported nullable abstract reference: to_js_type includes nullish
  // and the type reappears under to_wasm_value_types(nullish).
  for (AbstractHeap h : supported_abstract_heaps()) {
    ValueType r = ValueType::ref_abstract(h, true);
    JSType js = to_js_type(r, no_defs);
    CHECK(js.has(JSType::kNullish));
    CHECK(contains(to_wasm_value_types(JSType::nullish()), r));
  }
}

TEST_CASE("monotonicity: flagwise sub-unions convert to subsets") {
  Rng rng(0x5eedc0df);
  auto flag_type = [&](uint16_t mask) {
    JSType t = JSType::nothing();
    if (mask & 1) t = t.union_with(JSType::number());
    if (mask & 2) t = t.union_with(JSType::integer());
    if (mask & 4) t = t.union_with(JSType::bigint());
    if (mask & 8) t = t.union_with(JSType::string());
    if (mask & 16) t = t.union_with(JSType::boolean());
    if (mask & 32) t = t.union_with(JSType::nullish());
    if (mask & 64) t = t.union_with(JSType::object());
    if (mask & 128) t = t.union_with(JSType::function());
    return t;
  };
  for (int iter = 0; iter < 500; ++iter) {
    uint16_t sup = static_cast<uint16_t>(rng.below(256));
    uint16_t sub = static_cast<uint16_t>(sup & rng.below(256));
    JSType t_sub = flag_type(sub);
    JSType t_sup = flag_type(sup);
    REQUIRE(t_sub.sub_union_of(t_sup));
    auto set_sub = to_wasm_value_types(t_sub);
    auto set_sup = to_wasm_value_types(t_sup);
    for (const auto& v : set_sub) CHECK(contains(set_sup, v));
  }
}
