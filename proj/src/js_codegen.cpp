// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#include "weaver/js_codegen.hpp"

#include <algorithm>

namespace weaver {

namespace {

// Names assigned to generated objects. `toString`/`valueOf` stay out of the
// write pools: clobbering them with non-callables poisons every later
// implicit conversion of the receiver.
const std::vector<std::string>& property_name_pool() {
  static const std::vector<std::string> kNames = {"a", "b", "x", "p0", "p1", "length", "name"};
  return kNames;
}

const std::vector<std::string>& read_property_pool() {
  static const std::vector<std::string> kNames = {"a", "b", "x", "p0", "length",
                                                  "name", "valueOf", "toString"};
  return kNames;
}

std::optional<Variable> pick(Rng& rng, const std::vector<Variable>& vars) {
  if (vars.empty()) return std::nullopt;
  return vars[rng.below(vars.size())];
}

// Variables that may not be null/undefined-only; receivers drawn from here
// avoid guaranteed TypeErrors on member access.
std::vector<Variable> non_nullish_pool(const GenerationContext& ctx) {
  std::vector<Variable> out;
  for (Variable v : ctx.visible_variables()) {
    if (ctx.annotation(v).js_type.may_not_be_nullish()) out.push_back(v);
  }
  return out;
}

// Callees must be known functions: an anything-typed variable technically
// carries the function flag but is almost never callable.
std::vector<Variable> callable_pool(const GenerationContext& ctx) {
  std::vector<Variable> out;
  for (Variable v : ctx.query_js(JSType::function())) {
    if (!ctx.annotation(v).js_type.is_anything()) out.push_back(v);
  }
  return out;
}

// Argument matching the wanted JS type when one exists, with known types
// preferred over anything-typed matches. Missing primitives are materialized
// as literals; anything-typed variables are the recorded fallback.
std::optional<Variable> pick_argument(Rng& rng, GenerationContext& ctx, const JSType& want) {
  auto matching = ctx.query_js(want);
  std::vector<Variable> precise;
  for (Variable v : matching)
    if (!ctx.annotation(v).js_type.is_anything()) precise.push_back(v);
  if (!precise.empty()) return precise[rng.below(precise.size())];

  if (want.has(JSType::kNumber))
    return ctx.append(Opcode::LoadNumber, {}, NumberPayload{double(rng.below(3))}).outputs[0];
  if (want.has(JSType::kBigInt))
    return ctx.append(Opcode::LoadBigInt, {}, BigIntPayload{int64_t(rng.below(3))}).outputs[0];
  if (want.has(JSType::kString))
    return ctx.append(Opcode::LoadString, {}, StringPayload{"x"}).outputs[0];
  if (want.has(JSType::kBoolean))
    return ctx.append(Opcode::LoadBoolean, {}, BooleanPayload{rng.chance(0.5)}).outputs[0];

  if (!matching.empty()) {
    ++ctx.fallback_count;
    return matching[rng.below(matching.size())];
  }
  auto any = ctx.visible_variables();
  if (any.empty()) return std::nullopt;
  ++ctx.fallback_count;
  return any[rng.below(any.size())];
}

// Type-aware operator selection: arithmetic stays on numeric pairs, bigints
// never mix with numbers, instanceof/in get the operand kinds they demand.
bool binary_op_statement(Rng& rng, GenerationContext& ctx) {
  auto vars = ctx.visible_variables();
  if (vars.empty()) return false;

  auto numbers = ctx.query_js(JSType::number());
  auto bigints = ctx.query_js(JSType::bigint());
  auto objects = ctx.query_js(JSType::object());
  auto functions = ctx.query_js(JSType::function());

  static const std::vector<std::string> kNumericOps = {"+", "-", "*", "/", "%", "&",
                                                       "|", "^", "<<", ">>", "<", ">"};
  static const std::vector<std::string> kBigIntOps = {"+", "-", "*", "&", "|", "^", "<", ">"};
  static const std::vector<std::string> kSafeOps = {"==", "===", "!=", "!==", "&&", "||"};

  struct Choice {
    std::string op;
    Variable a, b;
  };
  std::vector<Choice> choices;
  auto pure = [&](const std::vector<Variable>& pool, uint16_t flag) {
    std::vector<Variable> out;
    for (Variable v : pool) {
      uint16_t flags = ctx.annotation(v).js_type.flags();
      if ((flags & JSType::kBigInt) && flag != JSType::kBigInt) continue;
      if (flag == JSType::kBigInt && (flags & ~(JSType::kBigInt)) != 0) continue;
      out.push_back(v);
    }
    return out;
  };
  auto pure_numbers = pure(numbers, JSType::kNumber);
  auto pure_bigints = pure(bigints, JSType::kBigInt);
  if (!pure_numbers.empty())
    choices.push_back({rng.pick(kNumericOps), *pick(rng, pure_numbers), *pick(rng, pure_numbers)});
  if (!pure_bigints.empty())
    choices.push_back({rng.pick(kBigIntOps), *pick(rng, pure_bigints), *pick(rng, pure_bigints)});
  choices.push_back({rng.pick(kSafeOps), *pick(rng, vars), *pick(rng, vars)});
  auto callables = callable_pool(ctx);
  if (!callables.empty())
    choices.push_back({"instanceof", *pick(rng, vars), *pick(rng, callables)});
  auto strings = ctx.query_js(JSType::string());
  if (!objects.empty() && !strings.empty())
    choices.push_back({"in", *pick(rng, strings), *pick(rng, objects)});

  const Choice& c = choices[rng.below(choices.size())];
  ctx.append(Opcode::BinaryOp, {c.a, c.b}, OperatorPayload{c.op});
  return true;
}

bool unary_op_statement(Rng& rng, GenerationContext& ctx) {
  auto vars = ctx.visible_variables();
  if (vars.empty()) return false;
  Variable v = *pick(rng, vars);
  uint16_t flags = ctx.annotation(v).js_type.flags();
  static const std::vector<std::string> kAnyOps = {"!", "typeof", "void"};
  static const std::vector<std::string> kNumericOps = {"!", "~", "-", "+", "typeof", "void"};
  static const std::vector<std::string> kBigIntOps = {"!", "~", "-", "typeof", "void"};
  const std::vector<std::string>* pool = &kAnyOps;
  bool is_number = (flags & JSType::kNumber) && !(flags & JSType::kBigInt);
  bool is_bigint = (flags & JSType::kBigInt) && !(flags & ~JSType::kBigInt);
  if (is_number) pool = &kNumericOps;
  else if (is_bigint) pool = &kBigIntOps;
  ctx.append(Opcode::UnaryOp, {v}, OperatorPayload{rng.pick(*pool)});
  return true;
}

// Body filler for wrappers and function bodies. Always appends something.
void simple_statement(Rng& rng, GenerationContext& ctx) {
  switch (rng.below(8)) {
    case 0: if (binary_op_statement(rng, ctx)) return; break;
    case 1: if (unary_op_statement(rng, ctx)) return; break;
    case 2: if (property_get_generator(rng, ctx)) return; break;
    case 3: if (property_set_generator(rng, ctx)) return; break;
    case 4: if (call_generator(rng, ctx)) return; break;
    case 5: if (object_literal_generator(rng, ctx)) return; break;
    case 6: if (array_literal_generator(rng, ctx)) return; break;
    default: break;
  }
  primitive_literal_generator(rng, ctx);
}

}  // namespace

bool builtin_generator(Rng& rng, GenerationContext& ctx) {
  const auto& names = ctx.env().builtin_names();
  if (names.empty()) return false;
  ctx.append(Opcode::LoadBuiltin, {}, NamePayload{names[rng.below(names.size())]});
  return true;
}

bool primitive_literal_generator(Rng& rng, GenerationContext& ctx) {
  switch (rng.below(5)) {
    case 0: {
      static const std::vector<double> kNumbers = {0,    1,   -1,    2,       16,     31,
                                                   42,   0.5, 3.14,  -0.0,    1e6,    2147483647.0,
                                                   63.0, 255, 65536, 1e-3,    1024.0, 7};
      ctx.append(Opcode::LoadNumber, {}, NumberPayload{rng.pick(kNumbers)});
      break;
    }
    case 1: {
      static const std::vector<std::string> kStrings = {"", "a", "x1", "wasm", "valueOf",
                                                        "anyfunc", "externref", "{}", "[0,1]"};
      ctx.append(Opcode::LoadString, {}, StringPayload{rng.pick(kStrings)});
      break;
    }
    case 2:
      ctx.append(Opcode::LoadBoolean, {}, BooleanPayload{rng.chance(0.5)});
      break;
    case 3:
      ctx.append(Opcode::LoadNull, {});
      break;
    default:
      ctx.append(Opcode::LoadUndefined, {});
      break;
  }
  return true;
}

bool bigint_literal_generator(Rng& rng, GenerationContext& ctx) {
  static const std::vector<int64_t> kValues = {0, 1, -1, 2, 255, 4294967296ll,
                                               -4294967296ll, 9007199254740993ll};
  ctx.append(Opcode::LoadBigInt, {}, BigIntPayload{rng.pick(kValues)});
  return true;
}

bool object_literal_generator(Rng& rng, GenerationContext& ctx) {
  auto vars = ctx.visible_variables();
  size_t count = rng.below(std::min<size_t>(vars.size(), 3) + 1);
  PropertyListPayload payload;
  std::vector<Variable> inputs;
  for (size_t i = 0; i < count; ++i) {
    std::string name = rng.pick(property_name_pool());
    if (std::find(payload.names.begin(), payload.names.end(), name) != payload.names.end())
      continue;
    payload.names.push_back(name);
    inputs.push_back(vars[rng.below(vars.size())]);
  }
  ctx.append(Opcode::CreateObject, std::move(inputs), std::move(payload));
  return true;
}

bool array_literal_generator(Rng& rng, GenerationContext& ctx) {
  auto vars = ctx.visible_variables();
  size_t count = vars.empty() ? 0 : rng.below(5);
  std::vector<Variable> inputs;
  for (size_t i = 0; i < count; ++i) inputs.push_back(vars[rng.below(vars.size())]);
  ctx.append(Opcode::CreateArray, std::move(inputs));
  return true;
}

bool property_get_generator(Rng& rng, GenerationContext& ctx) {
  auto objects = ctx.query_js(JSType::object().union_with(JSType::function()));
  auto receiver = pick(rng, objects.empty() ? non_nullish_pool(ctx) : objects);
  if (!receiver) return false;
  const auto& ann = ctx.annotation(*receiver);
  std::string name;
  if (ann.js_type.shape() && !rng.chance(0.2)) {
    const ObjectShape& shape = *ann.js_type.shape();
    // Reading properties keeps them attached; detaching methods produces
    // functions that throw when called without their receiver.
    const auto& pool = !shape.properties.empty() && !rng.chance(0.25) ? shape.properties
                                                                      : shape.methods;
    if (!pool.empty()) name = pool[rng.below(pool.size())];
  }
  if (name.empty()) name = rng.pick(read_property_pool());
  ctx.append(Opcode::GetProperty, {*receiver}, NamePayload{name});
  return true;
}

bool property_set_generator(Rng& rng, GenerationContext& ctx) {
  auto vars = ctx.visible_variables();
  if (vars.empty()) return false;
  std::vector<Variable> objects;
  for (Variable v : ctx.query_js(JSType::object()))
    if (!ctx.annotation(v).js_type.is_anything()) objects.push_back(v);
  auto receiver = pick(rng, objects.empty() ? non_nullish_pool(ctx) : objects);
  if (!receiver) return false;
  Variable value = vars[rng.below(vars.size())];
  ctx.append(Opcode::SetProperty, {*receiver, value},
             NamePayload{rng.pick(property_name_pool())});
  return true;
}

namespace {

bool method_call(Rng& rng, GenerationContext& ctx) {
  std::vector<Variable> shaped;
  for (Variable v : ctx.query_js(JSType::object())) {
    const auto& ann = ctx.annotation(v);
    if (ann.js_type.shape() && !ann.js_type.shape()->methods.empty()) shaped.push_back(v);
  }
  if (shaped.empty()) return false;
  Variable receiver = shaped[rng.below(shaped.size())];
  const ObjectShape& shape = *ctx.annotation(receiver).js_type.shape();
  // Buffer-reshaping methods are absent from older shells; keep them out of
  // the call mix unless nothing else is available.
  std::vector<std::string> pool;
  for (const auto& m : shape.methods)
    if (m != "toResizableBuffer" && m != "toFixedLengthBuffer") pool.push_back(m);
  if (pool.empty()) pool = shape.methods;
  std::string method = pool[rng.below(pool.size())];
  std::vector<Variable> inputs = {receiver};
  if (auto member = shape.member_type(method); member && member->signature()) {
    for (const JSType& param : member->signature()->params) {
      auto arg = pick_argument(rng, ctx, param);
      if (!arg) break;
      inputs.push_back(*arg);
    }
  }
  ctx.append(Opcode::CallMethod, std::move(inputs), NamePayload{method});
  return true;
}

}  // namespace

bool call_generator(Rng& rng, GenerationContext& ctx) {
  // Method calls keep receivers attached; prefer them half the time.
  bool try_method_first = rng.chance(0.5);
  if (try_method_first && method_call(rng, ctx)) return true;

  auto fns = callable_pool(ctx);
  {
    // Wasm-exported functions and locally defined ones call fine detached;
    // builtin constructors and value-returning members usually do not.
    std::vector<Variable> safe;
    for (Variable v : fns) {
      const auto& ann = ctx.annotation(v);
      const FunctionSignature* sig = ann.js_type.signature();
      if (!ann.wasm.of(TypeCategory::Function).empty() || !sig || sig->ret.is_anything())
        safe.push_back(v);
    }
    fns = std::move(safe);
  }
  if (!fns.empty()) {
    Variable callee = fns[rng.below(fns.size())];
    std::vector<Variable> inputs = {callee};
    const FunctionSignature* sig = ctx.annotation(callee).js_type.signature();
    if (sig) {
      for (const JSType& param : sig->params) {
        auto arg = pick_argument(rng, ctx, param);
        if (!arg) break;
        inputs.push_back(*arg);
      }
    } else {
      auto vars = ctx.visible_variables();
      size_t argc = vars.empty() ? 0 : rng.below(3);
      for (size_t i = 0; i < argc; ++i) inputs.push_back(vars[rng.below(vars.size())]);
    }
    ctx.append(Opcode::CallFunction, std::move(inputs));
    return true;
  }
  if (!try_method_first && method_call(rng, ctx)) return true;
  return false;
}

bool construct_generator(Rng& rng, GenerationContext& ctx) {
  auto fns = callable_pool(ctx);
  if (fns.empty()) return false;
  // Constructor-shaped candidates: either a plain function (no signature) or
  // a template whose result is an object; plain value-returning members like
  // Math.abs are not constructible.
  std::vector<Variable> ctors;
  for (Variable v : fns) {
    const FunctionSignature* sig = ctx.annotation(v).js_type.signature();
    if (!sig || sig->ret.has(JSType::kObject) || sig->ret.has(JSType::kFunction))
      ctors.push_back(v);
  }
  if (ctors.empty()) return false;
  Variable ctor = ctors[rng.below(ctors.size())];
  std::vector<Variable> inputs = {ctor};
  if (const FunctionSignature* sig = ctx.annotation(ctor).js_type.signature()) {
    for (const JSType& param : sig->params) {
      auto arg = pick_argument(rng, ctx, param);
      if (!arg) break;
      inputs.push_back(*arg);
    }
  }
  ctx.append(Opcode::Construct, std::move(inputs));
  return true;
}

bool function_definition_generator(Rng& rng, GenerationContext& ctx) {
  uint32_t params = static_cast<uint32_t>(rng.below(4));
  ctx.append(Opcode::BeginFunction, {}, FunctionPayload{params});
  size_t statements = 1 + rng.below(3);
  for (size_t i = 0; i < statements; ++i) simple_statement(rng, ctx);
  if (rng.chance(0.5)) {
    auto vars = ctx.visible_variables();
    if (!vars.empty()) ctx.append(Opcode::Return, {vars[rng.below(vars.size())]});
  }
  ctx.append(Opcode::EndFunction, {});
  return true;
}

bool prototype_overwrite_generator(Rng& rng, GenerationContext& ctx) {
  auto all = ctx.visible_variables();
  if (all.size() < 2) return false;
  std::vector<Variable> objects;
  for (Variable v : ctx.query_js(JSType::object()))
    if (!ctx.annotation(v).js_type.is_anything()) objects.push_back(v);
  auto receivers = objects.empty() ? non_nullish_pool(ctx) : objects;
  if (receivers.empty()) return false;
  // Receiver and value prefer object-typed variables, falling back to any.
  Variable receiver = receivers[rng.below(receivers.size())];
  auto choose_value = [&]() -> std::optional<Variable> {
    for (int attempt = 0; attempt < 4; ++attempt) {
      const auto& pool = !objects.empty() && attempt < 2 ? objects : all;
      Variable v = pool[rng.below(pool.size())];
      if (!(v == receiver)) return v;
    }
    for (Variable v : all)
      if (!(v == receiver)) return v;
    return std::nullopt;
  };
  auto value = choose_value();
  if (!value) return false;
  ctx.append(Opcode::SetProperty, {receiver, *value}, NamePayload{"__proto__"});
  return true;
}

bool builtin_overwrite_generator(Rng& rng, GenerationContext& ctx) {
  auto vars = ctx.visible_variables();
  if (vars.empty()) return false;
  const auto& names = ctx.env().builtin_names();
  if (names.empty()) return false;
  ctx.append(Opcode::StoreBuiltin, {vars[rng.below(vars.size())]},
             NamePayload{names[rng.below(names.size())]});
  return true;
}

bool try_wrap_generator(Rng& rng, GenerationContext& ctx, const CodegenOptions& opts) {
  if (ctx.scope_depth() >= static_cast<size_t>(opts.max_wrap_depth)) return false;
  ctx.append(Opcode::BeginTry, {});
  size_t statements = 1 + rng.below(2);
  for (size_t i = 0; i < statements; ++i) simple_statement(rng, ctx);
  ctx.append(Opcode::BeginCatch, {});
  if (rng.chance(0.5)) simple_statement(rng, ctx);
  ctx.append(Opcode::EndTry, {});
  return true;
}

bool loop_wrap_generator(Rng& rng, GenerationContext& ctx, const CodegenOptions& opts) {
  if (ctx.scope_depth() >= static_cast<size_t>(opts.max_wrap_depth)) return false;
  uint32_t iterations = 50 + static_cast<uint32_t>(rng.below(451));
  ctx.append(Opcode::BeginForLoop, {}, LoopPayload{iterations});
  // Repeated calls provoke the tiered-compilation paths. Plain function
  // calls only: stateful methods like grow() blow their limits when hammered
  // a few hundred times.
  std::vector<Variable> fns;
  for (Variable v : callable_pool(ctx)) {
    const auto& ann = ctx.annotation(v);
    const FunctionSignature* sig = ann.js_type.signature();
    if (!ann.wasm.of(TypeCategory::Function).empty() || !sig || sig->ret.is_anything())
      fns.push_back(v);
  }
  if (!fns.empty()) {
    Variable callee = fns[rng.below(fns.size())];
    std::vector<Variable> inputs = {callee};
    if (const FunctionSignature* sig = ctx.annotation(callee).js_type.signature()) {
      for (const JSType& param : sig->params) {
        auto arg = pick_argument(rng, ctx, param);
        if (!arg) break;
        inputs.push_back(*arg);
      }
    }
    ctx.append(Opcode::CallFunction, std::move(inputs));
  } else {
    size_t statements = 1 + rng.below(2);
    for (size_t i = 0; i < statements; ++i) simple_statement(rng, ctx);
  }
  ctx.append(Opcode::EndForLoop, {});
  return true;
}

const std::vector<Generator>& generator_registry() {
  static const std::vector<Generator> kRegistry = [] {
    std::vector<Generator> g;
    auto js = [&](std::string name, bool (*fn)(Rng&, GenerationContext&)) {
      g.push_back({std::move(name), false,
                   [fn](Rng& rng, GenerationContext& ctx, const CodegenOptions&) {
                     return fn(rng, ctx);
                   }});
    };
    js("BuiltinGenerator", builtin_generator);
    js("PrimitiveLiteralGenerator", primitive_literal_generator);
    js("BigIntLiteralGenerator", bigint_literal_generator);
    js("ObjectLiteralGenerator", object_literal_generator);
    js("ArrayLiteralGenerator", array_literal_generator);
    js("PropertyGetGenerator", property_get_generator);
    js("PropertySetGenerator", property_set_generator);
    js("CallGenerator", call_generator);
    js("ConstructGenerator", construct_generator);
    js("FunctionDefinitionGenerator", function_definition_generator);
    js("PrototypeOverwriteGenerator", prototype_overwrite_generator);
    js("BuiltinOverwriteGenerator", builtin_overwrite_generator);
    g.push_back({"TryWrapGenerator", false, try_wrap_generator});
    g.push_back({"LoopWrapGenerator", false, loop_wrap_generator});

    g.push_back({"WasmMemoryGenerator", true,
                 [](Rng& rng, GenerationContext& ctx, const CodegenOptions& opts) {
                   return gen_wasm_memory(rng, ctx, opts.budget).has_value();
                 }});
    g.push_back({"WasmTableGenerator", true,
                 [](Rng& rng, GenerationContext& ctx, const CodegenOptions& opts) {
                   return gen_wasm_table(rng, ctx, opts.budget).has_value();
                 }});
    g.push_back({"WasmGlobalGenerator", true,
                 [](Rng& rng, GenerationContext& ctx, const CodegenOptions&) {
                   return gen_wasm_global(rng, ctx).has_value();
                 }});
    g.push_back({"WasmTagGenerator", true,
                 [](Rng& rng, GenerationContext& ctx, const CodegenOptions&) {
                   return gen_wasm_tag(rng, ctx).has_value();
                 }});
    g.push_back({"WasmInstanceAndExportGenerator", true,
                 [](Rng& rng, GenerationContext& ctx, const CodegenOptions& opts) {
                   if (!opts.synthesizer) return false;
                   return gen_instance_and_exports(rng, ctx, opts.budget, *opts.synthesizer)
                       .has_value();
                 }});
    return g;
  }();
  return kRegistry;
}

}  // namespace weaver
