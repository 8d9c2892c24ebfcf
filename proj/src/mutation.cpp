// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#include "weaver/mutation.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace weaver {

namespace {

struct Analysis {
  WasmTypeRecord record;
  std::vector<TypeAnnotation> annotations;
};

Analysis analyze_into(const Program& p, const MutationEnv& env) {
  Analysis a;
  a.annotations = analyze(p, *env.env, a.record);
  return a;
}

// Dual-type compatibility: substituting `provided` where `expected` flows.
// JS types must intersect; when the expected variable carries Wasm value
// types, at least one (abstract or numeric) pair must satisfy matches();
// nonempty object-category sets must find a canonical-key twin. Records may
// differ, so concrete-heap value entries are skipped (conservative).
bool dual_compatible(const TypeAnnotation& expected, const WasmTypeRecord& expected_record,
                     const TypeAnnotation& provided, const WasmTypeRecord& provided_record) {
  if (!expected.js_type.intersects(provided.js_type)) return false;

  const auto& want_values = expected.wasm.of(TypeCategory::Value);
  const auto& have_values = provided.wasm.of(TypeCategory::Value);
  if (!want_values.empty()) {
    bool ok = false;
    for (uint32_t wi : want_values) {
      const ValueType& want = expected_record.values()[wi];
      if (want.is_ref() && !want.ref.heap.is_abstract) continue;
      for (uint32_t hi : have_values) {
        const ValueType& have = provided_record.values()[hi];
        if (have.is_ref() && !have.ref.heap.is_abstract) continue;
        if (matches(want, have, provided_record)) {
          ok = true;
          break;
        }
      }
      if (ok) break;
    }
    if (!ok) return false;
  }

  for (int c = 0; c < kTypeCategoryCount; ++c) {
    TypeCategory cat = static_cast<TypeCategory>(c);
    if (cat == TypeCategory::Value) continue;
    const auto& want_set = expected.wasm.of(cat);
    if (want_set.empty()) continue;
    const auto& have_set = provided.wasm.of(cat);
    bool ok = false;
    for (uint32_t wi : want_set) {
      std::string key = expected_record.key_of(cat, wi);
      for (uint32_t hi : have_set) {
        if (provided_record.key_of(cat, hi) == key) {
          ok = true;
          break;
        }
      }
      if (ok) break;
    }
    if (!ok) return false;
  }
  return true;
}

// A slice instruction relying on engine features outside the active profile
// disqualifies the whole slice.
bool instruction_in_profile(const Instruction& instr, const EngineProfile& profile) {
  switch (instr.op) {
    case Opcode::CreateWasmMemory: {
      const auto& m = std::get<WasmMemoryType>(instr.payload);
      return profile.memory64 || m.addrtype == AddrType::Addr32;
    }
    case Opcode::CreateWasmTable: {
      const auto& t = std::get<WasmTableType>(instr.payload);
      return profile.memory64 || t.addrtype == AddrType::Addr32;
    }
    case Opcode::CreateWasmTag:
      return profile.exceptions;
    default:
      return true;
  }
}

std::vector<size_t> top_level_indices(const Program& p) {
  std::vector<size_t> out;
  size_t depth = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    BlockRole role = opcode_contract(p.instructions[i].op).role;
    bool closes = role == BlockRole::CloseFunction || role == BlockRole::CloseTry ||
                  role == BlockRole::CloseLoop;
    if (closes && depth > 0) --depth;
    if (depth == 0) out.push_back(i);
    bool opens = role == BlockRole::OpenFunction || role == BlockRole::OpenTry ||
                 role == BlockRole::OpenLoop;
    if (opens) ++depth;
  }
  return out;
}

// End index (inclusive) of the block opened at `begin`.
std::optional<size_t> block_end(const Program& p, size_t begin) {
  size_t depth = 0;
  for (size_t i = begin; i < p.size(); ++i) {
    BlockRole role = opcode_contract(p.instructions[i].op).role;
    if (role == BlockRole::OpenFunction || role == BlockRole::OpenTry ||
        role == BlockRole::OpenLoop)
      ++depth;
    if (role == BlockRole::CloseFunction || role == BlockRole::CloseTry ||
        role == BlockRole::CloseLoop) {
      --depth;
      if (depth == 0) return i;
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<SpliceResult> splice(const Program& target, const Program& donor, Rng& rng,
                                   const MutationEnv& env) {
  if (donor.empty()) return std::nullopt;

  auto roots = top_level_indices(donor);
  if (roots.empty()) return std::nullopt;
  size_t root = roots[rng.below(roots.size())];

  // Definition index per variable.
  std::map<uint32_t, size_t> def_at;
  for (size_t i = 0; i < donor.size(); ++i)
    for (const Variable& out : donor.instructions[i].outputs) def_at[out.id] = i;

  // Backward slice: the root, definitions of everything it consumes, and
  // whole block spans for any block opener pulled in.
  std::set<size_t> slice;
  std::vector<size_t> work = {root};
  auto add = [&](auto&& self, size_t i) -> void {
    if (slice.count(i)) return;
    slice.insert(i);
    const Instruction& instr = donor.instructions[i];
    for (const Variable& in : instr.inputs) {
      auto it = def_at.find(in.id);
      if (it != def_at.end()) work.push_back(it->second);
    }
    BlockRole role = opcode_contract(instr.op).role;
    if (role == BlockRole::OpenFunction || role == BlockRole::OpenTry ||
        role == BlockRole::OpenLoop) {
      auto end = block_end(donor, i);
      if (!end) return;
      for (size_t j = i + 1; j <= *end; ++j) self(self, j);
    }
  };
  while (!work.empty()) {
    size_t i = work.back();
    work.pop_back();
    add(add, i);
  }

  std::vector<size_t> ordered(slice.begin(), slice.end());
  for (size_t i : ordered)
    if (!instruction_in_profile(donor.instructions[i], env.profile)) return std::nullopt;

  Analysis donor_analysis = analyze_into(donor, env);
  Analysis target_analysis = analyze_into(target, env);

  auto insert_points = [&] {
    std::vector<size_t> points;
    size_t depth = 0;
    for (size_t i = 0; i <= target.size(); ++i) {
      if (depth == 0) points.push_back(i);
      if (i == target.size()) break;
      BlockRole role = opcode_contract(target.instructions[i].op).role;
      if (role == BlockRole::OpenFunction || role == BlockRole::OpenTry ||
          role == BlockRole::OpenLoop)
        ++depth;
      if ((role == BlockRole::CloseFunction || role == BlockRole::CloseTry ||
           role == BlockRole::CloseLoop) &&
          depth > 0)
        --depth;
    }
    return points;
  }();
  size_t insertion = insert_points[rng.below(insert_points.size())];

  std::vector<Variable> visible = visible_variables_at(target, insertion);

  // Fresh ids for slice definitions; a random subset of the slice's
  // variables additionally remaps its uses onto compatible target variables.
  std::map<uint32_t, Variable> fresh;
  std::map<uint32_t, Variable> remap;
  std::vector<SpliceRemap> remap_log;
  uint32_t next_id = target.next_variable_id;
  for (size_t i : ordered) {
    for (const Variable& out : donor.instructions[i].outputs) {
      fresh[out.id] = Variable{next_id++};
    }
  }
  for (size_t i : ordered) {
    for (const Variable& out : donor.instructions[i].outputs) {
      if (!rng.chance(0.3)) continue;
      if (out.id >= donor_analysis.annotations.size()) continue;
      const TypeAnnotation& expected = donor_analysis.annotations[out.id];
      std::vector<Variable> candidates;
      for (Variable t : visible) {
        if (t.id >= target_analysis.annotations.size()) continue;
        if (dual_compatible(expected, donor_analysis.record, target_analysis.annotations[t.id],
                            target_analysis.record))
          candidates.push_back(t);
      }
      if (candidates.empty()) continue;
      Variable chosen = candidates[rng.below(candidates.size())];
      remap[out.id] = chosen;
      remap_log.push_back({fresh[out.id], chosen});
    }
  }

  Program result;
  result.next_variable_id = next_id;
  for (size_t i = 0; i < insertion; ++i) result.instructions.push_back(target.instructions[i]);
  for (size_t i : ordered) {
    Instruction instr = donor.instructions[i];
    for (Variable& in : instr.inputs) {
      auto rm = remap.find(in.id);
      if (rm != remap.end()) {
        in = rm->second;
        continue;
      }
      auto fr = fresh.find(in.id);
      if (fr == fresh.end()) return std::nullopt;  // closure must be complete
      in = fr->second;
    }
    for (Variable& out : instr.outputs) out = fresh.at(out.id);
    result.instructions.push_back(std::move(instr));
  }
  for (size_t i = insertion; i < target.size(); ++i)
    result.instructions.push_back(target.instructions[i]);

  if (!validate_program(result).ok()) return std::nullopt;
  return SpliceResult{std::move(result), std::move(remap_log), insertion, ordered.size()};
}

// --- operation mutator ---

std::optional<Program> operation_mutator(const Program& program, Rng& rng,
                                         const MutationEnv& env) {
  if (program.empty()) return std::nullopt;

  static const std::vector<std::string> kBinaryOps = {"+", "-", "*", "/", "%", "&", "|",
                                                      "^", "<<", ">>", "==", "===", "<", ">"};
  static const std::vector<std::string> kUnaryOps = {"!", "~", "-", "+", "typeof", "void"};
  static const std::vector<std::string> kNames = {"a", "b", "x", "p0", "length", "name",
                                                  "valueOf", "toString"};

  std::vector<size_t> candidates;
  for (size_t i = 0; i < program.size(); ++i) {
    switch (program.instructions[i].op) {
      case Opcode::LoadBuiltin:
      case Opcode::LoadNumber:
      case Opcode::LoadBigInt:
      case Opcode::LoadString:
      case Opcode::LoadBoolean:
      case Opcode::GetProperty:
      case Opcode::SetProperty:
      case Opcode::StoreBuiltin:
      case Opcode::BinaryOp:
      case Opcode::UnaryOp:
      case Opcode::BeginForLoop:
      case Opcode::CreateWasmMemory:
      case Opcode::CreateWasmTable:
      case Opcode::CreateWasmGlobal:
      case Opcode::CreateWasmTag:
        candidates.push_back(i);
        break;
      default:
        break;
    }
  }
  if (candidates.empty()) return std::nullopt;

  Program out = program;
  size_t index = candidates[rng.below(candidates.size())];
  Instruction& instr = out.instructions[index];
  Rng local(rng.next());

  switch (instr.op) {
    case Opcode::LoadBuiltin:
    case Opcode::StoreBuiltin: {
      const auto& names = env.env->builtin_names();
      auto& payload = std::get<NamePayload>(instr.payload);
      for (int attempt = 0; attempt < 8 && names.size() > 1; ++attempt) {
        std::string pick = names[local.below(names.size())];
        if (pick != payload.name) {
          payload.name = pick;
          break;
        }
      }
      break;
    }
    case Opcode::LoadNumber: {
      auto& payload = std::get<NumberPayload>(instr.payload);
      static const std::vector<double> kNumbers = {0, 1, -1, 2, 16, 63, 255, 0.5, 1e6, 3.14};
      payload.value = kNumbers[local.below(kNumbers.size())];
      break;
    }
    case Opcode::LoadBigInt:
      std::get<BigIntPayload>(instr.payload).value =
          static_cast<int64_t>(local.next() % 1000) - 500;
      break;
    case Opcode::LoadString:
      std::get<StringPayload>(instr.payload).value = kNames[local.below(kNames.size())];
      break;
    case Opcode::LoadBoolean:
      std::get<BooleanPayload>(instr.payload).value =
          !std::get<BooleanPayload>(instr.payload).value;
      break;
    case Opcode::GetProperty:
    case Opcode::SetProperty:
      std::get<NamePayload>(instr.payload).name = kNames[local.below(kNames.size())];
      break;
    case Opcode::BinaryOp: {
      auto& payload = std::get<OperatorPayload>(instr.payload);
      for (int attempt = 0; attempt < 8; ++attempt) {
        std::string pick = kBinaryOps[local.below(kBinaryOps.size())];
        if (pick != payload.op) {
          payload.op = pick;
          break;
        }
      }
      break;
    }
    case Opcode::UnaryOp:
      std::get<OperatorPayload>(instr.payload).op = kUnaryOps[local.below(kUnaryOps.size())];
      break;
    case Opcode::BeginForLoop:
      std::get<LoopPayload>(instr.payload).iterations =
          50 + static_cast<uint32_t>(local.below(451));
      break;
    case Opcode::CreateWasmMemory: {
      WasmMemoryType m;
      m.shared = local.chance(0.25);
      m.addrtype =
          env.profile.memory64 && local.chance(0.25) ? AddrType::Addr64 : AddrType::Addr32;
      m.initial = local.below(env.budget.memory_page_cap + 1);
      if (m.shared || local.chance(0.5))
        m.maximum = m.initial + local.below(env.budget.memory_page_cap + 1);
      instr.payload = m;
      break;
    }
    case Opcode::CreateWasmTable: {
      auto& payload = std::get<WasmTableType>(instr.payload);
      payload.element_type =
          payload.element_type == ValueType::funcref() ? ValueType::externref()
                                                       : ValueType::funcref();
      payload.initial = local.below(env.budget.table_size_cap + 1);
      break;
    }
    case Opcode::CreateWasmGlobal: {
      auto& payload = std::get<WasmGlobalType>(instr.payload);
      payload.content_type = basic_value_types()[local.below(basic_value_types().size())];
      payload.mutability = local.chance(0.5);
      break;
    }
    case Opcode::CreateWasmTag: {
      WasmTagType t;
      size_t params = local.below(5);
      for (size_t i = 0; i < params; ++i)
        t.parameters.push_back(basic_value_types()[local.below(basic_value_types().size())]);
      instr.payload = std::move(t);
      break;
    }
    default:
      return std::nullopt;
  }
  return out;
}

// --- input mutator ---

std::optional<Program> input_mutator(const Program& program, Rng& rng, const MutationEnv& env) {
  std::vector<size_t> candidates;
  for (size_t i = 0; i < program.size(); ++i)
    if (!program.instructions[i].inputs.empty()) candidates.push_back(i);
  if (candidates.empty()) return std::nullopt;

  Analysis analysis = analyze_into(program, env);

  size_t index = candidates[rng.below(candidates.size())];
  const Instruction& instr = program.instructions[index];
  size_t slot = rng.below(instr.inputs.size());
  Variable current = instr.inputs[slot];
  if (current.id >= analysis.annotations.size()) return std::nullopt;
  const TypeAnnotation& expected = analysis.annotations[current.id];

  std::vector<Variable> replacements;
  for (Variable v : visible_variables_at(program, index)) {
    if (v == current || v.id >= analysis.annotations.size()) continue;
    if (dual_compatible(expected, analysis.record, analysis.annotations[v.id], analysis.record))
      replacements.push_back(v);
  }
  if (replacements.empty()) return std::nullopt;

  Program out = program;
  out.instructions[index].inputs[slot] = replacements[rng.below(replacements.size())];
  if (!validate_program(out).ok()) return std::nullopt;
  return out;
}

// --- combine ---

Program combine(const Program& p, const Program& q) {
  Program out = p;
  uint32_t offset = p.next_variable_id;
  for (Instruction instr : q.instructions) {
    for (Variable& in : instr.inputs) in.id += offset;
    for (Variable& v : instr.outputs) v.id += offset;
    out.instructions.push_back(std::move(instr));
  }
  out.next_variable_id = p.next_variable_id + q.next_variable_id;
  return out;
}

const std::vector<const char*>& mutator_names() {
  static const std::vector<const char*> kNames = {"SpliceMutator", "OperationMutator",
                                                  "InputMutator", "CombineMutator"};
  return kNames;
}

MutationOutcome mutate_pipeline(const Program& seed, Rng& rng, SchedulerState& mutator_scheduler,
                                const std::vector<Program>& donors, const MutationEnv& env) {
  MutationOutcome outcome;
  outcome.program = seed;
  size_t k = 1 + rng.below(5);
  for (size_t step = 0; step < k; ++step) {
    size_t arm = mutator_scheduler.select(rng);
    std::optional<Program> next;
    switch (arm) {
      case 0: {
        if (!donors.empty()) {
          const Program& donor = donors[rng.below(donors.size())];
          if (auto r = splice(outcome.program, donor, rng, env)) next = std::move(r->program);
        }
        break;
      }
      case 1:
        next = operation_mutator(outcome.program, rng, env);
        break;
      case 2:
        next = input_mutator(outcome.program, rng, env);
        break;
      default:
        if (!donors.empty()) {
          const Program& donor = donors[rng.below(donors.size())];
          Program combined = combine(outcome.program, donor);
          if (validate_program(combined).ok()) next = std::move(combined);
        }
        break;
    }
    if (next && validate_program(*next).ok()) {
      outcome.program = std::move(*next);
      outcome.applied_arms.push_back(arm);
    }
  }
  outcome.noop = outcome.applied_arms.empty();
  return outcome;
}

}  // namespace weaver
