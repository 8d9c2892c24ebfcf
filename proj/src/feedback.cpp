// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#include "weaver/feedback.hpp"

#include <cstdio>
#include <fstream>

namespace weaver {

namespace {

uint64_t feature(const char* tag, uint64_t a, uint64_t b = 0) {
  uint64_t h = fnv1a(std::string(tag));
  uint8_t bytes[16];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<uint8_t>(a >> (8 * i));
  for (int i = 0; i < 8; ++i) bytes[8 + i] = static_cast<uint8_t>(b >> (8 * i));
  return fnv1a(std::span<const uint8_t>(bytes, 16), h);
}

}  // namespace

std::set<uint64_t> StructuralFeedback::features_of(const Program& program) {
  std::set<uint64_t> features;
  const auto& instructions = program.instructions;

  std::vector<const Instruction*> def_of;
  def_of.resize(program.next_variable_id, nullptr);
  for (const Instruction& instr : instructions)
    for (const Variable& out : instr.outputs)
      if (out.id < def_of.size()) def_of[out.id] = &instr;

  for (size_t i = 0; i < instructions.size(); ++i) {
    uint64_t op = static_cast<uint64_t>(instructions[i].op);
    features.insert(feature("op", op));
    if (i + 1 < instructions.size())
      features.insert(feature("bigram", op, static_cast<uint64_t>(instructions[i + 1].op)));

    if (is_wasm_opcode(instructions[i].op)) features.insert(feature("wasm-cat", op));

    // Cross-boundary dataflow edges.
    for (const Variable& in : instructions[i].inputs) {
      const Instruction* def = in.id < def_of.size() ? def_of[in.id] : nullptr;
      if (!def) continue;
      bool def_wasm = is_wasm_opcode(def->op);
      bool use_wasm = is_wasm_opcode(instructions[i].op);
      if (!def_wasm && use_wasm)
        features.insert(feature("js-into-wasm", static_cast<uint64_t>(def->op), op));
      if (def_wasm && !use_wasm)
        features.insert(feature("wasm-into-js", static_cast<uint64_t>(def->op), op));
    }

    if (instructions[i].op == Opcode::CompileWasmModule) {
      const auto& shape = std::get<WasmModulePayload>(instructions[i].payload).shape;
      for (const auto& imp : shape.imports)
        features.insert(feature("import-kind", static_cast<uint64_t>(imp.type.kind())));
      for (const auto& exp : shape.exports)
        features.insert(feature("export-kind", static_cast<uint64_t>(exp.type.kind())));
      for (const auto& imp : shape.imports)
        for (const auto& exp : shape.exports)
          features.insert(feature("import-export-pair", static_cast<uint64_t>(imp.type.kind()),
                                  static_cast<uint64_t>(exp.type.kind())));
    }
  }
  return features;
}

bool StructuralFeedback::evaluate(const Program& program, const Outcome&) {
  auto features = features_of(program);
  bool novel = false;
  for (uint64_t f : features) {
    if (seen_.insert(f).second) novel = true;
  }
  return novel;
}

bool CoverageFileFeedback::evaluate(const Program&, const Outcome&) {
  std::ifstream in(dump_path_, std::ios::binary);
  if (!in) {
    if (!warned_missing_) {
      fprintf(stderr, "warning: coverage dump missing at %s; treating runs as known\n",
              dump_path_.c_str());
      warned_missing_ = true;
    }
    return false;
  }
  std::vector<uint8_t> dump((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
  if (bitmap_.size() < dump.size()) bitmap_.resize(dump.size(), 0);
  bool novel = false;
  for (size_t i = 0; i < dump.size(); ++i) {
    if (dump[i] && !bitmap_[i]) {
      bitmap_[i] = 1;
      novel = true;
    }
  }
  return novel;
}

size_t CoverageFileFeedback::bitmap_cardinality() const {
  size_t n = 0;
  for (uint8_t b : bitmap_) n += b ? 1 : 0;
  return n;
}

}  // namespace weaver
