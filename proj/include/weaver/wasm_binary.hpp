// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include "weaver/common.hpp"
#include "weaver/wasm_types.hpp"

namespace weaver {

// The import/export/type-definition skeleton of a module; function bodies
// and other internals are left to a synthesizer.
using ModuleShape = WasmModuleType;

class MalformedModule : public std::runtime_error {
 public:
  MalformedModule(const std::string& what, size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  size_t offset() const { return offset_; }

 private:
  size_t offset_;
};

class SynthesisError : public std::runtime_error {
 public:
  explicit SynthesisError(const std::string& what) : std::runtime_error(what) {}
};

class ShapeTooLarge : public SynthesisError {
 public:
  explicit ShapeTooLarge(const std::string& what) : SynthesisError(what) {}
};

// Normal form of a shape: only type definitions reachable from import and
// export types are kept, renumbered in first-traversal order, with duplicate
// (bisimilar) definitions merged.
ModuleShape canonicalize_shape(const ModuleShape& shape);

// Structural equality through canonical keys; robust to local renumbering.
bool shapes_equal(const ModuleShape& a, const ModuleShape& b);
std::string shape_fingerprint(const ModuleShape& shape);

// Emits a binary module (magic 0x00 0x61 0x73 0x6D, version 1) whose import
// and export sections realize the shape exactly: imports declared as given;
// every export backed by a fresh definition (or, when `seed` selects it and
// an identically-typed import exists, a re-export of that import). Exported
// functions get stub bodies returning default values. Throws SynthesisError
// when the shape needs a non-defaultable value the stub emitter cannot
// produce.
Bytes encode_shape_module(const ModuleShape& shape, uint64_t seed);

// Decodes the type, import and export sections into a canonical ModuleShape;
// code, data and element contents are ignored. Throws MalformedModule with
// the offending byte offset.
ModuleShape parse_shape(std::span<const uint8_t> bytes);

}  // namespace weaver
