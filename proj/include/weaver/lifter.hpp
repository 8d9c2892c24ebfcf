// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

#include "weaver/ir.hpp"

namespace weaver {

class UnliftableProgram : public std::runtime_error {
 public:
  explicit UnliftableProgram(const std::string& what) : std::runtime_error(what) {}
};

// Translates a validated program to executable JavaScript source text.
// Deterministic: identical programs yield identical text. Output is UTF-8,
// one statement per line, terminated with a final newline.
std::string lift(const Program& program);

}  // namespace weaver
