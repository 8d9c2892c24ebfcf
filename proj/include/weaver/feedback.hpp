// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "weaver/executor.hpp"
#include "weaver/ir.hpp"

namespace weaver {

// Interestingness oracle guiding test-case preservation. Deterministic given
// identical inputs and internal state.
class FeedbackSource {
 public:
  virtual ~FeedbackSource() = default;
  // True when the (program, outcome) pair is novel.
  virtual bool evaluate(const Program& program, const Outcome& outcome) = 0;
  virtual std::string describe() const = 0;
};

// Engine-less stand-in for coverage: a per-program feature set built from
// opcode bigrams, Wasm category usage, import/export kind pairs and
// cross-boundary dataflow edges. Novel iff any feature is unseen.
class StructuralFeedback final : public FeedbackSource {
 public:
  bool evaluate(const Program& program, const Outcome& outcome) override;
  std::string describe() const override { return "structural"; }

  static std::set<uint64_t> features_of(const Program& program);
  size_t seen_features() const { return seen_.size(); }

 private:
  std::set<uint64_t> seen_;
};

// Consumes a per-run coverage dump (raw byte array; index = counter) written
// by an instrumented engine. Novel iff a previously-unseen index becomes
// nonzero. A missing dump downgrades to known with a warning.
class CoverageFileFeedback final : public FeedbackSource {
 public:
  explicit CoverageFileFeedback(std::string dump_path) : dump_path_(std::move(dump_path)) {}
  bool evaluate(const Program& program, const Outcome& outcome) override;
  std::string describe() const override { return "coverage-file"; }

  size_t bitmap_cardinality() const;

 private:
  std::string dump_path_;
  std::vector<uint8_t> bitmap_;
  bool warned_missing_ = false;
};

}  // namespace weaver
