// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "weaver/scheduler.hpp"

namespace weaver {

struct EngineConfig {
  std::string shell_path;
  std::vector<std::string> extra_args;
  int timeout_ms = 600;
  std::string profile_name = "generic";  // selects the crash-marker list
  std::string coverage_dump_path;        // consumed by coverage_file_feedback
};

struct Outcome {
  OutcomeKind kind = OutcomeKind::Valid;
  int exit_status = 0;  // exit code, or signal number for crashes
  int duration_ms = 0;
  std::string stderr_excerpt;  // first 4 KiB
};

class EngineUnavailable : public std::runtime_error {
 public:
  explicit EngineUnavailable(const std::string& what) : std::runtime_error(what) {}
};

// Runs the shell on the source (via a temp file argument), enforces the
// timeout, classifies the result. Valid <=> exit 0 within the timeout;
// Timeout <=> killed at the deadline; Crash <=> terminated by signal or the
// stderr carries an engine-specific abort marker; RuntimeError otherwise.
Outcome execute(const std::string& source, const EngineConfig& cfg);

// Engine-specific assertion/abort markers used for crash triage.
const std::vector<std::string>& crash_markers(const std::string& profile_name);

}  // namespace weaver
