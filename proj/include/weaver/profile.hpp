// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

namespace weaver {

// Per-engine feature mask restricting generation to what the target
// supports. Loadable from a JSON file {"memory64": false, ...}.
struct EngineProfile {
  std::string name = "generic";
  bool memory64 = false;
  bool multi_memory = false;
  bool relaxed_simd = false;
  bool simd = true;
  bool gc = false;
  bool exceptions = true;

  static EngineProfile generic();
  static EngineProfile jsc();
  static EngineProfile v8();
  static EngineProfile spidermonkey();
  static EngineProfile by_name(const std::string& name);

  static EngineProfile from_json_file(const std::string& path);
  std::string to_json() const;
};

}  // namespace weaver
