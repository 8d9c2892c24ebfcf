// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#include "weaver/profile.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace weaver {

EngineProfile EngineProfile::generic() {
  return EngineProfile{"generic", false, false, false, true, false, true};
}

EngineProfile EngineProfile::jsc() {
  // No memory64, multi-memory or relaxed SIMD.
  return EngineProfile{"jsc", false, false, false, true, true, true};
}

EngineProfile EngineProfile::v8() {
  return EngineProfile{"v8", true, true, true, true, true, true};
}

EngineProfile EngineProfile::spidermonkey() {
  return EngineProfile{"spidermonkey", true, true, true, true, true, true};
}

EngineProfile EngineProfile::by_name(const std::string& name) {
  if (name == "jsc") return jsc();
  if (name == "v8") return v8();
  if (name == "spidermonkey") return spidermonkey();
  if (name == "generic") return generic();
  throw std::runtime_error("unknown engine profile: " + name);
}

EngineProfile EngineProfile::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  EngineProfile p = generic();
  p.name = j.value("name", std::string("custom"));
  p.memory64 = j.value("memory64", p.memory64);
  p.multi_memory = j.value("multiMemory", p.multi_memory);
  p.relaxed_simd = j.value("relaxedSimd", p.relaxed_simd);
  p.simd = j.value("simd", p.simd);
  p.gc = j.value("gc", p.gc);
  p.exceptions = j.value("exceptions", p.exceptions);
  return p;
}

std::string EngineProfile::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["memory64"] = memory64;
  j["multiMemory"] = multi_memory;
  j["relaxedSimd"] = relaxed_simd;
  j["simd"] = simd;
  j["gc"] = gc;
  j["exceptions"] = exceptions;
  return j.dump(2);
}

}  // namespace weaver
