// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic stand-in for a JS engine shell: a lightweight parse check
// followed by a scripted outcome table keyed on the source hash. Lets the
// full fuzzing loop run and be reproduced byte-for-byte with no real engine.

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "weaver/common.hpp"

namespace {

// Bracket/quote balance over JS-shaped text. Good enough to reject truncated
// or mangled inputs while accepting everything the lifter emits.
bool parse_check(const std::string& src) {
  std::vector<char> stack;
  bool in_string = false;
  bool escaped = false;
  for (char c : src) {
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      } else if (c == '\n') {
        return false;  // unterminated string literal
      }
      continue;
    }
    switch (c) {
      case '"': in_string = true; break;
      case '(': case '[': case '{': stack.push_back(c); break;
      case ')':
        if (stack.empty() || stack.back() != '(') return false;
        stack.pop_back();
        break;
      case ']':
        if (stack.empty() || stack.back() != '[') return false;
        stack.pop_back();
        break;
      case '}':
        if (stack.empty() || stack.back() != '{') return false;
        stack.pop_back();
        break;
      default: break;
    }
  }
  return stack.empty() && !in_string;
}

}  // namespace

int main(int argc, char** argv) {
  bool check_only = false;
  std::string path;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--check") check_only = true;
    else path = arg;  // last non-flag argument is the source file
  }
  if (path.empty()) {
    fprintf(stderr, "usage: weaver-stub-shell [--check] [engine args...] file.js\n");
    return 2;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fprintf(stderr, "cannot open %s\n", path.c_str());
    return 2;
  }
  std::string source((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (!parse_check(source)) {
    fprintf(stderr, "SyntaxError: unbalanced program\n");
    return 3;
  }
  if (check_only) return 0;

  uint64_t hash = weaver::fnv1a(source);
  uint64_t roll = hash % 1000;
  if (roll < 870) return 0;
  if (roll < 950) {
    fprintf(stderr, "Error: synthetic runtime error (roll=%llu)\n",
            static_cast<unsigned long long>(roll));
    return 1;
  }
  if (roll < 975) {
    sleep(600);  // runs into the harness timeout
    return 0;
  }
  if (roll < 990) abort();
  fprintf(stderr, "ASSERTION FAILED: synthetic invariant violated\n");
  return 1;
}
