// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/stat.h>

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "weaver/campaign.hpp"
#include "weaver/lifter.hpp"

using namespace weaver;
namespace fs = std::filesystem;

namespace {

std::string write_script(const std::string& name, const std::string& body) {
  std::string path = "/tmp/weaver-test-" + name + ".sh";
  std::ofstream out(path);
  out << "#!/bin/sh\n" << body << "\n";
  out.close();
  chmod(path.c_str(), 0755);
  return path;
}

std::string stub_shell_path() {
  const char* env = getenv("WEAVER_STUB_SHELL");
  if (env && *env) return env;
  return "";
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::path("/tmp") / ("weaver-test-" + name + "-" + std::to_string(getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Program tiny_program() {
  ProgramBuilder b;
  b.append(Opcode::LoadNumber, {}, NumberPayload{1});
  return b.take();
}

}  // namespace

TEST_CASE("execute classifies the four outcome kinds") {
  EngineConfig cfg;
  cfg.timeout_ms = 300;

  cfg.shell_path = write_script("ok", "exit 0");
  Outcome ok = execute("const v0 = 1;\n", cfg);
  CHECK(ok.kind == OutcomeKind::Valid);
  CHECK(ok.exit_status == 0);

  cfg.shell_path = write_script("err", "echo 'Error: boom' >&2; exit 1");
  Outcome err = execute("throw new Error();\n", cfg);
  CHECK(err.kind == OutcomeKind::RuntimeError);
  CHECK(err.exit_status == 1);
  CHECK(err.stderr_excerpt.find("Error: boom") != std::string::npos);

  cfg.shell_path = write_script("hang", "sleep 30");
  Outcome hang = execute("while(true){}\n", cfg);
  CHECK(hang.kind == OutcomeKind::Timeout);
  CHECK(hang.duration_ms >= 290);
  CHECK(hang.duration_ms < 5000);

  cfg.shell_path = write_script("die", "kill -SEGV $$");
  Outcome crash = execute("x\n", cfg);
  CHECK(crash.kind == OutcomeKind::Crash);

  // Assertion markers classify as crashes even with a plain exit code.
  cfg.shell_path = write_script("assert", "echo 'ASSERTION FAILED: bad' >&2; exit 1");
  cfg.profile_name = "generic";
  Outcome assert_crash = execute("x\n", cfg);
  CHECK(assert_crash.kind == OutcomeKind::Crash);
  // ...but only for the profiles that look for them.
  cfg.profile_name = "v8";
  Outcome not_v8_marker = execute("x\n", cfg);
  CHECK(not_v8_marker.kind == OutcomeKind::RuntimeError);

  cfg.shell_path = "/nonexistent/shell";
  CHECK_THROWS_AS(execute("1\n", cfg), EngineUnavailable);
}

TEST_CASE("structural feedback: novelty on first sight, known on repeats") {
  StructuralFeedback feedback;
  Outcome outcome{OutcomeKind::Valid, 0, 1, ""};
  Program p = tiny_program();
  CHECK(feedback.evaluate(p, outcome));        // first program ever is novel
  CHECK_FALSE(feedback.evaluate(p, outcome));  // exact duplicate is known

  // New opcode bigram: novel again.
  ProgramBuilder b;
  b.append(Opcode::LoadNumber, {}, NumberPayload{1});
  b.append(Opcode::LoadBigInt, {}, BigIntPayload{1});
  CHECK(feedback.evaluate(b.take(), outcome));
}

TEST_CASE("structural feedback: a first table-import edge is novel by itself") {
  StructuralFeedback feedback;
  Outcome outcome{OutcomeKind::Valid, 0, 1, ""};

  WasmModuleType no_imports;
  no_imports.exports.push_back({"e0", WasmExternType{WasmGlobalType{ValueType::i32(), false}}});
  ProgramBuilder b1;
  b1.append(Opcode::CompileWasmModule, {}, WasmModulePayload{{0, 97, 115, 109}, no_imports});
  Program first = b1.take();
  CHECK(feedback.evaluate(first, outcome));
  CHECK_FALSE(feedback.evaluate(first, outcome));

  // Same opcodes, but the shape now carries a table import: the
  // import-kind/pair features are unseen.
  WasmModuleType with_table = no_imports;
  with_table.imports.push_back(
      {"m0", "f0", WasmExternType{WasmTableType{0, std::nullopt, AddrType::Addr32, false,
                                                ValueType::funcref()}}});
  ProgramBuilder b2;
  b2.append(Opcode::CompileWasmModule, {}, WasmModulePayload{{0, 97, 115, 109}, with_table});
  CHECK(feedback.evaluate(b2.take(), outcome));
}

TEST_CASE("coverage-file feedback consumes dumps and grows monotonically") {
  fs::path dump = fresh_dir("covdump") / "cov.bin";
  CoverageFileFeedback feedback(dump.string());
  Outcome outcome{OutcomeKind::Valid, 0, 1, ""};
  Program p = tiny_program();

  // Missing dump: known, with a warning.
  CHECK_FALSE(feedback.evaluate(p, outcome));

  {
    std::ofstream out(dump, std::ios::binary);
    out.write("\0\0\0\0", 4);  // empty dump: all counters zero
  }
  CHECK_FALSE(feedback.evaluate(p, outcome));
  CHECK(feedback.bitmap_cardinality() == 0);

  {
    std::ofstream out(dump, std::ios::binary);
    out.write("\0\1\0\0", 4);
  }
  CHECK(feedback.evaluate(p, outcome));
  CHECK(feedback.bitmap_cardinality() == 1);
  CHECK_FALSE(feedback.evaluate(p, outcome));  // same index again: known

  {
    std::ofstream out(dump, std::ios::binary);
    out.write("\1\1\0\1", 4);
  }
  CHECK(feedback.evaluate(p, outcome));
  CHECK(feedback.bitmap_cardinality() == 3);  // union only ever grows
}

TEST_CASE("fuzz_loop with zero executions exits immediately with empty stats") {
  fs::path dir = fresh_dir("zero");
  CampaignConfig cfg;
  cfg.max_executions = 0;
  cfg.corpus_dir = (dir / "corpus").string();
  cfg.crash_dir = (dir / "crashes").string();
  cfg.stats_path = (dir / "stats.json").string();
  EngineConfig engine;
  engine.shell_path = write_script("ok", "exit 0");

  CampaignTotals totals = fuzz_loop(cfg, engine);
  CHECK(totals.executions == 0);
  CHECK(totals.corpus_size == 0);
  nlohmann::json j = nlohmann::json::parse(read_file(cfg.stats_path));
  CHECK(j["executions"] == 0);
  CHECK(j["valid"] == 0);
}

TEST_CASE("a short stub-engine campaign produces corpus, stats and crashes") {
  const std::string stub = stub_shell_path();
  if (stub.empty()) {
    MESSAGE("WEAVER_STUB_SHELL not set; skipping");
    return;
  }
  fs::path dir = fresh_dir("short");
  CampaignConfig cfg;
  cfg.seed = 11;
  cfg.max_executions = 300;
  cfg.generative_phase_target = 30;
  cfg.corpus_dir = (dir / "corpus").string();
  cfg.crash_dir = (dir / "crashes").string();
  cfg.stats_path = (dir / "stats.json").string();
  cfg.transcript_path = (dir / "transcript.log").string();
  EngineConfig engine;
  engine.shell_path = stub;
  engine.timeout_ms = 100;

  CampaignTotals totals = fuzz_loop(cfg, engine);
  CHECK(totals.executions == 300);
  CHECK(totals.corpus_size > 0);
  CHECK(totals.valid > 0);

  nlohmann::json stats = nlohmann::json::parse(read_file(cfg.stats_path));
  CHECK(stats["executions"] == 300);
  CHECK(stats["generatorArms"].size() == 19);
  CHECK(stats["mutatorArms"].size() == 4);
  uint64_t arm_total = 0;
  for (const auto& arm : stats["generatorArms"]) arm_total += arm["total"].get<uint64_t>();
  CHECK(arm_total > 0);

  // Corpus entries deserialize and validate.
  size_t entries = 0;
  for (const auto& entry : fs::directory_iterator(cfg.corpus_dir)) {
    if (entry.path().extension() != ".wvil") continue;
    ++entries;
    std::string bytes = read_file(entry.path());
    Program p = deserialize(
        std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(bytes.data()), bytes.size()));
    CHECK(validate_program(p).ok());
  }
  CHECK(entries == totals.corpus_size);

  // Crash artifacts come in triples with content-hash names.
  if (totals.crash > 0) {
    size_t js = 0, wvil = 0, stderr_files = 0;
    for (const auto& entry : fs::directory_iterator(cfg.crash_dir)) {
      auto name = entry.path().filename().string();
      if (name.size() > 3 && name.substr(name.size() - 3) == ".js") ++js;
      if (entry.path().extension() == ".wvil") ++wvil;
      if (name.find(".stderr.txt") != std::string::npos) ++stderr_files;
    }
    CHECK(js > 0);
    CHECK(js == wvil);
    CHECK(js == stderr_files);
  }

  // The transcript has one line per execution.
  std::string transcript = read_file(cfg.transcript_path);
  size_t lines = std::count(transcript.begin(), transcript.end(), '\n');
  CHECK(lines == 300);
}

TEST_CASE("same seed reproduces the campaign transcript byte for byte") {
  const std::string stub = stub_shell_path();
  if (stub.empty()) {
    MESSAGE("WEAVER_STUB_SHELL not set; skipping");
    return;
  }
  auto run = [&](const fs::path& dir) {
    CampaignConfig cfg;
    cfg.seed = 42;
    cfg.max_executions = 150;
    cfg.generative_phase_target = 20;
    cfg.corpus_dir = (dir / "corpus").string();
    cfg.crash_dir = (dir / "crashes").string();
    cfg.stats_path = (dir / "stats.json").string();
    cfg.transcript_path = (dir / "transcript.log").string();
    EngineConfig engine;
    engine.shell_path = stub;
    engine.timeout_ms = 100;
    fuzz_loop(cfg, engine);
    return dir;
  };
  fs::path a = run(fresh_dir("det-a"));
  fs::path b = run(fresh_dir("det-b"));
  CHECK(read_file(a / "transcript.log") == read_file(b / "transcript.log"));

  // Stats agree except for wall-clock time.
  nlohmann::json sa = nlohmann::json::parse(read_file(a / "stats.json"));
  nlohmann::json sb = nlohmann::json::parse(read_file(b / "stats.json"));
  sa.erase("elapsedMs");
  sb.erase("elapsedMs");
  CHECK(sa == sb);

  // Corpus directories hold identical content.
  std::set<std::string> names_a, names_b;
  for (const auto& e : fs::directory_iterator(a / "corpus"))
    names_a.insert(e.path().filename().string());
  for (const auto& e : fs::directory_iterator(b / "corpus"))
    names_b.insert(e.path().filename().string());
  CHECK(names_a == names_b);
  for (const auto& name : names_a)
    CHECK(read_file(a / "corpus" / name) == read_file(b / "corpus" / name));
}

TEST_CASE("multi-worker campaigns merge corpora through the coordinator") {
  const std::string stub = stub_shell_path();
  if (stub.empty()) {
    MESSAGE("WEAVER_STUB_SHELL not set; skipping");
    return;
  }
  fs::path dir = fresh_dir("workers");
  CampaignConfig cfg;
  cfg.seed = 5;
  cfg.max_executions = 200;  // split across workers
  cfg.generative_phase_target = 20;
  cfg.workers = 2;
  cfg.corpus_dir = (dir / "corpus").string();
  cfg.crash_dir = (dir / "crashes").string();
  cfg.stats_path = (dir / "stats.json").string();
  EngineConfig engine;
  engine.shell_path = stub;
  engine.timeout_ms = 100;

  CampaignTotals totals = fuzz_loop(cfg, engine);
  CHECK(totals.executions == 200);
  CHECK(totals.corpus_size > 0);

  nlohmann::json stats = nlohmann::json::parse(read_file(cfg.stats_path));
  CHECK(stats["workers"] == 2);
  CHECK(stats["executions"] == 200);
  // Merged corpus entries live at the top level of the corpus dir.
  size_t merged = 0;
  for (const auto& entry : fs::directory_iterator(cfg.corpus_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".wvil") ++merged;
  CHECK(merged == totals.corpus_size);
}

TEST_CASE("generate_corpus is deterministic and seed-sensitive") {
  StaticTypeEnvironment env = StaticTypeEnvironment::default_catalog();
  GenerationBudget budget;
  MinimalSynthesizer synth(budget);
  auto a = generate_corpus(5, 123, EngineProfile::generic(), budget, synth, env);
  auto b = generate_corpus(5, 123, EngineProfile::generic(), budget, synth, env);
  auto c = generate_corpus(5, 124, EngineProfile::generic(), budget, synth, env);
  REQUIRE(a.size() == 5);
  for (size_t i = 0; i < 5; ++i) {
    CHECK(a[i] == b[i]);
    CHECK(validate_program(a[i]).ok());
  }
  bool any_diff = false;
  for (size_t i = 0; i < 5; ++i)
    if (!(a[i] == c[i])) any_diff = true;
  CHECK(any_diff);
}
