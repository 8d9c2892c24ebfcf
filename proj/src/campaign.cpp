// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#include "weaver/campaign.hpp"

#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"
#include "weaver/lifter.hpp"
#include "weaver/profile.hpp"

namespace weaver {

namespace fs = std::filesystem;

std::unique_ptr<ModuleSynthesizer> make_synthesizer(const std::string& spec,
                                                    const GenerationBudget& budget) {
  if (spec == "builtin" || spec.empty()) return std::make_unique<MinimalSynthesizer>(budget);
  if (spec.rfind("cmd:", 0) == 0) return std::make_unique<CommandSynthesizer>(spec.substr(4));
  throw std::runtime_error("unknown synthesizer spec: " + spec);
}

namespace {

uint64_t program_hash(const Bytes& serialized) { return fnv1a(serialized); }

Program build_generative(Rng& rng, const StaticTypeEnvironment& env, const EngineProfile& profile,
                         const CodegenOptions& opts, SchedulerState* scheduler,
                         std::vector<size_t>* contributors, int min_length, int max_length) {
  GenerationContext ctx(&env, profile);
  const auto& registry = generator_registry();
  size_t target = static_cast<size_t>(rng.range(min_length, max_length));
  size_t attempts = 0;
  std::set<size_t> used;
  while (ctx.program().size() < target && attempts < target * 10) {
    ++attempts;
    size_t arm = scheduler ? scheduler->select(rng)
                           : static_cast<size_t>(rng.below(registry.size()));
    if (registry[arm].apply(rng, ctx, opts)) used.insert(arm);
  }
  if (contributors) contributors->assign(used.begin(), used.end());
  return ctx.take_program();
}

class CampaignRunner {
 public:
  CampaignRunner(CampaignConfig cfg, EngineConfig engine, std::string outbox_dir)
      : cfg_(std::move(cfg)),
        engine_(std::move(engine)),
        outbox_dir_(std::move(outbox_dir)),
        rng_(cfg_.seed),
        profile_(EngineProfile::by_name(engine_.profile_name)),
        env_(cfg_.builtins_path.empty()
                 ? StaticTypeEnvironment::default_catalog()
                 : StaticTypeEnvironment::from_json_file(cfg_.builtins_path)),
        synthesizer_(make_synthesizer(cfg_.synthesizer_spec, cfg_.budget)),
        generator_scheduler_(make_generator_arms(), cfg_.wasm_amplification,
                             cfg_.rebalance_interval),
        mutator_scheduler_(std::vector<ArmStats>(mutator_names().size()), 1.0,
                           cfg_.rebalance_interval) {
    if (!engine_.coverage_dump_path.empty())
      feedback_ = std::make_unique<CoverageFileFeedback>(engine_.coverage_dump_path);
    else
      feedback_ = std::make_unique<StructuralFeedback>();
    opts_.budget = cfg_.budget;
    opts_.synthesizer = synthesizer_.get();
    mutation_env_ = {&env_, profile_, cfg_.budget};
  }

  CampaignTotals run() {
    fs::create_directories(cfg_.corpus_dir);
    fs::create_directories(cfg_.crash_dir);
    if (!outbox_dir_.empty()) fs::create_directories(outbox_dir_);
    std::ofstream transcript;
    if (!cfg_.transcript_path.empty()) transcript.open(cfg_.transcript_path, std::ios::binary);
    start_time_ = std::chrono::steady_clock::now();

    for (uint64_t exec = 0; exec < cfg_.max_executions; ++exec) {
      bool generative = corpus_.size() < cfg_.generative_phase_target ||
                        rng_.chance(cfg_.phase2_generation_share);
      Program program;
      std::vector<size_t> generator_arms;
      std::vector<size_t> mutator_arms;
      if (generative) {
        program = build_generative(rng_, env_, profile_, opts_, &generator_scheduler_,
                                   &generator_arms, cfg_.min_program_length,
                                   cfg_.max_program_length);
      } else {
        const Program& seed = corpus_[rng_.below(corpus_.size())];
        MutationOutcome mutated =
            mutate_pipeline(seed, rng_, mutator_scheduler_, corpus_, mutation_env_);
        program = std::move(mutated.program);
        mutator_arms = std::move(mutated.applied_arms);
      }

      std::string source = lift(program);
      Outcome outcome = execute(source, engine_);
      bump_totals(outcome.kind);

      for (size_t arm : generator_arms) generator_scheduler_.record(arm, outcome.kind);
      for (size_t arm : mutator_arms) mutator_scheduler_.record(arm, outcome.kind);
      if (generator_scheduler_.due_for_rebalance()) generator_scheduler_.rebalance();
      if (mutator_scheduler_.due_for_rebalance()) mutator_scheduler_.rebalance();

      Bytes serialized = serialize(program);
      uint64_t hash = program_hash(serialized);
      bool novel = feedback_->evaluate(program, outcome);
      if (novel) add_to_corpus(program, serialized, hash);
      if (outcome.kind == OutcomeKind::Crash) persist_crash(source, serialized, hash, outcome);

      if (transcript.is_open()) {
        transcript << "E" << exec << " phase=" << (generative ? "g" : "m") << " arms=";
        const auto& arms = generative ? generator_arms : mutator_arms;
        for (size_t i = 0; i < arms.size(); ++i) {
          if (i) transcript << ",";
          transcript << arms[i];
        }
        transcript << " program=" << hex64(hash)
                   << " outcome=" << outcome_kind_name(outcome.kind) << "\n";
      }

      if (cfg_.stats_interval && (exec + 1) % cfg_.stats_interval == 0) write_stats();
      if (sync_interval_ && (exec + 1) % sync_interval_ == 0) ingest_global_corpus();
    }

    write_stats();
    return totals_;
  }

 private:
  static std::vector<ArmStats> make_generator_arms() {
    std::vector<ArmStats> arms;
    for (const Generator& g : generator_registry()) arms.push_back({0, 0, g.is_wasm});
    return arms;
  }

  void bump_totals(OutcomeKind kind) {
    ++totals_.executions;
    switch (kind) {
      case OutcomeKind::Valid: ++totals_.valid; break;
      case OutcomeKind::RuntimeError: ++totals_.runtime_error; break;
      case OutcomeKind::Timeout: ++totals_.timeout; break;
      case OutcomeKind::Crash: ++totals_.crash; break;
    }
  }

  void add_to_corpus(const Program& program, const Bytes& serialized, uint64_t hash) {
    corpus_.push_back(program);
    totals_.corpus_size = corpus_.size();
    const std::string dir = outbox_dir_.empty() ? cfg_.corpus_dir : outbox_dir_;
    fs::path path = fs::path(dir) / (hex64(hash) + ".wvil");
    known_entries_.insert(path.filename().string());
    if (!fs::exists(path)) {
      std::ofstream out(path, std::ios::binary);
      out.write(reinterpret_cast<const char*>(serialized.data()),
                static_cast<std::streamsize>(serialized.size()));
    }
  }

  void persist_crash(const std::string& source, const Bytes& serialized, uint64_t hash,
                     const Outcome& outcome) {
    fs::path base = fs::path(cfg_.crash_dir) / hex64(hash);
    // Content-hash filenames; artifacts are never overwritten.
    if (fs::exists(base.string() + ".js")) return;
    std::ofstream(base.string() + ".js", std::ios::binary) << source;
    std::ofstream wvil(base.string() + ".wvil", std::ios::binary);
    wvil.write(reinterpret_cast<const char*>(serialized.data()),
               static_cast<std::streamsize>(serialized.size()));
    std::ofstream(base.string() + ".stderr.txt", std::ios::binary) << outcome.stderr_excerpt;
  }

  // Multi-worker mode: pick up seeds merged into the global corpus by the
  // coordinator.
  void ingest_global_corpus() {
    if (outbox_dir_.empty()) return;  // single-worker: corpus dir is ours
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(cfg_.corpus_dir)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".wvil") continue;
      if (known_entries_.count(entry.path().filename().string())) continue;
      files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
      known_entries_.insert(path.filename().string());
      std::ifstream in(path, std::ios::binary);
      Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      try {
        Program program = deserialize(bytes);
        if (!validate_program(program).ok()) continue;
        Outcome synthetic{OutcomeKind::Valid, 0, 0, ""};
        feedback_->evaluate(program, synthetic);
        corpus_.push_back(std::move(program));
      } catch (const MalformedEncoding&) {
        continue;
      }
    }
    totals_.corpus_size = corpus_.size();
  }

  nlohmann::json arm_snapshot(const SchedulerState& sched,
                              const std::vector<std::string>& names) const {
    nlohmann::json arms = nlohmann::json::array();
    for (size_t i = 0; i < sched.arm_count(); ++i) {
      const ArmStats& s = sched.stats(i);
      nlohmann::json arm;
      arm["name"] = names[i];
      arm["valid"] = s.valid_count;
      arm["total"] = s.total_count;
      arm["isWasm"] = s.is_wasm_arm;
      arm["weight"] = sched.weights()[i];
      arms.push_back(std::move(arm));
    }
    return arms;
  }

  void write_stats() {
    nlohmann::json j;
    j["executions"] = totals_.executions;
    j["valid"] = totals_.valid;
    j["runtimeError"] = totals_.runtime_error;
    j["timeout"] = totals_.timeout;
    j["crash"] = totals_.crash;
    j["validityRate"] = totals_.validity_rate();
    j["corpusSize"] = corpus_.size();
    j["seed"] = cfg_.seed;
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start_time_)
                       .count();
    j["elapsedMs"] = elapsed;
    std::vector<std::string> generator_names;
    for (const Generator& g : generator_registry()) generator_names.push_back(g.name);
    std::vector<std::string> mutator_name_list;
    for (const char* n : mutator_names()) mutator_name_list.push_back(n);
    j["generatorArms"] = arm_snapshot(generator_scheduler_, generator_names);
    j["mutatorArms"] = arm_snapshot(mutator_scheduler_, mutator_name_list);
    std::ofstream out(cfg_.stats_path, std::ios::binary);
    out << j.dump(2) << "\n";
  }

  CampaignConfig cfg_;
  EngineConfig engine_;
  std::string outbox_dir_;
  Rng rng_;
  EngineProfile profile_;
  StaticTypeEnvironment env_;
  std::unique_ptr<ModuleSynthesizer> synthesizer_;
  std::unique_ptr<FeedbackSource> feedback_;
  CodegenOptions opts_;
  MutationEnv mutation_env_;
  SchedulerState generator_scheduler_;
  SchedulerState mutator_scheduler_;
  std::vector<Program> corpus_;
  std::set<std::string> known_entries_;
  CampaignTotals totals_;
  uint64_t sync_interval_ = 200;
  std::chrono::steady_clock::time_point start_time_;
};

// Coordinator for multi-worker campaigns: merges worker outboxes into the
// global corpus by structural-novelty re-evaluation and aggregates stats.
CampaignTotals run_workers(const CampaignConfig& cfg, const EngineConfig& engine) {
  fs::create_directories(cfg.corpus_dir);
  fs::create_directories(cfg.crash_dir);

  std::vector<pid_t> children;
  std::vector<std::string> outboxes;
  for (int w = 0; w < cfg.workers; ++w) {
    std::string outbox = cfg.corpus_dir + "/outbox-" + std::to_string(w);
    fs::create_directories(outbox);
    outboxes.push_back(outbox);
    pid_t pid = fork();
    if (pid < 0) throw std::runtime_error("fork() failed");
    if (pid == 0) {
      CampaignConfig worker_cfg = cfg;
      worker_cfg.seed = cfg.seed + static_cast<uint64_t>(w);
      worker_cfg.max_executions = cfg.max_executions / cfg.workers;
      worker_cfg.stats_path = cfg.stats_path + ".worker" + std::to_string(w);
      worker_cfg.transcript_path.clear();  // transcripts are single-worker artifacts
      CampaignRunner runner(worker_cfg, engine, outbox);
      runner.run();
      _exit(0);
    }
    children.push_back(pid);
  }

  StructuralFeedback global_feedback;
  std::set<std::string> merged;
  auto sweep = [&]() {
    for (const auto& outbox : outboxes) {
      for (const auto& entry : fs::directory_iterator(outbox)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".wvil") continue;
        std::string name = entry.path().filename().string();
        if (merged.count(name)) continue;
        merged.insert(name);
        std::ifstream in(entry.path(), std::ios::binary);
        Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        try {
          Program program = deserialize(bytes);
          Outcome synthetic{OutcomeKind::Valid, 0, 0, ""};
          if (!global_feedback.evaluate(program, synthetic)) continue;
          fs::path target = fs::path(cfg.corpus_dir) / name;
          if (!fs::exists(target)) fs::copy_file(entry.path(), target);
        } catch (const MalformedEncoding&) {
          continue;
        }
      }
    }
  };

  while (true) {
    bool any_alive = false;
    for (pid_t pid : children) {
      if (pid == 0) continue;
      int status = 0;
      if (waitpid(pid, &status, WNOHANG) == 0) any_alive = true;
    }
    sweep();
    if (!any_alive) break;
    usleep(200 * 1000);
  }
  for (pid_t pid : children) {
    int status = 0;
    waitpid(pid, &status, 0);
  }
  sweep();

  // Aggregate worker stats.
  CampaignTotals totals;
  nlohmann::json aggregate;
  std::map<std::string, std::pair<uint64_t, uint64_t>> generator_sums, mutator_sums;
  std::map<std::string, bool> wasm_flags;
  for (int w = 0; w < cfg.workers; ++w) {
    std::ifstream in(cfg.stats_path + ".worker" + std::to_string(w));
    if (!in) continue;
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) continue;
    totals.executions += j.value("executions", 0ull);
    totals.valid += j.value("valid", 0ull);
    totals.runtime_error += j.value("runtimeError", 0ull);
    totals.timeout += j.value("timeout", 0ull);
    totals.crash += j.value("crash", 0ull);
    for (const char* key : {"generatorArms", "mutatorArms"}) {
      if (!j.contains(key)) continue;
      auto& sums = std::string(key) == "generatorArms" ? generator_sums : mutator_sums;
      for (const auto& arm : j[key]) {
        std::string name = arm.value("name", "");
        sums[name].first += arm.value("valid", 0ull);
        sums[name].second += arm.value("total", 0ull);
        wasm_flags[name] = arm.value("isWasm", false);
      }
    }
  }
  size_t corpus_size = 0;
  for (const auto& entry : fs::directory_iterator(cfg.corpus_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".wvil") ++corpus_size;
  totals.corpus_size = corpus_size;

  uint64_t grand_total = 0;
  for (const auto& [name, vt] : generator_sums) grand_total += vt.second;
  auto arm_json = [&](const std::map<std::string, std::pair<uint64_t, uint64_t>>& sums,
                      double amplification) {
    nlohmann::json arms = nlohmann::json::array();
    for (const auto& [name, vt] : sums) {
      nlohmann::json arm;
      arm["name"] = name;
      arm["valid"] = vt.first;
      arm["total"] = vt.second;
      arm["isWasm"] = wasm_flags[name];
      if (vt.second > 0 && grand_total > 0)
        arm["weight"] = weight({vt.first, vt.second, wasm_flags[name]}, grand_total,
                               amplification);
      else
        arm["weight"] = 0.0;
      arms.push_back(std::move(arm));
    }
    return arms;
  };
  aggregate["executions"] = totals.executions;
  aggregate["valid"] = totals.valid;
  aggregate["runtimeError"] = totals.runtime_error;
  aggregate["timeout"] = totals.timeout;
  aggregate["crash"] = totals.crash;
  aggregate["validityRate"] = totals.validity_rate();
  aggregate["corpusSize"] = corpus_size;
  aggregate["workers"] = cfg.workers;
  aggregate["seed"] = cfg.seed;
  aggregate["generatorArms"] = arm_json(generator_sums, cfg.wasm_amplification);
  aggregate["mutatorArms"] = arm_json(mutator_sums, 1.0);
  std::ofstream out(cfg.stats_path, std::ios::binary);
  out << aggregate.dump(2) << "\n";
  return totals;
}

}  // namespace

CampaignTotals fuzz_loop(const CampaignConfig& campaign_cfg, const EngineConfig& engine_cfg) {
  if (campaign_cfg.workers > 1) return run_workers(campaign_cfg, engine_cfg);
  CampaignRunner runner(campaign_cfg, engine_cfg, "");
  return runner.run();
}

std::vector<Program> generate_corpus(size_t count, uint64_t seed, const EngineProfile& profile,
                                     const GenerationBudget& budget,
                                     ModuleSynthesizer& synthesizer,
                                     const StaticTypeEnvironment& env, int min_length,
                                     int max_length) {
  Rng rng(seed);
  CodegenOptions opts;
  opts.budget = budget;
  opts.synthesizer = &synthesizer;
  std::vector<Program> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    out.push_back(build_generative(rng, env, profile, opts, nullptr, nullptr, min_length,
                                   max_length));
  }
  return out;
}

}  // namespace weaver
