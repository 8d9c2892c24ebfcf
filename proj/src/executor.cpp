// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#include "weaver/executor.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <thread>

namespace weaver {

const std::vector<std::string>& crash_markers(const std::string& profile_name) {
  static const std::vector<std::string> kJsc = {"ASSERTION FAILED", "FATAL:",
                                                "Unreachable code was reached"};
  static const std::vector<std::string> kV8 = {"Check failed", "Fatal error",
                                               "Debug check failed"};
  static const std::vector<std::string> kSm = {"Assertion failure", "MOZ_CRASH"};
  static const std::vector<std::string> kGeneric = {
      "ASSERTION FAILED", "Assertion failure", "Check failed",
      "Fatal error",      "MOZ_CRASH",         "FATAL:"};
  if (profile_name == "jsc") return kJsc;
  if (profile_name == "v8") return kV8;
  if (profile_name == "spidermonkey") return kSm;
  return kGeneric;
}

namespace {

constexpr size_t kStderrExcerptCap = 4096;

std::string temp_source_path() {
  static int counter = 0;
  const char* dir = getenv("TMPDIR");
  std::string base = dir && *dir ? dir : "/tmp";
  return base + "/weaver-" + std::to_string(getpid()) + "-" + std::to_string(counter++) + ".js";
}

}  // namespace

Outcome execute(const std::string& source, const EngineConfig& cfg) {
  struct stat st;
  if (stat(cfg.shell_path.c_str(), &st) != 0 || !(st.st_mode & S_IXUSR))
    throw EngineUnavailable("engine shell not executable: " + cfg.shell_path);

  std::string path = temp_source_path();
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw EngineUnavailable("cannot write temp source: " + path);
    out << source;
  }

  int err_pipe[2];
  if (pipe(err_pipe) != 0) throw EngineUnavailable("pipe() failed");

  auto start = std::chrono::steady_clock::now();
  pid_t pid = fork();
  if (pid < 0) {
    close(err_pipe[0]);
    close(err_pipe[1]);
    throw EngineUnavailable("fork() failed");
  }
  if (pid == 0) {
    setpgid(0, 0);
    int devnull = open("/dev/null", O_WRONLY);
    if (devnull >= 0) dup2(devnull, STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    close(err_pipe[0]);
    close(err_pipe[1]);
    std::vector<char*> argv;
    argv.push_back(const_cast<char*>(cfg.shell_path.c_str()));
    for (const auto& a : cfg.extra_args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(const_cast<char*>(path.c_str()));
    argv.push_back(nullptr);
    execvp(cfg.shell_path.c_str(), argv.data());
    _exit(126);
  }
  close(err_pipe[1]);
  fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);

  std::string stderr_data;
  bool timed_out = false;
  int status = 0;

  auto drain = [&]() {
    char buf[4096];
    while (true) {
      ssize_t n = read(err_pipe[0], buf, sizeof buf);
      if (n <= 0) break;
      if (stderr_data.size() < kStderrExcerptCap)
        stderr_data.append(buf, buf + std::min<size_t>(n, kStderrExcerptCap - stderr_data.size()));
    }
  };

  while (true) {
    pid_t done = waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
    if (elapsed >= cfg.timeout_ms) {
      timed_out = true;
      kill(-pid, SIGKILL);
      kill(pid, SIGKILL);
      waitpid(pid, &status, 0);
      break;
    }
    drain();
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  drain();
  close(err_pipe[0]);
  unlink(path.c_str());

  Outcome outcome;
  outcome.duration_ms = static_cast<int>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                             std::chrono::steady_clock::now() - start)
                                             .count());
  outcome.stderr_excerpt = stderr_data;

  if (timed_out) {
    outcome.kind = OutcomeKind::Timeout;
    outcome.exit_status = SIGKILL;
    return outcome;
  }
  if (WIFSIGNALED(status)) {
    outcome.kind = OutcomeKind::Crash;
    outcome.exit_status = WTERMSIG(status);
    return outcome;
  }
  int code = WEXITSTATUS(status);
  outcome.exit_status = code;
  if (code == 126) throw EngineUnavailable("engine failed to start: " + cfg.shell_path);
  if (code == 0) {
    outcome.kind = OutcomeKind::Valid;
    return outcome;
  }
  for (const std::string& marker : crash_markers(cfg.profile_name)) {
    if (stderr_data.find(marker) != std::string::npos) {
      outcome.kind = OutcomeKind::Crash;
      return outcome;
    }
  }
  outcome.kind = OutcomeKind::RuntimeError;
  return outcome;
}

}  // namespace weaver
