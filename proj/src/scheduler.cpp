// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#include "weaver/scheduler.hpp"

#include <cmath>

namespace weaver {

const char* outcome_kind_name(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::Valid: return "Valid";
    case OutcomeKind::RuntimeError: return "RuntimeError";
    case OutcomeKind::Timeout: return "Timeout";
    case OutcomeKind::Crash: return "Crash";
  }
  return "?";
}

double perf(const ArmStats& stats) {
  return static_cast<double>(stats.valid_count) / static_cast<double>(stats.total_count);
}

double weight(const ArmStats& stats, uint64_t grand_total, double amplification) {
  double exploration =
      std::sqrt(2.0 * std::log(static_cast<double>(grand_total)) /
                static_cast<double>(stats.total_count));
  double w = (perf(stats) + exploration) * 100.0;
  if (stats.is_wasm_arm) w *= amplification;
  return w;
}

SchedulerState::SchedulerState(std::vector<ArmStats> arms, double amplification,
                               uint64_t rebalance_interval)
    : arms_(std::move(arms)),
      weights_(arms_.size(), 0.0),
      amplification_(amplification),
      rebalance_interval_(rebalance_interval) {}

bool SchedulerState::cold_start_done() const {
  for (const ArmStats& a : arms_)
    if (a.total_count == 0) return false;
  return true;
}

uint64_t SchedulerState::grand_total() const {
  uint64_t total = 0;
  for (const ArmStats& a : arms_) total += a.total_count;
  return total;
}

size_t SchedulerState::select(Rng& rng) {
  // Cold start: untried arms are served round-robin before weights apply.
  if (!cold_start_done()) {
    for (size_t step = 0; step < arms_.size(); ++step) {
      size_t arm = (cold_cursor_ + step) % arms_.size();
      if (arms_[arm].total_count == 0) {
        cold_cursor_ = (arm + 1) % arms_.size();
        return arm;
      }
    }
  }
  if (!weights_ready_) rebalance();

  double sum = 0;
  for (double w : weights_) sum += w;
  if (sum <= 0) return static_cast<size_t>(rng.below(arms_.size()));
  double roll = rng.unit() * sum;
  for (size_t i = 0; i < weights_.size(); ++i) {
    roll -= weights_[i];
    if (roll < 0) return i;
  }
  return weights_.size() - 1;
}

void SchedulerState::record(size_t arm, OutcomeKind outcome) {
  ArmStats& a = arms_[arm];
  a.total_count += 1;
  if (outcome == OutcomeKind::Valid) a.valid_count += 1;
  records_since_rebalance_ += 1;
}

void SchedulerState::rebalance() {
  uint64_t total = grand_total();
  for (size_t i = 0; i < arms_.size(); ++i)
    weights_[i] = weight(arms_[i], total, amplification_);
  weights_ready_ = true;
  records_since_rebalance_ = 0;
  ++rebalances_;
}

}  // namespace weaver
