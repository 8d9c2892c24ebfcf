// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "weaver/common.hpp"

namespace weaver {

// Classification of one engine execution.
enum class OutcomeKind : uint8_t { Valid, RuntimeError, Timeout, Crash };

const char* outcome_kind_name(OutcomeKind k);

struct ArmStats {
  uint64_t valid_count = 0;
  uint64_t total_count = 0;
  bool is_wasm_arm = false;
};

// perf = validCount / totalCount. Callers guarantee totalCount >= 1; the
// cold-start rule keeps untried arms away from this.
double perf(const ArmStats& stats);

// UCB-1 weight: (perf + sqrt(2 ln(grandTotal) / totalCount)) * 100, then
// multiplied by the amplification factor for Wasm arms. The x100 scaling
// aligns magnitudes with legacy static weights and never changes the
// selection order.
double weight(const ArmStats& stats, uint64_t grand_total, double amplification);

// Performance-based selection over a fixed arm set. Weights are frozen
// between rebalances; selection samples proportionally to the frozen
// weights. Arms with totalCount == 0 are served round-robin first.
class SchedulerState {
 public:
  SchedulerState(std::vector<ArmStats> arms, double amplification,
                 uint64_t rebalance_interval);

  size_t arm_count() const { return arms_.size(); }
  const ArmStats& stats(size_t arm) const { return arms_[arm]; }
  const std::vector<double>& weights() const { return weights_; }
  double amplification() const { return amplification_; }

  bool cold_start_done() const;

  size_t select(Rng& rng);

  // totalCount increments for every outcome; validCount only for Valid.
  void record(size_t arm, OutcomeKind outcome);

  // Recomputes every weight from current stats. Requires cold start done.
  void rebalance();

  bool due_for_rebalance() const {
    return cold_start_done() && records_since_rebalance_ >= rebalance_interval_;
  }

  uint64_t grand_total() const;
  uint64_t rebalance_count() const { return rebalances_; }

 private:
  std::vector<ArmStats> arms_;
  std::vector<double> weights_;
  bool weights_ready_ = false;
  double amplification_;
  uint64_t rebalance_interval_;
  uint64_t records_since_rebalance_ = 0;
  uint64_t rebalances_ = 0;
  size_t cold_cursor_ = 0;
};

}  // namespace weaver
