// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "llmsched/cost_model.hpp"
#include "llmsched/sched/mlfq_config.hpp"
#include "llmsched/types.hpp"

namespace llmsched {

enum class Policy { kFcfs, kFcfsOrca, kMlfqKill, kMlfqFinishIteration, kSkipJoin, kSrpt };

Policy parse_policy(std::string_view name);
std::string_view policy_name(Policy policy);
std::vector<Policy> all_policies();

// What a scheduler learns about an arrival. The output length is deliberately
// absent: only the SRPT oracle receives it, through its own constructor.
struct ArrivedJob {
  JobId id = 0;
  Seconds arrival_time = 0.0;
  Tokens input_len = 1;
};

// Outcome of one iteration for a job that was issued in a batch.
struct IterationResult {
  JobId id = 0;
  Seconds service = 0.0;  // time the job occupied the GPU in this iteration
  bool token_emitted = true;
  bool finished = false;
};

struct BatchSlot {
  JobId id = 0;
  // The iteration is cut (and its work discarded) after this long.
  Seconds time_limit = kInfinity;

  bool operator==(const BatchSlot&) const = default;
};

struct SchedulerDecision {
  std::vector<BatchSlot> batch;
  std::vector<JobId> demotions;
  std::vector<JobId> promotions;
  std::vector<JobId> completions;

  std::vector<JobId> batch_ids() const;
};

// Asked once per candidate during batch selection; returning false skips the
// candidate for this iteration (e.g. its KV cache cannot be placed).
using AdmitFn = std::function<bool(JobId)>;

class MlfqLadder;

class Scheduler {
 public:
  virtual ~Scheduler() = default;

  // One invocation at an iteration boundary: admit arrivals, account for the
  // jobs of the batch that just finished, then pick up to `capacity` pending
  // jobs for the next iteration.
  SchedulerDecision step(std::span<const ArrivedJob> arrivals, std::span<const IterationResult> preempted,
                         Seconds now, std::size_t capacity, const AdmitFn& admit);

  virtual Policy policy() const = 0;

  // Estimated time until the job is scheduled again; used to order swaps.
  virtual Seconds next_scheduled_estimate(JobId id, Seconds now) const = 0;

  // Number of jobs waiting in the `levels` highest-priority queues.
  virtual std::size_t top_levels_occupancy(int levels) const;

  // The queue ladder for MLFQ-family schedulers, nullptr otherwise.
  virtual const MlfqLadder* ladder() const { return nullptr; }

  bool is_running(JobId id) const { return id < running_.size() && running_[id]; }
  std::size_t running_count() const { return num_running_; }

 protected:
  virtual void on_arrival(const ArrivedJob& job, Seconds now, SchedulerDecision& out) = 0;
  virtual void on_result(const IterationResult& result, Seconds now, SchedulerDecision& out) = 0;
  virtual void on_boundary(Seconds /*now*/, SchedulerDecision& /*out*/) {}
  virtual void select(Seconds now, std::size_t capacity, const AdmitFn& admit, SchedulerDecision& out) = 0;

 private:
  std::vector<char> running_;
  std::size_t num_running_ = 0;
};

struct SchedulerConfig {
  Policy policy = Policy::kSkipJoin;
  MlfqConfig mlfq;
};

using OutputOracle = std::function<Tokens(JobId)>;

// `oracle` is only consulted by the SRPT policy.
std::unique_ptr<Scheduler> make_scheduler(const SchedulerConfig& config, const ModelProfile& profile,
                                          OutputOracle oracle = {});

}  // namespace llmsched
