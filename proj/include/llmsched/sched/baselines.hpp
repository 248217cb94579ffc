// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <set>
#include <tuple>
#include <vector>

#include "llmsched/cost_model.hpp"
#include "llmsched/sched/scheduler.hpp"

namespace llmsched {

// First-come-first-served with run-to-completion.
//
// Without iteration-level batching a batch is a fixed group that runs until
// all of its members finish. In Orca mode finished slots are refilled from
// the arrival queue at every iteration boundary.
class FcfsScheduler final : public Scheduler {
 public:
  explicit FcfsScheduler(bool iteration_level_batching);

  Policy policy() const override { return orca_ ? Policy::kFcfsOrca : Policy::kFcfs; }
  Seconds next_scheduled_estimate(JobId id, Seconds now) const override;
  std::size_t top_levels_occupancy(int levels) const override;

 protected:
  void on_arrival(const ArrivedJob& job, Seconds now, SchedulerDecision& out) override;
  void on_result(const IterationResult& result, Seconds now, SchedulerDecision& out) override;
  void select(Seconds now, std::size_t capacity, const AdmitFn& admit, SchedulerDecision& out) override;

 private:
  static constexpr std::size_t kNoGroup = static_cast<std::size_t>(-1);

  struct Group {
    std::vector<JobId> members;
    std::size_t unfinished = 0;
  };

  bool orca_;
  std::set<JobId> unfinished_;  // JobId order is arrival order
  std::vector<Seconds> arrival_;
  std::vector<std::size_t> group_of_;
  std::vector<Group> groups_;
  std::vector<std::size_t> active_;  // groups with unfinished members
};

// Preemptive shortest-remaining-processing-time oracle. Remaining time is the
// outstanding first iteration (if no token yet) plus one decode iteration per
// outstanding token; ties go to the earlier arrival, then the lower id.
class SrptScheduler final : public Scheduler {
 public:
  SrptScheduler(const ModelProfile& profile, OutputOracle oracle);

  Policy policy() const override { return Policy::kSrpt; }
  Seconds next_scheduled_estimate(JobId id, Seconds now) const override;

  Seconds remaining_time(JobId id) const;

 protected:
  void on_arrival(const ArrivedJob& job, Seconds now, SchedulerDecision& out) override;
  void on_result(const IterationResult& result, Seconds now, SchedulerDecision& out) override;
  void select(Seconds now, std::size_t capacity, const AdmitFn& admit, SchedulerDecision& out) override;

 private:
  struct JobInfo {
    Seconds arrival = 0.0;
    Tokens input_len = 1;
    Tokens output_len = 1;
    Tokens generated = 0;
    bool known = false;
  };
  using Key = std::tuple<Seconds, Seconds, JobId>;

  Key key_of(JobId id) const;

  ModelProfile profile_;
  OutputOracle oracle_;
  std::vector<JobInfo> jobs_;
  std::set<Key> order_;
};

}  // namespace llmsched
