// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "llmsched/cost_model.hpp"
#include "llmsched/sched/mlfq_config.hpp"
#include "llmsched/sched/scheduler.hpp"

namespace llmsched {

/// Ladder of FIFO queues. A job keeps its position in its queue until it is
/// demoted, promoted or finishes; running jobs stay enqueued.
class MlfqLadder {
 public:
  explicit MlfqLadder(int levels);

  int levels() const { return static_cast<int>(queues_.size()); }

  void push_back(int level, JobId id);
  void remove(JobId id);
  bool contains(JobId id) const;
  int level_of(JobId id) const;
  // Monotonic enqueue stamp; FIFO order within a level.
  std::uint64_t position_of(JobId id) const;

  std::size_t size(int level) const;
  std::size_t total() const { return total_; }
  std::vector<JobId> jobs(int level) const;

  const std::map<std::uint64_t, JobId>& queue(int level) const;

 private:
  struct Slot {
    int level = 0;
    std::uint64_t seq = 0;
  };
  std::vector<std::map<std::uint64_t, JobId>> queues_;
  std::vector<Slot> where_;  // indexed by JobId; level 0 = absent
  std::uint64_t next_seq_ = 0;
  std::size_t total_ = 0;
};

enum class JobStatus { kPending, kRunning, kFinished };

struct MlfqJobState {
  Seconds arrival_time = 0.0;
  Tokens input_len = 1;
  Tokens tokens_generated = 0;
  int priority = 1;
  Seconds quantum_remaining = 0.0;
  Seconds total_service = 0.0;
  Seconds timer_origin = 0.0;  // last enqueue, promotion or iteration end
  JobStatus status = JobStatus::kPending;
};

enum class MlfqVariant {
  kSkipJoin,             // skip-join arrivals, multi-level demotion
  kNaiveKill,            // arrivals join Q1; iterations overrunning the quantum are killed
  kNaiveFinishIteration  // arrivals join Q1; overrunning iterations finish, then demote
};

class MlfqScheduler final : public Scheduler {
 public:
  MlfqScheduler(MlfqVariant variant, const MlfqConfig& config, const ModelProfile& profile);

  Policy policy() const override;
  Seconds next_scheduled_estimate(JobId id, Seconds now) const override;
  std::size_t top_levels_occupancy(int levels) const override;
  const MlfqLadder* ladder() const override { return &ladder_; }

  MlfqVariant variant() const { return variant_; }
  const MlfqConfig& config() const { return config_; }
  const MlfqJobState& job(JobId id) const;
  bool knows(JobId id) const { return id < known_.size() && known_[id]; }

  // Largest pending time observed at the moment a job was promoted.
  Seconds max_promotion_wait() const { return max_promotion_wait_; }
  // Waiting time of the longest-waiting pending job outside Q1.
  Seconds longest_wait(Seconds now) const;

 protected:
  void on_arrival(const ArrivedJob& job, Seconds now, SchedulerDecision& out) override;
  void on_result(const IterationResult& result, Seconds now, SchedulerDecision& out) override;
  void on_boundary(Seconds now, SchedulerDecision& out) override;
  void select(Seconds now, std::size_t capacity, const AdmitFn& admit, SchedulerDecision& out) override;

 private:
  Seconds next_iter(const MlfqJobState& st) const;
  void move_to(JobId id, int level, Seconds quantum);
  void track_starvation(JobId id);
  void untrack_starvation(JobId id);

  MlfqVariant variant_;
  MlfqConfig config_;
  ModelProfile profile_;
  MlfqLadder ladder_;
  std::vector<MlfqJobState> jobs_;
  std::vector<char> known_;
  // Pending jobs outside Q1, keyed by starvation-timer origin.
  std::set<std::pair<Seconds, JobId>> starving_;
  Seconds max_promotion_wait_ = 0.0;
};

}  // namespace llmsched
