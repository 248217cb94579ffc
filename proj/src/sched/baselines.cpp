// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

#include "llmsched/sched/baselines.hpp"

#include <algorithm>
#include <stdexcept>

namespace llmsched {

// ---------------------------------------------------------------------------
// FCFS

FcfsScheduler::FcfsScheduler(bool iteration_level_batching) : orca_(iteration_level_batching) {}

void FcfsScheduler::on_arrival(const ArrivedJob& job, Seconds, SchedulerDecision&) {
  if (job.id >= arrival_.size()) {
    arrival_.resize(static_cast<std::size_t>(job.id) + 1, 0.0);
    group_of_.resize(static_cast<std::size_t>(job.id) + 1, kNoGroup);
  }
  if (!unfinished_.insert(job.id).second) throw std::invalid_argument("FcfsScheduler: job admitted twice");
  arrival_[job.id] = job.arrival_time;
}

void FcfsScheduler::on_result(const IterationResult& r, Seconds, SchedulerDecision& out) {
  if (!r.finished) return;
  unfinished_.erase(r.id);
  out.completions.push_back(r.id);
  if (const std::size_t g = group_of_[r.id]; g != kNoGroup) --groups_[g].unfinished;
}

void FcfsScheduler::select(Seconds, std::size_t capacity, const AdmitFn& admit, SchedulerDecision& out) {
  if (capacity == 0) return;
  auto try_take = [&](JobId id) {
    if (is_running(id) || out.batch.size() >= capacity) return false;
    if (admit && !admit(id)) return false;
    out.batch.push_back(BatchSlot{id, kInfinity});
    return true;
  };

  if (orca_) {
    for (JobId id : unfinished_) {
      if (out.batch.size() >= capacity) break;
      try_take(id);
    }
    return;
  }

  // Resume an existing group that is not in flight.
  std::erase_if(active_, [this](std::size_t g) { return groups_[g].unfinished == 0; });
  for (std::size_t gi : active_) {
    const Group& g = groups_[gi];
    const bool in_flight = std::any_of(g.members.begin(), g.members.end(),
                                       [this](JobId id) { return is_running(id); });
    if (in_flight) continue;
    for (JobId id : g.members) {
      if (unfinished_.count(id)) try_take(id);
    }
    if (!out.batch.empty()) return;
  }

  // Otherwise form a new group from the oldest unassigned jobs.
  Group fresh;
  for (JobId id : unfinished_) {
    if (out.batch.size() >= capacity) break;
    if (group_of_[id] != kNoGroup) continue;
    if (try_take(id)) fresh.members.push_back(id);
  }
  if (fresh.members.empty()) return;
  fresh.unfinished = fresh.members.size();
  for (JobId id : fresh.members) group_of_[id] = groups_.size();
  active_.push_back(groups_.size());
  groups_.push_back(std::move(fresh));
}

Seconds FcfsScheduler::next_scheduled_estimate(JobId id, Seconds) const {
  if (id >= arrival_.size()) throw std::out_of_range("FcfsScheduler: unknown job");
  return arrival_[id];
}

std::size_t FcfsScheduler::top_levels_occupancy(int) const { return 0; }

// ---------------------------------------------------------------------------
// SRPT

SrptScheduler::SrptScheduler(const ModelProfile& profile, OutputOracle oracle)
    : profile_(profile), oracle_(std::move(oracle)) {
  if (!oracle_) throw std::invalid_argument("SrptScheduler: output-length oracle required");
}

Seconds SrptScheduler::remaining_time(JobId id) const {
  const JobInfo& j = jobs_.at(id);
  Seconds rem = 0.0;
  if (j.generated == 0) rem += first_iteration_time(profile_, j.input_len);
  const Tokens decodes_left = j.output_len - std::max<Tokens>(j.generated, 1);
  if (decodes_left > 0) {
    rem += static_cast<double>(decodes_left) * decode_iteration_time(profile_, j.input_len + j.generated);
  }
  return rem;
}

SrptScheduler::Key SrptScheduler::key_of(JobId id) const {
  return {remaining_time(id), jobs_[id].arrival, id};
}

void SrptScheduler::on_arrival(const ArrivedJob& job, Seconds, SchedulerDecision&) {
  if (job.id >= jobs_.size()) jobs_.resize(static_cast<std::size_t>(job.id) + 1);
  JobInfo& j = jobs_[job.id];
  if (j.known) throw std::invalid_argument("SrptScheduler: job admitted twice");
  j.known = true;
  j.arrival = job.arrival_time;
  j.input_len = job.input_len;
  j.output_len = oracle_(job.id);
  order_.insert(key_of(job.id));
}

void SrptScheduler::on_result(const IterationResult& r, Seconds, SchedulerDecision& out) {
  order_.erase(key_of(r.id));
  if (r.token_emitted) ++jobs_[r.id].generated;
  if (r.finished) {
    out.completions.push_back(r.id);
    return;
  }
  order_.insert(key_of(r.id));
}

void SrptScheduler::select(Seconds, std::size_t capacity, const AdmitFn& admit, SchedulerDecision& out) {
  if (capacity == 0) return;
  for (const auto& key : order_) {
    if (out.batch.size() >= capacity) break;
    const JobId id = std::get<2>(key);
    if (is_running(id)) continue;
    if (admit && !admit(id)) continue;
    out.batch.push_back(BatchSlot{id, kInfinity});
  }
}

Seconds SrptScheduler::next_scheduled_estimate(JobId id, Seconds) const { return remaining_time(id); }

}  // namespace llmsched
