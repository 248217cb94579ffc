// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

#include "llmsched/sched/scheduler.hpp"

#include <stdexcept>

#include "llmsched/sched/baselines.hpp"
#include "llmsched/sched/mlfq.hpp"

namespace llmsched {

namespace {

struct PolicyName {
  Policy policy;
  std::string_view name;
};

constexpr PolicyName kPolicyNames[] = {
    {Policy::kFcfs, "fcfs"},
    {Policy::kFcfsOrca, "fcfs-orca"},
    {Policy::kMlfqKill, "mlfq-kill"},
    {Policy::kMlfqFinishIteration, "mlfq-noapreempt"},
    {Policy::kSkipJoin, "skipjoin"},
    {Policy::kSrpt, "srpt"},
};

}  // namespace

Policy parse_policy(std::string_view name) {
  for (const auto& p : kPolicyNames) {
    if (p.name == name) return p.policy;
  }
  if (name == "mlfq-nopreempt") return Policy::kMlfqFinishIteration;
  throw std::invalid_argument("unknown scheduling policy: " + std::string(name));
}

std::string_view policy_name(Policy policy) {
  for (const auto& p : kPolicyNames) {
    if (p.policy == policy) return p.name;
  }
  return "unknown";
}

std::vector<Policy> all_policies() {
  std::vector<Policy> out;
  for (const auto& p : kPolicyNames) out.push_back(p.policy);
  return out;
}

std::vector<JobId> SchedulerDecision::batch_ids() const {
  std::vector<JobId> ids;
  ids.reserve(batch.size());
  for (const auto& s : batch) ids.push_back(s.id);
  return ids;
}

std::size_t Scheduler::top_levels_occupancy(int) const { return 0; }

SchedulerDecision Scheduler::step(std::span<const ArrivedJob> arrivals, std::span<const IterationResult> preempted,
                                  Seconds now, std::size_t capacity, const AdmitFn& admit) {
  SchedulerDecision out;
  for (const auto& job : arrivals) on_arrival(job, now, out);
  for (const auto& r : preempted) {
    if (!is_running(r.id)) {
      throw std::invalid_argument("scheduler step: job " + std::to_string(r.id) +
                                  " was not issued by this scheduler");
    }
    running_[r.id] = 0;
    --num_running_;
    on_result(r, now, out);
  }
  on_boundary(now, out);
  select(now, capacity, admit, out);
  for (const auto& slot : out.batch) {
    if (slot.id >= running_.size()) running_.resize(static_cast<std::size_t>(slot.id) + 1, 0);
    running_[slot.id] = 1;
    ++num_running_;
  }
  return out;
}

std::unique_ptr<Scheduler> make_scheduler(const SchedulerConfig& config, const ModelProfile& profile,
                                          OutputOracle oracle) {
  switch (config.policy) {
    case Policy::kFcfs: return std::make_unique<FcfsScheduler>(false);
    case Policy::kFcfsOrca: return std::make_unique<FcfsScheduler>(true);
    case Policy::kMlfqKill:
      return std::make_unique<MlfqScheduler>(MlfqVariant::kNaiveKill, config.mlfq, profile);
    case Policy::kMlfqFinishIteration:
      return std::make_unique<MlfqScheduler>(MlfqVariant::kNaiveFinishIteration, config.mlfq, profile);
    case Policy::kSkipJoin:
      return std::make_unique<MlfqScheduler>(MlfqVariant::kSkipJoin, config.mlfq, profile);
    case Policy::kSrpt: return std::make_unique<SrptScheduler>(profile, std::move(oracle));
  }
  throw std::invalid_argument("make_scheduler: unhandled policy");
}

}  // namespace llmsched
