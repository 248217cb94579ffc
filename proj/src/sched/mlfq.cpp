// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

#include "llmsched/sched/mlfq.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "llmsched/kvcache.hpp"

namespace llmsched {

namespace {

// Quanta are products of floating-point powers; compare with a relative slack.
bool covers(Seconds quantum, Seconds time) { return quantum >= time * (1.0 - 1e-9); }

constexpr Seconds kTimeEps = 1e-12;

}  // namespace

Seconds MlfqConfig::quantum(int level) const {
  return base_quantum * std::pow(quantum_ratio, static_cast<double>(level - 1));
}

std::vector<Seconds> MlfqConfig::quanta() const {
  std::vector<Seconds> q;
  for (int i = 1; i <= num_queues; ++i) q.push_back(quantum(i));
  return q;
}

void MlfqConfig::validate() const {
  if (num_queues < 1) throw std::invalid_argument("mlfq: num_queues must be >= 1");
  if (!(base_quantum > 0.0)) throw std::invalid_argument("mlfq: base_quantum must be > 0");
  if (!(quantum_ratio >= 1.0)) throw std::invalid_argument("mlfq: quantum_ratio must be >= 1");
  if (!(starve_limit > 0.0)) throw std::invalid_argument("mlfq: starve_limit must be > 0");
  if (max_batch_size < 1) throw std::invalid_argument("mlfq: max_batch_size must be >= 1");
}

int get_highest_priority(Seconds first_iter_time, const MlfqConfig& config) {
  if (!(first_iter_time > 0.0)) throw std::invalid_argument("get_highest_priority: time must be > 0");
  for (int i = 1; i <= config.num_queues; ++i) {
    if (covers(config.quantum(i), first_iter_time)) return i;
  }
  return config.num_queues;
}

int get_demotion_priority(int current, Seconds next_iter_time, const MlfqConfig& config) {
  for (int i = current + 1; i <= config.num_queues; ++i) {
    if (covers(config.quantum(i), next_iter_time)) return i;
  }
  return config.num_queues;
}

// ---------------------------------------------------------------------------
// MlfqLadder

MlfqLadder::MlfqLadder(int levels) {
  if (levels < 1) throw std::invalid_argument("MlfqLadder: at least one level required");
  queues_.resize(static_cast<std::size_t>(levels));
}

void MlfqLadder::push_back(int level, JobId id) {
  if (level < 1 || level > levels()) throw std::out_of_range("MlfqLadder: level out of range");
  if (contains(id)) throw std::logic_error("MlfqLadder: job already enqueued");
  if (id >= where_.size()) where_.resize(static_cast<std::size_t>(id) + 1);
  const std::uint64_t seq = next_seq_++;
  queues_[static_cast<std::size_t>(level - 1)].emplace(seq, id);
  where_[id] = Slot{level, seq};
  ++total_;
}

void MlfqLadder::remove(JobId id) {
  if (!contains(id)) throw std::logic_error("MlfqLadder: job not enqueued");
  Slot& s = where_[id];
  queues_[static_cast<std::size_t>(s.level - 1)].erase(s.seq);
  s.level = 0;
  --total_;
}

bool MlfqLadder::contains(JobId id) const { return id < where_.size() && where_[id].level != 0; }

int MlfqLadder::level_of(JobId id) const {
  if (!contains(id)) throw std::logic_error("MlfqLadder: job not enqueued");
  return where_[id].level;
}

std::uint64_t MlfqLadder::position_of(JobId id) const {
  if (!contains(id)) throw std::logic_error("MlfqLadder: job not enqueued");
  return where_[id].seq;
}

std::size_t MlfqLadder::size(int level) const { return queue(level).size(); }

const std::map<std::uint64_t, JobId>& MlfqLadder::queue(int level) const {
  if (level < 1 || level > levels()) throw std::out_of_range("MlfqLadder: level out of range");
  return queues_[static_cast<std::size_t>(level - 1)];
}

std::vector<JobId> MlfqLadder::jobs(int level) const {
  std::vector<JobId> out;
  for (const auto& [seq, id] : queue(level)) out.push_back(id);
  return out;
}

// ---------------------------------------------------------------------------
// MlfqScheduler

MlfqScheduler::MlfqScheduler(MlfqVariant variant, const MlfqConfig& config, const ModelProfile& profile)
    : variant_(variant), config_(config), profile_(profile), ladder_(config.num_queues) {
  config_.validate();
  profile_.validate();
}

Policy MlfqScheduler::policy() const {
  switch (variant_) {
    case MlfqVariant::kSkipJoin: return Policy::kSkipJoin;
    case MlfqVariant::kNaiveKill: return Policy::kMlfqKill;
    case MlfqVariant::kNaiveFinishIteration: return Policy::kMlfqFinishIteration;
  }
  return Policy::kSkipJoin;
}

const MlfqJobState& MlfqScheduler::job(JobId id) const {
  if (!knows(id)) throw std::out_of_range("MlfqScheduler: unknown job");
  return jobs_[id];
}

Seconds MlfqScheduler::next_iter(const MlfqJobState& st) const {
  return next_iteration_time(profile_, st.input_len, st.tokens_generated);
}

void MlfqScheduler::track_starvation(JobId id) {
  const auto& st = jobs_[id];
  if (st.status == JobStatus::kPending && st.priority > 1) starving_.emplace(st.timer_origin, id);
}

void MlfqScheduler::untrack_starvation(JobId id) { starving_.erase({jobs_[id].timer_origin, id}); }

void MlfqScheduler::move_to(JobId id, int level, Seconds quantum) {
  ladder_.remove(id);
  ladder_.push_back(level, id);
  jobs_[id].priority = level;
  jobs_[id].quantum_remaining = quantum;
}

void MlfqScheduler::on_arrival(const ArrivedJob& job, Seconds now, SchedulerDecision&) {
  if (knows(job.id)) throw std::invalid_argument("MlfqScheduler: job admitted twice");
  if (job.id >= jobs_.size()) {
    jobs_.resize(static_cast<std::size_t>(job.id) + 1);
    known_.resize(static_cast<std::size_t>(job.id) + 1, 0);
  }
  known_[job.id] = 1;
  MlfqJobState& st = jobs_[job.id];
  st = MlfqJobState{};
  st.arrival_time = job.arrival_time;
  st.input_len = job.input_len;
  st.timer_origin = now;
  st.priority = variant_ == MlfqVariant::kSkipJoin ? get_highest_priority(next_iter(st), config_) : 1;
  st.quantum_remaining = config_.quantum(st.priority);
  ladder_.push_back(st.priority, job.id);
  track_starvation(job.id);
}

void MlfqScheduler::on_result(const IterationResult& r, Seconds now, SchedulerDecision& out) {
  MlfqJobState& st = jobs_[r.id];
  st.status = JobStatus::kPending;
  if (r.token_emitted) ++st.tokens_generated;
  st.total_service += r.service;
  st.quantum_remaining -= r.service;
  st.timer_origin = now;

  if (r.finished) {
    ladder_.remove(r.id);
    st.status = JobStatus::kFinished;
    out.completions.push_back(r.id);
    return;
  }

  const int k = config_.num_queues;
  int target = 0;
  if (variant_ == MlfqVariant::kSkipJoin) {
    // The budget must cover the whole next iteration; skip-join never
    // starts an iteration it would have to preempt.
    const Seconds next = next_iter(st);
    if (st.quantum_remaining + kTimeEps < next) {
      target = st.priority < k ? get_demotion_priority(st.priority, next, config_) : k;
    }
  } else if (!r.token_emitted || st.quantum_remaining <= kTimeEps) {
    target = std::min(st.priority + 1, k);
  }

  if (target != 0) {
    move_to(r.id, target, config_.quantum(target));
    out.demotions.push_back(r.id);
  }
  st.quantum_remaining = std::max(st.quantum_remaining, 0.0);
  track_starvation(r.id);
}

void MlfqScheduler::on_boundary(Seconds now, SchedulerDecision& out) {
  if (!std::isfinite(config_.starve_limit) || starving_.empty()) return;

  std::vector<JobId> due;
  for (const auto& [origin, id] : starving_) {
    if (now - origin + kTimeEps < config_.starve_limit) break;
    due.push_back(id);
  }
  if (due.empty()) return;
  // Promote in queue order: Q2 first, FIFO within each queue.
  std::sort(due.begin(), due.end(), [this](JobId a, JobId b) {
    const int la = ladder_.level_of(a), lb = ladder_.level_of(b);
    if (la != lb) return la < lb;
    return ladder_.position_of(a) < ladder_.position_of(b);
  });
  for (JobId id : due) {
    MlfqJobState& st = jobs_[id];
    untrack_starvation(id);
    max_promotion_wait_ = std::max(max_promotion_wait_, now - st.timer_origin);
    // An extra quantum when Q1's is too short for the next iteration.
    move_to(id, 1, std::max(config_.quantum(1), next_iter(st)));
    st.timer_origin = now;
    out.promotions.push_back(id);
  }
}

void MlfqScheduler::select(Seconds, std::size_t capacity, const AdmitFn& admit, SchedulerDecision& out) {
  if (capacity == 0) return;
  const int k = config_.num_queues;
  for (int level = 1; level <= k; ++level) {
    for (const auto& [seq, id] : ladder_.queue(level)) {
      if (out.batch.size() >= capacity) return;
      MlfqJobState& st = jobs_[id];
      if (st.status != JobStatus::kPending) continue;
      if (admit && !admit(id)) continue;
      untrack_starvation(id);
      st.status = JobStatus::kRunning;
      BatchSlot slot{id, kInfinity};
      if (variant_ == MlfqVariant::kNaiveKill && level < k) {
        const Seconds next = next_iter(st);
        if (st.quantum_remaining + kTimeEps < next) slot.time_limit = st.quantum_remaining;
      }
      out.batch.push_back(slot);
    }
  }
}

Seconds MlfqScheduler::next_scheduled_estimate(JobId id, Seconds now) const {
  return enst(job(id), ladder_, now, config_);
}

std::size_t MlfqScheduler::top_levels_occupancy(int levels) const {
  std::size_t n = 0;
  for (int level = 1; level <= std::min(levels, config_.num_queues); ++level) n += ladder_.size(level);
  return n;
}

Seconds MlfqScheduler::longest_wait(Seconds now) const {
  if (starving_.empty()) return 0.0;
  return now - starving_.begin()->first;
}

}  // namespace llmsched
