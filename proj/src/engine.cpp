// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

#include "llmsched/engine.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <queue>
#include <sstream>
#include <tuple>

#include "llmsched/sched/mlfq.hpp"

namespace llmsched {

PipelineMode parse_pipeline_mode(std::string_view name) {
  if (name == "interjob") return PipelineMode::kInterJob;
  if (name == "joblevel") return PipelineMode::kJobLevel;
  throw std::invalid_argument("unknown pipeline mode: " + std::string(name));
}

std::string_view pipeline_mode_name(PipelineMode mode) {
  return mode == PipelineMode::kInterJob ? "interjob" : "joblevel";
}

namespace {

constexpr std::pair<LogKind, std::string_view> kLogKinds[] = {
    {LogKind::kArrival, "arrival"},
    {LogKind::kBatchStart, "batch_start"},
    {LogKind::kToken, "token"},
    {LogKind::kKill, "kill"},
    {LogKind::kFinish, "finish"},
    {LogKind::kDemote, "demote"},
    {LogKind::kPromote, "promote"},
    {LogKind::kOffload, "offload"},
    {LogKind::kUpload, "upload"},
    {LogKind::kTransferComplete, "transfer_complete"},
};

std::string fmt_time(Seconds t) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", t);
  return buf;
}

struct QueuedEvent {
  Seconds time;
  EventKind kind;
  std::uint64_t key;  // job id, batch index or transfer sequence
  bool operator>(const QueuedEvent& o) const {
    return std::tie(time, kind, key) > std::tie(o.time, o.kind, o.key);
  }
};

struct JobRuntime {
  Tokens generated = 0;
  bool finished = false;
  Seconds ready_at = 0.0;
};

struct InFlightBatch {
  std::vector<BatchSlot> slots;
  std::vector<Seconds> service;
  std::vector<char> killed;
};

class Simulation {
 public:
  Simulation(std::span<const JobSpec> trace, const SimulationConfig& config)
      : trace_(trace), config_(config), stages_(std::max(1, config.pipeline.stages)) {
    config_.profile.validate();
    config_.scheduler.mlfq.validate();
    if (config_.batching_overhead <= 0.0) throw std::invalid_argument("batching_overhead must be > 0");
    for (std::size_t i = 1; i < trace_.size(); ++i) {
      if (trace_[i].arrival_time < trace_[i - 1].arrival_time)
        throw std::invalid_argument("simulation trace must be sorted by arrival time");
    }
    CacheConfig cache = config_.cache;
    if (cache.slot_bytes == 0) cache.slot_bytes = mean_job_bytes();
    cache_ = std::make_unique<KvCache>(cache, config_.profile, 1.0 / stages_);
    scheduler_ = make_scheduler(config_.scheduler, config_.profile,
                                [this](JobId id) { return trace_[id].output_len; });
    mlfq_ = dynamic_cast<const MlfqScheduler*>(scheduler_.get());
    jobs_.resize(trace_.size());
    records_.resize(trace_.size());
    stage_free_.assign(static_cast<std::size_t>(stages_), 0.0);
    stage_busy_.assign(static_cast<std::size_t>(stages_), 0.0);
  }

  SimulationResult run() {
    for (JobId id = 0; id < trace_.size(); ++id) {
      const JobSpec& spec = trace_[id];
      if (spec.input_len < 1 || spec.output_len < 1) throw std::invalid_argument("job " + spec.id + " has empty lengths");
      const Bytes peak = cache_->required_bytes(spec.input_len, spec.output_len - 1);
      if (peak > cache_->config().device_capacity) {
        throw std::invalid_argument("job " + spec.id + " needs " + std::to_string(peak) +
                                    " KV bytes, more than the device capacity " +
                                    std::to_string(cache_->config().device_capacity));
      }
      push({spec.arrival_time, EventKind::kArrival, id});
      records_[id].job = spec.id;
      records_[id].arrival = spec.arrival_time;
    }

    while (!events_.empty()) {
      const Seconds now = events_.top().time;
      while (!events_.empty() && events_.top().time == now) {
        const QueuedEvent ev = events_.top();
        events_.pop();
        handle(ev, now);
      }
      for (const Transfer& t : cache_->advance(now)) {
        log(now, LogKind::kTransferComplete, t.id, t.kind == TransferKind::kOffload ? "offload" : "upload");
      }
      decide(now);
    }

    if (finished_ != trace_.size()) {
      std::ostringstream msg;
      msg << "deadlock: " << (trace_.size() - finished_) << " of " << trace_.size()
          << " jobs unfinished with no runnable work; device bytes in use " << cache_->device_used() << " of "
          << cache_->config().device_capacity;
      throw DeadlockError(msg.str());
    }
    return finish();
  }

 private:
  Bytes mean_job_bytes() const {
    if (trace_.empty()) return 1;
    long double sum = 0;
    for (const auto& j : trace_) sum += kv_cache_bytes(config_.profile, j.input_len, j.output_len);
    return static_cast<Bytes>(sum / trace_.size());
  }

  void push(QueuedEvent ev) { events_.push(ev); }

  void log(Seconds t, LogKind kind, std::optional<JobId> id, std::string detail = {}) {
    if (!config_.record_events) return;
    result_.events.push_back({t, kind, id ? trace_[*id].id : std::string(), std::move(detail)});
  }

  Seconds rank(JobId id, Seconds now) const { return scheduler_->next_scheduled_estimate(id, now); }

  void handle(const QueuedEvent& ev, Seconds now) {
    switch (ev.kind) {
      case EventKind::kArrival: {
        const auto id = static_cast<JobId>(ev.key);
        arrivals_.push_back({id, trace_[id].arrival_time, trace_[id].input_len});
        log(now, LogKind::kArrival, id);
        break;
      }
      case EventKind::kIterationComplete: complete_batch(static_cast<std::size_t>(ev.key), now); break;
      case EventKind::kTransferComplete:
      case EventKind::kPromotionCheck: break;
    }
  }

  void complete_batch(std::size_t index, Seconds now) {
    InFlightBatch batch = std::move(in_flight_.at(index));
    in_flight_.erase(index);
    for (std::size_t i = 0; i < batch.slots.size(); ++i) {
      const JobId id = batch.slots[i].id;
      JobRuntime& job = jobs_[id];
      JctRecord& rec = records_[id];
      IterationResult r{id, batch.service[i], !batch.killed[i], false};
      if (batch.killed[i]) {
        ++kills_;
        log(now, LogKind::kKill, id, "wasted=" + fmt_time(batch.service[i]));
      } else {
        ++job.generated;
        rec.tokens = job.generated;
        if (job.generated == 1) rec.first_token_at = now;
        if (config_.record_token_times) rec.token_times.push_back(now);
        log(now, LogKind::kToken, id, std::to_string(job.generated));
        if (job.generated == trace_[id].output_len) {
          job.finished = true;
          r.finished = true;
          rec.completion = now;
          ++finished_;
          cache_->release(id, now);
          log(now, LogKind::kFinish, id);
        }
      }
      if (!r.finished) cache_->unpin(id);
      results_.push_back(r);
    }
  }

  void decide(Seconds now) {
    const std::size_t max_in_flight =
        config_.pipeline.mode == PipelineMode::kInterJob ? static_cast<std::size_t>(stages_) : 1;
    const bool can_dispatch = stage_free_[0] <= now && in_flight_.size() < max_in_flight;
    const std::size_t capacity = can_dispatch ? config_.scheduler.mlfq.max_batch_size : 0;

    if (arrivals_.empty() && results_.empty() && capacity == 0) return;

    const KvCache::RankFn ranker = [this, now](JobId id) { return rank(id, now); };
    const AdmitFn admit = [&](JobId id) {
      const Bytes need = cache_->required_bytes(trace_[id].input_len, jobs_[id].generated);
      const auto ready = cache_->ensure_resident(id, need, now, ranker);
      if (!ready) return false;
      jobs_[id].ready_at = *ready;
      return true;
    };

    if (!steps_.empty()) max_step_gap_ = std::max(max_step_gap_, now - steps_.back());
    SchedulerDecision d = scheduler_->step(arrivals_, results_, now, capacity, admit);
    arrivals_.clear();
    results_.clear();

    for (JobId id : d.demotions) {
      ++demotions_;
      log(now, LogKind::kDemote, id, mlfq_ ? "Q" + std::to_string(mlfq_->job(id).priority) : std::string());
    }
    for (JobId id : d.promotions) {
      ++promotions_;
      log(now, LogKind::kPromote, id);
    }
    if (!d.batch.empty()) launch(d.batch, now);

    if (cache_->config().policy == CachePolicy::kProactive) {
      const std::size_t occupancy = scheduler_->top_levels_occupancy(cache_->config().predictor_depth);
      cache_->rebalance(now, idle_slot_target(occupancy, cache_->config()), ranker);
    }
    for (const Transfer& t : cache_->take_started()) {
      log(now, t.kind == TransferKind::kOffload ? LogKind::kOffload : LogKind::kUpload, t.id,
          "bytes=" + std::to_string(t.bytes) + " end=" + fmt_time(t.end));
      push({t.end, EventKind::kTransferComplete, transfer_seq_++});
    }
  }

  void launch(const std::vector<BatchSlot>& slots, Seconds now) {
    InFlightBatch batch;
    batch.slots = slots;
    Seconds longest = 0.0;
    Seconds ready = now;
    Seconds upload_stall = 0.0;
    for (const BatchSlot& s : slots) {
      const JobSpec& spec = trace_[s.id];
      const Seconds full = next_iteration_time(config_.profile, spec.input_len, jobs_[s.id].generated);
      const bool killed = s.time_limit < full;
      const Seconds t = killed ? std::max(0.0, s.time_limit) : full;
      batch.service.push_back(t);
      batch.killed.push_back(killed ? 1 : 0);
      longest = std::max(longest, t);
      ready = std::max(ready, jobs_[s.id].ready_at);
      if (jobs_[s.id].ready_at > now) upload_stall = std::max(upload_stall, jobs_[s.id].ready_at - now);
    }
    const Seconds duration = longest * config_.batching_overhead;
    const Seconds comm = stages_ > 1 ? config_.profile.stage_comm_latency : 0.0;
    const Seconds tau = stage_time(duration, stages_, config_.profile.stage_comm_latency);
    // Downstream stages repeat stage 1's swap while receiving its output.
    const Seconds downstream_stall = stages_ > 1 ? overlapped_swap(upload_stall, comm) : 0.0;

    Seconds leave = ready;
    Seconds first_leave = ready;
    for (int s = 0; s < stages_; ++s) {
      const auto si = static_cast<std::size_t>(s);
      const Seconds enter = s == 0 ? ready : std::max(leave, stage_free_[si]);
      const Seconds busy = tau + (s > 0 ? downstream_stall : 0.0);
      leave = enter + busy;
      stage_free_[si] = leave;
      stage_busy_[si] += busy;
      if (s == 0) first_leave = leave;
    }
    if (config_.pipeline.mode == PipelineMode::kJobLevel) stage_free_[0] = leave;

    const std::size_t index = batch_seq_++;
    push({leave, EventKind::kIterationComplete, index});
    if (stages_ > 1 && config_.pipeline.mode == PipelineMode::kInterJob) {
      // Wakes the dispatcher when stage 1 frees up.
      push({first_leave, EventKind::kPromotionCheck, index});
    }

    BatchRecord rec{now, ready, leave, duration, {}};
    std::string members;
    for (const BatchSlot& s : slots) {
      rec.members.push_back(s.id);
      if (!members.empty()) members += ' ';
      members += trace_[s.id].id;
    }
    max_batch_duration_ = std::max(max_batch_duration_, leave - now);
    log(now, LogKind::kBatchStart, std::nullopt, "start=" + fmt_time(ready) + " jobs=" + members);
    result_.batches.push_back(std::move(rec));
    in_flight_.emplace(index, std::move(batch));
    steps_.push_back(now);
  }

  SimulationResult finish() {
    Metrics m = compute_metrics(records_);
    m.batches = result_.batches.size();
    m.demotions = demotions_;
    m.promotions = promotions_;
    m.kills = kills_;
    m.max_batch_duration = max_batch_duration_;
    m.max_promotion_wait = mlfq_ ? mlfq_->max_promotion_wait() : 0.0;
    m.offloads = cache_->offloads();
    m.uploads = cache_->uploads();
    m.swaps = m.offloads + m.uploads;
    m.peak_device_bytes = cache_->peak_device_bytes();
    m.occupancy = cache_->timeline();
    if (!trace_.empty()) {
      Seconds last = 0.0;
      for (const auto& r : records_) last = std::max(last, r.completion);
      m.makespan = last - trace_.front().arrival_time;
    }
    for (Seconds busy : stage_busy_) m.stage_utilization.push_back(m.makespan > 0 ? busy / m.makespan : 0.0);
    result_.metrics = std::move(m);
    result_.jobs = std::move(records_);
    return std::move(result_);
  }

  std::span<const JobSpec> trace_;
  SimulationConfig config_;
  int stages_;
  std::unique_ptr<KvCache> cache_;
  std::unique_ptr<Scheduler> scheduler_;
  const MlfqScheduler* mlfq_ = nullptr;

  std::priority_queue<QueuedEvent, std::vector<QueuedEvent>, std::greater<>> events_;
  std::vector<JobRuntime> jobs_;
  std::vector<JctRecord> records_;
  std::vector<ArrivedJob> arrivals_;
  std::vector<IterationResult> results_;
  std::map<std::size_t, InFlightBatch> in_flight_;
  std::vector<Seconds> stage_free_;
  std::vector<Seconds> stage_busy_;
  std::vector<Seconds> steps_;
  std::size_t batch_seq_ = 0;
  std::uint64_t transfer_seq_ = 0;
  std::size_t finished_ = 0;
  std::size_t demotions_ = 0;
  std::size_t promotions_ = 0;
  std::size_t kills_ = 0;
  Seconds max_batch_duration_ = 0.0;
  Seconds max_step_gap_ = 0.0;
  SimulationResult result_;
};

}  // namespace

std::string_view log_kind_name(LogKind kind) {
  for (const auto& [k, name] : kLogKinds) {
    if (k == kind) return name;
  }
  return "unknown";
}

SimulationResult run(std::span<const JobSpec> trace, const SimulationConfig& config) {
  return Simulation(trace, config).run();
}

Seconds overlapped_swap(Seconds swap, Seconds transmission) {
  return std::max(swap, transmission) - transmission;
}

Seconds stage_time(Seconds iteration, int stages, Seconds comm_latency) {
  if (stages <= 1) return iteration;
  return iteration / stages + comm_latency;
}

void write_event_log(std::ostream& out, std::span<const EventRecord> events) {
  out << "time,kind,job_id,detail\n";
  for (const auto& e : events) {
    out << fmt_time(e.time) << ',' << log_kind_name(e.kind) << ',' << e.job << ',' << e.detail << '\n';
  }
}

std::vector<EventRecord> read_event_log(std::istream& in) {
  std::vector<EventRecord> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("time,", 0) == 0) continue;
    if (line.empty()) continue;
    std::array<std::string, 3> head;
    std::size_t pos = 0;
    for (auto& field : head) {
      const std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) throw std::runtime_error("event log line " + std::to_string(line_no) + ": too few fields");
      field = line.substr(pos, comma - pos);
      pos = comma + 1;
    }
    EventRecord e;
    e.time = std::stod(head[0]);
    bool known = false;
    for (const auto& [k, name] : kLogKinds) {
      if (name == head[1]) {
        e.kind = k;
        known = true;
      }
    }
    if (!known) throw std::runtime_error("event log line " + std::to_string(line_no) + ": unknown kind " + head[1]);
    e.job = head[2];
    e.detail = line.substr(pos);
    events.push_back(std::move(e));
  }
  return events;
}

std::vector<JctRecord> replay_jct_records(std::span<const EventRecord> events) {
  std::vector<JctRecord> records;
  std::map<std::string, std::size_t> index;
  for (const auto& e : events) {
    if (e.kind == LogKind::kArrival) {
      index[e.job] = records.size();
      JctRecord r;
      r.job = e.job;
      r.arrival = e.time;
      records.push_back(std::move(r));
      continue;
    }
    auto it = index.find(e.job);
    if (it == index.end()) continue;
    JctRecord& r = records[it->second];
    if (e.kind == LogKind::kToken) {
      ++r.tokens;
      if (r.tokens == 1) r.first_token_at = e.time;
      r.token_times.push_back(e.time);
    } else if (e.kind == LogKind::kFinish) {
      r.completion = e.time;
    }
  }
  return records;
}

}  // namespace llmsched
