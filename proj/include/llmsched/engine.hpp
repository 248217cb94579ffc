// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "llmsched/cost_model.hpp"
#include "llmsched/kvcache.hpp"
#include "llmsched/metrics.hpp"
#include "llmsched/sched/scheduler.hpp"
#include "llmsched/types.hpp"

namespace llmsched {

enum class PipelineMode {
  kInterJob,  // a new batch may enter stage 1 as soon as it is free
  kJobLevel   // the next batch waits until the previous one leaves the last stage
};

PipelineMode parse_pipeline_mode(std::string_view name);
std::string_view pipeline_mode_name(PipelineMode mode);

struct PipelineConfig {
  int stages = 1;
  PipelineMode mode = PipelineMode::kInterJob;
};

struct SimulationConfig {
  ModelProfile profile;
  SchedulerConfig scheduler;
  CacheConfig cache;
  PipelineConfig pipeline;
  double batching_overhead = 1.0;
  bool record_events = true;
  bool record_token_times = true;
};

// Queue-level event kinds; equal timestamps are processed in this order.
enum class EventKind { kArrival = 0, kTransferComplete = 1, kIterationComplete = 2, kPromotionCheck = 3 };

// Kinds of records written to the event log.
enum class LogKind {
  kArrival,
  kBatchStart,
  kToken,
  kKill,
  kFinish,
  kDemote,
  kPromote,
  kOffload,
  kUpload,
  kTransferComplete,
};
std::string_view log_kind_name(LogKind kind);

struct EventRecord {
  Seconds time = 0.0;
  LogKind kind = LogKind::kArrival;
  std::string job;  // empty when not tied to one job
  std::string detail;

  bool operator==(const EventRecord&) const = default;
};

struct BatchRecord {
  Seconds decided = 0.0;
  Seconds start = 0.0;  // after any upload stall
  Seconds end = 0.0;    // last pipeline stage done
  Seconds duration = 0.0;
  std::vector<JobId> members;
};

struct SimulationResult {
  Metrics metrics;
  std::vector<JctRecord> jobs;  // indexed like the (arrival-sorted) trace
  std::vector<EventRecord> events;
  std::vector<BatchRecord> batches;
};

// Raised when jobs remain but nothing can run and no event is pending.
class DeadlockError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

SimulationResult run(std::span<const JobSpec> trace, const SimulationConfig& config);

// Extra stall when a KV swap on a downstream stage overlaps with receiving
// the previous stage's intermediate result.
Seconds overlapped_swap(Seconds swap, Seconds transmission);

// Per-stage time of one batch iteration split over `stages` stages.
Seconds stage_time(Seconds iteration, int stages, Seconds comm_latency);

void write_event_log(std::ostream& out, std::span<const EventRecord> events);
std::vector<EventRecord> read_event_log(std::istream& in);

// Rebuilds per-job JCT records from arrival, token and finish log records.
std::vector<JctRecord> replay_jct_records(std::span<const EventRecord> events);

}  // namespace llmsched
