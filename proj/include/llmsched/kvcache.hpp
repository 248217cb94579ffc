// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "llmsched/cost_model.hpp"
#include "llmsched/sched/mlfq.hpp"
#include "llmsched/types.hpp"

namespace llmsched {

enum class CachePolicy {
  kProactive,  // keep idle slots free ahead of arrivals, prefetch soon-to-run jobs
  kDefer,      // never swap; jobs wait for a free slot
  kReactive    // swap only when a scheduled job cannot be placed
};

CachePolicy parse_cache_policy(std::string_view name);
std::string_view cache_policy_name(CachePolicy policy);

inline constexpr Bytes kUnlimitedBytes = std::numeric_limits<Bytes>::max();

struct CacheConfig {
  Bytes device_capacity = kUnlimitedBytes;
  Bytes host_capacity = kUnlimitedBytes;
  int reserve_k = 4;        // K: idle slots always kept free
  int predictor_depth = 2;  // K': queues counted by the burst predictor
  CachePolicy policy = CachePolicy::kProactive;
  // Size of one idle slot when converting the slot target into bytes.
  Bytes slot_bytes = 0;
  // Tokens reserved on first placement (defer policy's fixed slots); 0 grows
  // the reservation one token at a time.
  Tokens slot_tokens = 0;
  Tokens headroom_tokens = 0;

  void validate() const;
};

// Estimated time until the job is scheduled again: the smaller of the time
// left before its starvation promotion and the service that higher-priority
// jobs can receive while descending to its level.
Seconds enst(const MlfqJobState& job, const MlfqLadder& queues, Seconds now, const MlfqConfig& config);

// max(K, jobs in the K' highest-priority queues).
std::size_t idle_slot_target(std::size_t top_levels_occupancy, const CacheConfig& config);
std::size_t idle_slot_target(const MlfqLadder& queues, const CacheConfig& config);

enum class Tier { kNone, kDevice, kHost, kInbound, kOutbound };
std::string_view tier_name(Tier tier);

struct CacheEntry {
  JobId id = 0;
  Bytes bytes = 0;
  Tier tier = Tier::kNone;
  Seconds transfer_done_at = 0.0;
  bool pinned = false;  // scheduled or running; never an offload victim
};

enum class TransferKind { kOffload, kUpload };

struct Transfer {
  JobId id = 0;
  TransferKind kind = TransferKind::kOffload;
  Bytes bytes = 0;
  Seconds start = 0.0;
  Seconds end = 0.0;
};

struct OccupancySample {
  Seconds time = 0.0;
  Bytes device_bytes = 0;
};

/// Two-tier KV cache ledger.
///
/// Device bytes count resident entries, inbound uploads from the moment they
/// start and outbound offloads until they complete. A single FIFO channel
/// carries all transfers. Space freed by an offload only becomes usable once
/// the offload has finished.
class KvCache {
 public:
  using RankFn = std::function<Seconds(JobId)>;

  KvCache(const CacheConfig& config, const ModelProfile& profile, double transfer_scale = 1.0);

  const CacheConfig& config() const { return config_; }

  // Bytes a job must hold on device to run its next iteration.
  Bytes required_bytes(Tokens input_len, Tokens generated) const;

  // Makes `id` device-resident with at least `need` bytes and pins it.
  // Returns when the entry is usable, or nullopt if no placement exists under
  // the policy (the caller skips the job this iteration).
  std::optional<Seconds> ensure_resident(JobId id, Bytes need, Seconds now, const RankFn& enst);

  // Proactive swapping toward `idle_slots` free slots. A no-op for the other
  // policies.
  std::vector<Transfer> rebalance(Seconds now, std::size_t idle_slots, const RankFn& enst);

  void unpin(JobId id);
  // Drops a finished job's entry.
  void release(JobId id, Seconds now);

  // Applies every ledger change up to `now`; returns transfers that completed.
  std::vector<Transfer> advance(Seconds now);
  std::optional<Seconds> next_transfer_end() const;
  // Transfers started since the previous call.
  std::vector<Transfer> take_started();

  const CacheEntry& entry(JobId id) const;
  Bytes device_used() const { return device_used_; }
  Bytes committed() const { return committed_; }
  Bytes peak_device_bytes() const { return peak_; }
  std::size_t offloads() const { return offloads_; }
  std::size_t uploads() const { return uploads_; }
  const std::vector<OccupancySample>& timeline() const { return timeline_; }
  Seconds transfer_duration(Bytes bytes) const;

 private:
  struct LedgerOp {
    Seconds time;
    int order;  // releases before allocations at the same instant
    std::int64_t delta;
    JobId id;
    Tier settle;  // tier the entry moves to, kNone for pure accounting
    bool operator>(const LedgerOp& o) const {
      return std::tie(time, order, id) > std::tie(o.time, o.order, o.id);
    }
  };

  CacheEntry& slot(JobId id);
  bool fits(Bytes delta) const;
  bool make_room(Bytes delta, JobId requester, Seconds now, const RankFn& enst);
  Seconds reserve(Bytes delta, Seconds now);
  void start_offload(JobId id, Seconds now);
  Seconds start_upload(JobId id, Bytes target_bytes, Seconds now);
  void apply(Seconds time, std::int64_t delta);
  void set_tier(CacheEntry& e, Tier tier);

  CacheConfig config_;
  ModelProfile profile_;
  double transfer_scale_;
  std::vector<CacheEntry> entries_;
  std::set<JobId> idle_on_device_;  // tier device and unpinned
  std::set<JobId> on_host_;
  std::vector<LedgerOp> ledger_;    // min-heap
  std::vector<Transfer> in_flight_;
  std::vector<Transfer> started_;
  Bytes device_used_ = 0;
  Bytes committed_ = 0;  // usage once in-flight transfers settle
  Bytes pending_alloc_ = 0;  // allocations queued for a later instant
  Bytes host_used_ = 0;
  Bytes peak_ = 0;
  Seconds channel_free_at_ = 0.0;
  Seconds last_release_at_ = 0.0;
  Seconds now_ = 0.0;
  std::size_t offloads_ = 0;
  std::size_t uploads_ = 0;
  std::vector<OccupancySample> timeline_;
};

}  // namespace llmsched
