// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

#include "llmsched/kvcache.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace llmsched {

CachePolicy parse_cache_policy(std::string_view name) {
  if (name == "proactive") return CachePolicy::kProactive;
  if (name == "defer") return CachePolicy::kDefer;
  if (name == "reactive") return CachePolicy::kReactive;
  throw std::invalid_argument("unknown cache policy: " + std::string(name));
}

std::string_view cache_policy_name(CachePolicy policy) {
  switch (policy) {
    case CachePolicy::kProactive: return "proactive";
    case CachePolicy::kDefer: return "defer";
    case CachePolicy::kReactive: return "reactive";
  }
  return "unknown";
}

std::string_view tier_name(Tier tier) {
  switch (tier) {
    case Tier::kNone: return "none";
    case Tier::kDevice: return "device";
    case Tier::kHost: return "host";
    case Tier::kInbound: return "inbound";
    case Tier::kOutbound: return "outbound";
  }
  return "unknown";
}

void CacheConfig::validate() const {
  if (device_capacity == 0) throw std::invalid_argument("cache: device_capacity must be > 0");
  if (reserve_k < 0) throw std::invalid_argument("cache: reserve_k must be >= 0");
  if (predictor_depth < 1) throw std::invalid_argument("cache: predictor_depth must be >= 1");
  if (slot_tokens < 0 || headroom_tokens < 0) throw std::invalid_argument("cache: token counts must be >= 0");
}

Seconds enst(const MlfqJobState& job, const MlfqLadder& queues, Seconds now, const MlfqConfig& config) {
  Seconds t_promote = kInfinity;
  if (std::isfinite(config.starve_limit)) {
    t_promote = std::max(0.0, job.timer_origin + config.starve_limit - now);
  }
  // A job j above i's level can run through every quantum from its own level
  // down to the level just above i before i is reached.
  Seconds t_execute = 0.0;
  std::size_t at_or_above = 0;
  for (int level = 1; level < job.priority; ++level) {
    at_or_above += queues.size(level);
    t_execute += static_cast<double>(at_or_above) * config.quantum(level);
  }
  return std::min(t_promote, t_execute);
}

std::size_t idle_slot_target(std::size_t top_levels_occupancy, const CacheConfig& config) {
  return std::max(static_cast<std::size_t>(config.reserve_k), top_levels_occupancy);
}

std::size_t idle_slot_target(const MlfqLadder& queues, const CacheConfig& config) {
  std::size_t n = 0;
  for (int level = 1; level <= std::min(config.predictor_depth, queues.levels()); ++level) n += queues.size(level);
  return idle_slot_target(n, config);
}

// ---------------------------------------------------------------------------

KvCache::KvCache(const CacheConfig& config, const ModelProfile& profile, double transfer_scale)
    : config_(config), profile_(profile), transfer_scale_(transfer_scale) {
  config_.validate();
  profile_.validate();
  if (!(transfer_scale > 0.0)) throw std::invalid_argument("cache: transfer_scale must be > 0");
  timeline_.push_back({0.0, 0});
}

Bytes KvCache::required_bytes(Tokens input_len, Tokens generated) const {
  Tokens tokens = generated + 1 + config_.headroom_tokens;
  if (config_.policy == CachePolicy::kDefer && config_.slot_tokens > 0) tokens = std::max(tokens, config_.slot_tokens);
  return kv_cache_bytes(profile_, input_len, tokens);
}

Seconds KvCache::transfer_duration(Bytes bytes) const { return swap_time(profile_, bytes) * transfer_scale_; }

CacheEntry& KvCache::slot(JobId id) {
  if (id >= entries_.size()) {
    const std::size_t old = entries_.size();
    entries_.resize(static_cast<std::size_t>(id) + 1);
    for (std::size_t i = old; i < entries_.size(); ++i) entries_[i].id = static_cast<JobId>(i);
  }
  return entries_[id];
}

const CacheEntry& KvCache::entry(JobId id) const {
  static const CacheEntry kEmpty{};
  if (id >= entries_.size()) return kEmpty;
  return entries_[id];
}

void KvCache::set_tier(CacheEntry& e, Tier tier) {
  if (e.tier == Tier::kDevice) idle_on_device_.erase(e.id);
  if (e.tier == Tier::kHost) on_host_.erase(e.id);
  e.tier = tier;
  if (tier == Tier::kDevice && !e.pinned) idle_on_device_.insert(e.id);
  if (tier == Tier::kHost) on_host_.insert(e.id);
}

void KvCache::apply(Seconds time, std::int64_t delta) {
  if (delta == 0) return;
  if (delta > 0) {
    const auto d = static_cast<Bytes>(delta);
    if (d > config_.device_capacity - device_used_) {
      throw std::logic_error("kv cache: device capacity exceeded");
    }
    device_used_ += d;
  } else {
    device_used_ -= static_cast<Bytes>(-delta);
  }
  peak_ = std::max(peak_, device_used_);
  if (!timeline_.empty() && timeline_.back().time == time) {
    timeline_.back().device_bytes = device_used_;
  } else {
    timeline_.push_back({time, device_used_});
  }
}

std::vector<Transfer> KvCache::advance(Seconds now) {
  std::vector<Transfer> done;
  while (!ledger_.empty() && ledger_.front().time <= now) {
    std::pop_heap(ledger_.begin(), ledger_.end(), std::greater<>{});
    const LedgerOp op = ledger_.back();
    ledger_.pop_back();
    if (op.delta > 0) pending_alloc_ -= static_cast<Bytes>(op.delta);
    apply(op.time, op.delta);
    if (op.settle == Tier::kNone) continue;

    CacheEntry& e = slot(op.id);
    if (op.settle == Tier::kHost && e.tier == Tier::kOutbound) set_tier(e, Tier::kHost);
    if (op.settle == Tier::kDevice && e.tier == Tier::kInbound) set_tier(e, Tier::kDevice);
    const TransferKind kind = op.settle == Tier::kHost ? TransferKind::kOffload : TransferKind::kUpload;
    auto it = std::find_if(in_flight_.begin(), in_flight_.end(), [&](const Transfer& t) {
      return t.id == op.id && t.kind == kind && t.end == op.time;
    });
    if (it != in_flight_.end()) {
      done.push_back(*it);
      in_flight_.erase(it);
    }
  }
  now_ = std::max(now_, now);
  return done;
}

std::optional<Seconds> KvCache::next_transfer_end() const {
  if (in_flight_.empty()) return std::nullopt;
  Seconds t = kInfinity;
  for (const auto& tr : in_flight_) t = std::min(t, tr.end);
  return t;
}

std::vector<Transfer> KvCache::take_started() {
  std::vector<Transfer> out;
  out.swap(started_);
  return out;
}

bool KvCache::fits(Bytes delta) const { return delta <= config_.device_capacity - committed_; }

Seconds KvCache::reserve(Bytes delta, Seconds now) {
  committed_ += delta;
  // Usable immediately if physically free; otherwise once every in-flight
  // offload has drained.
  const bool free_now = device_used_ + pending_alloc_ <= config_.device_capacity &&
                        delta <= config_.device_capacity - device_used_ - pending_alloc_;
  const Seconds effective = free_now ? now : std::max(now, last_release_at_);
  if (effective <= now) {
    apply(now, static_cast<std::int64_t>(delta));
  } else {
    pending_alloc_ += delta;
    ledger_.push_back({effective, 1, static_cast<std::int64_t>(delta), 0, Tier::kNone});
    std::push_heap(ledger_.begin(), ledger_.end(), std::greater<>{});
  }
  return effective;
}

bool KvCache::make_room(Bytes delta, JobId requester, Seconds now, const RankFn& enst) {
  if (fits(delta)) return true;
  if (config_.policy == CachePolicy::kDefer) return false;

  std::vector<std::pair<Seconds, JobId>> victims;
  Bytes evictable = 0;
  for (JobId id : idle_on_device_) {
    if (id == requester) continue;
    const Bytes b = entries_[id].bytes;
    if (host_used_ + evictable + b > config_.host_capacity) continue;
    victims.emplace_back(enst ? enst(id) : 0.0, id);
    evictable += b;
  }
  if (delta > config_.device_capacity - (committed_ - evictable)) return false;

  // Largest estimated next-scheduled time leaves first.
  std::sort(victims.begin(), victims.end(), std::greater<>{});
  for (const auto& [rank, id] : victims) {
    if (fits(delta)) break;
    start_offload(id, now);
  }
  return fits(delta);
}

void KvCache::start_offload(JobId id, Seconds now) {
  CacheEntry& e = slot(id);
  const Seconds start = std::max(now, channel_free_at_);
  const Seconds end = start + transfer_duration(e.bytes);
  channel_free_at_ = end;
  last_release_at_ = std::max(last_release_at_, end);
  committed_ -= e.bytes;
  host_used_ += e.bytes;
  set_tier(e, Tier::kOutbound);
  e.transfer_done_at = end;
  in_flight_.push_back({id, TransferKind::kOffload, e.bytes, start, end});
  started_.push_back(in_flight_.back());
  ledger_.push_back({end, 0, -static_cast<std::int64_t>(e.bytes), id, Tier::kHost});
  std::push_heap(ledger_.begin(), ledger_.end(), std::greater<>{});
  ++offloads_;
}

Seconds KvCache::start_upload(JobId id, Bytes target_bytes, Seconds now) {
  CacheEntry& e = slot(id);
  const Seconds start = std::max(now, channel_free_at_);
  const Seconds end = start + transfer_duration(e.bytes);
  channel_free_at_ = end;
  host_used_ -= e.bytes;
  committed_ += target_bytes;
  in_flight_.push_back({id, TransferKind::kUpload, e.bytes, start, end});
  started_.push_back(in_flight_.back());
  set_tier(e, Tier::kInbound);
  e.bytes = target_bytes;
  e.transfer_done_at = end;
  if (start <= now) {
    apply(now, static_cast<std::int64_t>(target_bytes));
  } else {
    pending_alloc_ += target_bytes;
    ledger_.push_back({start, 1, static_cast<std::int64_t>(target_bytes), id, Tier::kNone});
    std::push_heap(ledger_.begin(), ledger_.end(), std::greater<>{});
  }
  ledger_.push_back({end, 2, 0, id, Tier::kDevice});
  std::push_heap(ledger_.begin(), ledger_.end(), std::greater<>{});
  ++uploads_;
  return end;
}

std::optional<Seconds> KvCache::ensure_resident(JobId id, Bytes need, Seconds now, const RankFn& enst) {
  advance(now);
  CacheEntry& e = slot(id);
  if (e.pinned) throw std::logic_error("kv cache: job already pinned");
  need = std::max(need, e.bytes);
  Seconds ready = now;

  switch (e.tier) {
    case Tier::kNone: {
      if (!make_room(need, id, now, enst)) return std::nullopt;
      ready = reserve(need, now);
      e.bytes = need;
      set_tier(e, Tier::kDevice);
      break;
    }
    case Tier::kDevice:
    case Tier::kInbound: {
      const Bytes delta = need - e.bytes;
      if (delta > 0) {
        if (!make_room(delta, id, now, enst)) return std::nullopt;
        ready = reserve(delta, now);
        e.bytes = need;
      }
      if (e.tier == Tier::kInbound) ready = std::max(ready, e.transfer_done_at);
      break;
    }
    case Tier::kHost:
    case Tier::kOutbound: {
      if (!make_room(need, id, now, enst)) return std::nullopt;
      ready = start_upload(id, need, now);
      break;
    }
  }
  e.pinned = true;
  idle_on_device_.erase(id);
  return ready;
}

void KvCache::unpin(JobId id) {
  CacheEntry& e = slot(id);
  e.pinned = false;
  if (e.tier == Tier::kDevice) idle_on_device_.insert(id);
}

void KvCache::release(JobId id, Seconds now) {
  advance(now);
  CacheEntry& e = slot(id);
  if (e.tier != Tier::kDevice) throw std::logic_error("kv cache: released entry is not device-resident");
  committed_ -= e.bytes;
  apply(now, -static_cast<std::int64_t>(e.bytes));
  e.pinned = false;
  set_tier(e, Tier::kNone);
  e.bytes = 0;
}

std::vector<Transfer> KvCache::rebalance(Seconds now, std::size_t idle_slots, const RankFn& enst) {
  std::vector<Transfer> started;
  if (config_.policy != CachePolicy::kProactive || config_.device_capacity == kUnlimitedBytes) return started;
  advance(now);

  const Bytes slot_bytes = std::max<Bytes>(config_.slot_bytes, 1);
  const Bytes reserve_bytes =
      idle_slots > config_.device_capacity / slot_bytes ? config_.device_capacity : idle_slots * slot_bytes;
  auto free_bytes = [this] { return config_.device_capacity - committed_; };

  if (free_bytes() < reserve_bytes && !idle_on_device_.empty()) {
    std::vector<std::pair<Seconds, JobId>> ranked;
    for (JobId id : idle_on_device_) ranked.emplace_back(enst ? enst(id) : 0.0, id);
    std::sort(ranked.begin(), ranked.end(), std::greater<>{});
    for (const auto& [rank, id] : ranked) {
      if (free_bytes() >= reserve_bytes) break;
      if (host_used_ + entries_[id].bytes > config_.host_capacity) continue;
      start_offload(id, now);
      started.push_back(in_flight_.back());
    }
  }

  if (!on_host_.empty() && free_bytes() > reserve_bytes) {
    std::vector<std::pair<Seconds, JobId>> ranked;
    for (JobId id : on_host_) ranked.emplace_back(enst ? enst(id) : 0.0, id);
    std::sort(ranked.begin(), ranked.end());
    for (const auto& [rank, id] : ranked) {
      const Bytes b = entries_[id].bytes;
      if (b > free_bytes() || free_bytes() - b < reserve_bytes) break;
      start_upload(id, b, now);
      started.push_back(in_flight_.back());
    }
  }
  return started;
}

}  // namespace llmsched
