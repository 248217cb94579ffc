// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "llmsched/kvcache.hpp"
#include "llmsched/types.hpp"

namespace llmsched {

struct JctRecord {
  std::string job;
  Seconds arrival = 0.0;
  Seconds first_token_at = 0.0;
  Seconds completion = 0.0;
  Tokens tokens = 0;
  std::vector<Seconds> token_times;

  Seconds jct() const { return completion - arrival; }
};

struct Metrics {
  std::size_t jobs = 0;
  Seconds avg_jct = 0.0;
  Seconds p90_jct = 0.0;
  Seconds max_jct = 0.0;

  Tokens tokens_emitted = 0;
  std::size_t batches = 0;
  std::size_t demotions = 0;
  std::size_t promotions = 0;
  std::size_t kills = 0;
  Seconds max_batch_duration = 0.0;  // decision to completion, stalls included
  Seconds max_promotion_wait = 0.0;

  std::size_t offloads = 0;
  std::size_t uploads = 0;
  std::size_t swaps = 0;
  Bytes peak_device_bytes = 0;
  std::vector<OccupancySample> occupancy;

  Seconds makespan = 0.0;  // first arrival to last completion
  std::vector<double> stage_utilization;
};

// Nearest-rank percentile, p in (0, 100].
Seconds percentile_nearest_rank(std::vector<Seconds> values, double p);

// JCT aggregates over completed jobs; other fields are left at defaults.
Metrics compute_metrics(std::span<const JctRecord> records);

}  // namespace llmsched
