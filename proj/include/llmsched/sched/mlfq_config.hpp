// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "llmsched/types.hpp"

namespace llmsched {

// Queue ladder parameters. Levels are numbered from 1 (highest priority).
struct MlfqConfig {
  int num_queues = 8;
  Seconds base_quantum = 1.0;
  double quantum_ratio = 2.0;
  Seconds starve_limit = kInfinity;
  std::size_t max_batch_size = 1;

  // base_quantum * quantum_ratio^(level - 1)
  Seconds quantum(int level) const;
  std::vector<Seconds> quanta() const;
  void validate() const;
};

// Highest level whose quantum covers `first_iter_time`; the lowest level when
// none does.
int get_highest_priority(Seconds first_iter_time, const MlfqConfig& config);

// First level below `current` whose quantum covers `next_iter_time`; the
// lowest level when none does.
int get_demotion_priority(int current, Seconds next_iter_time, const MlfqConfig& config);

}  // namespace llmsched
