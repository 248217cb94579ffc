// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

#include "llmsched/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace llmsched {

Seconds percentile_nearest_rank(std::vector<Seconds> values, double p) {
  if (values.empty()) return 0.0;
  if (!(p > 0.0 && p <= 100.0)) throw std::invalid_argument("percentile must be in (0, 100]");
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size()) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

Metrics compute_metrics(std::span<const JctRecord> records) {
  Metrics m;
  m.jobs = records.size();
  if (records.empty()) return m;
  std::vector<Seconds> jct;
  jct.reserve(records.size());
  double sum = 0.0;
  for (const auto& r : records) {
    jct.push_back(r.jct());
    sum += r.jct();
    m.tokens_emitted += r.tokens;
  }
  m.avg_jct = sum / static_cast<double>(records.size());
  m.max_jct = *std::max_element(jct.begin(), jct.end());
  m.p90_jct = percentile_nearest_rank(std::move(jct), 90.0);
  return m;
}

}  // namespace llmsched
