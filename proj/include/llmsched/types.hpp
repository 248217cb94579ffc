// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <string>

namespace llmsched {

using Seconds = double;
using Bytes = std::uint64_t;
using Tokens = std::int64_t;

// Dense index of a job within a trace (position after sorting by arrival).
using JobId = std::uint32_t;

inline constexpr Seconds kInfinity = std::numeric_limits<Seconds>::infinity();

// Immutable description of one inference request.
struct JobSpec {
  std::string id;
  Seconds arrival_time = 0.0;
  Tokens input_len = 1;
  Tokens output_len = 1;

  bool operator==(const JobSpec&) const = default;
};

}  // namespace llmsched
