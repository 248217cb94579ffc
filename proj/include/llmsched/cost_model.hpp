// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "llmsched/types.hpp"

namespace llmsched {

/// Analytic timing and memory profile of a served model.
///
/// Iteration times are affine in the prompt length for the first
/// (initialization) iteration and constant for decode iterations; both are
/// divided by the effective tensor-parallel speedup.
struct ModelProfile {
  std::string name = "custom";
  int layers = 1;
  int hidden = 1;
  int bytes_per_scalar = 2;
  Seconds first_iter_base = 0.0;   // a
  Seconds first_iter_slope = 0.0;  // b, per input token
  Seconds decode_iter_time = 1.0;  // d
  int tp_degree = 1;
  double tp_efficiency = 1.0;
  int pipeline_stages = 1;
  Seconds stage_comm_latency = 0.0;
  double swap_bandwidth = 64.0 * 1024 * 1024 * 1024;  // bytes per second

  // Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

Seconds first_iteration_time(const ModelProfile& profile, Tokens input_len);
Seconds decode_iteration_time(const ModelProfile& profile, Tokens context_len);

// Time of the next iteration for a job that has produced `generated` tokens.
Seconds next_iteration_time(const ModelProfile& profile, Tokens input_len, Tokens generated);

// Smallest iteration time any job can have; the natural quantum of the top queue.
Seconds min_iteration_time(const ModelProfile& profile);

Bytes kv_cache_bytes(const ModelProfile& profile, Tokens input_len, Tokens generated);
Bytes kv_bytes_per_token(const ModelProfile& profile);

Seconds swap_time(const ModelProfile& profile, Bytes bytes);

// Named calibration presets: "gpt3-2.7b", "gpt3-66b", "gpt3-175b".
ModelProfile preset_profile(std::string_view name);
std::vector<std::string> preset_names();

// Profile under which a job's input length equals its first-iteration time
// in seconds and every decode iteration takes one second.
ModelProfile unit_profile();

}  // namespace llmsched
