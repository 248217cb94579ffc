// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

#include "llmsched/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace llmsched {

namespace {

double parallel_speedup(const ModelProfile& p) { return p.tp_degree * p.tp_efficiency; }

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("ModelProfile: ") + what);
}

}  // namespace

void ModelProfile::validate() const {
  require(layers >= 1, "layers must be >= 1");
  require(hidden >= 1, "hidden must be >= 1");
  require(bytes_per_scalar >= 1, "bytes_per_scalar must be >= 1");
  require(tp_degree >= 1, "tp_degree must be >= 1");
  require(pipeline_stages >= 1, "pipeline_stages must be >= 1");
  require(first_iter_base >= 0.0 && first_iter_slope >= 0.0, "first-iteration coefficients must be >= 0");
  require(first_iter_base + first_iter_slope > 0.0, "first iteration of a one-token prompt must take time");
  require(decode_iter_time > 0.0, "decode_iter_time must be > 0");
  require(tp_efficiency > 0.0 && tp_efficiency <= 1.0, "tp_efficiency must be in (0, 1]");
  require(stage_comm_latency >= 0.0, "stage_comm_latency must be >= 0");
  require(swap_bandwidth > 0.0 && std::isfinite(swap_bandwidth), "swap_bandwidth must be positive");
}

Seconds first_iteration_time(const ModelProfile& profile, Tokens input_len) {
  if (input_len < 1) throw std::invalid_argument("first_iteration_time: input_len must be >= 1");
  return (profile.first_iter_base + profile.first_iter_slope * static_cast<double>(input_len)) /
         parallel_speedup(profile);
}

Seconds decode_iteration_time(const ModelProfile& profile, Tokens context_len) {
  if (context_len < 1) throw std::invalid_argument("decode_iteration_time: context_len must be >= 1");
  return profile.decode_iter_time / parallel_speedup(profile);
}

Seconds next_iteration_time(const ModelProfile& profile, Tokens input_len, Tokens generated) {
  if (generated == 0) return first_iteration_time(profile, input_len);
  return decode_iteration_time(profile, input_len + generated);
}

Seconds min_iteration_time(const ModelProfile& profile) {
  return std::min(first_iteration_time(profile, 1), decode_iteration_time(profile, 1));
}

Bytes kv_bytes_per_token(const ModelProfile& profile) {
  // One key and one value vector of width h per layer.
  return 2ULL * static_cast<Bytes>(profile.bytes_per_scalar) * static_cast<Bytes>(profile.layers) *
         static_cast<Bytes>(profile.hidden);
}

Bytes kv_cache_bytes(const ModelProfile& profile, Tokens input_len, Tokens generated) {
  if (input_len < 1) throw std::invalid_argument("kv_cache_bytes: input_len must be >= 1");
  if (generated < 0) throw std::invalid_argument("kv_cache_bytes: generated must be >= 0");
  return kv_bytes_per_token(profile) * static_cast<Bytes>(input_len + generated);
}

Seconds swap_time(const ModelProfile& profile, Bytes bytes) {
  return static_cast<double>(bytes) / profile.swap_bandwidth;
}

ModelProfile preset_profile(std::string_view name) {
  ModelProfile p;
  p.name = std::string(name);
  p.bytes_per_scalar = 2;
  p.swap_bandwidth = 64.0 * 1024 * 1024 * 1024;  // PCIe 4.0 x16
  if (name == "gpt3-2.7b") {
    p.layers = 32;
    p.hidden = 2560;
    p.first_iter_base = 0.020;
    p.first_iter_slope = 0.0001;
    p.decode_iter_time = 0.020;
    p.stage_comm_latency = 0.002;
  } else if (name == "gpt3-66b") {
    p.layers = 64;
    p.hidden = 9216;
    p.first_iter_base = 0.120;
    p.first_iter_slope = 0.0006;
    p.decode_iter_time = 0.120;
    p.stage_comm_latency = 0.005;
  } else if (name == "gpt3-175b") {
    p.layers = 96;
    p.hidden = 12288;
    p.first_iter_base = 0.250;
    p.first_iter_slope = 0.0015;
    p.decode_iter_time = 0.250;
    p.pipeline_stages = 2;
    p.stage_comm_latency = 0.010;
  } else {
    throw std::invalid_argument("unknown model preset: " + std::string(name));
  }
  return p;
}

std::vector<std::string> preset_names() { return {"gpt3-2.7b", "gpt3-66b", "gpt3-175b"}; }

ModelProfile unit_profile() {
  ModelProfile p;
  p.name = "unit";
  p.first_iter_base = 0.0;
  p.first_iter_slope = 1.0;
  p.decode_iter_time = 1.0;
  return p;
}

}  // namespace llmsched
