// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "llmsched/types.hpp"

namespace llmsched {

struct WorkloadConfig {
  std::size_t num_jobs = 1000;
  double rate = 1.0;        // jobs per second
  double cv = 1.0;          // coefficient of variation of inter-arrival gaps
  double zipf_theta = 1.0;  // skew of the length distribution
  Tokens max_input_len = 512;
  Tokens max_output_len = 128;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Truncated Zipf law over {1..max_value}: P(x) proportional to x^-theta.
/// Sampling is by inverse CDF over the precomputed cumulative table.
class ZipfSampler {
 public:
  ZipfSampler(double theta, Tokens max_value);

  Tokens operator()(std::mt19937_64& rng) const;
  double pmf(Tokens x) const;
  Tokens max_value() const { return static_cast<Tokens>(cdf_.size()); }

 private:
  std::vector<double> cdf_;
  double norm_ = 1.0;
  double theta_;
};

/// Gamma-distributed inter-arrival gaps with mean 1/rate and the given CV.
class GammaArrivals {
 public:
  GammaArrivals(double rate, double cv);

  // Strictly positive gap.
  Seconds next_gap(std::mt19937_64& rng);

  double shape() const { return dist_.alpha(); }
  double scale() const { return dist_.beta(); }

 private:
  std::gamma_distribution<double> dist_;
};

std::vector<JobSpec> generate(const WorkloadConfig& config);

// Trace format: one `id, arrival_time_s, input_len, output_len` record per
// line; blank lines and lines starting with '#' are ignored.
std::vector<JobSpec> parse_trace(std::istream& in, std::vector<std::string>* warnings = nullptr);
std::vector<JobSpec> load_trace(const std::filesystem::path& path);
void write_trace(std::ostream& out, const std::vector<JobSpec>& jobs);

}  // namespace llmsched
