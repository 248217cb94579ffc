// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

#include "llmsched/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace llmsched {

void WorkloadConfig::validate() const {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw std::invalid_argument("workload: rate must be > 0");
  if (!(cv > 0.0) || !std::isfinite(cv)) throw std::invalid_argument("workload: cv must be > 0");
  if (!(zipf_theta > 0.0) || !std::isfinite(zipf_theta))
    throw std::invalid_argument("workload: zipf_theta must be > 0");
  if (max_input_len < 1 || max_output_len < 1)
    throw std::invalid_argument("workload: maximum lengths must be >= 1");
}

ZipfSampler::ZipfSampler(double theta, Tokens max_value) : theta_(theta) {
  if (!(theta > 0.0)) throw std::invalid_argument("zipf: theta must be > 0");
  if (max_value < 1) throw std::invalid_argument("zipf: max_value must be >= 1");
  cdf_.resize(static_cast<std::size_t>(max_value));
  double acc = 0.0;
  for (Tokens x = 1; x <= max_value; ++x) {
    acc += std::pow(static_cast<double>(x), -theta);
    cdf_[static_cast<std::size_t>(x - 1)] = acc;
  }
  norm_ = acc;
  for (double& c : cdf_) c /= norm_;
  cdf_.back() = 1.0;
}

Tokens ZipfSampler::operator()(std::mt19937_64& rng) const {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<Tokens>(it - cdf_.begin()) + 1;
}

double ZipfSampler::pmf(Tokens x) const {
  if (x < 1 || x > max_value()) return 0.0;
  return std::pow(static_cast<double>(x), -theta_) / norm_;
}

GammaArrivals::GammaArrivals(double rate, double cv)
    : dist_(1.0 / (cv * cv), cv * cv / rate) {
  if (!(rate > 0.0) || !(cv > 0.0)) throw std::invalid_argument("gamma arrivals: rate and cv must be > 0");
}

Seconds GammaArrivals::next_gap(std::mt19937_64& rng) {
  // Small shapes (bursty traffic) can underflow to zero; gaps must be positive.
  for (;;) {
    const double gap = dist_(rng);
    if (gap > 0.0) return gap;
  }
}

std::vector<JobSpec> generate(const WorkloadConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  GammaArrivals arrivals(config.rate, config.cv);
  const ZipfSampler input_len(config.zipf_theta, config.max_input_len);
  const ZipfSampler output_len(config.zipf_theta, config.max_output_len);

  std::vector<JobSpec> jobs;
  jobs.reserve(config.num_jobs);
  Seconds t = 0.0;
  for (std::size_t i = 0; i < config.num_jobs; ++i) {
    t += arrivals.next_gap(rng);
    JobSpec job;
    job.id = std::to_string(i);
    job.arrival_time = t;
    job.input_len = input_len(rng);
    job.output_len = output_len(rng);
    jobs.push_back(std::move(job));
  }
  return jobs;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void parse_error(std::size_t line, const std::string& msg) {
  throw std::runtime_error("trace line " + std::to_string(line) + ": " + msg);
}

template <typename T>
T parse_number(const std::string& field, std::size_t line, const char* name) {
  std::istringstream ss(field);
  T value{};
  ss >> value;
  if (ss.fail() || !ss.eof()) parse_error(line, std::string("bad ") + name + " '" + field + "'");
  return value;
}

}  // namespace

std::vector<JobSpec> parse_trace(std::istream& in, std::vector<std::string>* warnings) {
  std::vector<JobSpec> jobs;
  std::unordered_set<std::string> seen;
  std::string raw;
  std::size_t line_no = 0;
  bool sorted = true;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (fields.size() != 4) parse_error(line_no, "expected 4 fields, got " + std::to_string(fields.size()));

    JobSpec job;
    job.id = fields[0];
    if (job.id.empty()) parse_error(line_no, "empty id");
    job.arrival_time = parse_number<double>(fields[1], line_no, "arrival_time");
    job.input_len = parse_number<Tokens>(fields[2], line_no, "input_len");
    job.output_len = parse_number<Tokens>(fields[3], line_no, "output_len");
    if (!(job.arrival_time >= 0.0) || !std::isfinite(job.arrival_time))
      parse_error(line_no, "arrival_time must be >= 0");
    if (job.input_len < 1) parse_error(line_no, "input_len must be >= 1");
    if (job.output_len < 1) parse_error(line_no, "output_len must be >= 1");
    if (!seen.insert(job.id).second) parse_error(line_no, "duplicate job id '" + job.id + "'");
    if (!jobs.empty() && job.arrival_time < jobs.back().arrival_time) sorted = false;
    jobs.push_back(std::move(job));
  }
  if (!sorted) {
    std::stable_sort(jobs.begin(), jobs.end(),
                     [](const JobSpec& a, const JobSpec& b) { return a.arrival_time < b.arrival_time; });
    if (warnings) warnings->push_back("trace arrivals were not monotonic; records sorted by arrival time");
  }
  return jobs;
}

std::vector<JobSpec> load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file " + path.string());
  std::vector<std::string> warnings;
  auto jobs = parse_trace(in, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << path.string() << ": " << w << '\n';
  return jobs;
}

void write_trace(std::ostream& out, const std::vector<JobSpec>& jobs) {
  out << "# id, arrival_time_s, input_len, output_len\n";
  char buf[64];
  for (const auto& j : jobs) {
    std::snprintf(buf, sizeof(buf), "%.17g", j.arrival_time);
    out << j.id << ", " << buf << ", " << j.input_len << ", " << j.output_len << '\n';
  }
}

}  // namespace llmsched
