// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "llmsched/engine.hpp"
#include "llmsched/workload.hpp"

namespace llmsched {

struct ExperimentGrid {
  std::vector<double> rates{1.0};
  std::vector<double> cvs{1.0};
  std::vector<double> thetas{1.0};
  std::vector<double> quantum_ratios{2.0};
  std::vector<Bytes> cache_bytes{kUnlimitedBytes};
};

struct ExperimentConfig {
  std::string scenario = "custom";
  ModelProfile profile = preset_profile("gpt3-2.7b");
  WorkloadConfig workload;  // rate, cv and theta are taken from the grid
  ExperimentGrid grid;
  int seeds = 1;
  std::uint64_t base_seed = 0;
  // Fixed trace; replaces generation and collapses rate/cv/theta to one point.
  std::optional<std::vector<JobSpec>> trace;
  std::vector<Policy> policies{Policy::kSkipJoin, Policy::kFcfs};
  std::vector<CachePolicy> cache_policies{CachePolicy::kProactive};
  MlfqConfig mlfq;
  CacheConfig cache;
  PipelineConfig pipeline;
  double batching_overhead = 1.0;
  std::filesystem::path out_dir = "results";
  int workers = 1;

  void validate() const;
  std::size_t num_runs() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

std::vector<std::string> scenario_names();
ExperimentConfig builtin_scenario(std::string_view name);

// The jobs of the 3-job hand example, paired with unit_profile().
std::vector<JobSpec> fig5_trace();

struct ResultRow {
  std::string scenario;
  std::string policy;  // scheduler, plus "/cache" when several cache policies run
  double rate = 0.0;
  double cv = 0.0;
  double theta = 0.0;
  double quantum_ratio = 0.0;
  Bytes cache_bytes = kUnlimitedBytes;
  std::uint64_t seed = 0;
  Seconds avg_jct = 0.0;
  Seconds p90_jct = 0.0;
  Seconds max_jct = 0.0;
  std::size_t swaps = 0;
  Bytes peak_cache_bytes = 0;
  double utilization = 0.0;  // busy fraction of the first stage
};

struct ExperimentResult {
  std::vector<ResultRow> rows;       // grid order
  std::vector<std::string> failures;  // one message per failed run
  bool ok() const { return failures.empty(); }
};

inline constexpr std::string_view kCsvHeader =
    "scenario,policy,rate,cv,theta,quantum_ratio,cache_bytes,seed,avg_jct,p90_jct,max_jct,swaps,peak_cache_bytes";

// Runs every (grid point, policy, seed) combination. Failed runs are reported
// in `failures`; the other rows are kept.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Writes results.csv and summary.json into config.out_dir.
void write_results(const ExperimentConfig& config, const ExperimentResult& result);

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_csv(std::istream& in);
nlohmann::json summary_json(const ExperimentConfig& config, const ExperimentResult& result);

enum class PlotAxis { kLoad, kBurstiness, kSkewness, kQuantumRatio, kCacheSize };
PlotAxis parse_plot_axis(std::string_view name);
std::string_view plot_axis_name(PlotAxis axis);

struct PlotPoint {
  double x = 0.0;
  Seconds avg_jct = 0.0;  // mean over the merged rows
  Seconds p90_jct = 0.0;
  std::size_t count = 0;
};

struct PlotSeries {
  std::string policy;
  std::vector<PlotPoint> points;  // x ascending
};

// One series per policy along `axis`. Rows sharing an x value are averaged.
std::vector<PlotSeries> plot_series(const std::vector<ResultRow>& rows, PlotAxis axis);
// Writes plot_<axis>.csv into `dir` and returns its path.
std::filesystem::path emit_plot_data(const std::vector<ResultRow>& rows, PlotAxis axis,
                                     const std::filesystem::path& dir);

std::string format_double(double v);
std::string format_bytes(Bytes b);

}  // namespace llmsched
