// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "llmsched/experiment.hpp"

using namespace llmsched;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.scenario = "tiny";
  c.profile = unit_profile();
  c.workload.num_jobs = 20;
  c.workload.max_input_len = 5;
  c.workload.max_output_len = 4;
  c.grid.rates = {0.2};
  c.mlfq.num_queues = 4;
  c.policies = {Policy::kSkipJoin};
  return c;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("llmsched_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("one grid point gives one row") {
  auto c = tiny_config();
  CHECK(c.num_runs() == 1);
  const auto r = run_experiment(c);
  REQUIRE(r.ok());
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].policy == "skipjoin");
  CHECK(r.rows[0].scenario == "tiny");
  CHECK(r.rows[0].rate == 0.2);
  CHECK(r.rows[0].avg_jct > 0.0);
  CHECK(r.rows[0].cache_bytes == kUnlimitedBytes);
}

TEST_CASE("rows follow grid order and are independent of worker count") {
  auto c = tiny_config();
  c.grid.rates = {0.1, 0.3};
  c.policies = {Policy::kSkipJoin, Policy::kFcfs};
  c.seeds = 2;
  CHECK(c.num_runs() == 8);
  const auto serial = run_experiment(c);
  c.workers = 3;
  const auto parallel = run_experiment(c);
  REQUIRE(serial.rows.size() == 8);
  REQUIRE(parallel.rows.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(serial.rows[i].policy == parallel.rows[i].policy);
    CHECK(serial.rows[i].avg_jct == parallel.rows[i].avg_jct);
  }
  CHECK(serial.rows[0].rate == 0.1);
  CHECK(serial.rows[0].policy == "skipjoin");
  CHECK(serial.rows[0].seed == 0);
  CHECK(serial.rows[1].seed == 1);
  CHECK(serial.rows[2].policy == "fcfs");
  CHECK(serial.rows[4].rate == 0.3);
}

TEST_CASE("several cache policies label rows") {
  auto c = tiny_config();
  c.cache_policies = {CachePolicy::kProactive, CachePolicy::kDefer};
  c.grid.cache_bytes = {4 * 40};
  const auto r = run_experiment(c);
  REQUIRE(r.ok());
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].policy == "skipjoin/proactive");
  CHECK(r.rows[1].policy == "skipjoin/defer");
  CHECK(r.rows[1].swaps == 0);
}

TEST_CASE("failed runs are reported with their grid point") {
  auto c = tiny_config();
  c.grid.cache_bytes = {4};
  const auto r = run_experiment(c);
  CHECK_FALSE(r.ok());
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures[0].find("cache_bytes=4") != std::string::npos);
}

TEST_CASE("fixed trace collapses the workload axes") {
  auto c = builtin_scenario("verify-fig5");
  c.grid.rates = {1.0, 2.0};
  c.seeds = 3;
  CHECK(c.num_runs() == 4);
  const auto r = run_experiment(c);
  REQUIRE(r.ok());
  std::map<std::string, double> avg;
  for (const auto& row : r.rows) avg[row.policy] = row.avg_jct;
  CHECK(avg["fcfs"] == doctest::Approx(25.0 / 3).epsilon(1e-12));
  CHECK(avg["mlfq-noapreempt"] == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(avg["skipjoin"] == doctest::Approx(20.0 / 3).epsilon(1e-12));
  CHECK(avg["srpt"] == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("validation") {
  auto c = tiny_config();
  c.grid.rates.clear();
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = tiny_config();
  c.policies.clear();
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = tiny_config();
  c.seeds = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = tiny_config();
  c.grid.quantum_ratios = {0.5};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = tiny_config();
  c.grid.rates = {-1.0};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK_THROWS_AS(builtin_scenario("sweep-moon"), std::invalid_argument);
  for (const auto& name : scenario_names()) CHECK_NOTHROW(builtin_scenario(name).validate());
}

TEST_CASE("csv round trip") {
  auto c = tiny_config();
  c.grid.cache_bytes = {kUnlimitedBytes, 400};
  const auto r = run_experiment(c);
  REQUIRE(r.ok());
  std::stringstream buf;
  write_csv(buf, r.rows);
  std::string header;
  std::getline(buf, header);
  CHECK(header == kCsvHeader);
  buf.seekg(0);
  const auto back = read_csv(buf);
  REQUIRE(back.size() == r.rows.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].policy == r.rows[i].policy);
    CHECK(back[i].avg_jct == r.rows[i].avg_jct);
    CHECK(back[i].p90_jct == r.rows[i].p90_jct);
    CHECK(back[i].cache_bytes == r.rows[i].cache_bytes);
    CHECK(back[i].peak_cache_bytes == r.rows[i].peak_cache_bytes);
  }
  std::istringstream bad("a,b,c\n");
  CHECK_THROWS_AS(read_csv(bad), std::runtime_error);
}

TEST_CASE("results and summary files") {
  auto c = tiny_config();
  c.out_dir = scratch("results");
  c.seeds = 2;
  const auto r = run_experiment(c);
  write_results(c, r);
  std::ifstream csv(c.out_dir / "results.csv");
  REQUIRE(csv);
  CHECK(read_csv(csv).size() == 2);
  std::ifstream js(c.out_dir / "summary.json");
  REQUIRE(js);
  const auto j = nlohmann::json::parse(js);
  CHECK(j == summary_json(c, r));
  fs::remove_all(c.out_dir);
}

TEST_CASE("config json round trip") {
  const auto c = builtin_scenario("sweep-cache");
  const auto j = config_to_json(c);
  auto stripped = j;
  stripped["workload"].erase("trace_jobs");
  const auto back = config_from_json(stripped);
  CHECK(config_to_json(back) == j);
  CHECK(back.cache_policies.size() == 3);
  CHECK(back.grid.cache_bytes == c.grid.cache_bytes);
}

TEST_CASE("config parsing") {
  const auto j = nlohmann::json::parse(R"({
    "scenario": "mine",
    "model": "gpt3-66b",
    "workload": {"num_jobs": 7, "seeds": 3},
    "grid": {"rates": [0.5], "cache_bytes": ["unlimited", 1024]},
    "policies": ["fcfs", "mlfq-nopreempt"],
    "mlfq": {"starve_limit": "inf", "quantum_ratio": 3},
    "pipeline": {"stages": 2, "mode": "joblevel"}
  })");
  const auto c = config_from_json(j);
  CHECK(c.scenario == "mine");
  CHECK(c.profile.name == "gpt3-66b");
  CHECK(c.workload.num_jobs == 7);
  CHECK(c.seeds == 3);
  CHECK(c.grid.cache_bytes == std::vector<Bytes>{kUnlimitedBytes, 1024});
  CHECK(c.policies == std::vector<Policy>{Policy::kFcfs, Policy::kMlfqFinishIteration});
  CHECK(c.grid.quantum_ratios == std::vector<double>{3.0});
  CHECK(c.pipeline.mode == PipelineMode::kJobLevel);

  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"colour": 1})")), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"policies": ["lottery"]})")), std::invalid_argument);
}

TEST_CASE("config file with a trace") {
  const auto dir = scratch("config");
  fs::create_directories(dir);
  const auto path = dir / "c.json";
  {
    std::ofstream out(path);
    out << R"({"model": {"preset": "gpt3-2.7b"}, "workload": {"trace": ")"
        << (fs::path(LLMSCHED_TEST_DATA) / "verify_fig5.csv").generic_string() << R"("}})";
  }
  const auto c = load_config(path);
  REQUIRE(c.trace);
  CHECK(c.trace->size() == 3);
  CHECK(*c.trace == fig5_trace());
  CHECK_THROWS_AS(load_config(dir / "missing.json"), std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("plot series average seeds") {
  std::vector<ResultRow> rows;
  auto add = [&](std::string policy, double rate, double avg) {
    ResultRow r;
    r.policy = std::move(policy);
    r.rate = rate;
    r.avg_jct = avg;
    r.p90_jct = 2 * avg;
    rows.push_back(r);
  };
  add("skipjoin", 0.2, 4.0);
  add("skipjoin", 0.1, 1.0);
  add("skipjoin", 0.2, 6.0);
  add("fcfs", 0.1, 3.0);
  const auto s = plot_series(rows, PlotAxis::kLoad);
  REQUIRE(s.size() == 2);
  CHECK(s[0].policy == "skipjoin");
  REQUIRE(s[0].points.size() == 2);
  CHECK(s[0].points[0].x == 0.1);
  CHECK(s[0].points[1].avg_jct == doctest::Approx(5.0));
  CHECK(s[0].points[1].p90_jct == doctest::Approx(10.0));
  CHECK(s[0].points[1].count == 2);
  CHECK(s[1].points.size() == 1);

  CHECK_THROWS_AS(plot_series({}, PlotAxis::kLoad), std::invalid_argument);
  CHECK_THROWS_AS(plot_series(rows, PlotAxis::kCacheSize), std::invalid_argument);

  const auto dir = scratch("plot");
  const auto path = emit_plot_data(rows, PlotAxis::kLoad, dir);
  CHECK(path.filename() == "plot_load.csv");
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "policy,load,avg_jct,p90_jct,count");
  int n = 0;
  while (std::getline(in, line)) ++n;
  CHECK(n == 3);
  fs::remove_all(dir);
}

TEST_CASE("plot axis names") {
  for (auto a : {PlotAxis::kLoad, PlotAxis::kBurstiness, PlotAxis::kSkewness, PlotAxis::kQuantumRatio,
                 PlotAxis::kCacheSize}) {
    CHECK(parse_plot_axis(plot_axis_name(a)) == a);
  }
  CHECK_THROWS_AS(parse_plot_axis("colour"), std::invalid_argument);
}

TEST_CASE("number formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(kInfinity) == "inf");
  CHECK(format_bytes(kUnlimitedBytes) == "unlimited");
  CHECK(format_bytes(12) == "12");
}
