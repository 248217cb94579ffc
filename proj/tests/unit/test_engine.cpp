// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <sstream>
#include <stdexcept>

#include "llmsched/engine.hpp"
#include "llmsched/workload.hpp"

using namespace llmsched;

namespace {

SimulationConfig unit_config(Policy policy = Policy::kSkipJoin) {
  SimulationConfig c;
  c.profile = unit_profile();
  c.scheduler.policy = policy;
  c.scheduler.mlfq.num_queues = 4;
  return c;
}

std::vector<JobSpec> small_trace(std::uint64_t seed, std::size_t n = 40) {
  WorkloadConfig w;
  w.num_jobs = n;
  w.rate = 0.5;
  w.max_input_len = 6;
  w.max_output_len = 5;
  w.seed = seed;
  return generate(w);
}

}  // namespace

TEST_CASE("empty trace") {
  const auto res = run(std::vector<JobSpec>{}, unit_config());
  CHECK(res.metrics.jobs == 0);
  CHECK(res.metrics.avg_jct == 0.0);
  CHECK(res.events.empty());
  CHECK(res.batches.empty());
}

TEST_CASE("a lone job takes its prompt plus its decodes") {
  for (Policy p : all_policies()) {
    if (p == Policy::kMlfqKill) continue;  // pays killed prefixes
    const std::vector<JobSpec> t{{"solo", 2.0, 3, 4}};
    const auto res = run(t, unit_config(p));
    CHECK(res.jobs[0].jct() == doctest::Approx(3.0 + 3.0));
    CHECK(res.jobs[0].first_token_at == doctest::Approx(5.0));
    CHECK(res.metrics.tokens_emitted == 4);
    CHECK(res.metrics.makespan == doctest::Approx(6.0));
  }
}

TEST_CASE("idle gaps are skipped") {
  const std::vector<JobSpec> t{{"a", 0.0, 1, 1}, {"b", 100.0, 1, 1}};
  const auto res = run(t, unit_config());
  CHECK(res.jobs[1].completion == doctest::Approx(101.0));
  CHECK(res.metrics.stage_utilization.front() == doctest::Approx(2.0 / 101.0));
}

TEST_CASE("engine rejects bad input") {
  const std::vector<JobSpec> unsorted{{"a", 2.0, 1, 1}, {"b", 1.0, 1, 1}};
  CHECK_THROWS_AS(run(unsorted, unit_config()), std::invalid_argument);

  auto c = unit_config();
  c.batching_overhead = 0.0;
  CHECK_THROWS_AS(run(small_trace(1, 3), c), std::invalid_argument);

  c = unit_config();
  c.cache.device_capacity = 8;
  const std::vector<JobSpec> big{{"huge", 0.0, 10, 1}};
  try {
    run(big, c);
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("huge") != std::string::npos);
  }
}

TEST_CASE("event log records every token once") {
  const auto trace = small_trace(3);
  const auto res = run(trace, unit_config());
  std::size_t tokens = 0;
  std::size_t arrivals = 0;
  std::size_t finishes = 0;
  for (const auto& e : res.events) {
    tokens += e.kind == LogKind::kToken;
    arrivals += e.kind == LogKind::kArrival;
    finishes += e.kind == LogKind::kFinish;
  }
  Tokens expected = 0;
  for (const auto& j : trace) expected += j.output_len;
  CHECK(tokens == static_cast<std::size_t>(expected));
  CHECK(arrivals == trace.size());
  CHECK(finishes == trace.size());
  for (std::size_t i = 1; i < res.events.size(); ++i) CHECK(res.events[i].time >= res.events[i - 1].time);
}

TEST_CASE("event log round trip and replay") {
  const auto trace = small_trace(4);
  const auto res = run(trace, unit_config(Policy::kMlfqKill));
  std::stringstream buf;
  write_event_log(buf, res.events);
  CHECK(buf.str().rfind("time,kind,job_id,detail\n", 0) == 0);
  const auto back = read_event_log(buf);
  CHECK(back == res.events);

  const auto replayed = replay_jct_records(back);
  REQUIRE(replayed.size() == res.jobs.size());
  for (std::size_t i = 0; i < replayed.size(); ++i) {
    CHECK(replayed[i].job == res.jobs[i].job);
    CHECK(replayed[i].jct() == res.jobs[i].jct());
    CHECK(replayed[i].tokens == res.jobs[i].tokens);
    CHECK(replayed[i].token_times == res.jobs[i].token_times);
  }
  CHECK(compute_metrics(replayed).avg_jct == doctest::Approx(res.metrics.avg_jct));

  std::istringstream bad("time,kind,job_id,detail\n1,teleport,a,\n");
  CHECK_THROWS_AS(read_event_log(bad), std::runtime_error);
}

TEST_CASE("runs are deterministic") {
  const auto trace = small_trace(5, 80);
  auto c = unit_config();
  c.scheduler.mlfq.max_batch_size = 3;
  c.scheduler.mlfq.starve_limit = 10.0;
  const auto a = run(trace, c);
  const auto b = run(trace, c);
  CHECK(a.events == b.events);
  CHECK(a.metrics.avg_jct == b.metrics.avg_jct);
}

TEST_CASE("batches respect the size limit") {
  const auto trace = small_trace(6, 60);
  for (std::size_t limit : {1, 2, 5}) {
    auto c = unit_config();
    c.scheduler.mlfq.max_batch_size = limit;
    const auto res = run(trace, c);
    for (const auto& b : res.batches) CHECK(b.members.size() <= limit);
  }
}

TEST_CASE("pipeline stage time and swap overlap") {
  CHECK(stage_time(2.0, 1, 0.5) == 2.0);
  CHECK(stage_time(2.0, 2, 0.5) == doctest::Approx(1.5));
  CHECK(overlapped_swap(0.036, 0.036) == 0.0);
  CHECK(overlapped_swap(0.05, 0.03) == doctest::Approx(0.02));
  CHECK(overlapped_swap(0.01, 0.03) == 0.0);
  CHECK(parse_pipeline_mode("interjob") == PipelineMode::kInterJob);
  CHECK(parse_pipeline_mode("joblevel") == PipelineMode::kJobLevel);
  CHECK(pipeline_mode_name(PipelineMode::kJobLevel) == "joblevel");
  CHECK_THROWS_AS(parse_pipeline_mode("zigzag"), std::invalid_argument);
}

TEST_CASE("inter-job pipelining overlaps batches") {
  const std::vector<JobSpec> t{{"a", 0.0, 2, 1}, {"b", 0.0, 2, 1}};
  auto c = unit_config(Policy::kFcfs);
  c.pipeline.stages = 2;
  const double tau = stage_time(2.0, 2, 0.0);

  c.pipeline.mode = PipelineMode::kInterJob;
  const auto inter = run(t, c);
  CHECK(inter.metrics.makespan == doctest::Approx(3.0 * tau));
  REQUIRE(inter.metrics.stage_utilization.size() == 2);

  c.pipeline.mode = PipelineMode::kJobLevel;
  const auto job = run(t, c);
  CHECK(job.metrics.makespan == doctest::Approx(4.0 * tau));
  CHECK(job.metrics.stage_utilization[0] == doctest::Approx(0.5));
}

TEST_CASE("cache bounded runs stay within capacity") {
  WorkloadConfig w;
  w.num_jobs = 80;
  w.rate = 0.8;
  w.max_input_len = 6;
  w.max_output_len = 6;
  w.seed = 12;
  const auto trace = generate(w);
  for (auto policy : {CachePolicy::kProactive, CachePolicy::kReactive, CachePolicy::kDefer}) {
    auto c = unit_config();
    c.profile.swap_bandwidth = 400.0;
    c.scheduler.mlfq.max_batch_size = 2;
    c.cache.policy = policy;
    c.cache.device_capacity = 4 * 24;
    if (policy == CachePolicy::kDefer) c.cache.slot_tokens = 6;
    const auto res = run(trace, c);
    CHECK(res.metrics.jobs == trace.size());
    CHECK(res.metrics.peak_device_bytes <= c.cache.device_capacity);
    for (const auto& s : res.metrics.occupancy) CHECK(s.device_bytes <= c.cache.device_capacity);
    if (policy == CachePolicy::kDefer) CHECK(res.metrics.swaps == 0);
  }
}
