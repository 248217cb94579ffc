// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

// Randomised invariants over many seeds.

#include <doctest.h>

#include <cmath>
#include <map>
#include <stdexcept>

#include "llmsched/engine.hpp"
#include "llmsched/sched/mlfq.hpp"
#include "llmsched/workload.hpp"

using namespace llmsched;

namespace {

constexpr int kSeeds = 20;
constexpr std::size_t kJobs = 200;

ModelProfile profile() {
  ModelProfile p = preset_profile("gpt3-2.7b");
  p.first_iter_slope = 0.001;
  return p;
}

std::vector<JobSpec> trace_for(std::uint64_t seed) {
  WorkloadConfig w;
  w.num_jobs = kJobs;
  w.rate = 2.0 + static_cast<double>(seed % 4);
  w.cv = 1.0 + static_cast<double>(seed % 3);
  w.zipf_theta = 0.8 + 0.1 * static_cast<double>(seed % 5);
  w.max_input_len = 256;
  w.max_output_len = 64;
  w.seed = seed;
  return generate(w);
}

SimulationConfig config(Policy policy, std::size_t batch = 1) {
  SimulationConfig c;
  c.profile = profile();
  c.scheduler.policy = policy;
  c.scheduler.mlfq.num_queues = 8;
  c.scheduler.mlfq.base_quantum = min_iteration_time(c.profile);
  c.scheduler.mlfq.max_batch_size = batch;
  return c;
}

}  // namespace

TEST_CASE("srpt never loses to skip-join at batch size one") {
  for (int s = 0; s < kSeeds; ++s) {
    const auto t = trace_for(static_cast<std::uint64_t>(s));
    const double srpt = run(t, config(Policy::kSrpt)).metrics.avg_jct;
    const double sj = run(t, config(Policy::kSkipJoin)).metrics.avg_jct;
    CHECK(srpt <= sj * (1.0 + 1e-9));
  }
}

TEST_CASE("tokens are conserved") {
  for (int s = 0; s < kSeeds; ++s) {
    const auto t = trace_for(static_cast<std::uint64_t>(s));
    for (Policy p : all_policies()) {
      const auto res = run(t, config(p, 4));
      REQUIRE(res.jobs.size() == t.size());
      for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(res.jobs[i].tokens == t[i].output_len);
        CHECK(res.jobs[i].token_times.size() == static_cast<std::size_t>(t[i].output_len));
        CHECK(res.jobs[i].completion >= t[i].arrival_time);
      }
    }
  }
}

TEST_CASE("starved jobs are promoted within one iteration of the limit") {
  for (int s = 0; s < kSeeds; ++s) {
    const auto t = trace_for(static_cast<std::uint64_t>(s));
    for (Policy p : {Policy::kSkipJoin, Policy::kMlfqFinishIteration, Policy::kMlfqKill}) {
      auto c = config(p, 2);
      c.scheduler.mlfq.starve_limit = 0.5;
      const auto res = run(t, c);
      const double bound = c.scheduler.mlfq.starve_limit + res.metrics.max_batch_duration + 1e-9;
      CHECK(res.metrics.max_promotion_wait <= bound);

      // Independently from the log: the last time each job was touched.
      std::map<std::string, Seconds> touched;
      for (const auto& e : res.events) {
        switch (e.kind) {
          case LogKind::kArrival:
          case LogKind::kToken:
          case LogKind::kKill:
          case LogKind::kDemote:
            touched[e.job] = e.time;
            break;
          case LogKind::kPromote:
            CHECK(e.time - touched[e.job] <= bound);
            CHECK(e.time - touched[e.job] >= c.scheduler.mlfq.starve_limit - 1e-9);
            touched[e.job] = e.time;
            break;
          default: break;
        }
      }
    }
  }
}

TEST_CASE("device capacity is never exceeded") {
  for (int s = 0; s < kSeeds; ++s) {
    const auto t = trace_for(static_cast<std::uint64_t>(s));
    const auto p = profile();
    Bytes largest = 0;
    for (const auto& j : t) largest = std::max(largest, kv_cache_bytes(p, j.input_len, j.output_len));
    for (auto cp : {CachePolicy::kProactive, CachePolicy::kReactive, CachePolicy::kDefer}) {
      auto c = config(Policy::kSkipJoin, 4);
      c.cache.policy = cp;
      c.cache.device_capacity = 3 * largest;
      if (cp == CachePolicy::kDefer) c.cache.slot_tokens = 64;
      const auto res = run(t, c);
      CHECK(res.metrics.peak_device_bytes <= c.cache.device_capacity);
      for (const auto& o : res.metrics.occupancy) CHECK(o.device_bytes <= c.cache.device_capacity);
      CHECK(res.metrics.jobs == t.size());
    }
  }
}

TEST_CASE("identical inputs give identical event logs") {
  for (int s = 0; s < kSeeds; ++s) {
    const auto t = trace_for(static_cast<std::uint64_t>(s));
    auto c = config(Policy::kSkipJoin, 4);
    c.scheduler.mlfq.starve_limit = 1.0;
    c.cache.device_capacity = Bytes{1} << 30;
    const auto a = run(t, c);
    const auto b = run(t, c);
    CHECK(a.events == b.events);
    CHECK(a.metrics.swaps == b.metrics.swaps);
  }
}

TEST_CASE("skip-join places each arrival by its first iteration") {
  for (int s = 0; s < kSeeds; ++s) {
    const auto t = trace_for(static_cast<std::uint64_t>(s));
    const auto c = config(Policy::kSkipJoin);
    MlfqScheduler sched(MlfqVariant::kSkipJoin, c.scheduler.mlfq, c.profile);
    for (JobId id = 0; id < t.size(); ++id) {
      const std::vector<ArrivedJob> a{{id, t[id].arrival_time, t[id].input_len}};
      sched.step(a, {}, t[id].arrival_time, 0, nullptr);
      // Oracle: the first queue whose quantum holds the prompt.
      const Seconds first = first_iteration_time(c.profile, t[id].input_len);
      int expect = c.scheduler.mlfq.num_queues;
      for (int q = c.scheduler.mlfq.num_queues; q >= 1; --q) {
        if (c.scheduler.mlfq.base_quantum * std::pow(c.scheduler.mlfq.quantum_ratio, q - 1) >= first * (1 - 1e-9))
          expect = q;
      }
      CHECK(sched.job(id).priority == expect);
      if (expect > 1) {
        CHECK(c.scheduler.mlfq.quantum(expect - 1) < first);
      }
    }
  }
}
