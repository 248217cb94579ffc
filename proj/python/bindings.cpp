// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "llmsched/experiment.hpp"

namespace py = pybind11;
using namespace llmsched;

namespace {

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["jobs"] = m.jobs;
  d["avg_jct"] = m.avg_jct;
  d["p90_jct"] = m.p90_jct;
  d["max_jct"] = m.max_jct;
  d["tokens_emitted"] = m.tokens_emitted;
  d["batches"] = m.batches;
  d["demotions"] = m.demotions;
  d["promotions"] = m.promotions;
  d["kills"] = m.kills;
  d["offloads"] = m.offloads;
  d["uploads"] = m.uploads;
  d["swaps"] = m.swaps;
  d["peak_device_bytes"] = m.peak_device_bytes;
  d["makespan"] = m.makespan;
  d["stage_utilization"] = m.stage_utilization;
  return d;
}

py::dict row_dict(const ResultRow& r) {
  py::dict d;
  d["scenario"] = r.scenario;
  d["policy"] = r.policy;
  d["rate"] = r.rate;
  d["cv"] = r.cv;
  d["theta"] = r.theta;
  d["quantum_ratio"] = r.quantum_ratio;
  d["cache_bytes"] = r.cache_bytes == kUnlimitedBytes ? py::object(py::none()) : py::int_(r.cache_bytes);
  d["seed"] = r.seed;
  d["avg_jct"] = r.avg_jct;
  d["p90_jct"] = r.p90_jct;
  d["max_jct"] = r.max_jct;
  d["swaps"] = r.swaps;
  d["peak_cache_bytes"] = r.peak_cache_bytes;
  return d;
}

py::dict simulate(const std::vector<JobSpec>& trace, const ModelProfile& profile, const std::string& policy,
                  const MlfqConfig& mlfq, const std::string& cache_policy, std::optional<Bytes> device_bytes,
                  int stages, const std::string& pipeline, bool events) {
  SimulationConfig c;
  c.profile = profile;
  c.scheduler.policy = parse_policy(policy);
  c.scheduler.mlfq = mlfq;
  c.cache.policy = parse_cache_policy(cache_policy);
  if (device_bytes) c.cache.device_capacity = *device_bytes;
  if (c.cache.policy == CachePolicy::kDefer) {
    for (const auto& j : trace) c.cache.slot_tokens = std::max(c.cache.slot_tokens, j.output_len);
  }
  c.pipeline.stages = stages;
  c.pipeline.mode = parse_pipeline_mode(pipeline);
  c.record_events = events;

  std::vector<JobSpec> sorted = trace;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const JobSpec& a, const JobSpec& b) { return a.arrival_time < b.arrival_time; });
  SimulationResult res;
  {
    py::gil_scoped_release release;
    res = run(sorted, c);
  }
  py::dict out = metrics_dict(res.metrics);
  py::dict jct;
  for (const auto& r : res.jobs) jct[py::str(r.job)] = r.jct();
  out["jct"] = jct;
  py::list log;
  for (const auto& e : res.events) log.append(py::make_tuple(e.time, std::string(log_kind_name(e.kind)), e.job, e.detail));
  out["events"] = log;
  return out;
}

py::list run_scenario(const std::string& name, std::optional<std::size_t> num_jobs, std::optional<int> seeds,
                      std::optional<std::vector<std::string>> policies, int workers) {
  ExperimentConfig c = builtin_scenario(name);
  if (num_jobs) c.workload.num_jobs = *num_jobs;
  if (seeds) c.seeds = *seeds;
  if (policies) {
    c.policies.clear();
    for (const auto& p : *policies) c.policies.push_back(parse_policy(p));
  }
  c.workers = workers;
  ExperimentResult result;
  {
    py::gil_scoped_release release;
    result = run_experiment(c);
  }
  if (!result.ok()) throw std::runtime_error(result.failures.front());
  py::list rows;
  for (const auto& r : result.rows) rows.append(row_dict(r));
  return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "LLM inference job scheduling simulator";
  m.attr("__version__") = LLMSCHED_VERSION;

  py::class_<ModelProfile>(m, "ModelProfile")
      .def(py::init<>())
      .def_readwrite("name", &ModelProfile::name)
      .def_readwrite("layers", &ModelProfile::layers)
      .def_readwrite("hidden", &ModelProfile::hidden)
      .def_readwrite("bytes_per_scalar", &ModelProfile::bytes_per_scalar)
      .def_readwrite("first_iter_base", &ModelProfile::first_iter_base)
      .def_readwrite("first_iter_slope", &ModelProfile::first_iter_slope)
      .def_readwrite("decode_iter_time", &ModelProfile::decode_iter_time)
      .def_readwrite("tp_degree", &ModelProfile::tp_degree)
      .def_readwrite("tp_efficiency", &ModelProfile::tp_efficiency)
      .def_readwrite("pipeline_stages", &ModelProfile::pipeline_stages)
      .def_readwrite("stage_comm_latency", &ModelProfile::stage_comm_latency)
      .def_readwrite("swap_bandwidth", &ModelProfile::swap_bandwidth)
      .def("validate", &ModelProfile::validate)
      .def("__repr__", [](const ModelProfile& p) { return "<ModelProfile " + p.name + ">"; });

  m.def("preset_profile", [](const std::string& name) { return preset_profile(name); }, py::arg("name"));
  m.def("preset_names", &preset_names);
  m.def("unit_profile", &unit_profile);
  m.def("first_iteration_time", &first_iteration_time, py::arg("profile"), py::arg("input_len"));
  m.def("decode_iteration_time", &decode_iteration_time, py::arg("profile"), py::arg("context_len"));
  m.def("kv_cache_bytes", &kv_cache_bytes, py::arg("profile"), py::arg("input_len"), py::arg("generated"));
  m.def("swap_time", &swap_time, py::arg("profile"), py::arg("bytes"));

  py::class_<JobSpec>(m, "JobSpec")
      .def(py::init([](std::string id, double arrival, Tokens in, Tokens out) {
             return JobSpec{std::move(id), arrival, in, out};
           }),
           py::arg("id"), py::arg("arrival_time"), py::arg("input_len"), py::arg("output_len"))
      .def_readwrite("id", &JobSpec::id)
      .def_readwrite("arrival_time", &JobSpec::arrival_time)
      .def_readwrite("input_len", &JobSpec::input_len)
      .def_readwrite("output_len", &JobSpec::output_len)
      .def("__eq__", [](const JobSpec& a, const JobSpec& b) { return a == b; })
      .def("__repr__", [](const JobSpec& j) {
        return "<JobSpec " + j.id + " t=" + format_double(j.arrival_time) + " in=" + std::to_string(j.input_len) +
               " out=" + std::to_string(j.output_len) + ">";
      });

  py::class_<WorkloadConfig>(m, "WorkloadConfig")
      .def(py::init<>())
      .def_readwrite("num_jobs", &WorkloadConfig::num_jobs)
      .def_readwrite("rate", &WorkloadConfig::rate)
      .def_readwrite("cv", &WorkloadConfig::cv)
      .def_readwrite("zipf_theta", &WorkloadConfig::zipf_theta)
      .def_readwrite("max_input_len", &WorkloadConfig::max_input_len)
      .def_readwrite("max_output_len", &WorkloadConfig::max_output_len)
      .def_readwrite("seed", &WorkloadConfig::seed);
  m.def("generate", &generate, py::arg("config"));
  m.def("load_trace", [](const std::string& path) { return load_trace(path); }, py::arg("path"));

  py::class_<MlfqConfig>(m, "MlfqConfig")
      .def(py::init<>())
      .def_readwrite("num_queues", &MlfqConfig::num_queues)
      .def_readwrite("base_quantum", &MlfqConfig::base_quantum)
      .def_readwrite("quantum_ratio", &MlfqConfig::quantum_ratio)
      .def_readwrite("starve_limit", &MlfqConfig::starve_limit)
      .def_readwrite("max_batch_size", &MlfqConfig::max_batch_size)
      .def("quanta", &MlfqConfig::quanta);
  m.def("get_highest_priority", &get_highest_priority, py::arg("first_iter_time"), py::arg("config"));
  m.def("get_demotion_priority", &get_demotion_priority, py::arg("current"), py::arg("next_iter_time"),
        py::arg("config"));

  m.def("simulate", &simulate, py::arg("trace"), py::arg("profile"), py::arg("policy") = "skipjoin",
        py::arg("mlfq") = MlfqConfig{}, py::arg("cache_policy") = "proactive", py::arg("device_bytes") = py::none(),
        py::arg("stages") = 1, py::arg("pipeline") = "interjob", py::arg("events") = false);
  m.def("fig5_trace", &fig5_trace);
  m.def("scenario_names", &scenario_names);
  m.def("run_scenario", &run_scenario, py::arg("name"), py::arg("num_jobs") = py::none(),
        py::arg("seeds") = py::none(), py::arg("policies") = py::none(), py::arg("jobs") = 1);

  py::register_exception<DeadlockError>(m, "DeadlockError", PyExc_RuntimeError);
}
