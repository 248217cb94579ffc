// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

// Command-line driver: runs experiment grids, single trace simulations and
// workload generation.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "llmsched/experiment.hpp"

namespace {

using namespace llmsched;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void print_fig5_table(const ExperimentResult& result) {
  const std::map<std::string, double> expected = {
      {"fcfs", 25.0 / 3}, {"mlfq-noapreempt", 10.0}, {"skipjoin", 20.0 / 3}, {"srpt", 6.0}};
  std::printf("%-18s %10s %10s\n", "policy", "avg_jct", "expected");
  for (const auto& row : result.rows) {
    auto it = expected.find(row.policy);
    if (it == expected.end()) {
      std::printf("%-18s %10.2f %10s\n", row.policy.c_str(), row.avg_jct, "-");
    } else {
      std::printf("%-18s %10.2f %10.2f\n", row.policy.c_str(), row.avg_jct, it->second);
    }
  }
}

void print_means(const ExperimentResult& result) {
  std::map<std::string, std::pair<double, int>> acc;
  std::vector<std::string> order;
  for (const auto& row : result.rows) {
    if (!acc.contains(row.policy)) order.push_back(row.policy);
    acc[row.policy].first += row.avg_jct;
    ++acc[row.policy].second;
  }
  for (const auto& p : order) {
    std::printf("%-24s mean avg_jct %.4f over %d runs\n", p.c_str(), acc[p].first / acc[p].second, acc[p].second);
  }
}

int run_grid(ExperimentConfig config, const std::vector<std::string>& plot_axes) {
  const ExperimentResult result = run_experiment(config);
  write_results(config, result);
  if (config.scenario == "verify-fig5") {
    print_fig5_table(result);
  } else {
    print_means(result);
  }

  std::vector<std::string> axes = plot_axes;
  if (axes.empty()) {
    if (config.grid.rates.size() > 1) axes.push_back("load");
    if (config.grid.cvs.size() > 1) axes.push_back("burstiness");
    if (config.grid.thetas.size() > 1) axes.push_back("skewness");
    if (config.grid.quantum_ratios.size() > 1) axes.push_back("quantum_ratio");
    if (config.grid.cache_bytes.size() > 1) axes.push_back("cache_size");
  }
  if (!result.rows.empty()) {
    for (const auto& axis : axes) {
      const auto path = emit_plot_data(result.rows, parse_plot_axis(axis), config.out_dir);
      std::printf("wrote %s\n", path.string().c_str());
    }
  }
  std::printf("wrote %s and %s (%zu rows)\n", (config.out_dir / "results.csv").string().c_str(),
              (config.out_dir / "summary.json").string().c_str(), result.rows.size());

  for (const auto& f : result.failures) std::fprintf(stderr, "error: %s\n", f.c_str());
  return result.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LLM inference job scheduling simulator"};
  app.set_version_flag("--version", std::string(LLMSCHED_VERSION));
  app.require_subcommand(0, 1);

  std::string config_path;
  std::string scenario;
  std::string out_dir;
  std::string policies;
  std::string cache_policies;
  std::string plot_axes;
  int seeds = 0;
  int workers = 0;
  std::size_t num_jobs = 0;
  bool list = false;
  auto* config_opt = app.add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--scenario", scenario, "built-in scenario name")->excludes(config_opt);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seeds", seeds, "number of seeds per grid point")->check(CLI::PositiveNumber);
  app.add_option("--policies", policies, "comma-separated scheduler list");
  app.add_option("--cache-policies", cache_policies, "comma-separated cache policy list");
  app.add_option("--jobs", workers, "parallel simulation runs")->check(CLI::PositiveNumber);
  app.add_option("--num-jobs", num_jobs, "jobs per generated trace")->check(CLI::PositiveNumber);
  app.add_option("--plot", plot_axes, "comma-separated plot axes (default: every swept axis)");
  app.add_flag("--list-scenarios", list, "print the built-in scenarios");

  auto* sim = app.add_subcommand("simulate", "run one policy on one trace");
  std::string trace_path;
  std::string policy = "skipjoin";
  std::string model = "gpt3-2.7b";
  std::string event_log;
  std::string cache_policy = "proactive";
  std::string pipeline_mode = "interjob";
  Bytes device_bytes = kUnlimitedBytes;
  int stages = 1;
  MlfqConfig mlfq;
  double starve_limit = 0.0;
  sim->add_option("--trace", trace_path, "trace file")->required()->check(CLI::ExistingFile);
  sim->add_option("--policy", policy, "scheduler")->capture_default_str();
  sim->add_option("--model", model, "model preset, or 'unit'")->capture_default_str();
  sim->add_option("--queues", mlfq.num_queues, "MLFQ queue count")->capture_default_str();
  sim->add_option("--base-quantum", mlfq.base_quantum, "Q1 quantum in seconds")->capture_default_str();
  sim->add_option("--quantum-ratio", mlfq.quantum_ratio, "quantum growth factor")->capture_default_str();
  sim->add_option("--starve-limit", starve_limit, "promotion threshold in seconds (0 disables)");
  sim->add_option("--batch", mlfq.max_batch_size, "maximum batch size")->capture_default_str();
  sim->add_option("--cache-policy", cache_policy, "proactive, reactive or defer")->capture_default_str();
  sim->add_option("--device-bytes", device_bytes, "device KV capacity in bytes");
  sim->add_option("--stages", stages, "pipeline stages")->capture_default_str();
  sim->add_option("--pipeline", pipeline_mode, "interjob or joblevel")->capture_default_str();
  sim->add_option("--event-log", event_log, "write the event log here");

  auto* gen = app.add_subcommand("generate", "write a synthetic trace");
  WorkloadConfig wl;
  std::string gen_out = "-";
  gen->add_option("--num-jobs", wl.num_jobs)->capture_default_str();
  gen->add_option("--rate", wl.rate)->capture_default_str();
  gen->add_option("--cv", wl.cv)->capture_default_str();
  gen->add_option("--theta", wl.zipf_theta)->capture_default_str();
  gen->add_option("--max-input", wl.max_input_len)->capture_default_str();
  gen->add_option("--max-output", wl.max_output_len)->capture_default_str();
  gen->add_option("--seed", wl.seed)->capture_default_str();
  gen->add_option("--out", gen_out, "trace path, '-' for stdout")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (list) {
      for (const auto& s : scenario_names()) std::printf("%s\n", s.c_str());
      return 0;
    }

    if (*gen) {
      const auto jobs = generate(wl);
      if (gen_out == "-") {
        write_trace(std::cout, jobs);
      } else {
        std::ofstream out(gen_out);
        if (!out) throw std::runtime_error("cannot write " + gen_out);
        write_trace(out, jobs);
      }
      return 0;
    }

    if (*sim) {
      const auto trace = load_trace(trace_path);
      SimulationConfig c;
      c.profile = model == "unit" ? unit_profile() : preset_profile(model);
      c.scheduler.policy = parse_policy(policy);
      if (starve_limit > 0) mlfq.starve_limit = starve_limit;
      c.scheduler.mlfq = mlfq;
      c.cache.policy = parse_cache_policy(cache_policy);
      c.cache.device_capacity = device_bytes;
      if (c.cache.policy == CachePolicy::kDefer) {
        for (const auto& j : trace) c.cache.slot_tokens = std::max(c.cache.slot_tokens, j.output_len);
      }
      c.pipeline.stages = stages;
      c.pipeline.mode = parse_pipeline_mode(pipeline_mode);
      const auto result = run(trace, c);
      const Metrics& m = result.metrics;
      std::printf("jobs %zu avg_jct %.6f p90_jct %.6f max_jct %.6f swaps %zu peak_cache_bytes %llu\n", m.jobs,
                  m.avg_jct, m.p90_jct, m.max_jct, m.swaps, static_cast<unsigned long long>(m.peak_device_bytes));
      if (!event_log.empty()) {
        std::ofstream out(event_log);
        if (!out) throw std::runtime_error("cannot write " + event_log);
        write_event_log(out, result.events);
      }
      return 0;
    }

    ExperimentConfig config;
    if (!config_path.empty()) {
      config = load_config(config_path);
    } else {
      config = builtin_scenario(scenario.empty() ? "verify-fig5" : scenario);
    }
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (seeds > 0) config.seeds = seeds;
    if (workers > 0) config.workers = workers;
    if (num_jobs > 0) config.workload.num_jobs = num_jobs;
    if (!policies.empty()) {
      config.policies.clear();
      for (const auto& p : split_list(policies)) config.policies.push_back(parse_policy(p));
    }
    if (!cache_policies.empty()) {
      config.cache_policies.clear();
      for (const auto& p : split_list(cache_policies)) config.cache_policies.push_back(parse_cache_policy(p));
    }
    return run_grid(std::move(config), split_list(plot_axes));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
