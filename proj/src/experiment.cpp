// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

#include "llmsched/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace llmsched {

using nlohmann::json;

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Bytes parse_bytes(const json& v) {
  if (v.is_string()) {
    if (v.get<std::string>() == "unlimited") return kUnlimitedBytes;
    throw std::invalid_argument("byte count must be a number or \"unlimited\"");
  }
  if (v.is_number_unsigned() || v.is_number_integer()) return v.get<Bytes>();
  const double d = v.get<double>();
  if (d < 0) throw std::invalid_argument("byte count must be >= 0");
  return static_cast<Bytes>(d);
}

json bytes_json(Bytes b) { return b == kUnlimitedBytes ? json("unlimited") : json(b); }

Seconds parse_seconds(const json& v) {
  if (v.is_string() && v.get<std::string>() == "inf") return kInfinity;
  return v.get<double>();
}

json seconds_json(Seconds s) { return s == kInfinity ? json("inf") : json(s); }

ModelProfile profile_from_json(const json& j) {
  ModelProfile p = j.contains("preset") ? preset_profile(j.at("preset").get<std::string>()) : ModelProfile{};
  read_opt(j, "name", p.name);
  read_opt(j, "layers", p.layers);
  read_opt(j, "hidden", p.hidden);
  read_opt(j, "bytes_per_scalar", p.bytes_per_scalar);
  read_opt(j, "first_iter_base", p.first_iter_base);
  read_opt(j, "first_iter_slope", p.first_iter_slope);
  read_opt(j, "decode_iter_time", p.decode_iter_time);
  read_opt(j, "tp_degree", p.tp_degree);
  read_opt(j, "tp_efficiency", p.tp_efficiency);
  read_opt(j, "pipeline_stages", p.pipeline_stages);
  read_opt(j, "stage_comm_latency", p.stage_comm_latency);
  read_opt(j, "swap_bandwidth", p.swap_bandwidth);
  return p;
}

json profile_to_json(const ModelProfile& p) {
  return {{"name", p.name},
          {"layers", p.layers},
          {"hidden", p.hidden},
          {"bytes_per_scalar", p.bytes_per_scalar},
          {"first_iter_base", p.first_iter_base},
          {"first_iter_slope", p.first_iter_slope},
          {"decode_iter_time", p.decode_iter_time},
          {"tp_degree", p.tp_degree},
          {"tp_efficiency", p.tp_efficiency},
          {"pipeline_stages", p.pipeline_stages},
          {"stage_comm_latency", p.stage_comm_latency},
          {"swap_bandwidth", p.swap_bandwidth}};
}

std::string label(const ExperimentConfig& config, Policy p, CachePolicy c) {
  std::string s(policy_name(p));
  if (config.cache_policies.size() > 1) {
    s += '/';
    s += cache_policy_name(c);
  }
  return s;
}

// One simulation of the experiment grid.
struct RunSpec {
  double rate, cv, theta, quantum_ratio;
  Bytes cache_bytes;
  std::uint64_t seed;
  Policy policy;
  CachePolicy cache_policy;
};

std::string describe(const RunSpec& r) {
  std::ostringstream s;
  s << "policy=" << policy_name(r.policy) << " cache_policy=" << cache_policy_name(r.cache_policy)
    << " rate=" << format_double(r.rate) << " cv=" << format_double(r.cv) << " theta=" << format_double(r.theta)
    << " quantum_ratio=" << format_double(r.quantum_ratio) << " cache_bytes=" << format_bytes(r.cache_bytes)
    << " seed=" << r.seed;
  return s.str();
}

std::vector<RunSpec> expand(const ExperimentConfig& c) {
  const bool fixed = c.trace.has_value();
  const std::vector<double> rates = fixed ? std::vector<double>{c.grid.rates.front()} : c.grid.rates;
  const std::vector<double> cvs = fixed ? std::vector<double>{c.grid.cvs.front()} : c.grid.cvs;
  const std::vector<double> thetas = fixed ? std::vector<double>{c.grid.thetas.front()} : c.grid.thetas;
  const int seeds = fixed ? 1 : c.seeds;
  std::vector<RunSpec> runs;
  for (double rate : rates)
    for (double cv : cvs)
      for (double theta : thetas)
        for (double qr : c.grid.quantum_ratios)
          for (Bytes cap : c.grid.cache_bytes)
            for (Policy p : c.policies)
              for (CachePolicy cp : c.cache_policies)
                for (int s = 0; s < seeds; ++s)
                  runs.push_back({rate, cv, theta, qr, cap, c.base_seed + static_cast<std::uint64_t>(s), p, cp});
  return runs;
}

ResultRow run_one(const ExperimentConfig& c, const RunSpec& r) {
  std::vector<JobSpec> trace;
  if (c.trace) {
    trace = *c.trace;
    std::stable_sort(trace.begin(), trace.end(),
                     [](const JobSpec& a, const JobSpec& b) { return a.arrival_time < b.arrival_time; });
  } else {
    WorkloadConfig w = c.workload;
    w.rate = r.rate;
    w.cv = r.cv;
    w.zipf_theta = r.theta;
    w.seed = r.seed;
    trace = generate(w);
  }

  SimulationConfig sim;
  sim.profile = c.profile;
  sim.scheduler.policy = r.policy;
  sim.scheduler.mlfq = c.mlfq;
  sim.scheduler.mlfq.quantum_ratio = r.quantum_ratio;
  sim.cache = c.cache;
  sim.cache.device_capacity = r.cache_bytes;
  sim.cache.policy = r.cache_policy;
  if (r.cache_policy == CachePolicy::kDefer && sim.cache.slot_tokens == 0) {
    Tokens longest = 1;
    for (const auto& j : trace) longest = std::max(longest, j.output_len);
    sim.cache.slot_tokens = longest;
  }
  sim.pipeline = c.pipeline;
  sim.batching_overhead = c.batching_overhead;
  sim.record_events = false;
  sim.record_token_times = false;

  const SimulationResult res = run(trace, sim);
  ResultRow row;
  row.scenario = c.scenario;
  row.policy = label(c, r.policy, r.cache_policy);
  row.rate = r.rate;
  row.cv = r.cv;
  row.theta = r.theta;
  row.quantum_ratio = r.quantum_ratio;
  row.cache_bytes = r.cache_bytes;
  row.seed = r.seed;
  row.avg_jct = res.metrics.avg_jct;
  row.p90_jct = res.metrics.p90_jct;
  row.max_jct = res.metrics.max_jct;
  row.swaps = res.metrics.swaps;
  row.peak_cache_bytes = res.metrics.peak_device_bytes;
  row.utilization = res.metrics.stage_utilization.empty() ? 0.0 : res.metrics.stage_utilization.front();
  return row;
}

double parse_double_field(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw std::runtime_error("bad number in CSV: " + s);
  return v;
}

Bytes parse_bytes_field(const std::string& s) {
  if (s == "unlimited") return kUnlimitedBytes;
  return std::stoull(s);
}

}  // namespace

std::string format_double(double v) {
  if (v == kInfinity) return "inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string format_bytes(Bytes b) { return b == kUnlimitedBytes ? "unlimited" : std::to_string(b); }

void ExperimentConfig::validate() const {
  profile.validate();
  mlfq.validate();
  cache.validate();
  if (grid.rates.empty() || grid.cvs.empty() || grid.thetas.empty() || grid.quantum_ratios.empty() ||
      grid.cache_bytes.empty())
    throw std::invalid_argument("experiment grid must be non-empty on every axis");
  if (policies.empty()) throw std::invalid_argument("experiment needs at least one policy");
  if (cache_policies.empty()) throw std::invalid_argument("experiment needs at least one cache policy");
  if (seeds < 1) throw std::invalid_argument("seeds must be >= 1");
  if (workers < 1) throw std::invalid_argument("jobs must be >= 1");
  if (pipeline.stages < 1) throw std::invalid_argument("pipeline stages must be >= 1");
  if (!(batching_overhead > 0.0)) throw std::invalid_argument("batching_overhead must be > 0");
  for (double qr : grid.quantum_ratios) {
    MlfqConfig m = mlfq;
    m.quantum_ratio = qr;
    m.validate();
  }
  if (!trace) {
    for (double rate : grid.rates)
      for (double cv : grid.cvs)
        for (double theta : grid.thetas) {
          WorkloadConfig w = workload;
          w.rate = rate;
          w.cv = cv;
          w.zipf_theta = theta;
          w.validate();
        }
  }
}

std::size_t ExperimentConfig::num_runs() const { return expand(*this).size(); }

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  read_opt(j, "scenario", c.scenario);
  if (j.contains("model")) {
    const json& m = j.at("model");
    c.profile = m.is_string() ? preset_profile(m.get<std::string>()) : profile_from_json(m);
  }
  if (j.contains("workload")) {
    const json& w = j.at("workload");
    read_opt(w, "num_jobs", c.workload.num_jobs);
    read_opt(w, "max_input_len", c.workload.max_input_len);
    read_opt(w, "max_output_len", c.workload.max_output_len);
    read_opt(w, "seeds", c.seeds);
    read_opt(w, "base_seed", c.base_seed);
    if (w.contains("trace")) c.trace = load_trace(w.at("trace").get<std::string>());
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    read_opt(g, "rates", c.grid.rates);
    read_opt(g, "cvs", c.grid.cvs);
    read_opt(g, "thetas", c.grid.thetas);
    read_opt(g, "quantum_ratios", c.grid.quantum_ratios);
    if (g.contains("cache_bytes")) {
      c.grid.cache_bytes.clear();
      for (const auto& v : g.at("cache_bytes")) c.grid.cache_bytes.push_back(parse_bytes(v));
    }
  }
  if (j.contains("policies")) {
    c.policies.clear();
    for (const auto& p : j.at("policies")) c.policies.push_back(parse_policy(p.get<std::string>()));
  }
  if (j.contains("cache_policies")) {
    c.cache_policies.clear();
    for (const auto& p : j.at("cache_policies")) c.cache_policies.push_back(parse_cache_policy(p.get<std::string>()));
  }
  if (j.contains("mlfq")) {
    const json& m = j.at("mlfq");
    read_opt(m, "num_queues", c.mlfq.num_queues);
    read_opt(m, "base_quantum", c.mlfq.base_quantum);
    read_opt(m, "quantum_ratio", c.mlfq.quantum_ratio);
    if (m.contains("starve_limit")) c.mlfq.starve_limit = parse_seconds(m.at("starve_limit"));
    read_opt(m, "max_batch_size", c.mlfq.max_batch_size);
    if (m.contains("quantum_ratio") && !(j.contains("grid") && j.at("grid").contains("quantum_ratios")))
      c.grid.quantum_ratios = {c.mlfq.quantum_ratio};
  }
  if (j.contains("cache")) {
    const json& k = j.at("cache");
    if (k.contains("host_capacity")) c.cache.host_capacity = parse_bytes(k.at("host_capacity"));
    read_opt(k, "reserve_k", c.cache.reserve_k);
    read_opt(k, "predictor_depth", c.cache.predictor_depth);
    if (k.contains("slot_bytes")) c.cache.slot_bytes = parse_bytes(k.at("slot_bytes"));
    read_opt(k, "slot_tokens", c.cache.slot_tokens);
    read_opt(k, "headroom_tokens", c.cache.headroom_tokens);
  }
  if (j.contains("pipeline")) {
    const json& p = j.at("pipeline");
    read_opt(p, "stages", c.pipeline.stages);
    if (p.contains("mode")) c.pipeline.mode = parse_pipeline_mode(p.at("mode").get<std::string>());
  }
  read_opt(j, "batching_overhead", c.batching_overhead);
  if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
  read_opt(j, "jobs", c.workers);
  for (const auto& [key, _] : j.items()) {
    static const char* kKnown[] = {"scenario", "model", "workload", "grid",     "policies", "cache_policies",
                                   "mlfq",     "cache", "pipeline", "batching_overhead", "out", "jobs"};
    if (std::find_if(std::begin(kKnown), std::end(kKnown), [&](const char* k) { return key == k; }) ==
        std::end(kKnown))
      throw std::invalid_argument("unknown config key: " + key);
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json grid = {{"rates", c.grid.rates},
               {"cvs", c.grid.cvs},
               {"thetas", c.grid.thetas},
               {"quantum_ratios", c.grid.quantum_ratios},
               {"cache_bytes", json::array()}};
  for (Bytes b : c.grid.cache_bytes) grid["cache_bytes"].push_back(bytes_json(b));
  json policies = json::array();
  for (Policy p : c.policies) policies.push_back(std::string(policy_name(p)));
  json cache_policies = json::array();
  for (CachePolicy p : c.cache_policies) cache_policies.push_back(std::string(cache_policy_name(p)));
  json workload = {{"num_jobs", c.workload.num_jobs},
                   {"max_input_len", c.workload.max_input_len},
                   {"max_output_len", c.workload.max_output_len},
                   {"seeds", c.seeds},
                   {"base_seed", c.base_seed}};
  if (c.trace) workload["trace_jobs"] = c.trace->size();
  return {{"scenario", c.scenario},
          {"model", profile_to_json(c.profile)},
          {"workload", workload},
          {"grid", grid},
          {"policies", policies},
          {"cache_policies", cache_policies},
          {"mlfq",
           {{"num_queues", c.mlfq.num_queues},
            {"base_quantum", c.mlfq.base_quantum},
            {"starve_limit", seconds_json(c.mlfq.starve_limit)},
            {"max_batch_size", c.mlfq.max_batch_size}}},
          {"cache",
           {{"host_capacity", bytes_json(c.cache.host_capacity)},
            {"reserve_k", c.cache.reserve_k},
            {"predictor_depth", c.cache.predictor_depth},
            {"slot_bytes", c.cache.slot_bytes},
            {"slot_tokens", c.cache.slot_tokens},
            {"headroom_tokens", c.cache.headroom_tokens}}},
          {"pipeline", {{"stages", c.pipeline.stages}, {"mode", std::string(pipeline_mode_name(c.pipeline.mode))}}},
          {"batching_overhead", c.batching_overhead},
          {"out", c.out_dir.string()},
          {"jobs", c.workers}};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::vector<JobSpec> fig5_trace() { return {{"J1", 0.0, 5, 2}, {"J2", 0.0, 1, 2}, {"J3", 0.0, 2, 2}}; }

std::vector<std::string> scenario_names() {
  return {"verify-fig5", "sweep-load", "sweep-cv", "sweep-theta", "sweep-quantum", "sweep-cache"};
}

ExperimentConfig builtin_scenario(std::string_view name) {
  ExperimentConfig c;
  c.scenario = std::string(name);
  if (name == "verify-fig5") {
    c.profile = unit_profile();
    c.trace = fig5_trace();
    c.mlfq.num_queues = 4;
    c.mlfq.base_quantum = 1.0;
    c.policies = {Policy::kFcfs, Policy::kMlfqFinishIteration, Policy::kSkipJoin, Policy::kSrpt};
    return c;
  }

  // Shared base: prompt processing dominates decoding, lengths skewed short.
  c.profile = preset_profile("gpt3-2.7b");
  c.profile.name = "long-prompt";
  c.profile.first_iter_base = 0.05;
  c.profile.first_iter_slope = 0.004;
  c.profile.decode_iter_time = 0.02;
  c.workload.num_jobs = 1000;
  c.workload.max_input_len = 2048;
  c.workload.max_output_len = 1024;
  c.seeds = 5;
  c.mlfq.num_queues = 16;
  c.mlfq.base_quantum = min_iteration_time(c.profile);
  c.policies = {Policy::kSkipJoin, Policy::kMlfqKill, Policy::kMlfqFinishIteration, Policy::kFcfs};
  c.grid.rates = {0.4};
  c.grid.cvs = {2.0};
  c.grid.thetas = {1.2};

  if (name == "sweep-load") {
    c.grid.rates = {0.1, 0.2, 0.3, 0.4, 0.45};
  } else if (name == "sweep-cv") {
    c.grid.cvs = {1.0, 2.0, 4.0, 8.0};
  } else if (name == "sweep-theta") {
    c.grid.rates = {0.2};
    c.grid.thetas = {1.0, 1.1, 1.2, 1.3, 1.4};
  } else if (name == "sweep-quantum") {
    c.grid.rates = {0.45};
    c.grid.quantum_ratios = {1.5, 2.0, 4.0, 8.0, 16.0};
  } else if (name == "sweep-cache") {
    // Many mid-sized jobs so that device memory, not compute, binds.
    c.profile = preset_profile("gpt3-175b");
    c.workload.max_input_len = 512;
    c.workload.max_output_len = 256;
    c.grid.rates = {0.2};
    c.grid.thetas = {0.6};
    c.mlfq.base_quantum = min_iteration_time(c.profile);
    c.mlfq.max_batch_size = 8;
    c.policies = {Policy::kSkipJoin};
    c.cache_policies = {CachePolicy::kProactive, CachePolicy::kReactive, CachePolicy::kDefer};
    const Bytes gib = Bytes{1} << 30;
    c.grid.cache_bytes = {8 * gib, 12 * gib, 16 * gib, 24 * gib};
  } else {
    throw std::invalid_argument("unknown scenario: " + std::string(name));
  }
  return c;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::vector<RunSpec> runs = expand(config);
  std::vector<std::optional<ResultRow>> rows(runs.size());
  std::vector<std::string> errors(runs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        rows[i] = run_one(config, runs[i]);
      } catch (const std::exception& e) {
        errors[i] = "grid point " + describe(runs[i]) + " failed: " + e.what();
      }
    }
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(config.workers), runs.size());
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }

  ExperimentResult result;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (rows[i]) result.rows.push_back(std::move(*rows[i]));
    if (!errors[i].empty()) result.failures.push_back(std::move(errors[i]));
  }
  return result;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.scenario << ',' << r.policy << ',' << format_double(r.rate) << ',' << format_double(r.cv) << ','
        << format_double(r.theta) << ',' << format_double(r.quantum_ratio) << ',' << format_bytes(r.cache_bytes)
        << ',' << r.seed << ',' << format_double(r.avg_jct) << ',' << format_double(r.p90_jct) << ','
        << format_double(r.max_jct) << ',' << r.swaps << ',' << r.peak_cache_bytes << '\n';
  }
}

std::vector<ResultRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error("results CSV: unexpected header");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 13) throw std::runtime_error("results CSV: expected 13 fields in: " + line);
    ResultRow r;
    r.scenario = f[0];
    r.policy = f[1];
    r.rate = parse_double_field(f[2]);
    r.cv = parse_double_field(f[3]);
    r.theta = parse_double_field(f[4]);
    r.quantum_ratio = parse_double_field(f[5]);
    r.cache_bytes = parse_bytes_field(f[6]);
    r.seed = std::stoull(f[7]);
    r.avg_jct = parse_double_field(f[8]);
    r.p90_jct = parse_double_field(f[9]);
    r.max_jct = parse_double_field(f[10]);
    r.swaps = std::stoull(f[11]);
    r.peak_cache_bytes = std::stoull(f[12]);
    rows.push_back(std::move(r));
  }
  return rows;
}

json summary_json(const ExperimentConfig& config, const ExperimentResult& result) {
  json rows = json::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"policy", r.policy},
                    {"rate", r.rate},
                    {"cv", r.cv},
                    {"theta", r.theta},
                    {"quantum_ratio", r.quantum_ratio},
                    {"cache_bytes", bytes_json(r.cache_bytes)},
                    {"seed", r.seed},
                    {"avg_jct", r.avg_jct},
                    {"utilization", r.utilization}});
  }
  return {{"version", LLMSCHED_VERSION},
          {"config", config_to_json(config)},
          {"runs", result.rows.size() + result.failures.size()},
          {"failures", result.failures},
          {"rows", rows}};
}

void write_results(const ExperimentConfig& config, const ExperimentResult& result) {
  std::filesystem::create_directories(config.out_dir);
  std::ofstream csv(config.out_dir / "results.csv", std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + (config.out_dir / "results.csv").string());
  write_csv(csv, result.rows);
  std::ofstream js(config.out_dir / "summary.json", std::ios::binary);
  if (!js) throw std::runtime_error("cannot write " + (config.out_dir / "summary.json").string());
  js << summary_json(config, result).dump(2) << '\n';
}

PlotAxis parse_plot_axis(std::string_view name) {
  if (name == "load") return PlotAxis::kLoad;
  if (name == "burstiness") return PlotAxis::kBurstiness;
  if (name == "skewness") return PlotAxis::kSkewness;
  if (name == "quantum_ratio") return PlotAxis::kQuantumRatio;
  if (name == "cache_size") return PlotAxis::kCacheSize;
  throw std::invalid_argument("unknown plot axis: " + std::string(name));
}

std::string_view plot_axis_name(PlotAxis axis) {
  switch (axis) {
    case PlotAxis::kLoad: return "load";
    case PlotAxis::kBurstiness: return "burstiness";
    case PlotAxis::kSkewness: return "skewness";
    case PlotAxis::kQuantumRatio: return "quantum_ratio";
    case PlotAxis::kCacheSize: return "cache_size";
  }
  return "unknown";
}

std::vector<PlotSeries> plot_series(const std::vector<ResultRow>& rows, PlotAxis axis) {
  if (rows.empty()) throw std::invalid_argument("no results to plot");
  auto x_of = [axis](const ResultRow& r) -> double {
    switch (axis) {
      case PlotAxis::kLoad: return r.rate;
      case PlotAxis::kBurstiness: return r.cv;
      case PlotAxis::kSkewness: return r.theta;
      case PlotAxis::kQuantumRatio: return r.quantum_ratio;
      case PlotAxis::kCacheSize:
        if (r.cache_bytes == kUnlimitedBytes)
          throw std::invalid_argument("results have no cache_size axis (unlimited device cache)");
        return static_cast<double>(r.cache_bytes);
    }
    return 0.0;
  };
  std::map<std::string, std::map<double, PlotPoint>> acc;
  std::vector<std::string> order;
  for (const auto& r : rows) {
    if (!acc.contains(r.policy)) order.push_back(r.policy);
    PlotPoint& p = acc[r.policy][x_of(r)];
    p.x = x_of(r);
    p.avg_jct += r.avg_jct;
    p.p90_jct += r.p90_jct;
    ++p.count;
  }
  std::vector<PlotSeries> out;
  for (const auto& policy : order) {
    PlotSeries s{policy, {}};
    for (auto [x, p] : acc[policy]) {
      p.avg_jct /= static_cast<double>(p.count);
      p.p90_jct /= static_cast<double>(p.count);
      s.points.push_back(p);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::filesystem::path emit_plot_data(const std::vector<ResultRow>& rows, PlotAxis axis,
                                     const std::filesystem::path& dir) {
  const auto series = plot_series(rows, axis);
  std::filesystem::create_directories(dir);
  const auto path = dir / ("plot_" + std::string(plot_axis_name(axis)) + ".csv");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "policy," << plot_axis_name(axis) << ",avg_jct,p90_jct,count\n";
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      out << s.policy << ',' << format_double(p.x) << ',' << format_double(p.avg_jct) << ','
          << format_double(p.p90_jct) << ',' << p.count << '\n';
    }
  }
  return path;
}

}  // namespace llmsched
