// Copyright 2026 The llmsched Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "llmsched/workload.hpp"

using namespace llmsched;

TEST_CASE("zipf pmf matches a direct normalisation") {
  const double theta = 1.3;
  const Tokens n = 50;
  ZipfSampler z(theta, n);
  double norm = 0.0;
  for (Tokens x = 1; x <= n; ++x) norm += 1.0 / std::pow(x, theta);
  double total = 0.0;
  for (Tokens x = 1; x <= n; ++x) {
    CHECK(z.pmf(x) == doctest::Approx(1.0 / std::pow(x, theta) / norm));
    total += z.pmf(x);
  }
  CHECK(total == doctest::Approx(1.0));
  CHECK(z.pmf(0) == 0.0);
  CHECK(z.pmf(n + 1) == 0.0);
}

TEST_CASE("zipf mass is non-increasing in length") {
  for (double theta : {0.1, 0.5, 1.0, 2.5}) {
    ZipfSampler z(theta, 300);
    for (Tokens x = 1; x < 300; ++x) CHECK(z.pmf(x + 1) <= z.pmf(x));
  }
}

TEST_CASE("zipf samples stay within the support and follow the mass") {
  ZipfSampler z(1.0, 8);
  std::mt19937_64 rng(3);
  std::vector<int> counts(9, 0);
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const Tokens x = z(rng);
    REQUIRE(x >= 1);
    REQUIRE(x <= 8);
    ++counts[static_cast<std::size_t>(x)];
  }
  for (Tokens x = 1; x <= 8; ++x) {
    CHECK(static_cast<double>(counts[static_cast<std::size_t>(x)]) / n == doctest::Approx(z.pmf(x)).epsilon(0.03));
  }
  ZipfSampler one(2.0, 1);
  CHECK(one(rng) == 1);
}

TEST_CASE("zipf rejects bad parameters") {
  CHECK_THROWS_AS(ZipfSampler(0.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(ZipfSampler(1.0, 0), std::invalid_argument);
}

TEST_CASE("gamma gaps have the configured mean and cv") {
  for (auto [rate, cv] : {std::pair{2.0, 1.0}, std::pair{0.5, 3.0}, std::pair{10.0, 0.5}}) {
    GammaArrivals g(rate, cv);
    CHECK(g.shape() * g.scale() == doctest::Approx(1.0 / rate));
    std::mt19937_64 rng(11);
    const int n = 200000;
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = g.next_gap(rng);
      REQUIRE(x > 0.0);
      sum += x;
      sq += x * x;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sq / n - mean * mean);
    CHECK(mean == doctest::Approx(1.0 / rate).epsilon(0.02));
    CHECK(sd / mean == doctest::Approx(cv).epsilon(0.05));
  }
}

TEST_CASE("generate is deterministic and ordered") {
  WorkloadConfig c;
  c.num_jobs = 300;
  c.rate = 3.0;
  c.cv = 2.0;
  c.seed = 42;
  const auto a = generate(c);
  const auto b = generate(c);
  CHECK(a == b);
  REQUIRE(a.size() == 300);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == std::to_string(i));
    CHECK(a[i].input_len >= 1);
    CHECK(a[i].input_len <= c.max_input_len);
    CHECK(a[i].output_len >= 1);
    CHECK(a[i].output_len <= c.max_output_len);
    if (i > 0) CHECK(a[i].arrival_time > a[i - 1].arrival_time);
  }
  c.seed = 43;
  CHECK(generate(c) != a);

  c.num_jobs = 0;
  CHECK(generate(c).empty());
}

TEST_CASE("generate rejects invalid configs") {
  WorkloadConfig c;
  c.rate = 0.0;
  CHECK_THROWS_AS(generate(c), std::invalid_argument);
  c = {};
  c.cv = -1.0;
  CHECK_THROWS_AS(generate(c), std::invalid_argument);
  c = {};
  c.zipf_theta = 0.0;
  CHECK_THROWS_AS(generate(c), std::invalid_argument);
  c = {};
  c.max_output_len = 0;
  CHECK_THROWS_AS(generate(c), std::invalid_argument);
}

TEST_CASE("trace parsing") {
  std::istringstream in(
      "# id, arrival_time_s, input_len, output_len\n"
      "\n"
      "a, 0.5, 10, 3\n"
      "b,1,20,4\n");
  const auto jobs = parse_trace(in);
  REQUIRE(jobs.size() == 2);
  CHECK(jobs[0] == JobSpec{"a", 0.5, 10, 3});
  CHECK(jobs[1] == JobSpec{"b", 1.0, 20, 4});
}

TEST_CASE("trace round trip") {
  WorkloadConfig c;
  c.num_jobs = 25;
  c.seed = 5;
  const auto jobs = generate(c);
  std::stringstream buf;
  write_trace(buf, jobs);
  CHECK(parse_trace(buf) == jobs);
}

TEST_CASE("unsorted traces are sorted with a warning") {
  std::istringstream in("x,5,1,1\ny,2,1,1\nz,5,1,1\n");
  std::vector<std::string> warnings;
  const auto jobs = parse_trace(in, &warnings);
  REQUIRE(jobs.size() == 3);
  CHECK(jobs[0].id == "y");
  CHECK(jobs[1].id == "x");
  CHECK(jobs[2].id == "z");
  CHECK(warnings.size() == 1);
}

TEST_CASE("trace errors name the line") {
  auto error_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_trace(in);
    } catch (const std::runtime_error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(error_of("a,0,1,1\nb,0,1\n").find("line 2") != std::string::npos);
  CHECK(error_of("# c\na,zero,1,1\n").find("line 2") != std::string::npos);
  CHECK(error_of("a,0,0,1\n").find("line 1") != std::string::npos);
  CHECK(error_of("a,0,1,0\n").find("output_len") != std::string::npos);
  CHECK(error_of("a,-1,1,1\n").find("arrival_time") != std::string::npos);
  CHECK(error_of("a,0,1,1\na,1,1,1\n").find("duplicate job id 'a'") != std::string::npos);
  CHECK(error_of("a,0,1.5,1\n").find("line 1") != std::string::npos);
  CHECK_THROWS_AS(load_trace("/nonexistent/trace.csv"), std::runtime_error);
}
