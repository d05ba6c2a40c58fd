/* Copyright 2026 The ddlring Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <chrono>
#include <string>
#include <vector>

#include "doctest.h"

#include "ddl/ddl_object.h"
#include "ddl/launcher.h"
#include "ddl/multiring.h"
#include "ddl/socket.h"
#include "ddl/topology.h"

namespace {

std::vector<double> oracle_f32(std::size_t ranks, std::size_t length, std::uint64_t seed) {
  std::vector<double> sum(length, 0.0);
  ddl::DdlObject input(ddl::DType::f32, length);
  for (std::size_t r = 0; r < ranks; ++r) {
    ddl::fill_input(input, seed, static_cast<int>(r));
    auto v = input.view<float>();
    for (std::size_t i = 0; i < length; ++i) sum[i] += v[i];
  }
  return sum;
}

}  // namespace

TEST_CASE("deterministic inputs") {
  ddl::DdlObject a(ddl::DType::i64, 64), b(ddl::DType::i64, 64), c(ddl::DType::i64, 64);
  ddl::fill_input(a, 3, 1);
  ddl::fill_input(b, 3, 1);
  ddl::fill_input(c, 3, 2);
  CHECK(ddl::digest(a.bytes()) == ddl::digest(b.bytes()));
  CHECK(ddl::digest(a.bytes()) != ddl::digest(c.bytes()));
  for (auto x : a.view<std::int64_t>()) {
    CHECK(x >= -(std::int64_t{1} << 39));
    CHECK(x < (std::int64_t{1} << 39));
  }
  ddl::DdlObject f(ddl::DType::f32, 64);
  ddl::fill_input(f, 3, 0);
  for (auto x : f.view<float>()) {
    CHECK(x >= 0.0f);
    CHECK(x < 1.0f);
  }
}

TEST_CASE("four workers agree") {
  ddl::Workload w;
  w.length = 1024;
  w.collect_results = true;
  const auto report = ddl::launch(4, {4}, w);
  REQUIRE(report.ok());
  REQUIRE(report.ranks.size() == 4);
  const auto expect = oracle_f32(4, 1024, w.seed);
  for (const auto& r : report.ranks) {
    CHECK(r.digest == report.ranks[0].digest);
    CHECK(r.iteration_seconds.size() == 1);
    for (std::size_t i = 0; i < 1024; ++i) {
      CHECK(std::abs(r.values[i] - expect[i]) <= 1e-6 * expect[i]);
    }
  }
}

TEST_CASE("single worker returns its input") {
  ddl::Workload w;
  w.dtype = ddl::DType::i64;
  w.length = 33;
  w.collect_results = true;
  const auto report = ddl::launch(1, {1}, w);
  REQUIRE(report.ok());
  ddl::DdlObject input(ddl::DType::i64, 33);
  ddl::fill_input(input, w.seed, 0);
  auto v = input.view<std::int64_t>();
  CHECK(report.ranks[0].integer_values == std::vector<std::int64_t>(v.begin(), v.end()));
  CHECK(report.ranks[0].digest == ddl::digest(input.bytes()));
}

TEST_CASE("launch from a plan") {
  const auto t = ddl::make_cluster({.racks = 1, .hosts_per_rack = 2, .devices_per_host = 3});
  const auto p = ddl::plan(t, t.devices(), 0.001);
  ddl::Workload w;
  w.dtype = ddl::DType::i64;
  w.length = 200;
  w.iterations = 3;
  const auto report = ddl::launch(p, w);
  REQUIRE(report.ok());
  for (const auto& r : report.ranks) {
    CHECK(r.digest == report.ranks[0].digest);
    CHECK(r.iteration_seconds.size() == 3);
  }
}

TEST_CASE("killed worker is reported with rank and phase") {
  ddl::Workload w;
  w.length = 4096;
  w.kill_at_phase = {{2, 1}};
  ddl::LaunchOptions options;
  options.timeout = std::chrono::seconds(10);
  const auto start = std::chrono::steady_clock::now();
  const auto report = ddl::launch(4, {4}, w, options);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(10));
  REQUIRE_FALSE(report.ok());
  CHECK(report.failure->kind == "worker_crash");
  CHECK(report.failure->rank == 2);
  CHECK(report.failure->phase == 1);
  CHECK(report.failure->message.find("rank 2") != std::string::npos);
}

TEST_CASE("length mismatch reaches every rank") {
  ddl::Workload w;
  w.length = 1000;
  w.length_override = {{3, 999}};
  const auto report = ddl::launch(4, {2, 2}, w);
  REQUIRE_FALSE(report.ok());
  CHECK(report.failure->kind == "length_mismatch");
  CHECK(report.failure->rank == 3);
  CHECK(report.failure->ranks_notified == 4);
}

TEST_CASE("rendezvous port in use") {
  const auto busy = ddl::listen_tcp({"127.0.0.1", 0});
  ddl::LaunchOptions options;
  options.rendezvous = "127.0.0.1:" + std::to_string(ddl::local_port(busy));
  CHECK_THROWS_AS(ddl::launch(2, {2}, {}, options), ddl::AddressInUse);
}

TEST_CASE("per-rank traffic") {
  for (std::size_t n : {2, 4, 8}) {
    ddl::Workload w;
    w.dtype = ddl::DType::f64;
    w.length = 10007;
    w.iterations = 2;
    const auto report = ddl::launch(n, {n}, w);
    REQUIRE(report.ok());
    const double ideal = 2.0 * (n - 1) / n * w.length * 8;
    const double chunk = (w.length + n - 1) / n * 8.0;
    for (const auto& r : report.ranks) {
      const double per_iter = r.traffic.payload_bytes_sent / 2.0;
      CHECK(std::abs(per_iter - ideal) <= chunk);
    }
  }
}
