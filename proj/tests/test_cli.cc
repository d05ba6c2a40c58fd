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

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "ddl/socket.h"

namespace {

struct Result {
  int status = -1;
  std::string out;
};

Result ddl_cli(const std::string& args, bool merge_stderr = false) {
  std::string cmd = std::string(DDL_CLI_PATH) + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string config(const std::string& name) { return std::string(DDL_CONFIG_DIR) + "/" + name; }

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ddl_cli_test_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("plan on the reference cluster") {
  const auto r = ddl_cli("plan --topology " + config("reference_cluster.json") + " --size-gb 0.35");
  CHECK(r.status == 0);
  CHECK(r.out.find("4x16x4") != std::string::npos);
  CHECK(r.out.find("0.0645") != std::string::npos);
  CHECK(r.out.find("inter-rack") != std::string::npos);
}

TEST_CASE("plan on one host") {
  const auto r = ddl_cli("plan --topology " + config("single_host4.json") +
                         " --size-gb 0.1 --format json");
  REQUIRE(r.status == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["dims"].size() == 1);
  CHECK(doc["dims"][0]["size"] == 4);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(ddl_cli("plan --topology /nonexistent.json --size-gb 0.35").status == 2);
  CHECK(ddl_cli("plan --size-gb 0.35").status == 2);
  CHECK(ddl_cli("plan --topology " + config("reference_cluster.json") + " --size-gb 0").status == 2);
  CHECK(ddl_cli("frobnicate").status == 2);
  CHECK(ddl_cli("bench --topology " + config("reference_cluster.json") + " --baseline rack").status == 2);
  CHECK(ddl_cli("bench --topology " + config("reference_cluster.json") + " --ranks 512").status == 2);
  CHECK(ddl_cli("run -n 17").status == 2);
  CHECK(ddl_cli("run -n 4 --dims 3x2").status == 2);
  CHECK(ddl_cli("--help").status == 0);
}

TEST_CASE("plan file feeds simulate and run") {
  const auto plan_path = scratch("plan.json");
  const auto made = ddl_cli("plan --topology " + config("reference_cluster.json") +
                            " --size-gb 0.35 --out " + plan_path.string());
  REQUIRE(made.status == 0);
  const auto sim = ddl_cli("simulate --topology " + config("reference_cluster.json") + " --plan " +
                           plan_path.string() + " --format json");
  REQUIRE(sim.status == 0);
  const auto doc = nlohmann::json::parse(sim.out);
  CHECK(std::abs(doc["relative_gap"].get<double>()) < 1e-6);
  CHECK(doc["contention_events"].empty());
  // 256 ranks exceed the default process cap.
  CHECK(ddl_cli("run --plan " + plan_path.string()).status == 2);

  const auto small = scratch("small.json");
  REQUIRE(ddl_cli("plan --topology " + config("six_leaf.json") + " --size-gb 0.01 --out " +
                  small.string())
              .status == 0);
  const auto run = ddl_cli("run --plan " + small.string() + " --len 300 --dtype i64");
  CHECK(run.status == 0);
  CHECK(run.out.find("ranks        6") != std::string::npos);
}

TEST_CASE("simulate orders") {
  const auto two_switch = ddl_cli("simulate --topology " + config("two_switch_tree.json") +
                            " --size-gb 0.35 --order swapped");
  CHECK(two_switch.status == 0);
  CHECK(two_switch.out.find("contention   0 event(s)") != std::string::npos);

  const auto six = ddl_cli("simulate --topology " + config("six_leaf.json") +
                           " --size-gb 0.35 --order swapped");
  CHECK(six.status == 0);
  CHECK(six.out.find("carries 2 transfers") != std::string::npos);

  const auto one = ddl_cli("simulate --topology " + config("single_host4.json") +
                           " --size-gb 0.35 --ranks 1 --format json");
  REQUIRE(one.status == 0);
  CHECK(nlohmann::json::parse(one.out)["simulated_s"] == 0.0);
}

TEST_CASE("schedule dump and csv") {
  const auto dump = scratch("sched.txt");
  const auto csv = scratch("phases.csv");
  const auto r = ddl_cli("simulate --topology " + config("single_host4.json") +
                         " --size-gb 0.00000004 --dump-schedule " + dump.string() + " --csv " +
                         csv.string());
  REQUIRE(r.status == 0);
  std::ifstream in(dump);
  std::stringstream text;
  text << in.rdbuf();
  const auto l = lines(text.str());
  REQUIRE(l.size() == 24);  // 6 phases of 4 transfers
  CHECK(l.front() == "0 0 1 0 0 3 add");
  CHECK(l.back().find("replace") != std::string::npos);
  std::ifstream cin(csv);
  std::string header;
  std::getline(cin, header);
  CHECK(header == "phase,seconds,binding_link,bytes");
}

TEST_CASE("run verifies against the serial sum") {
  const auto r = ddl_cli("run -n 8 --len 100000 --iters 5 --dtype i64");
  CHECK(r.status == 0);
  CHECK(r.out.find("all ranks agree") != std::string::npos);
  CHECK(r.out.find("oracle       match") != std::string::npos);
  CHECK(ddl_cli("run -n 1 --len 10").status == 0);
  const auto f = ddl_cli("run -n 4 --dims 2x2 --len 1000 --dtype f32 --format json");
  REQUIRE(f.status == 0);
  CHECK(nlohmann::json::parse(f.out)["oracle_match"] == true);
}

TEST_CASE("busy rendezvous port") {
  const auto busy = ddl::listen_tcp({"127.0.0.1", 0});
  const std::string addr = "127.0.0.1:" + std::to_string(ddl::local_port(busy));
  const auto r = ddl_cli("run -n 2 --rendezvous " + addr, true);
  CHECK(r.status == 2);
  CHECK(r.out.find("in use") != std::string::npos);
  const auto env = ddl_cli("run -n 2", true);
  CHECK(env.status == 0);
  ::setenv("DDL_RENDEZVOUS", addr.c_str(), 1);
  CHECK(ddl_cli("run -n 2").status == 2);
  ::unsetenv("DDL_RENDEZVOUS");
}

TEST_CASE("bench sweep") {
  const auto r = ddl_cli("bench --topology " + config("reference_cluster.json") +
                         " --ranks 4,8,16,32,64,128,256 --size-gb 0.35");
  REQUIRE(r.status == 0);
  const auto l = lines(r.out);
  REQUIRE(l.size() == 8);
  CHECK(l[0] == "n,t_iter_s,efficiency,overhead_s,modeled_comm_s");
  double prev = 2.0;
  for (std::size_t i = 1; i < l.size(); ++i) {
    std::istringstream row(l[i]);
    std::string n, t, eff;
    std::getline(row, n, ',');
    std::getline(row, t, ',');
    std::getline(row, eff, ',');
    CHECK(std::stod(eff) <= prev);
    prev = std::stod(eff);
  }

  const auto zero = ddl_cli("bench --topology " + config("reference_cluster.json") +
                            " --ranks 4,64,256 --size-gb 0 --format json");
  REQUIRE(zero.status == 0);
  for (const auto& row : nlohmann::json::parse(zero.out)["rows"]) {
    CHECK(row["efficiency"].get<double>() == doctest::Approx(1.0).epsilon(0.2));
  }
}

TEST_CASE("machine-readable output is reproducible") {
  for (const std::string args :
       {"plan --topology " + config("reference_cluster.json") + " --size-gb 0.35 --format json",
        "simulate --topology " + config("six_leaf.json") + " --order swapped --format json",
        "bench --topology " + config("reference_cluster.json") + " --format json --seed 4"}) {
    const auto a = ddl_cli(args);
    const auto b = ddl_cli(args);
    CHECK(a.status == 0);
    CHECK(a.out == b.out);
  }
}
