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

#include <algorithm>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.h"

#include "ddl/error.h"
#include "ddl/ring.h"
#include "ddl/topology.h"

namespace {

std::vector<std::string> names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("d" + std::to_string(i));
  return out;
}

int max_usage(const ddl::Topology& t, const ddl::Schedule& s, const ddl::RingOrder& order) {
  int worst = 0;
  for (const auto& phase : s.phases) {
    for (const auto& [use, count] : ddl::phase_link_usage(t, phase, order)) {
      worst = std::max(worst, count);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("chunk bounds") {
  CHECK(ddl::chunk_bounds(10, 4, 0) == ddl::ChunkBounds{0, 3});
  CHECK(ddl::chunk_bounds(10, 4, 3) == ddl::ChunkBounds{8, 2});
  CHECK(ddl::chunk_bounds(8, 4, 2) == ddl::ChunkBounds{4, 2});
  CHECK(ddl::chunk_bounds(3, 5, 4) == ddl::ChunkBounds{3, 0});
  CHECK_THROWS_AS(ddl::chunk_bounds(3, 5, 5), ddl::InvalidArgument);
  CHECK_THROWS_AS(ddl::chunk_bounds(3, 0, 0), ddl::InvalidArgument);
  for (std::size_t e = 0; e < 40; ++e) {
    for (std::size_t n = 1; n < 12; ++n) {
      std::size_t next = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto b = ddl::chunk_bounds(e, n, i);
        CHECK(b.offset == next);
        CHECK(b.length + 1 >= e / n + 1);
        CHECK(b.length <= e / n + 1);
        next += b.length;
      }
      CHECK(next == e);
    }
  }
}

TEST_CASE("single rank schedules are empty") {
  ddl::RingOrder one(names(1));
  CHECK(ddl::reduce_scatter_schedule(one, 10).phases.empty());
  CHECK(ddl::allgather_schedule(one, 10).phases.empty());
}

TEST_CASE("two ranks exchange halves") {
  ddl::RingOrder two(names(2));
  const auto s = ddl::reduce_scatter_schedule(two, 4);
  REQUIRE(s.phases.size() == 1);
  REQUIRE(s.phases[0].transfers.size() == 2);
  std::vector<std::vector<std::int64_t>> data{{1, 2, 3, 4}, {10, 20, 30, 40}};
  oracle::replay(s, data);
  // Position i ends with chunk (i + 1) mod 2.
  CHECK(data[0][2] == 33);
  CHECK(data[0][3] == 44);
  CHECK(data[1][0] == 11);
  CHECK(data[1][1] == 22);
}

TEST_CASE("three-rank reduce-scatter by replay") {
  ddl::RingOrder order(names(3));
  const auto s = ddl::reduce_scatter_schedule(order, 9);
  REQUIRE(s.phases.size() == 2);
  for (const auto& p : s.phases) {
    REQUIRE(p.transfers.size() == 3);
    for (const auto& t : p.transfers) {
      CHECK(t.length == 3);
      CHECK(t.combine == ddl::Combine::add);
    }
  }
  auto data = oracle::random_vectors(3, 9, 7);
  const auto sum = oracle::serial_sum(data, 9);
  oracle::replay(s, data);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto b = ddl::chunk_bounds(9, 3, (i + 1) % 3);
    for (std::size_t k = b.offset; k < b.offset + b.length; ++k) CHECK(data[i][k] == sum[k]);
  }
}

TEST_CASE("allgather after reduce-scatter gives the sum everywhere") {
  for (std::size_t n = 1; n <= 9; ++n) {
    for (std::size_t e : {std::size_t{0}, std::size_t{1}, n, n + 3, 2 * n * n}) {
      ddl::RingOrder order(names(n));
      auto data = oracle::random_vectors(n, e, static_cast<std::uint32_t>(n * 100 + e));
      const auto sum = oracle::serial_sum(data, e);
      oracle::replay(ddl::reduce_scatter_schedule(order, e), data);
      const auto ag = ddl::allgather_schedule(order, e);
      CHECK(ag.phases.size() == (n > 0 ? n - 1 : 0));
      for (const auto& p : ag.phases)
        for (const auto& t : p.transfers) CHECK(t.combine == ddl::Combine::replace);
      oracle::replay(ag, data);
      for (std::size_t r = 0; r < n; ++r) CHECK(data[r] == sum);
    }
  }
}

TEST_CASE("nontrivial ring order") {
  // Ranks visited as 2,0,3,1.
  ddl::RingOrder order({2, 0, 3, 1}, names(4));
  auto data = oracle::random_vectors(4, 13, 3);
  const auto sum = oracle::serial_sum(data, 13);
  const auto rs = ddl::reduce_scatter_schedule(order, 13);
  CHECK(rs.phases[0].transfers[0].src == 2);
  CHECK(rs.phases[0].transfers[0].dst == 0);
  oracle::replay(rs, data);
  oracle::replay(ddl::allgather_schedule(order, 13), data);
  for (const auto& v : data) CHECK(v == sum);
  CHECK_THROWS_AS(ddl::RingOrder({0, 0, 1}, names(3)), ddl::InvalidArgument);
}

TEST_CASE("ring discipline and traffic conservation") {
  for (std::size_t n = 2; n <= 9; ++n) {
    const std::size_t e = 5 * n + 2;
    ddl::RingOrder order(names(n));
    for (const auto& s : {ddl::reduce_scatter_schedule(order, e), ddl::allgather_schedule(order, e)}) {
      std::size_t moved = 0;
      for (const auto& p : s.phases) {
        std::vector<int> sends(n, 0), recvs(n, 0);
        for (const auto& t : p.transfers) {
          ++sends[t.src];
          ++recvs[t.dst];
          CHECK(t.offset + t.length <= e);
          moved += t.length;
        }
        CHECK(std::all_of(sends.begin(), sends.end(), [](int c) { return c == 1; }));
        CHECK(std::all_of(recvs.begin(), recvs.end(), [](int c) { return c == 1; }));
      }
      CHECK(moved == (n - 1) * e);
    }
  }
}

TEST_CASE("depth-first order on the two-switch tree") {
  const auto t = ddl::load_topology(DDL_CONFIG_DIR "/two_switch_tree.json");
  const auto order = ddl::order_ranks_on_tree(t, {"C", "A", "D", "B"});
  CHECK(order.ring_devices() == std::vector<std::string>{"A", "B", "C", "D"});
  CHECK(order.device_of(0) == "C");
  const auto s = ddl::reduce_scatter_schedule(order, 100);
  CHECK(max_usage(t, s, order) == 1);
  CHECK_THROWS_AS(ddl::order_ranks_on_tree(t, {"A", "zz"}), ddl::InvalidArgument);
}

TEST_CASE("four leaves under two switches") {
  const auto t = ddl::load_topology(DDL_CONFIG_DIR "/two_switch_tree.json");
  // Swapping the first and third member of a four-member ring reverses it.
  ddl::RingOrder swapped(std::vector<std::string>{"C", "B", "A", "D"});
  CHECK(max_usage(t, ddl::reduce_scatter_schedule(swapped, 8), swapped) == 1);
  // Orders alternating between the switches cross the director twice per
  // direction; the other cyclic arrangements are contention-free.
  ddl::RingOrder alternating(std::vector<std::string>{"A", "C", "B", "D"});
  CHECK(max_usage(t, ddl::reduce_scatter_schedule(alternating, 8), alternating) == 2);
  std::vector<std::string> devs{"A", "B", "C", "D"};
  int contended = 0;
  do {
    ddl::RingOrder order(devs);
    const int usage = max_usage(t, ddl::reduce_scatter_schedule(order, 8), order);
    const auto side = [](const std::string& d) { return d < "C"; };
    bool alternates = true;
    for (std::size_t i = 0; i < 4; ++i) alternates &= side(devs[i]) != side(devs[(i + 1) % 4]);
    CHECK(usage == (alternates ? 2 : 1));
    contended += usage == 2;
  } while (std::next_permutation(devs.begin(), devs.end()));
  CHECK(contended == 8);
}

TEST_CASE("swapping the first and third leaf on a six-leaf tree doubles a link") {
  const auto t = ddl::load_topology(DDL_CONFIG_DIR "/six_leaf.json");
  auto devs = t.devices();
  ddl::RingOrder dfs(devs);
  CHECK(max_usage(t, ddl::reduce_scatter_schedule(dfs, 60), dfs) == 1);
  std::swap(devs[0], devs[2]);
  ddl::RingOrder swapped(devs);
  CHECK(max_usage(t, ddl::reduce_scatter_schedule(swapped, 60), swapped) == 2);
}

TEST_CASE("depth-first order is contention-free on random trees") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    ddl::ClusterShape shape;
    shape.racks = 1 + static_cast<int>(rng() % 3);
    shape.hosts_per_rack = 1 + static_cast<int>(rng() % 4);
    shape.devices_per_host = 1 + static_cast<int>(rng() % 3);
    const auto t = ddl::make_cluster(shape);
    if (t.devices().size() < 2) continue;
    auto devs = t.devices();
    std::shuffle(devs.begin(), devs.end(), rng);
    const auto order = ddl::order_ranks_on_tree(t, devs);
    CHECK(max_usage(t, ddl::reduce_scatter_schedule(order, 64), order) == 1);
  }
}

TEST_CASE("single host is order-insensitive for two devices") {
  const auto t = ddl::load_topology(DDL_CONFIG_DIR "/single_host4.json");
  ddl::RingOrder a(std::vector<std::string>{"g1", "g0"});
  CHECK(max_usage(t, ddl::reduce_scatter_schedule(a, 10), a) == 1);
  CHECK(ddl::phase_link_usage(t, ddl::Phase{}, a).empty());
}

TEST_CASE("schedule dump format") {
  ddl::RingOrder order(names(2));
  std::ostringstream out;
  ddl::write_schedule(out, ddl::reduce_scatter_schedule(order, 5));
  CHECK(out.str() == "0 0 1 0 0 3 add\n0 1 0 1 3 2 add\n");
}
