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
#include <string>

#include "doctest.h"
#include "oracles.h"

#include "ddl/error.h"
#include "ddl/topology.h"

namespace {

const char* kSingleHost = R"({
  "levels": [{"id": "intra-host", "bandwidth_gbps": 20, "latency_s": 0.0005}],
  "nodes": [
    {"id": "h", "kind": "host"},
    {"id": "g0", "kind": "device", "parent": "h", "uplink_level": "intra-host"},
    {"id": "g1", "kind": "device", "parent": "h", "uplink_level": "intra-host"},
    {"id": "g2", "kind": "device", "parent": "h", "uplink_level": "intra-host"},
    {"id": "g3", "kind": "device", "parent": "h", "uplink_level": "intra-host"}
  ]})";

ddl::Topology reference_cluster() { return ddl::make_cluster({.racks = 4, .hosts_per_rack = 16}); }

std::string expect_error(const std::string& doc, ddl::TopologyError::Kind kind) {
  try {
    ddl::parse_topology(doc);
  } catch (const ddl::TopologyError& e) {
    CHECK(e.kind() == kind);
    return e.what();
  }
  FAIL("document was accepted");
  return {};
}

}  // namespace

TEST_CASE("single host with four devices") {
  const auto t = ddl::parse_topology(kSingleHost);
  CHECK(t.devices().size() == 4);
  CHECK(t.levels().size() == 1);
  CHECK(t.nodes()[t.root()].id == "h");
}

TEST_CASE("four racks of sixteen hosts") {
  const auto t = reference_cluster();
  CHECK(t.devices().size() == 256);
  CHECK(t.levels().size() == 3);
  CHECK(t.devices().front() == "r0h0g0");
  CHECK(t.devices()[4] == "r0h1g0");
  CHECK(t.devices().back() == "r3h15g3");
}

TEST_CASE("config files load") {
  const auto t = ddl::load_topology(DDL_CONFIG_DIR "/reference_cluster.json");
  CHECK(t.devices().size() == 256);
  CHECK(t.devices() == reference_cluster().devices());
  CHECK(ddl::load_topology(DDL_CONFIG_DIR "/two_switch_tree.json").devices() ==
        std::vector<std::string>{"A", "B", "C", "D"});
  CHECK(ddl::load_topology(DDL_CONFIG_DIR "/single_host4.json").devices().size() == 4);
  CHECK(ddl::load_topology(DDL_CONFIG_DIR "/six_leaf.json").devices().size() == 6);
}

TEST_CASE("duplicate ids are named") {
  const std::string doc = R"({
    "levels": [{"id": "l", "bandwidth_gbps": 1, "latency_s": 0}],
    "nodes": [
      {"id": "h", "kind": "host"},
      {"id": "d", "kind": "device", "parent": "h", "uplink_level": "l"},
      {"id": "d", "kind": "device", "parent": "h", "uplink_level": "l"}
    ]})";
  const auto msg = expect_error(doc, ddl::TopologyError::Kind::semantic);
  CHECK(msg.find("'d'") != std::string::npos);
  CHECK(msg.find("/nodes/2") != std::string::npos);
}

TEST_CASE("validation errors") {
  const std::string levels = R"("levels": [{"id": "l", "bandwidth_gbps": 1, "latency_s": 0}])";
  SUBCASE("malformed JSON carries a byte offset") {
    auto msg = expect_error("{\"levels\": [", ddl::TopologyError::Kind::syntax);
    CHECK(msg.find("byte") != std::string::npos);
  }
  SUBCASE("unknown key") {
    auto msg = expect_error("{" + levels + R"(, "nodes": [{"id": "h", "kind": "host", "x": 1}]})",
                            ddl::TopologyError::Kind::syntax);
    CHECK(msg.find("'x'") != std::string::npos);
  }
  SUBCASE("non-positive bandwidth") {
    expect_error(R"({"levels": [{"id": "l", "bandwidth_gbps": 0, "latency_s": 0}],
                    "nodes": [{"id": "h", "kind": "host"}]})",
                 ddl::TopologyError::Kind::semantic);
  }
  SUBCASE("device whose parent is not a host") {
    expect_error("{" + levels + R"(, "nodes": [{"id": "s", "kind": "switch"},
                 {"id": "d", "kind": "device", "parent": "s", "uplink_level": "l"}]})",
                 ddl::TopologyError::Kind::semantic);
  }
  SUBCASE("unknown parent") {
    auto msg = expect_error("{" + levels + R"(, "nodes": [{"id": "h", "kind": "host"},
                 {"id": "d", "kind": "device", "parent": "q", "uplink_level": "l"}]})",
                            ddl::TopologyError::Kind::semantic);
    CHECK(msg.find("/nodes/1/parent") != std::string::npos);
  }
  SUBCASE("two roots") {
    expect_error("{" + levels + R"(, "nodes": [{"id": "a", "kind": "switch"},
                 {"id": "b", "kind": "switch"}]})",
                 ddl::TopologyError::Kind::semantic);
  }
  SUBCASE("cycle") {
    expect_error("{" + levels + R"(, "nodes": [{"id": "r", "kind": "switch"},
                 {"id": "a", "kind": "switch", "parent": "b", "uplink_level": "l"},
                 {"id": "b", "kind": "switch", "parent": "a", "uplink_level": "l"}]})",
                 ddl::TopologyError::Kind::semantic);
  }
}

TEST_CASE("route on one host") {
  const auto t = ddl::parse_topology(kSingleHost);
  const auto r = t.route("g0", "g1");
  REQUIRE(r.size() == 2);
  CHECK(t.link_name(r[0]) == "g0->h");
  CHECK(t.link_name(r[1]) == "h->g1");
  CHECK_THROWS_AS(t.route("g0", "g0"), ddl::InvalidArgument);
  CHECK_THROWS_AS(t.route("g0", "nope"), ddl::InvalidArgument);
}

TEST_CASE("routes agree with breadth-first search") {
  const auto t = ddl::make_cluster({.racks = 2, .hosts_per_rack = 3, .devices_per_host = 2});
  const auto& devs = t.devices();
  for (const auto& a : devs) {
    for (const auto& b : devs) {
      if (a == b) continue;
      const auto path = oracle::bfs_path(t, a, b);
      const auto r = t.route(a, b);
      REQUIRE(r.size() + 1 == path.size());
      for (std::size_t i = 0; i < r.size(); ++i) {
        CHECK(t.link_name(r[i]) == path[i] + "->" + path[i + 1]);
      }
      // Reversal flips directions.
      auto back = t.route(b, a);
      std::reverse(back.begin(), back.end());
      for (std::size_t i = 0; i < r.size(); ++i) {
        CHECK(back[i].link == r[i].link);
        CHECK(back[i].direction != r[i].direction);
      }
    }
  }
}

TEST_CASE("cross-rack route has six hops") {
  const auto t = reference_cluster();
  const auto r = t.route("r0h0g0", "r3h2g1");
  REQUIRE(r.size() == 6);
  CHECK(oracle::bfs_path(t, "r0h0g0", "r3h2g1") ==
        std::vector<std::string>{"r0h0g0", "r0h0", "tor0", "director", "tor3", "r3h2", "r3h2g1"});
}

TEST_CASE("min_bandwidth") {
  const auto t = reference_cluster();
  std::vector<std::string> host{"r0h0g0", "r0h0g1", "r0h0g2", "r0h0g3"};
  CHECK(t.min_bandwidth(host) == 20.0);
  std::vector<std::string> rack{"r0h0g0", "r0h1g0"};
  CHECK(t.min_bandwidth(rack) == 10.0);
  std::vector<std::string> cross{"r0h0g0", "r0h0g1", "r2h0g0"};
  CHECK(t.min_bandwidth(cross) == 9.5);
  // Rotation does not matter.
  std::vector<std::string> rotated{"r0h0g1", "r2h0g0", "r0h0g0"};
  CHECK(t.min_bandwidth(rotated) == 9.5);
  std::vector<std::string> one{"r0h0g0"};
  CHECK_THROWS_AS(t.min_bandwidth(one), ddl::InvalidArgument);
  std::vector<std::string> unknown{"r0h0g0", "zz"};
  CHECK_THROWS_AS(t.min_bandwidth(unknown), ddl::InvalidArgument);
}

TEST_CASE("serialize round trip") {
  for (const auto& t : {ddl::parse_topology(kSingleHost), reference_cluster(),
                        ddl::load_topology(DDL_CONFIG_DIR "/two_switch_tree.json")}) {
    const auto text = ddl::serialize_topology(t);
    const auto again = ddl::parse_topology(text);
    CHECK(ddl::serialize_topology(again) == text);
    CHECK(again.devices() == t.devices());
    REQUIRE(again.links().size() == t.links().size());
    for (std::size_t i = 0; i < t.links().size(); ++i) {
      CHECK(again.links()[i].bandwidth_gbps == t.links()[i].bandwidth_gbps);
      CHECK(again.links()[i].lanes == t.links()[i].lanes);
    }
  }
}
