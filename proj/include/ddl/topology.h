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

#ifndef DDL_TOPOLOGY_H_
#define DDL_TOPOLOGY_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ddl {

enum class NodeKind { device, host, switch_node };

std::string_view to_string(NodeKind kind);

// One tier of the network hierarchy, e.g. intra-host, intra-rack, inter-rack.
// `bandwidth_gbps` is per direction per lane, in 1e9 bytes per second.
struct Level {
  std::string id;
  double bandwidth_gbps = 0.0;
  double latency_s = 0.0;
};

struct Node {
  std::string id;
  NodeKind kind = NodeKind::device;
  // Index of the parent node, or -1 for the root.
  int parent = -1;
  // For devices, the index of the owning host; -1 otherwise.
  int host = -1;
  // Index of the uplink (link to the parent), or -1 for the root.
  int uplink = -1;
  int depth = 0;
  std::vector<int> children;
};

// A full-duplex tree edge between `child` and `parent`. A link is a bundle of
// `lanes` parallel channels, each running at `bandwidth_gbps` per direction;
// up to `lanes` concurrent transfers per direction proceed without sharing.
struct Link {
  int child = -1;
  int parent = -1;
  int level = -1;
  int lanes = 1;
  double bandwidth_gbps = 0.0;
};

enum class Direction : std::uint8_t { up, down };

// One traversal of a link in a given direction (up = toward the root).
struct LinkUse {
  int link = -1;
  Direction direction = Direction::up;

  friend bool operator==(const LinkUse&, const LinkUse&) = default;
  friend auto operator<=>(const LinkUse&, const LinkUse&) = default;
};

// Declarative description of one node, as found in a topology document.
struct NodeSpec {
  std::string id;
  NodeKind kind = NodeKind::device;
  std::string parent;  // empty for the root
  std::string uplink_level;
  int uplink_lanes = 1;
};

// Immutable hierarchical cluster network. The node/link graph is a tree whose
// leaves include every device.
class Topology {
 public:
  // Validates the description and throws TopologyError (kind semantic) with a
  // location of the form "/nodes/<i>" on the first violation.
  static Topology build(std::vector<Level> levels, std::vector<NodeSpec> nodes);

  const std::vector<Level>& levels() const { return levels_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }
  const std::vector<NodeSpec>& specs() const { return specs_; }

  int root() const { return root_; }
  // Throws InvalidArgument for unknown ids.
  int node_index(std::string_view id) const;
  bool contains(std::string_view id) const;
  const Node& node(std::string_view id) const { return nodes_[node_index(id)]; }

  // Devices in depth-first order (children visited in document order).
  const std::vector<std::string>& devices() const { return devices_; }
  // Position of a device in depth-first order; throws for non-devices.
  std::size_t dfs_position(std::string_view device) const;

  // The unique tree path from `a` to `b` as directed link traversals.
  std::vector<LinkUse> route(std::string_view a, std::string_view b) const;
  std::vector<LinkUse> route(int a, int b) const;

  // Lowest link bandwidth over the routes between cyclically consecutive ring
  // members. Requires at least two distinct devices.
  double min_bandwidth(std::span<const std::string> ring_order) const;

  // Human-readable name of a directed link use, e.g. "h0->tor0".
  std::string link_name(LinkUse use) const;

 private:
  Topology() = default;

  std::vector<Level> levels_;
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::vector<NodeSpec> specs_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::string> devices_;
  std::unordered_map<std::string, std::size_t> dfs_position_;
  int root_ = -1;
};

// Parses a JSON topology document. Syntax errors carry the byte offset;
// semantic errors carry a JSON pointer.
Topology parse_topology(std::string_view document);
Topology load_topology(const std::filesystem::path& path);
std::string serialize_topology(const Topology& topology);

// Regular three-tier cluster: `racks` top-of-rack switches under one director
// switch, `hosts_per_rack` hosts each, `devices_per_host` devices per host.
// Host and rack uplinks are given one lane per device beneath them, so that
// dimension-aligned concurrent rings never share a lane. With racks == 1 the
// director is omitted; with hosts_per_rack == 1 and racks == 1 the host is root.
struct ClusterShape {
  int racks = 1;
  int hosts_per_rack = 1;
  int devices_per_host = 4;
  Level intra_host{"intra-host", 20.0, 0.0005};
  Level intra_rack{"intra-rack", 10.0, 0.0005};
  Level inter_rack{"inter-rack", 9.5, 0.0005};
};

Topology make_cluster(const ClusterShape& shape);

}  // namespace ddl

#endif  // DDL_TOPOLOGY_H_
