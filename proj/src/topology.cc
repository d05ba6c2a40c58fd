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

#include "ddl/topology.h"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "ddl/error.h"

namespace ddl {

using json = nlohmann::json;

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::device:
      return "device";
    case NodeKind::host:
      return "host";
    case NodeKind::switch_node:
      return "switch";
  }
  return "?";
}

namespace {

[[noreturn]] void semantic(const std::string& location, const std::string& message) {
  throw TopologyError(TopologyError::Kind::semantic, location, message);
}

std::string node_location(std::size_t i) { return "/nodes/" + std::to_string(i); }

}  // namespace

Topology Topology::build(std::vector<Level> levels, std::vector<NodeSpec> specs) {
  Topology t;
  std::unordered_map<std::string, int> level_index;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& level = levels[i];
    const std::string where = "/levels/" + std::to_string(i);
    if (level.id.empty()) semantic(where, "level id must be non-empty");
    if (!level_index.emplace(level.id, static_cast<int>(i)).second) {
      semantic(where, "duplicate level id '" + level.id + "'");
    }
    if (!(level.bandwidth_gbps > 0.0)) {
      semantic(where, "level '" + level.id + "' must have positive bandwidth");
    }
    if (!(level.latency_s >= 0.0)) {
      semantic(where, "level '" + level.id + "' must have non-negative latency");
    }
  }

  t.nodes_.resize(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& spec = specs[i];
    if (spec.id.empty()) semantic(node_location(i), "node id must be non-empty");
    if (!t.index_.emplace(spec.id, static_cast<int>(i)).second) {
      semantic(node_location(i), "duplicate node id '" + spec.id + "'");
    }
    t.nodes_[i].id = spec.id;
    t.nodes_[i].kind = spec.kind;
  }

  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& spec = specs[i];
    auto& node = t.nodes_[i];
    const std::string where = node_location(i);
    if (spec.parent.empty()) {
      if (t.root_ >= 0) {
        semantic(where, "not a tree: '" + spec.id + "' and '" + t.nodes_[t.root_].id +
                            "' both lack a parent");
      }
      if (!spec.uplink_level.empty()) {
        semantic(where, "root node '" + spec.id + "' cannot have an uplink level");
      }
      if (spec.kind == NodeKind::device) {
        semantic(where, "device '" + spec.id + "' must have a host parent");
      }
      t.root_ = static_cast<int>(i);
      continue;
    }
    auto parent = t.index_.find(spec.parent);
    if (parent == t.index_.end()) {
      semantic(where + "/parent", "unknown parent '" + spec.parent + "' of '" + spec.id + "'");
    }
    if (parent->second == static_cast<int>(i)) {
      semantic(where + "/parent", "node '" + spec.id + "' is its own parent");
    }
    const NodeKind parent_kind = t.nodes_[parent->second].kind;
    switch (spec.kind) {
      case NodeKind::device:
        if (parent_kind != NodeKind::host) {
          semantic(where + "/parent",
                   "device '" + spec.id + "' must reference a host, not '" + spec.parent + "'");
        }
        break;
      case NodeKind::host:
      case NodeKind::switch_node:
        if (parent_kind != NodeKind::switch_node) {
          semantic(where + "/parent", std::string(to_string(spec.kind)) + " '" + spec.id +
                                          "' must have a switch parent, not '" + spec.parent +
                                          "'");
        }
        break;
    }
    auto level = level_index.find(spec.uplink_level);
    if (level == level_index.end()) {
      semantic(where + "/uplink_level",
               "unknown uplink level '" + spec.uplink_level + "' for '" + spec.id + "'");
    }
    if (spec.uplink_lanes < 1) {
      semantic(where + "/uplink_lanes", "uplink_lanes must be at least 1");
    }
    node.parent = parent->second;
    node.host = spec.kind == NodeKind::device ? parent->second : -1;
    node.uplink = static_cast<int>(t.links_.size());
    t.links_.push_back(Link{static_cast<int>(i), parent->second, level->second, spec.uplink_lanes,
                            levels[level->second].bandwidth_gbps});
    t.nodes_[parent->second].children.push_back(static_cast<int>(i));
  }
  if (!specs.empty() && t.root_ < 0) {
    semantic("/nodes", "not a tree: every node has a parent (cycle)");
  }

  // Depth-first walk from the root; anything unreached sits on a cycle.
  std::vector<bool> seen(specs.size(), false);
  if (t.root_ >= 0) {
    std::vector<int> stack{t.root_};
    while (!stack.empty()) {
      int n = stack.back();
      stack.pop_back();
      seen[n] = true;
      if (t.nodes_[n].kind == NodeKind::device) {
        t.dfs_position_.emplace(t.nodes_[n].id, t.devices_.size());
        t.devices_.push_back(t.nodes_[n].id);
      }
      const auto& children = t.nodes_[n].children;
      for (auto it = children.rbegin(); it != children.rend(); ++it) {
        t.nodes_[*it].depth = t.nodes_[n].depth + 1;
        stack.push_back(*it);
      }
    }
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (!seen[i]) {
      semantic(node_location(i), "not a tree: '" + specs[i].id + "' lies on a cycle");
    }
  }

  t.levels_ = std::move(levels);
  t.specs_ = std::move(specs);
  return t;
}

int Topology::node_index(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw InvalidArgument("unknown node '" + std::string(id) + "'");
  return it->second;
}

bool Topology::contains(std::string_view id) const {
  return index_.contains(std::string(id));
}

std::size_t Topology::dfs_position(std::string_view device) const {
  auto it = dfs_position_.find(std::string(device));
  if (it == dfs_position_.end()) {
    throw InvalidArgument("'" + std::string(device) + "' is not a device of the topology");
  }
  return it->second;
}

std::vector<LinkUse> Topology::route(std::string_view a, std::string_view b) const {
  return route(node_index(a), node_index(b));
}

std::vector<LinkUse> Topology::route(int a, int b) const {
  if (a == b) {
    throw InvalidArgument("route endpoints must differ ('" + nodes_.at(a).id + "')");
  }
  std::vector<LinkUse> up;
  std::vector<LinkUse> down;
  while (nodes_[a].depth > nodes_[b].depth) {
    up.push_back({nodes_[a].uplink, Direction::up});
    a = nodes_[a].parent;
  }
  while (nodes_[b].depth > nodes_[a].depth) {
    down.push_back({nodes_[b].uplink, Direction::down});
    b = nodes_[b].parent;
  }
  while (a != b) {
    up.push_back({nodes_[a].uplink, Direction::up});
    down.push_back({nodes_[b].uplink, Direction::down});
    a = nodes_[a].parent;
    b = nodes_[b].parent;
  }
  up.insert(up.end(), down.rbegin(), down.rend());
  return up;
}

double Topology::min_bandwidth(std::span<const std::string> ring_order) const {
  if (ring_order.size() < 2) {
    throw InvalidArgument("min_bandwidth needs at least two devices");
  }
  std::vector<int> members;
  members.reserve(ring_order.size());
  for (const auto& id : ring_order) {
    dfs_position(id);  // validates that id is a device
    int n = node_index(id);
    if (std::find(members.begin(), members.end(), n) != members.end()) {
      throw InvalidArgument("device '" + id + "' appears twice in the ring");
    }
    members.push_back(n);
  }
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (const auto& use : route(members[i], members[(i + 1) % members.size()])) {
      lowest = std::min(lowest, links_[use.link].bandwidth_gbps);
    }
  }
  return lowest;
}

std::string Topology::link_name(LinkUse use) const {
  const Link& link = links_.at(use.link);
  const auto& child = nodes_[link.child].id;
  const auto& parent = nodes_[link.parent].id;
  return use.direction == Direction::up ? child + "->" + parent : parent + "->" + child;
}

namespace {

[[noreturn]] void syntax(const std::string& location, const std::string& message) {
  throw TopologyError(TopologyError::Kind::syntax, location, message);
}

void reject_unknown_keys(const json& object, std::initializer_list<std::string_view> allowed,
                         const std::string& where) {
  for (const auto& [key, value] : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      syntax(where + "/" + key, "unknown key '" + key + "'");
    }
  }
}

const json& require(const json& object, const char* key, const std::string& where) {
  auto it = object.find(key);
  if (it == object.end()) syntax(where, std::string("missing required key '") + key + "'");
  return *it;
}

std::string require_string(const json& object, const char* key, const std::string& where) {
  const json& v = require(object, key, where);
  if (!v.is_string()) syntax(where + "/" + key, "expected a string");
  return v.get<std::string>();
}

double require_number(const json& object, const char* key, const std::string& where) {
  const json& v = require(object, key, where);
  if (!v.is_number()) syntax(where + "/" + key, "expected a number");
  return v.get<double>();
}

NodeKind parse_kind(const std::string& kind, const std::string& where) {
  if (kind == "device") return NodeKind::device;
  if (kind == "host") return NodeKind::host;
  if (kind == "switch") return NodeKind::switch_node;
  syntax(where, "unknown node kind '" + kind + "'");
}

}  // namespace

Topology parse_topology(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    syntax("byte " + std::to_string(e.byte), e.what());
  }
  if (!doc.is_object()) syntax("", "topology document must be a JSON object");
  reject_unknown_keys(doc, {"levels", "nodes"}, "");

  const json& levels_json = require(doc, "levels", "");
  if (!levels_json.is_array()) syntax("/levels", "expected an array");
  std::vector<Level> levels;
  for (std::size_t i = 0; i < levels_json.size(); ++i) {
    const std::string where = "/levels/" + std::to_string(i);
    const json& l = levels_json[i];
    if (!l.is_object()) syntax(where, "expected an object");
    reject_unknown_keys(l, {"id", "bandwidth_gbps", "latency_s"}, where);
    levels.push_back(Level{require_string(l, "id", where), require_number(l, "bandwidth_gbps", where),
                           require_number(l, "latency_s", where)});
  }

  const json& nodes_json = require(doc, "nodes", "");
  if (!nodes_json.is_array()) syntax("/nodes", "expected an array");
  std::vector<NodeSpec> nodes;
  for (std::size_t i = 0; i < nodes_json.size(); ++i) {
    const std::string where = node_location(i);
    const json& n = nodes_json[i];
    if (!n.is_object()) syntax(where, "expected an object");
    reject_unknown_keys(n, {"id", "kind", "parent", "uplink_level", "uplink_lanes"}, where);
    NodeSpec spec;
    spec.id = require_string(n, "id", where);
    spec.kind = parse_kind(require_string(n, "kind", where), where + "/kind");
    if (n.contains("parent")) spec.parent = require_string(n, "parent", where);
    if (n.contains("uplink_level")) spec.uplink_level = require_string(n, "uplink_level", where);
    if (n.contains("uplink_lanes")) {
      const json& lanes = n["uplink_lanes"];
      if (!lanes.is_number_integer()) syntax(where + "/uplink_lanes", "expected an integer");
      spec.uplink_lanes = lanes.get<int>();
    }
    if (!spec.parent.empty() && spec.uplink_level.empty()) {
      syntax(where, "missing required key 'uplink_level'");
    }
    nodes.push_back(std::move(spec));
  }
  return Topology::build(std::move(levels), std::move(nodes));
}

Topology load_topology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open topology file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_topology(buffer.str());
}

std::string serialize_topology(const Topology& topology) {
  json doc;
  doc["levels"] = json::array();
  for (const auto& level : topology.levels()) {
    doc["levels"].push_back(
        {{"id", level.id}, {"bandwidth_gbps", level.bandwidth_gbps}, {"latency_s", level.latency_s}});
  }
  doc["nodes"] = json::array();
  for (const auto& spec : topology.specs()) {
    json n{{"id", spec.id}, {"kind", to_string(spec.kind)}};
    if (!spec.parent.empty()) {
      n["parent"] = spec.parent;
      n["uplink_level"] = spec.uplink_level;
      if (spec.uplink_lanes != 1) n["uplink_lanes"] = spec.uplink_lanes;
    }
    doc["nodes"].push_back(std::move(n));
  }
  return doc.dump(2) + "\n";
}

Topology make_cluster(const ClusterShape& shape) {
  if (shape.racks < 1 || shape.hosts_per_rack < 1 || shape.devices_per_host < 1) {
    throw InvalidArgument("cluster dimensions must be positive");
  }
  std::vector<Level> levels{shape.intra_host};
  std::vector<NodeSpec> nodes;
  const bool director = shape.racks > 1;
  const bool tors = director || shape.hosts_per_rack > 1;
  if (tors) levels.push_back(shape.intra_rack);
  if (director) {
    levels.push_back(shape.inter_rack);
    nodes.push_back({"director", NodeKind::switch_node, "", "", 1});
  }
  const int rack_lanes = shape.hosts_per_rack * shape.devices_per_host;
  for (int r = 0; r < shape.racks; ++r) {
    const std::string tor = "tor" + std::to_string(r);
    if (tors) {
      nodes.push_back({tor, NodeKind::switch_node, director ? "director" : "",
                       director ? shape.inter_rack.id : "", director ? rack_lanes : 1});
    }
    for (int h = 0; h < shape.hosts_per_rack; ++h) {
      const std::string host = "r" + std::to_string(r) + "h" + std::to_string(h);
      nodes.push_back({host, NodeKind::host, tors ? tor : "", tors ? shape.intra_rack.id : "",
                       tors ? shape.devices_per_host : 1});
      for (int g = 0; g < shape.devices_per_host; ++g) {
        nodes.push_back({host + "g" + std::to_string(g), NodeKind::device, host,
                         shape.intra_host.id, 1});
      }
    }
  }
  return Topology::build(std::move(levels), std::move(nodes));
}

}  // namespace ddl
