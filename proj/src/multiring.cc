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

#include "ddl/multiring.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

#include "json.hpp"

#include "ddl/error.h"

namespace ddl {

using json = nlohmann::json;

std::size_t Decomposition::ranks() const {
  std::size_t n = 1;
  for (const auto& d : dims) n *= d.size;
  return n;
}

std::vector<std::size_t> Decomposition::sizes() const {
  std::vector<std::size_t> out;
  for (const auto& d : dims) out.push_back(d.size);
  return out;
}

std::vector<DimensionCost> Decomposition::costs() const {
  std::vector<DimensionCost> out;
  for (const auto& d : dims) out.push_back({d.size, d.bandwidth_gbps, d.latency_s});
  return out;
}

namespace {

void enumerate(std::size_t remaining, std::size_t max_dims, std::vector<std::size_t>& prefix,
               std::vector<std::vector<std::size_t>>& out) {
  if (remaining == 1) {
    if (!prefix.empty()) out.push_back(prefix);
    return;
  }
  if (prefix.size() == max_dims) return;
  for (std::size_t d = 2; d <= remaining; ++d) {
    if (remaining % d != 0) continue;
    prefix.push_back(d);
    enumerate(remaining / d, max_dims, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

std::vector<std::vector<std::size_t>> factorizations(std::size_t n, std::size_t max_dims) {
  if (n == 0) throw InvalidArgument("rank count must be at least 1");
  if (max_dims == 0) throw InvalidArgument("max_dims must be at least 1");
  if (n == 1) return {{1}};
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> prefix;
  enumerate(n, max_dims, prefix, out);
  std::sort(out.begin(), out.end());
  return out;
}

Grid::Grid(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw InvalidArgument("grid needs at least one dimension");
  ranks_ = 1;
  for (std::size_t d : dims_) {
    if (d == 0) throw InvalidArgument("grid dimension of size 0");
    strides_.push_back(ranks_);
    ranks_ *= d;
  }
}

std::vector<std::size_t> Grid::coordinates(std::size_t rank) const {
  if (rank >= ranks_) throw InvalidArgument("rank " + std::to_string(rank) + " outside grid");
  std::vector<std::size_t> c(dims_.size());
  for (std::size_t i = 0; i < dims_.size(); ++i) c[i] = (rank / strides_[i]) % dims_[i];
  return c;
}

std::size_t Grid::rank(const std::vector<std::size_t>& coordinates) const {
  if (coordinates.size() != dims_.size()) throw InvalidArgument("coordinate arity mismatch");
  std::size_t r = 0;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (coordinates[i] >= dims_[i]) throw InvalidArgument("coordinate out of range");
    r += coordinates[i] * strides_[i];
  }
  return r;
}

std::vector<int> Grid::ring(std::size_t rank, std::size_t dim) const {
  const std::size_t c = (rank / strides_.at(dim)) % dims_[dim];
  const std::size_t base = rank - c * strides_[dim];
  std::vector<int> members(dims_[dim]);
  for (std::size_t k = 0; k < dims_[dim]; ++k) {
    members[k] = static_cast<int>(base + k * strides_[dim]);
  }
  return members;
}

Grid build_grid(std::size_t rank_count, const std::vector<std::size_t>& dims) {
  Grid grid(dims);
  if (grid.ranks() != rank_count) {
    throw InvalidArgument("decomposition " + format_dims(dims) + " covers " +
                          std::to_string(grid.ranks()) + " ranks, not " +
                          std::to_string(rank_count));
  }
  return grid;
}

Schedule multiring_schedule(const Grid& grid, std::size_t element_count) {
  const std::size_t n = grid.ranks();
  Schedule s;
  s.ranks = n;
  s.element_count = element_count;
  s.kind = ScheduleKind::composite;

  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < grid.dims().size(); ++i) {
    if (grid.dims()[i] > 1) active.push_back(i);
  }

  std::vector<ChunkBounds> region(n, ChunkBounds{0, element_count});
  std::vector<std::vector<ChunkBounds>> entry_region;
  for (std::size_t a = 0; a < active.size(); ++a) {
    const std::size_t dim = active[a];
    const std::size_t d = grid.dims()[dim];
    const std::size_t first = s.phases.size();
    s.phases.resize(first + d - 1);
    for (auto it = s.phases.begin() + static_cast<std::ptrdiff_t>(first); it != s.phases.end();
         ++it) {
      it->dimension = a;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (grid.coordinates(r)[dim] != 0) continue;
      append_ring_pass(std::span(s.phases).subspan(first), grid.ring(r, dim), region[r],
                       Combine::add);
    }
    entry_region.push_back(region);
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t c = (r / grid.stride(dim)) % d;
      const ChunkBounds sub = chunk_bounds(region[r].length, d, (c + 1) % d);
      region[r] = {region[r].offset + sub.offset, sub.length};
    }
  }
  for (std::size_t a = active.size(); a-- > 0;) {
    const std::size_t dim = active[a];
    const std::size_t d = grid.dims()[dim];
    const std::size_t first = s.phases.size();
    s.phases.resize(first + d - 1);
    for (auto it = s.phases.begin() + static_cast<std::ptrdiff_t>(first); it != s.phases.end();
         ++it) {
      it->dimension = a;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (grid.coordinates(r)[dim] != 0) continue;
      append_ring_pass(std::span(s.phases).subspan(first), grid.ring(r, dim),
                       entry_region[a][r], Combine::replace);
    }
  }
  return s;
}

ChunkBounds owned_region(const Grid& grid, std::size_t element_count, std::size_t rank) {
  const auto c = grid.coordinates(rank);
  ChunkBounds region{0, element_count};
  for (std::size_t i = 0; i < grid.dims().size(); ++i) {
    const std::size_t d = grid.dims()[i];
    if (d == 1) continue;
    const ChunkBounds sub = chunk_bounds(region.length, d, (c[i] + 1) % d);
    region = {region.offset + sub.offset, sub.length};
  }
  return region;
}

Decomposition bind_decomposition(const Topology& topology, const std::vector<std::string>& devices,
                                 const std::vector<std::size_t>& sizes,
                                 std::optional<double> latency_override) {
  const Grid grid = build_grid(devices.size(), sizes);
  std::vector<int> node(devices.size());
  for (std::size_t r = 0; r < devices.size(); ++r) {
    topology.dfs_position(devices[r]);
    node[r] = topology.node_index(devices[r]);
  }
  const auto& levels = topology.levels();
  auto latency_of = [&](int level) {
    return latency_override ? *latency_override : levels[level].latency_s;
  };

  Decomposition out;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const std::size_t d = sizes[i];
    if (d == 1) {
      out.dims.push_back({1, levels.front().id, levels.front().bandwidth_gbps, 0.0});
      continue;
    }
    double bandwidth = std::numeric_limits<double>::infinity();
    double latency = 0.0;
    int binding = -1;
    for (std::size_t r = 0; r < devices.size(); ++r) {
      const std::size_t c = (r / grid.stride(i)) % d;
      const std::size_t next = r - c * grid.stride(i) + ((c + 1) % d) * grid.stride(i);
      for (const auto& use : topology.route(node[r], node[next])) {
        const Link& link = topology.links()[use.link];
        latency = std::max(latency, latency_of(link.level));
        if (link.bandwidth_gbps < bandwidth ||
            (link.bandwidth_gbps == bandwidth && link.level > binding)) {
          bandwidth = link.bandwidth_gbps;
          binding = link.level;
        }
      }
    }
    out.dims.push_back({d, levels[binding].id, bandwidth, latency});
  }
  return out;
}

namespace {

// Sizes of the device groups under each ancestor height (host, rack, ...),
// or nothing when some height splits the devices unevenly.
std::optional<std::set<std::size_t>> tier_boundaries(const Topology& topology,
                                                     const std::vector<std::string>& devices) {
  if (devices.empty()) return std::nullopt;
  const auto& nodes = topology.nodes();
  const int depth = topology.node(devices.front()).depth;
  std::vector<int> cursor;
  for (const auto& id : devices) {
    const int n = topology.node_index(id);
    if (nodes[n].depth != depth) return std::nullopt;
    cursor.push_back(n);
  }
  std::set<std::size_t> boundaries{devices.size()};
  for (int h = 1; h <= depth; ++h) {
    for (auto& c : cursor) c = nodes[c].parent;
    std::unordered_map<int, std::size_t> population;
    for (int c : cursor) ++population[c];
    const std::size_t group = population.begin()->second;
    for (const auto& [ancestor, count] : population) {
      if (count != group) return std::nullopt;
    }
    if (group > 1) boundaries.insert(group);
  }
  return boundaries;
}

std::vector<std::string> dfs_sorted(const Topology& topology, std::vector<std::string> devices) {
  if (devices.empty()) throw InvalidArgument("plan needs at least one device");
  std::vector<std::pair<std::size_t, std::string>> keyed;
  for (auto& d : devices) keyed.emplace_back(topology.dfs_position(d), std::move(d));
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < keyed.size(); ++i) {
    if (i > 0 && keyed[i].first == keyed[i - 1].first) {
      throw InvalidArgument("device '" + keyed[i].second + "' listed twice");
    }
    out.push_back(std::move(keyed[i].second));
  }
  return out;
}

}  // namespace

std::vector<std::vector<std::size_t>> candidate_factorizations(
    const Topology& topology, const std::vector<std::string>& devices, const PlanOptions& options) {
  auto all = factorizations(devices.size(), options.max_dims);
  if (options.alignment == Alignment::exhaustive) return all;
  const auto boundaries = tier_boundaries(topology, devices);
  if (!boundaries) return all;
  std::vector<std::vector<std::size_t>> aligned;
  for (const auto& f : all) {
    std::size_t product = 1;
    bool ok = true;
    for (std::size_t d : f) {
      product *= d;
      ok = ok && (product == 1 || boundaries->contains(product));
    }
    if (ok) aligned.push_back(f);
  }
  return aligned;
}

Plan make_plan(std::vector<std::string> devices, double size_gb, Decomposition decomposition,
               std::size_t bytes_per_element) {
  if (bytes_per_element == 0) throw InvalidArgument("bytes_per_element must be positive");
  if (!(size_gb >= 0.0)) throw InvalidArgument("payload size must be non-negative");
  Plan p;
  p.grid = build_grid(devices.size(), decomposition.sizes());
  p.devices = std::move(devices);
  p.size_gb = size_gb;
  p.bytes_per_element = bytes_per_element;
  p.estimate = multiring_time(size_gb, decomposition.costs());
  p.decomposition = std::move(decomposition);
  const auto elements =
      static_cast<std::size_t>(std::llround(size_gb * 1e9 / static_cast<double>(bytes_per_element)));
  p.schedule = multiring_schedule(p.grid, elements);
  return p;
}

Plan make_plan(const Topology& topology, std::vector<std::string> devices, double size_gb,
               const std::vector<std::size_t>& sizes, const PlanOptions& options) {
  devices = dfs_sorted(topology, std::move(devices));
  auto decomposition = bind_decomposition(topology, devices, sizes, options.latency_override);
  return make_plan(std::move(devices), size_gb, std::move(decomposition),
                   options.bytes_per_element);
}

Plan plan(const Topology& topology, std::vector<std::string> devices, double size_gb,
          const PlanOptions& options) {
  devices = dfs_sorted(topology, std::move(devices));
  std::optional<Decomposition> best;
  double best_total = 0.0;
  for (const auto& sizes : candidate_factorizations(topology, devices, options)) {
    auto decomposition = bind_decomposition(topology, devices, sizes, options.latency_override);
    const double total = multiring_time(size_gb, decomposition.costs()).total;
    bool better = !best;
    if (best) {
      const double tolerance = 1e-12 * std::max(std::abs(total), std::abs(best_total));
      if (total < best_total - tolerance) {
        better = true;
      } else if (total <= best_total + tolerance) {
        const auto current = best->sizes();
        better = sizes.size() < current.size() ||
                 (sizes.size() == current.size() && sizes < current);
      }
    }
    if (better) {
      best = std::move(decomposition);
      best_total = total;
    }
  }
  return make_plan(std::move(devices), size_gb, std::move(*best), options.bytes_per_element);
}

std::string plan_to_json(const Plan& plan) {
  json doc;
  doc["format"] = "ddlring-plan";
  doc["version"] = 1;
  doc["ranks"] = plan.devices.size();
  doc["size_gb"] = plan.size_gb;
  doc["bytes_per_element"] = plan.bytes_per_element;
  doc["element_count"] = plan.element_count();
  doc["devices"] = plan.devices;
  doc["dims"] = json::array();
  for (std::size_t i = 0; i < plan.decomposition.dims.size(); ++i) {
    const auto& d = plan.decomposition.dims[i];
    const auto& e = plan.estimate.per_dimension[i];
    doc["dims"].push_back({{"size", d.size},
                           {"level", d.level},
                           {"bandwidth_gbps", d.bandwidth_gbps},
                           {"latency_s", d.latency_s},
                           {"phases", e.phases},
                           {"seconds", e.seconds}});
  }
  doc["phases"] = plan.estimate.phases;
  doc["total_s"] = plan.estimate.total;
  doc["bottleneck_bandwidth_gbps"] = plan.estimate.bottleneck_bandwidth;
  return doc.dump(2) + "\n";
}

Plan plan_from_json(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("plan is not valid JSON: ") + e.what());
  }
  try {
    if (doc.value("format", "") != "ddlring-plan") {
      throw InvalidArgument("not a ddlring plan document");
    }
    Decomposition decomposition;
    for (const auto& d : doc.at("dims")) {
      decomposition.dims.push_back({d.at("size").get<std::size_t>(),
                                    d.at("level").get<std::string>(),
                                    d.at("bandwidth_gbps").get<double>(),
                                    d.at("latency_s").get<double>()});
    }
    auto devices = doc.at("devices").get<std::vector<std::string>>();
    if (devices.size() != decomposition.ranks()) {
      throw InvalidArgument("plan lists " + std::to_string(devices.size()) +
                            " devices but its dims cover " +
                            std::to_string(decomposition.ranks()) + " ranks");
    }
    return make_plan(std::move(devices), doc.at("size_gb").get<double>(),
                     std::move(decomposition), doc.value("bytes_per_element", std::size_t{4}));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed plan: ") + e.what());
  }
}

std::uint64_t plan_hash(const std::vector<std::size_t>& sizes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  mix(sizes.size());
  for (std::size_t s : sizes) mix(s);
  return h;
}

std::string format_dims(const std::vector<std::size_t>& sizes) {
  std::string out;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i > 0) out += 'x';
    out += std::to_string(sizes[i]);
  }
  return out;
}

std::vector<std::size_t> parse_dims(std::string_view text) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find_first_of("x,", start), text.size());
    const std::string_view part = text.substr(start, end - start);
    if (part.empty() || part.find_first_not_of("0123456789") != std::string_view::npos) {
      throw InvalidArgument("bad dimension list '" + std::string(text) + "'");
    }
    const std::size_t value = std::stoul(std::string(part));
    if (value == 0) throw InvalidArgument("dimension sizes must be positive");
    out.push_back(value);
    start = end + 1;
  }
  return out;
}

}  // namespace ddl
