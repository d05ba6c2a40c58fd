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

#include "ddl/ring.h"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "ddl/error.h"

namespace ddl {

RingOrder::RingOrder(std::vector<std::string> devices) : devices_(std::move(devices)) {
  positions_.resize(devices_.size());
  std::iota(positions_.begin(), positions_.end(), 0);
}

RingOrder::RingOrder(std::vector<int> positions, std::vector<std::string> devices)
    : positions_(std::move(positions)), devices_(std::move(devices)) {
  if (positions_.size() != devices_.size()) {
    throw InvalidArgument("ring order and device mapping differ in size");
  }
  std::vector<bool> seen(positions_.size(), false);
  for (int r : positions_) {
    if (r < 0 || static_cast<std::size_t>(r) >= positions_.size() || seen[r]) {
      throw InvalidArgument("ring positions must be a permutation of the ranks");
    }
    seen[r] = true;
  }
}

std::vector<std::string> RingOrder::ring_devices() const {
  std::vector<std::string> out;
  out.reserve(positions_.size());
  for (int r : positions_) out.push_back(devices_[r]);
  return out;
}

ChunkBounds chunk_bounds(std::size_t element_count, std::size_t n_chunks, std::size_t index) {
  if (n_chunks == 0) throw InvalidArgument("chunk count must be at least 1");
  if (index >= n_chunks) {
    throw InvalidArgument("chunk index " + std::to_string(index) + " out of range for " +
                          std::to_string(n_chunks) + " chunks");
  }
  const std::size_t base = element_count / n_chunks;
  const std::size_t extra = element_count % n_chunks;
  return {index * base + std::min(index, extra), base + (index < extra ? 1 : 0)};
}

void append_ring_pass(std::span<Phase> phases, std::span<const int> members, ChunkBounds region,
                      Combine combine) {
  const std::size_t d = members.size();
  if (d < 2) return;
  if (phases.size() != d - 1) throw InvalidArgument("ring pass needs exactly d - 1 phases");
  // Ownership after the reduce-scatter is (i + 1) mod d; the allgather starts
  // from it, so its chunk index is shifted by one.
  const std::size_t shift = combine == Combine::add ? 0 : 1;
  for (std::size_t j = 0; j + 1 < d; ++j) {
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t chunk = (i + shift + d - j) % d;
      const ChunkBounds b = chunk_bounds(region.length, d, chunk);
      phases[j].transfers.push_back(
          {members[i], members[(i + 1) % d], chunk, region.offset + b.offset, b.length, combine});
    }
  }
}

namespace {

Schedule single_ring(const RingOrder& order, std::size_t element_count, Combine combine) {
  if (order.size() == 0) throw InvalidArgument("ring must have at least one rank");
  Schedule s;
  s.ranks = order.size();
  s.element_count = element_count;
  s.kind = combine == Combine::add ? ScheduleKind::reduce_scatter : ScheduleKind::allgather;
  s.phases.resize(order.size() - 1);
  append_ring_pass(s.phases, order.positions(), {0, element_count}, combine);
  return s;
}

}  // namespace

Schedule reduce_scatter_schedule(const RingOrder& order, std::size_t element_count) {
  return single_ring(order, element_count, Combine::add);
}

Schedule allgather_schedule(const RingOrder& order, std::size_t element_count) {
  return single_ring(order, element_count, Combine::replace);
}

RingOrder order_ranks_on_tree(const Topology& topology, const std::vector<std::string>& devices) {
  std::vector<int> positions(devices.size());
  std::iota(positions.begin(), positions.end(), 0);
  std::vector<std::size_t> key;
  key.reserve(devices.size());
  for (const auto& d : devices) key.push_back(topology.dfs_position(d));
  std::stable_sort(positions.begin(), positions.end(),
                   [&](int a, int b) { return key[a] < key[b]; });
  for (std::size_t i = 1; i < positions.size(); ++i) {
    if (key[positions[i]] == key[positions[i - 1]]) {
      throw InvalidArgument("device '" + devices[positions[i]] + "' listed twice");
    }
  }
  return RingOrder(std::move(positions), devices);
}

std::map<LinkUse, int> phase_link_usage(const Topology& topology, const Phase& phase,
                                        const RingOrder& order) {
  std::map<LinkUse, int> usage;
  for (const auto& t : phase.transfers) {
    for (const auto& use : topology.route(order.device_of(t.src), order.device_of(t.dst))) {
      ++usage[use];
    }
  }
  return usage;
}

std::string_view to_string(Combine combine) {
  return combine == Combine::add ? "add" : "replace";
}

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::reduce_scatter:
      return "reduce_scatter";
    case ScheduleKind::allgather:
      return "allgather";
    case ScheduleKind::composite:
      return "composite";
  }
  return "?";
}

void write_schedule(std::ostream& out, const Schedule& schedule) {
  for (std::size_t p = 0; p < schedule.phases.size(); ++p) {
    for (const auto& t : schedule.phases[p].transfers) {
      out << p << ' ' << t.src << ' ' << t.dst << ' ' << t.chunk << ' ' << t.offset << ' '
          << t.length << ' ' << to_string(t.combine) << '\n';
    }
  }
}

}  // namespace ddl
