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

#ifndef DDL_RING_H_
#define DDL_RING_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ddl/topology.h"

namespace ddl {

enum class Combine : std::uint8_t { add, replace };

// Moves elements [offset, offset + length) of the sender's buffer to the same
// range on the receiver, which either accumulates or overwrites.
struct Transfer {
  int src = 0;
  int dst = 0;
  std::size_t chunk = 0;
  std::size_t offset = 0;
  std::size_t length = 0;
  Combine combine = Combine::add;

  friend bool operator==(const Transfer&, const Transfer&) = default;
};

// A set of concurrent transfers followed by a global barrier.
struct Phase {
  std::vector<Transfer> transfers;
  // Grid dimension the phase belongs to (0 for single rings).
  std::size_t dimension = 0;

  friend bool operator==(const Phase&, const Phase&) = default;
};

enum class ScheduleKind { reduce_scatter, allgather, composite };

struct Schedule {
  std::size_t ranks = 0;
  std::size_t element_count = 0;
  ScheduleKind kind = ScheduleKind::composite;
  std::vector<Phase> phases;

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

// Ring positions and the rank <-> device mapping. Rank ids are 0..N-1; the
// ring visits ranks in `positions` order and rank r lives on device_of(r).
class RingOrder {
 public:
  RingOrder() = default;
  // Rank i is devices[i]; the ring visits ranks in ascending order.
  explicit RingOrder(std::vector<std::string> devices);
  RingOrder(std::vector<int> positions, std::vector<std::string> devices);

  std::size_t size() const { return positions_.size(); }
  const std::vector<int>& positions() const { return positions_; }
  const std::vector<std::string>& devices() const { return devices_; }
  const std::string& device_of(int rank) const { return devices_.at(rank); }
  // Devices listed in ring order.
  std::vector<std::string> ring_devices() const;

 private:
  std::vector<int> positions_;
  std::vector<std::string> devices_;
};

struct ChunkBounds {
  std::size_t offset = 0;
  std::size_t length = 0;

  friend bool operator==(const ChunkBounds&, const ChunkBounds&) = default;
};

// Chunk `index` of a contiguous split of `element_count` elements into
// `n_chunks` pieces; the first element_count % n_chunks chunks get one extra.
ChunkBounds chunk_bounds(std::size_t element_count, std::size_t n_chunks, std::size_t index);

// Appends one ring pass over `region` to `phases`, which must hold
// members.size() - 1 phases. Reduce-scatter (Combine::add): in phase j,
// position i sends chunk (i - j) mod d to position i + 1, leaving position i
// with the reduced chunk (i + 1) mod d. Allgather (Combine::replace): position
// i sends chunk (i + 1 - j) mod d, assuming that ownership.
void append_ring_pass(std::span<Phase> phases, std::span<const int> members, ChunkBounds region,
                      Combine combine);

Schedule reduce_scatter_schedule(const RingOrder& order, std::size_t element_count);
Schedule allgather_schedule(const RingOrder& order, std::size_t element_count);

// Orders `devices` by the tree's depth-first leaf traversal. Rank i remains
// devices[i]; only the ring positions change.
RingOrder order_ranks_on_tree(const Topology& topology, const std::vector<std::string>& devices);

// Number of concurrent transfers per directed link in one phase.
std::map<LinkUse, int> phase_link_usage(const Topology& topology, const Phase& phase,
                                        const RingOrder& order);

// One line per transfer: `phase src dst chunk offset length combine`.
void write_schedule(std::ostream& out, const Schedule& schedule);
std::string_view to_string(Combine combine);
std::string_view to_string(ScheduleKind kind);

}  // namespace ddl

#endif  // DDL_RING_H_
