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

#ifndef DDL_RUNTIME_H_
#define DDL_RUNTIME_H_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "ddl/ddl_object.h"
#include "ddl/multiring.h"
#include "ddl/ring.h"
#include "ddl/socket.h"
#include "ddl/wire.h"

namespace ddl {

struct TrafficCounters {
  std::uint64_t payload_bytes_sent = 0;
  std::uint64_t payload_bytes_received = 0;
  std::uint64_t header_bytes_sent = 0;
  std::uint64_t frames_sent = 0;
};

// Ranks this rank exchanges data with under the grid's composite schedule.
std::vector<int> schedule_neighbors(const Grid& grid, int rank);

// Per-rank executor state. Owns one connection per schedule neighbor; the
// buffers passed to the collectives are used exclusively by this context for
// the duration of the call.
class RankContext {
 public:
  RankContext(int rank, Grid grid, std::map<int, Socket> peers,
              std::chrono::milliseconds phase_timeout = std::chrono::seconds(30));

  int rank() const { return rank_; }
  std::size_t size() const { return grid_.ranks(); }
  const Grid& grid() const { return grid_; }
  const TrafficCounters& counters() const { return counters_; }
  void reset_counters() { counters_ = {}; }

  // Readable data on this descriptor while a phase is in flight aborts the
  // collective (used for the coordinator's control channel).
  void set_control_fd(int fd) { control_fd_ = fd; }
  // Invoked before each phase with the phase index.
  void set_phase_hook(std::function<void(std::size_t)> hook) { phase_hook_ = std::move(hook); }

  // Composite schedule for `element_count` elements, cached.
  const Schedule& schedule(std::size_t element_count);
  // Phases [first, last) of the cached schedule, executed on `obj`.
  void run_phases(DdlObject& obj, std::size_t first, std::size_t last);

 private:
  struct Step {
    std::optional<Transfer> send;
    std::optional<Transfer> recv;
  };
  void run_phase(DdlObject& obj, std::size_t phase, const Step& step);

  int rank_;
  Grid grid_;
  std::map<int, Socket> peers_;
  std::chrono::milliseconds phase_timeout_;
  int control_fd_ = -1;
  std::function<void(std::size_t)> phase_hook_;
  TrafficCounters counters_;
  std::optional<Schedule> schedule_;
  std::vector<Step> steps_;
  std::vector<std::byte> staging_;
};

// Each rank's region `owned_region(grid, n, rank)` ends up holding the sum of
// all ranks' original values over that region. Returns that region.
ChunkBounds reduce_scatter(RankContext& ctx, DdlObject& obj);
// Requires the ownership left by reduce_scatter; every rank ends up with the
// fully reduced vector.
DdlObject& allgather(RankContext& ctx, DdlObject& obj);
DdlObject& allreduce(RankContext& ctx, DdlObject& obj);

// Exchanges PeerHello messages over a fresh connection; throws
// CollectiveError on any disagreement.
wire::PeerHello exchange_hello(const Socket& socket, const wire::PeerHello& mine,
                               int expected_rank, Clock::time_point deadline);

// Contexts for every rank of `grid`, wired together with in-process socket
// pairs. Each context must be driven from its own thread.
std::vector<RankContext> make_local_contexts(
    const Grid& grid, std::chrono::milliseconds phase_timeout = std::chrono::seconds(30));

}  // namespace ddl

#endif  // DDL_RUNTIME_H_
