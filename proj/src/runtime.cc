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

#include "ddl/runtime.h"

#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <set>

#include "ddl/error.h"

namespace ddl {

std::vector<int> schedule_neighbors(const Grid& grid, int rank) {
  std::set<int> out;
  for (std::size_t dim = 0; dim < grid.dims().size(); ++dim) {
    const std::size_t d = grid.dims()[dim];
    if (d < 2) continue;
    const auto ring = grid.ring(static_cast<std::size_t>(rank), dim);
    const auto pos = static_cast<std::size_t>(
        std::find(ring.begin(), ring.end(), rank) - ring.begin());
    out.insert(ring[(pos + 1) % d]);
    out.insert(ring[(pos + d - 1) % d]);
  }
  return {out.begin(), out.end()};
}

RankContext::RankContext(int rank, Grid grid, std::map<int, Socket> peers,
                         std::chrono::milliseconds phase_timeout)
    : rank_(rank), grid_(std::move(grid)), peers_(std::move(peers)), phase_timeout_(phase_timeout) {
  if (rank < 0 || static_cast<std::size_t>(rank) >= grid_.ranks()) {
    throw InvalidArgument("rank " + std::to_string(rank) + " outside grid");
  }
  for (int n : schedule_neighbors(grid_, rank_)) {
    if (!peers_.contains(n)) {
      throw InvalidArgument("rank " + std::to_string(rank_) + " has no connection to neighbor " +
                            std::to_string(n));
    }
  }
  for (auto& [r, s] : peers_) s.set_nonblocking(true);
}

const Schedule& RankContext::schedule(std::size_t element_count) {
  if (!schedule_ || schedule_->element_count != element_count) {
    schedule_ = multiring_schedule(grid_, element_count);
    steps_.assign(schedule_->phases.size(), Step{});
    for (std::size_t p = 0; p < schedule_->phases.size(); ++p) {
      for (const auto& t : schedule_->phases[p].transfers) {
        if (t.src == rank_) steps_[p].send = t;
        if (t.dst == rank_) steps_[p].recv = t;
      }
    }
  }
  return *schedule_;
}

void RankContext::run_phases(DdlObject& obj, std::size_t first, std::size_t last) {
  schedule(obj.size());
  for (std::size_t p = first; p < last; ++p) run_phase(obj, p, steps_[p]);
}

namespace {

template <typename T>
void accumulate(std::span<std::byte> dst, std::span<const std::byte> src) {
  const std::size_t n = src.size() / sizeof(T);
  for (std::size_t i = 0; i < n; ++i) {
    T a;
    T b;
    std::memcpy(&a, dst.data() + i * sizeof(T), sizeof(T));
    std::memcpy(&b, src.data() + i * sizeof(T), sizeof(T));
    if constexpr (std::is_integral_v<T>) {
      // Two's complement wrap instead of signed overflow.
      a = static_cast<T>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
    } else {
      a += b;
    }
    std::memcpy(dst.data() + i * sizeof(T), &a, sizeof(T));
  }
}

void combine_into(DType dtype, Combine combine, std::span<std::byte> dst,
                  std::span<const std::byte> src) {
  if (combine == Combine::replace) {
    std::copy(src.begin(), src.end(), dst.begin());
    return;
  }
  switch (dtype) {
    case DType::f32:
      accumulate<float>(dst, src);
      break;
    case DType::f64:
      accumulate<double>(dst, src);
      break;
    case DType::i64:
      accumulate<std::int64_t>(dst, src);
      break;
  }
}

}  // namespace

void RankContext::run_phase(DdlObject& obj, std::size_t phase, const Step& step) {
  if (phase_hook_) phase_hook_(phase);
  const std::size_t esize = element_size(obj.dtype());
  const int p = static_cast<int>(phase);

  int send_fd = -1;
  int send_peer = -1;
  std::array<std::byte, wire::kFrameHeaderSize> send_header{};
  std::span<const std::byte> send_payload;
  std::size_t sent = 0;
  std::size_t send_total = 0;
  if (step.send) {
    send_peer = step.send->dst;
    send_fd = peers_.at(send_peer).fd();
    send_payload = obj.bytes().subspan(step.send->offset * esize, step.send->length * esize);
    send_header = wire::encode(wire::FrameHeader{wire::kFrameMagic, static_cast<std::uint32_t>(phase),
                                                 static_cast<std::uint32_t>(step.send->chunk),
                                                 send_payload.size()});
    send_total = send_header.size() + send_payload.size();
  }

  int recv_fd = -1;
  int recv_peer = -1;
  std::array<std::byte, wire::kFrameHeaderSize> recv_header{};
  std::size_t received = 0;
  std::size_t recv_total = 0;
  if (step.recv) {
    recv_peer = step.recv->src;
    recv_fd = peers_.at(recv_peer).fd();
    staging_.resize(step.recv->length * esize);
    recv_total = recv_header.size() + staging_.size();
  }

  const auto deadline = Clock::now() + phase_timeout_;
  while (sent < send_total || received < recv_total) {
    std::vector<pollfd> fds;
    const bool want_send = sent < send_total;
    const bool want_recv = received < recv_total;
    if (want_send && want_recv && send_fd == recv_fd) {
      fds.push_back({send_fd, POLLIN | POLLOUT, 0});
    } else {
      if (want_send) fds.push_back({send_fd, POLLOUT, 0});
      if (want_recv) fds.push_back({recv_fd, POLLIN, 0});
    }
    if (control_fd_ >= 0) fds.push_back({control_fd_, POLLIN, 0});

    const auto left =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    const int ready = ::poll(fds.data(), fds.size(), static_cast<int>(std::max<long long>(left, 0)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw CollectiveError(std::string("poll failed: ") + std::strerror(errno), -1, p);
    }
    if (ready == 0) {
      const int waiting_on = want_recv ? recv_peer : send_peer;
      throw CollectiveError("phase " + std::to_string(phase) + " timed out waiting for rank " +
                                std::to_string(waiting_on),
                            waiting_on, p);
    }
    for (const auto& f : fds) {
      if (f.revents == 0) continue;
      if (f.fd == control_fd_) {
        throw CollectiveAborted("collective aborted by coordinator", -1, p);
      }
      if (f.fd == send_fd && sent < send_total && (f.revents & (POLLOUT | POLLERR | POLLHUP))) {
        while (sent < send_total) {
          const bool in_header = sent < send_header.size();
          const std::byte* data =
              in_header ? send_header.data() + sent : send_payload.data() + (sent - send_header.size());
          const std::size_t count =
              in_header ? send_header.size() - sent : send_total - sent;
          const ssize_t n = ::send(send_fd, data, count, MSG_NOSIGNAL);
          if (n > 0) {
            sent += static_cast<std::size_t>(n);
            continue;
          }
          if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR)) break;
          throw CollectiveError("rank " + std::to_string(send_peer) + " disconnected in phase " +
                                    std::to_string(phase),
                                send_peer, p);
        }
      }
      if (f.fd == recv_fd && received < recv_total && (f.revents & (POLLIN | POLLERR | POLLHUP))) {
        while (received < recv_total) {
          const bool in_header = received < recv_header.size();
          std::byte* data = in_header ? recv_header.data() + received
                                      : staging_.data() + (received - recv_header.size());
          const std::size_t count =
              in_header ? recv_header.size() - received : recv_total - received;
          const ssize_t n = ::recv(recv_fd, data, count, 0);
          if (n > 0) {
            received += static_cast<std::size_t>(n);
            if (received == recv_header.size()) {
              const auto h = wire::decode_frame_header(recv_header);
              if (h.magic != wire::kFrameMagic || h.phase != phase || h.chunk != step.recv->chunk ||
                  h.byte_length != staging_.size()) {
                throw CollectiveError(
                    "unexpected frame from rank " + std::to_string(recv_peer) + " in phase " +
                        std::to_string(phase) + " (phase " + std::to_string(h.phase) + ", chunk " +
                        std::to_string(h.chunk) + ", " + std::to_string(h.byte_length) + " bytes)",
                    recv_peer, p);
              }
            }
            continue;
          }
          if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR)) break;
          throw CollectiveError("rank " + std::to_string(recv_peer) + " disconnected in phase " +
                                    std::to_string(phase),
                                recv_peer, p);
        }
      }
    }
  }

  if (step.send) {
    counters_.payload_bytes_sent += send_payload.size();
    counters_.header_bytes_sent += send_header.size();
    ++counters_.frames_sent;
  }
  if (step.recv) {
    counters_.payload_bytes_received += staging_.size();
    combine_into(obj.dtype(), step.recv->combine,
                 obj.bytes().subspan(step.recv->offset * esize, staging_.size()), staging_);
  }
}

ChunkBounds reduce_scatter(RankContext& ctx, DdlObject& obj) {
  const auto half = ctx.schedule(obj.size()).phases.size() / 2;
  ctx.run_phases(obj, 0, half);
  return owned_region(ctx.grid(), obj.size(), static_cast<std::size_t>(ctx.rank()));
}

DdlObject& allgather(RankContext& ctx, DdlObject& obj) {
  const auto total = ctx.schedule(obj.size()).phases.size();
  ctx.run_phases(obj, total / 2, total);
  return obj;
}

DdlObject& allreduce(RankContext& ctx, DdlObject& obj) {
  reduce_scatter(ctx, obj);
  return allgather(ctx, obj);
}

wire::PeerHello exchange_hello(const Socket& socket, const wire::PeerHello& mine,
                               int expected_rank, Clock::time_point deadline) {
  const auto out = wire::encode(mine);
  std::array<std::byte, wire::kHelloSize> in{};
  try {
    write_all(socket, out, deadline);
    read_exact(socket, in, deadline);
  } catch (const Error& e) {
    throw CollectiveError("handshake with rank " + std::to_string(expected_rank) +
                              " failed: " + e.what(),
                          expected_rank);
  }
  const auto theirs = wire::decode_hello(in);
  std::string problem;
  if (theirs.magic != wire::kHelloMagic) {
    problem = "bad magic";
  } else if (expected_rank >= 0 && theirs.rank != static_cast<std::uint32_t>(expected_rank)) {
    problem = "expected rank " + std::to_string(expected_rank) + ", got " +
              std::to_string(theirs.rank);
  } else if (theirs.plan_hash != mine.plan_hash) {
    problem = "plan mismatch";
  } else if (theirs.dtype != mine.dtype) {
    problem = "element type mismatch";
  } else if (theirs.length != mine.length) {
    problem = "length mismatch (" + std::to_string(theirs.length) + " vs " +
              std::to_string(mine.length) + ")";
  }
  if (!problem.empty()) {
    throw CollectiveError("handshake with rank " + std::to_string(theirs.rank) + ": " + problem,
                          static_cast<int>(theirs.rank));
  }
  return theirs;
}

std::vector<RankContext> make_local_contexts(const Grid& grid,
                                             std::chrono::milliseconds phase_timeout) {
  const int n = static_cast<int>(grid.ranks());
  std::vector<std::map<int, Socket>> peers(n);
  for (int r = 0; r < n; ++r) {
    for (int s : schedule_neighbors(grid, r)) {
      if (s <= r) continue;
      int fds[2];
      if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
        throw Error(std::string("socketpair: ") + std::strerror(errno));
      }
      peers[r].emplace(s, Socket(fds[0]));
      peers[s].emplace(r, Socket(fds[1]));
    }
  }
  std::vector<RankContext> out;
  out.reserve(n);
  for (int r = 0; r < n; ++r) out.emplace_back(r, grid, std::move(peers[r]), phase_timeout);
  return out;
}

}  // namespace ddl
