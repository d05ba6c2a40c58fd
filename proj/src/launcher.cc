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

#include "ddl/launcher.h"

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>
#include <poll.h>
#include <sys/socket.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <map>
#include <set>

#include "json.hpp"

#include "ddl/error.h"

namespace ddl {

using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitAborted = 4;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Control messages: u32 little-endian length, then a JSON document.
void send_message(const Socket& socket, const json& message, Clock::time_point deadline) {
  const std::string body = message.dump();
  std::vector<std::byte> frame(4 + body.size());
  const auto n = static_cast<std::uint32_t>(body.size());
  for (int i = 0; i < 4; ++i) frame[i] = static_cast<std::byte>((n >> (8 * i)) & 0xff);
  std::memcpy(frame.data() + 4, body.data(), body.size());
  write_all(socket, frame, deadline);
}

json read_message(const Socket& socket, Clock::time_point deadline) {
  std::array<std::byte, 4> prefix{};
  read_exact(socket, prefix, deadline);
  std::uint32_t n = 0;
  for (int i = 0; i < 4; ++i) n |= static_cast<std::uint32_t>(prefix[i]) << (8 * i);
  std::string body(n, '\0');
  read_exact(socket, std::as_writable_bytes(std::span(body)), deadline);
  return json::parse(body);
}

// Incremental reader for the coordinator's non-blocking connections.
struct Connection {
  Socket socket;
  std::vector<std::byte> buffer;
  int rank = -1;
  bool open = true;
  bool finished = false;  // sent a result or an error

  // Reads what is available; returns complete messages. Sets open = false on EOF.
  std::vector<json> drain() {
    std::vector<json> out;
    for (;;) {
      std::byte chunk[65536];
      const ssize_t n = ::recv(socket.fd(), chunk, sizeof chunk, 0);
      if (n > 0) {
        buffer.insert(buffer.end(), chunk, chunk + n);
        continue;
      }
      if (n < 0 && errno == EINTR) continue;
      if (n == 0 || (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK)) open = false;
      break;
    }
    std::size_t pos = 0;
    while (buffer.size() - pos >= 4) {
      std::uint32_t len = 0;
      for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(buffer[pos + i]) << (8 * i);
      if (buffer.size() - pos - 4 < len) break;
      const char* start = reinterpret_cast<const char*>(buffer.data() + pos + 4);
      out.push_back(json::parse(start, start + len));
      pos += 4 + len;
    }
    buffer.erase(buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(pos));
    return out;
  }
};

std::string worker_host(const Address& rendezvous) {
  if (rendezvous.host.empty() || rendezvous.host == "0.0.0.0") return "127.0.0.1";
  return rendezvous.host;
}

int run_worker(int rank, const Grid& grid, const Workload& workload, const Address& coordinator,
               std::chrono::milliseconds timeout) {
  Socket coord;
  try {
    const auto deadline = Clock::now() + timeout;
    Socket listener = listen_tcp({worker_host(coordinator), 0});
    coord = connect_tcp(coordinator, deadline);

    std::size_t length = workload.length;
    if (workload.length_override && workload.length_override->first == rank) {
      length = workload.length_override->second;
    }
    const std::uint64_t hash = plan_hash(grid.dims());
    send_message(coord,
                 {{"type", "hello"},
                  {"rank", rank},
                  {"port", local_port(listener)},
                  {"dtype", to_string(workload.dtype)},
                  {"length", length},
                  {"plan_hash", hash}},
                 deadline);
    json setup = read_message(coord, deadline);
    if (setup.at("type") != "setup") return kExitAborted;

    const auto neighbors = schedule_neighbors(grid, rank);
    const wire::PeerHello mine{wire::kHelloMagic, static_cast<std::uint32_t>(rank), hash,
                               static_cast<std::uint32_t>(workload.dtype), length};
    std::map<int, Socket> peers;
    std::size_t lower = 0;
    for (int n : neighbors) {
      if (n < rank) {
        ++lower;
        continue;
      }
      const auto& peer = setup.at("peers").at(n);
      Socket s = connect_tcp({peer.at("host").get<std::string>(), peer.at("port").get<std::uint16_t>()},
                             deadline);
      exchange_hello(s, mine, n, deadline);
      peers.emplace(n, std::move(s));
    }
    for (std::size_t i = 0; i < lower; ++i) {
      Socket s = accept_connection(listener, deadline);
      const auto theirs = exchange_hello(s, mine, -1, deadline);
      const int from = static_cast<int>(theirs.rank);
      if (from >= rank || peers.contains(from) ||
          std::find(neighbors.begin(), neighbors.end(), from) == neighbors.end()) {
        throw CollectiveError("unexpected connection from rank " + std::to_string(from), from);
      }
      peers.emplace(from, std::move(s));
    }
    listener.close();

    send_message(coord, {{"type", "ready"}, {"rank", rank}}, deadline);
    if (read_message(coord, Clock::now() + timeout).at("type") != "start") return kExitAborted;

    RankContext ctx(rank, grid, std::move(peers), timeout);
    ctx.set_control_fd(coord.fd());
    if (workload.kill_at_phase && workload.kill_at_phase->first == rank) {
      const std::size_t target = workload.kill_at_phase->second;
      ctx.set_phase_hook([target](std::size_t phase) {
        if (phase == target) ::raise(SIGKILL);
      });
    }

    char hostname[256] = "localhost";
    ::gethostname(hostname, sizeof hostname - 1);
    DdlObject obj(workload.dtype, length, Placement{hostname, rank, MemoryKind::emulated_device});
    std::vector<double> times;
    for (int it = 0; it < workload.iterations; ++it) {
      fill_input(obj, workload.seed, rank);
      const auto start = Clock::now();
      allreduce(ctx, obj);
      times.push_back(std::chrono::duration<double>(Clock::now() - start).count());
    }

    const auto& t = ctx.counters();
    json result{{"type", "result"},
                {"rank", rank},
                {"digest", digest(obj.bytes())},
                {"iteration_seconds", times},
                {"traffic",
                 {{"payload_bytes_sent", t.payload_bytes_sent},
                  {"payload_bytes_received", t.payload_bytes_received},
                  {"header_bytes_sent", t.header_bytes_sent},
                  {"frames_sent", t.frames_sent}}}};
    if (workload.collect_results) {
      switch (workload.dtype) {
        case DType::f32: {
          auto v = obj.view<float>();
          result["values"] = std::vector<double>(v.begin(), v.end());
          break;
        }
        case DType::f64: {
          auto v = obj.view<double>();
          result["values"] = std::vector<double>(v.begin(), v.end());
          break;
        }
        case DType::i64: {
          auto v = obj.view<std::int64_t>();
          result["integer_values"] = std::vector<std::int64_t>(v.begin(), v.end());
          break;
        }
      }
    }
    send_message(coord, result, Clock::now() + timeout);
    try {
      read_message(coord, Clock::now() + timeout);
    } catch (const Error&) {
    }
    return kExitOk;
  } catch (const CollectiveAborted&) {
    return kExitAborted;
  } catch (const std::exception& e) {
    const auto* ce = dynamic_cast<const CollectiveError*>(&e);
    if (coord) {
      try {
        send_message(coord,
                     {{"type", "error"},
                      {"rank", rank},
                      {"peer", ce ? ce->rank() : -1},
                      {"phase", ce ? ce->phase() : -1},
                      {"message", e.what()}},
                     Clock::now() + std::chrono::seconds(2));
      } catch (const std::exception&) {
      }
    }
    return kExitError;
  }
}

struct ErrorReport {
  int reporter = -1;
  int peer = -1;
  int phase = -1;
  std::string message;
};

}  // namespace

void fill_input(DdlObject& obj, std::uint64_t seed, int rank) {
  const std::uint64_t base = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(rank) + 1));
  auto draw = [base](std::size_t i) { return splitmix64(base + i); };
  switch (obj.dtype()) {
    case DType::f32: {
      auto v = obj.view<float>();
      for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = static_cast<float>(draw(i) >> 40) * 0x1.0p-24f;
      }
      break;
    }
    case DType::f64: {
      auto v = obj.view<double>();
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(draw(i) >> 11) * 0x1.0p-53;
      break;
    }
    case DType::i64: {
      auto v = obj.view<std::int64_t>();
      for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = static_cast<std::int64_t>(draw(i) >> 24) - (std::int64_t{1} << 39);
      }
      break;
    }
  }
}

LaunchReport launch(std::size_t ranks, const std::vector<std::size_t>& dims,
                    const Workload& workload, const LaunchOptions& options) {
  const Grid grid = build_grid(ranks, dims);
  if (workload.iterations < 1) throw InvalidArgument("iterations must be at least 1");
  Address address = parse_address(options.rendezvous);
  Socket listener = listen_tcp(address);
  address.port = local_port(listener);
  const Address coordinator{worker_host(address), address.port};

  LaunchReport report;
  report.rendezvous = coordinator.to_string();

  std::map<pid_t, int> rank_of_pid;
  std::map<int, int> exit_status;  // rank -> raw wait status
  auto kill_all = [&] {
    for (const auto& [pid, r] : rank_of_pid) {
      if (!exit_status.contains(r)) ::kill(pid, SIGKILL);
    }
  };
  auto reap = [&](bool block) {
    for (const auto& [pid, r] : rank_of_pid) {
      if (exit_status.contains(r)) continue;
      int status = 0;
      const pid_t done = ::waitpid(pid, &status, block ? 0 : WNOHANG);
      if (done == pid) exit_status[r] = status;
    }
  };

  for (std::size_t r = 0; r < ranks; ++r) {
    const pid_t pid = ::fork();
    if (pid < 0) {
      const std::string why = std::strerror(errno);
      kill_all();
      reap(true);
      throw Error("failed to spawn worker " + std::to_string(r) + ": " + why);
    }
    if (pid == 0) {
      listener.close();
      ::_exit(run_worker(static_cast<int>(r), grid, workload, coordinator, options.timeout));
    }
    rank_of_pid.emplace(pid, static_cast<int>(r));
  }

  std::vector<Connection> conns;
  std::map<int, json> hellos;
  std::set<int> ready;
  std::map<int, RankReport> results;
  std::vector<ErrorReport> errors;
  std::optional<LaunchFailure> failure;
  bool aborted = false;
  bool done_sent = false;
  auto idle_deadline = Clock::now() + options.timeout;
  std::optional<Clock::time_point> drain_deadline;

  auto broadcast = [&](const json& message) {
    for (auto& c : conns) {
      if (!c.open) continue;
      try {
        send_message(c.socket, message, Clock::now() + std::chrono::seconds(2));
      } catch (const Error&) {
      }
    }
  };
  auto abort_all = [&](LaunchFailure f) {
    if (!failure) failure = std::move(f);
    if (!aborted) {
      aborted = true;
      broadcast({{"type", "abort"}, {"reason", failure->message}});
      drain_deadline = Clock::now() + std::min<std::chrono::milliseconds>(options.timeout,
                                                                          std::chrono::seconds(5));
    }
  };

  auto handle = [&](Connection& c, const json& m) {
    const std::string type = m.at("type");
    if (type == "hello") {
      c.rank = m.at("rank").get<int>();
      hellos[c.rank] = m;
      if (hellos.size() == ranks && !aborted) {
        const json& ref = hellos.at(0);
        for (const auto& [r, h] : hellos) {
          std::string kind;
          if (h.at("plan_hash") != ref.at("plan_hash")) kind = "plan_mismatch";
          if (h.at("dtype") != ref.at("dtype")) kind = "dtype_mismatch";
          if (h.at("length") != ref.at("length")) kind = "length_mismatch";
          if (!kind.empty()) {
            abort_all({kind, r, -1,
                       kind.substr(0, kind.find('_')) + " mismatch: rank " + std::to_string(r) +
                           " has " + h.at(kind == "length_mismatch" ? "length" : "dtype").dump() +
                           ", rank 0 has " +
                           ref.at(kind == "length_mismatch" ? "length" : "dtype").dump(),
                       0});
            return;
          }
        }
        json peers = json::array();
        for (std::size_t r = 0; r < ranks; ++r) {
          peers.push_back({{"host", coordinator.host}, {"port", hellos.at(r).at("port")}});
        }
        broadcast({{"type", "setup"}, {"peers", peers}});
      }
    } else if (type == "ready") {
      ready.insert(m.at("rank").get<int>());
      if (ready.size() == ranks && !aborted) broadcast({{"type", "start"}});
    } else if (type == "result") {
      c.finished = true;
      RankReport r;
      r.rank = m.at("rank");
      r.digest = m.at("digest");
      r.iteration_seconds = m.at("iteration_seconds").get<std::vector<double>>();
      const auto& t = m.at("traffic");
      r.traffic = {t.at("payload_bytes_sent"), t.at("payload_bytes_received"),
                   t.at("header_bytes_sent"), t.at("frames_sent")};
      if (m.contains("values")) r.values = m["values"].get<std::vector<double>>();
      if (m.contains("integer_values")) {
        r.integer_values = m["integer_values"].get<std::vector<std::int64_t>>();
      }
      results[r.rank] = std::move(r);
      if (results.size() == ranks && !aborted) {
        broadcast({{"type", "done"}});
        done_sent = true;
      }
    } else if (type == "error") {
      c.finished = true;
      errors.push_back({m.at("rank"), m.at("peer"), m.at("phase"), m.at("message")});
      abort_all({"worker_error", -1, -1, m.at("message"), 0});
    }
  };

  for (;;) {
    reap(false);
    if (exit_status.size() == ranks) break;
    if (!aborted && !done_sent) {
      for (const auto& [r, status] : exit_status) {
        const bool clean = WIFEXITED(status) && WEXITSTATUS(status) == kExitOk;
        if (!clean && !results.contains(r)) {
          abort_all({"worker_crash", r, -1, "worker " + std::to_string(r) + " exited", 0});
          break;
        }
      }
    }
    const auto now = Clock::now();
    if (drain_deadline && now >= *drain_deadline) break;
    if (!aborted && !done_sent && now >= idle_deadline) {
      abort_all({"timeout", -1, -1, "no progress within the rendezvous timeout", 0});
      continue;
    }
    if (done_sent && now >= idle_deadline) break;

    std::vector<pollfd> fds;
    if (conns.size() < ranks) fds.push_back({listener.fd(), POLLIN, 0});
    for (auto& c : conns) {
      if (c.open) fds.push_back({c.socket.fd(), POLLIN, 0});
    }
    const int ready_count = ::poll(fds.data(), fds.size(), 20);
    if (ready_count <= 0) continue;
    for (const auto& f : fds) {
      if (f.revents == 0) continue;
      if (f.fd == listener.fd()) {
        Socket s(::accept4(listener.fd(), nullptr, nullptr, SOCK_CLOEXEC));
        if (s) {
          s.set_nonblocking(true);
          Connection c;
          c.socket = std::move(s);
          conns.push_back(std::move(c));
        }
        continue;
      }
      auto it = std::find_if(conns.begin(), conns.end(),
                             [&](const Connection& c) { return c.socket.fd() == f.fd; });
      if (it == conns.end()) continue;
      std::vector<json> messages;
      try {
        messages = it->drain();
      } catch (const json::exception&) {
        it->open = false;
      }
      idle_deadline = Clock::now() + options.timeout;
      for (const auto& m : messages) handle(*it, m);
    }
  }
  kill_all();
  reap(true);

  // The first rank that died without reporting is the root cause; peers that
  // lost their connection to it say in which phase.
  std::optional<int> crashed;
  int notified = 0;
  for (const auto& [r, status] : exit_status) {
    const bool expected_exit =
        WIFEXITED(status) && (WEXITSTATUS(status) == kExitOk || WEXITSTATUS(status) == kExitError ||
                              WEXITSTATUS(status) == kExitAborted);
    if (!expected_exit && !crashed && !results.contains(r)) crashed = r;
    if (WIFEXITED(status) &&
        (WEXITSTATUS(status) == kExitError || WEXITSTATUS(status) == kExitAborted)) {
      ++notified;
    }
  }
  if (crashed && (!failure || failure->kind == "worker_error" || failure->kind == "worker_crash")) {
    int phase = -1;
    for (const auto& e : errors) {
      if (e.peer == *crashed && e.phase >= 0) phase = phase < 0 ? e.phase : std::min(phase, e.phase);
    }
    const int status = exit_status.at(*crashed);
    std::string how = WIFSIGNALED(status) ? "killed by signal " + std::to_string(WTERMSIG(status))
                                          : "exited with status " + std::to_string(WEXITSTATUS(status));
    failure = LaunchFailure{"worker_crash", *crashed, phase,
                            "rank " + std::to_string(*crashed) + " " + how +
                                (phase >= 0 ? " during phase " + std::to_string(phase) : ""),
                            0};
  } else if (failure && failure->kind == "worker_error" && !errors.empty()) {
    const auto& e = errors.front();
    failure->rank = e.peer >= 0 ? e.peer : e.reporter;
    failure->phase = e.phase;
    failure->message = "rank " + std::to_string(e.reporter) + ": " + e.message;
  } else if (!failure && results.size() != ranks) {
    failure = LaunchFailure{"timeout", -1, -1, "workers did not finish in time", 0};
  }
  if (failure) {
    failure->ranks_notified = notified;
  } else {
    for (auto& [r, rep] : results) report.ranks.push_back(std::move(rep));
  }
  report.failure = std::move(failure);
  return report;
}

LaunchReport launch(const Plan& plan, const Workload& workload, const LaunchOptions& options) {
  return launch(plan.devices.size(), plan.decomposition.sizes(), workload, options);
}

}  // namespace ddl
