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

#ifndef DDL_LAUNCHER_H_
#define DDL_LAUNCHER_H_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ddl/ddl_object.h"
#include "ddl/multiring.h"
#include "ddl/runtime.h"

namespace ddl {

// Deterministic per-rank input: f32/f64 uniform in [0, 1), i64 uniform in
// [-2^39, 2^39). Identical for a given (seed, rank, index).
void fill_input(DdlObject& obj, std::uint64_t seed, int rank);

struct Workload {
  DType dtype = DType::f32;
  std::size_t length = 1024;
  int iterations = 1;
  std::uint64_t seed = 1;
  // Ship every rank's final buffer back to the caller.
  bool collect_results = false;

  // Fault injection: give one rank a different vector length.
  std::optional<std::pair<int, std::size_t>> length_override;
  // Fault injection: SIGKILL the given rank when it reaches the given phase
  // of the first iteration.
  std::optional<std::pair<int, std::size_t>> kill_at_phase;
};

struct LaunchOptions {
  // Coordinator listen address. Port 0 picks a free port.
  std::string rendezvous = "127.0.0.1:0";
  std::chrono::milliseconds timeout = std::chrono::seconds(30);
};

struct RankReport {
  int rank = 0;
  std::uint64_t digest = 0;
  std::vector<double> iteration_seconds;
  // Totals over all iterations.
  TrafficCounters traffic;
  std::vector<double> values;               // f32/f64 results when collected
  std::vector<std::int64_t> integer_values; // i64 results when collected
};

struct LaunchFailure {
  // One of: length_mismatch, dtype_mismatch, plan_mismatch, worker_crash,
  // worker_error, timeout, spawn.
  std::string kind;
  int rank = -1;
  int phase = -1;
  std::string message;
  // Ranks that observed the failure and stopped (error report or abort).
  int ranks_notified = 0;
};

struct LaunchReport {
  std::string rendezvous;
  std::vector<RankReport> ranks;
  std::optional<LaunchFailure> failure;

  bool ok() const { return !failure.has_value(); }
};

// Forks one worker process per rank, rendezvouses them through a coordinator
// listening on options.rendezvous, and runs `workload.iterations` allreduces
// over the composite schedule of `dims`. Throws AddressInUse when the
// rendezvous address cannot be bound; runtime failures are reported in the
// returned LaunchReport.
LaunchReport launch(std::size_t ranks, const std::vector<std::size_t>& dims,
                    const Workload& workload, const LaunchOptions& options = {});
LaunchReport launch(const Plan& plan, const Workload& workload, const LaunchOptions& options = {});

}  // namespace ddl

#endif  // DDL_LAUNCHER_H_
