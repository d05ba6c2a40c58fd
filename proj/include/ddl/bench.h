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

#ifndef DDL_BENCH_H_
#define DDL_BENCH_H_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ddl/topology.h"

namespace ddl {

// Wall times of consecutive iterations at one rank count; the first `warmup`
// entries are excluded from the statistics.
struct IterationTiming {
  std::size_t ranks = 1;
  std::vector<double> seconds;
  double compute_baseline = 0.0;
  std::size_t warmup = 2;

  double mean() const;
  double median() const;
};

// t_single / t_distributed.
double scaling_efficiency(double t_single, double t_distributed, std::size_t n);
// t_distributed - t_single, reported as-is even when negative.
double communication_overhead(double t_distributed, double t_single);

enum class Baseline {
  gpu,   // one device
  node,  // all devices of the first host
};

std::string_view to_string(Baseline baseline);
Baseline parse_baseline(std::string_view text);

struct SweepOptions {
  double size_gb = 0.35;
  std::vector<std::size_t> rank_counts;
  std::optional<double> latency_override;
  // Per-iteration compute time; iterations do not overlap compute with the
  // gradient reduction.
  double compute_s = 0.0;
  Baseline baseline = Baseline::node;
  std::size_t max_dims = 3;
};

struct SweepRow {
  std::size_t ranks = 0;
  std::string dims;
  double t_iter_s = 0.0;
  double efficiency = 0.0;
  double overhead_s = 0.0;
  double modeled_comm_s = 0.0;
};

struct SweepReport {
  Baseline baseline = Baseline::node;
  std::size_t baseline_ranks = 1;
  double baseline_t_iter_s = 0.0;
  std::vector<SweepRow> rows;
};

// For every rank count n, plans an allreduce over the first n devices in
// depth-first order and models an iteration as compute + allreduce.
SweepReport sweep(const Topology& topology, const SweepOptions& options);

// `n,t_iter_s,efficiency,overhead_s,modeled_comm_s`
void write_sweep_csv(std::ostream& out, const SweepReport& report);
std::string sweep_to_json(const SweepReport& report);

}  // namespace ddl

#endif  // DDL_BENCH_H_
