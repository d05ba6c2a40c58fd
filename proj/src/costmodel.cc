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

#include "ddl/costmodel.h"

#include <algorithm>
#include <limits>
#include <string>

#include "ddl/error.h"

namespace ddl {

namespace {

void check_common(double size_gb, double bandwidth_gbps, double latency_s) {
  if (!(bandwidth_gbps > 0.0)) throw InvalidArgument("bandwidth must be positive");
  if (!(size_gb >= 0.0)) throw InvalidArgument("payload size must be non-negative");
  if (!(latency_s >= 0.0)) throw InvalidArgument("latency must be non-negative");
}

double ring_pass_seconds(double size_gb, std::size_t ranks, double bandwidth_gbps,
                         double latency_s) {
  const double n = static_cast<double>(ranks);
  return (n - 1.0) * (size_gb / (n * bandwidth_gbps) + latency_s);
}

}  // namespace

CostEstimate ring_reduction_time(double size_gb, std::size_t ranks, double min_bandwidth_gbps,
                                 double latency_s) {
  check_common(size_gb, min_bandwidth_gbps, latency_s);
  if (ranks == 0) throw InvalidArgument("rank count must be at least 1");
  CostEstimate e;
  e.total = ring_pass_seconds(size_gb, ranks, min_bandwidth_gbps, latency_s);
  e.phases = ranks - 1;
  e.per_dimension.push_back({0, e.phases, e.total});
  e.bottleneck_bandwidth = min_bandwidth_gbps;
  return e;
}

CostEstimate allreduce_time(double size_gb, std::size_t ranks, double min_bandwidth_gbps,
                            double latency_s) {
  CostEstimate e = ring_reduction_time(size_gb, ranks, min_bandwidth_gbps, latency_s);
  e.total *= 2.0;
  e.phases *= 2;
  e.per_dimension.front() = {0, e.phases, e.total};
  return e;
}

CostEstimate multiring_time(double size_gb, std::span<const DimensionCost> dims) {
  if (dims.empty()) throw InvalidArgument("decomposition needs at least one dimension");
  CostEstimate e;
  e.bottleneck_bandwidth = std::numeric_limits<double>::infinity();
  double payload = size_gb;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const auto& d = dims[i];
    if (d.size < 1) throw InvalidArgument("dimension " + std::to_string(i) + " has size 0");
    check_common(size_gb, d.bandwidth_gbps, d.latency_s);
    const double pass = ring_pass_seconds(payload, d.size, d.bandwidth_gbps, d.latency_s);
    const std::size_t phases = 2 * (d.size - 1);
    e.per_dimension.push_back({i, phases, 2.0 * pass});
    e.phases += phases;
    if (d.size > 1) e.bottleneck_bandwidth = std::min(e.bottleneck_bandwidth, d.bandwidth_gbps);
    payload /= static_cast<double>(d.size);
  }
  // Summed in order so that total matches the per-dimension breakdown exactly.
  for (const auto& pd : e.per_dimension) e.total += pd.seconds;
  if (e.phases == 0) {
    e.bottleneck_bandwidth = dims.front().bandwidth_gbps;
  }
  return e;
}

CostEstimate multiring_time(double size_gb, std::span<const std::pair<std::size_t, double>> dims,
                            double latency_s) {
  std::vector<DimensionCost> full;
  full.reserve(dims.size());
  for (const auto& [size, bandwidth] : dims) full.push_back({size, bandwidth, latency_s});
  return multiring_time(size_gb, full);
}

double parameter_server_time(double size_per_rank_gb, std::size_t ranks, double bandwidth_gbps) {
  if (!(bandwidth_gbps > 0.0)) throw InvalidArgument("bandwidth must be positive");
  return parameter_server_volume(size_per_rank_gb, ranks) / bandwidth_gbps;
}

double parameter_server_volume(double size_per_rank_gb, std::size_t ranks) {
  if (!(size_per_rank_gb >= 0.0)) throw InvalidArgument("payload size must be non-negative");
  if (ranks == 0) throw InvalidArgument("rank count must be at least 1");
  return static_cast<double>(ranks) * size_per_rank_gb;
}

}  // namespace ddl
