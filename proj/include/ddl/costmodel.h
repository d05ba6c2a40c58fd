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

#ifndef DDL_COSTMODEL_H_
#define DDL_COSTMODEL_H_

#include <cstddef>
#include <span>
#include <vector>

namespace ddl {

// Sizes are in gigabytes (1e9 bytes), bandwidths in GB/s, times in seconds.

struct DimensionEstimate {
  std::size_t dimension = 0;
  std::size_t phases = 0;
  double seconds = 0.0;
};

struct CostEstimate {
  double total = 0.0;
  std::size_t phases = 0;
  std::vector<DimensionEstimate> per_dimension;
  double bottleneck_bandwidth = 0.0;
};

// Ring size, per-lane bandwidth, and per-phase latency of one grid dimension.
struct DimensionCost {
  std::size_t size = 1;
  double bandwidth_gbps = 0.0;
  double latency_s = 0.0;
};

// Ring reduce-scatter: (N-1) phases, each moving S/N per rank.
CostEstimate ring_reduction_time(double size_gb, std::size_t ranks, double min_bandwidth_gbps,
                                 double latency_s);

// Reduce-scatter followed by an allgather of the same volume.
CostEstimate allreduce_time(double size_gb, std::size_t ranks, double min_bandwidth_gbps,
                            double latency_s);

// Multi-dimensional ring allreduce. Dimension i reduce-scatters a payload of
// S / prod_{k<i} d_k; the allgather retraces the dimensions in reverse at the
// same per-dimension cost. per_dimension[i] holds both passes of dimension i.
CostEstimate multiring_time(double size_gb, std::span<const DimensionCost> dims);
CostEstimate multiring_time(double size_gb, std::span<const std::pair<std::size_t, double>> dims,
                            double latency_s);

// Time to gather every rank's payload into a single server over one link of
// bandwidth B. Distribution of the result is not included.
double parameter_server_time(double size_per_rank_gb, std::size_t ranks, double bandwidth_gbps);
double parameter_server_volume(double size_per_rank_gb, std::size_t ranks);

}  // namespace ddl

#endif  // DDL_COSTMODEL_H_
