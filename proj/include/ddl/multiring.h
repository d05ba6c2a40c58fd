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

#ifndef DDL_MULTIRING_H_
#define DDL_MULTIRING_H_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ddl/costmodel.h"
#include "ddl/ring.h"
#include "ddl/topology.h"

namespace ddl {

// One grid dimension bound to the network tier its rings cross. The bandwidth
// is the slowest lane any ring of the dimension crosses; the latency is the
// largest level latency crossed.
struct Dimension {
  std::size_t size = 1;
  std::string level;
  double bandwidth_gbps = 0.0;
  double latency_s = 0.0;
};

// Ordered innermost (fastest-varying, fastest links) first.
struct Decomposition {
  std::vector<Dimension> dims;

  std::size_t ranks() const;
  std::vector<std::size_t> sizes() const;
  std::vector<DimensionCost> costs() const;
};

// All ordered tuples (d_1..d_k), k <= max_dims, d_i >= 2, with product n, plus
// the trivial tuple (n); sorted lexicographically.
std::vector<std::vector<std::size_t>> factorizations(std::size_t n, std::size_t max_dims);

// Mixed-radix rank <-> coordinate mapping with d_1 the fastest-varying digit.
class Grid {
 public:
  Grid() = default;
  explicit Grid(std::vector<std::size_t> dims);

  std::size_t ranks() const { return ranks_; }
  const std::vector<std::size_t>& dims() const { return dims_; }
  std::vector<std::size_t> coordinates(std::size_t rank) const;
  std::size_t rank(const std::vector<std::size_t>& coordinates) const;
  // Distance between ranks that differ by one in coordinate `dim`.
  std::size_t stride(std::size_t dim) const { return strides_.at(dim); }
  // Ranks sharing every coordinate of `rank` except `dim`, ordered by that
  // coordinate.
  std::vector<int> ring(std::size_t rank, std::size_t dim) const;

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> strides_;
  std::size_t ranks_ = 0;
};

// `rank_count` ranks, listed in topology depth-first order, on the given grid.
Grid build_grid(std::size_t rank_count, const std::vector<std::size_t>& dims);

// Reduce-scatter along dimensions 1..m, then allgather along m..1. Phase
// count is 2 * sum(d_i - 1); the first half combines with add.
Schedule multiring_schedule(const Grid& grid, std::size_t element_count);

// Region of the vector that `rank` holds fully reduced after the
// reduce-scatter half of multiring_schedule.
ChunkBounds owned_region(const Grid& grid, std::size_t element_count, std::size_t rank);

enum class Alignment {
  // Only decompositions whose dimension boundaries coincide with tiers of the
  // hierarchy, when the selected devices fill the tiers uniformly; otherwise
  // falls back to exhaustive.
  level_aligned,
  // Every factorization, each dimension scored at the slowest link crossed.
  exhaustive,
};

struct PlanOptions {
  std::size_t max_dims = 3;
  Alignment alignment = Alignment::level_aligned;
  std::size_t bytes_per_element = 4;
  // Replaces every level's latency when set.
  std::optional<double> latency_override;
};

struct Plan {
  std::vector<std::string> devices;  // rank i runs on devices[i]
  double size_gb = 0.0;
  std::size_t bytes_per_element = 4;
  Decomposition decomposition;
  Grid grid;
  Schedule schedule;
  CostEstimate estimate;

  std::size_t element_count() const { return schedule.element_count; }
  RingOrder order() const { return RingOrder(devices); }
};

// Binds each dimension of `sizes` to the slowest tier its rings cross.
Decomposition bind_decomposition(const Topology& topology, const std::vector<std::string>& devices,
                                 const std::vector<std::size_t>& sizes,
                                 std::optional<double> latency_override = std::nullopt);

// Candidate dimension tuples the planner scores for these devices.
std::vector<std::vector<std::size_t>> candidate_factorizations(
    const Topology& topology, const std::vector<std::string>& devices, const PlanOptions& options);

// Minimum modeled-time plan; ties go to fewer dimensions, then lexicographic
// dims. Devices are reordered into depth-first order.
Plan plan(const Topology& topology, std::vector<std::string> devices, double size_gb,
          const PlanOptions& options = {});

// A plan for a fixed decomposition (dims may include singletons).
Plan make_plan(const Topology& topology, std::vector<std::string> devices, double size_gb,
               const std::vector<std::size_t>& sizes, const PlanOptions& options = {});

// Plan built from an already bound decomposition, no topology needed.
Plan make_plan(std::vector<std::string> devices, double size_gb, Decomposition decomposition,
               std::size_t bytes_per_element = 4);

std::string plan_to_json(const Plan& plan);
Plan plan_from_json(std::string_view document);
// FNV-1a over the decomposition sizes and rank count; identifies a schedule.
std::uint64_t plan_hash(const std::vector<std::size_t>& sizes);

// "4x16x4" <-> {4, 16, 4}
std::string format_dims(const std::vector<std::size_t>& sizes);
std::vector<std::size_t> parse_dims(std::string_view text);

}  // namespace ddl

#endif  // DDL_MULTIRING_H_
