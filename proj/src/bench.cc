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

#include "ddl/bench.h"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "json.hpp"

#include "ddl/error.h"
#include "ddl/multiring.h"

namespace ddl {

namespace {

std::vector<double> measured(const IterationTiming& t) {
  if (t.seconds.size() <= t.warmup) {
    throw InvalidArgument("need more than " + std::to_string(t.warmup) + " iterations");
  }
  return {t.seconds.begin() + static_cast<std::ptrdiff_t>(t.warmup), t.seconds.end()};
}

}  // namespace

double IterationTiming::mean() const {
  const auto v = measured(*this);
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double IterationTiming::median() const {
  auto v = measured(*this);
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

double scaling_efficiency(double t_single, double t_distributed, std::size_t n) {
  if (!(t_single > 0.0) || !(t_distributed > 0.0)) {
    throw InvalidArgument("iteration times must be positive");
  }
  if (n == 0) throw InvalidArgument("rank count must be at least 1");
  return t_single / t_distributed;
}

double communication_overhead(double t_distributed, double t_single) {
  return t_distributed - t_single;
}

std::string_view to_string(Baseline baseline) {
  return baseline == Baseline::gpu ? "gpu" : "node";
}

Baseline parse_baseline(std::string_view text) {
  if (text == "gpu") return Baseline::gpu;
  if (text == "node") return Baseline::node;
  throw InvalidArgument("unknown baseline '" + std::string(text) + "' (expected gpu or node)");
}

SweepReport sweep(const Topology& topology, const SweepOptions& options) {
  const auto& all = topology.devices();
  if (all.empty()) throw InvalidArgument("topology has no devices");
  if (!(options.compute_s >= 0.0)) throw InvalidArgument("compute time must be non-negative");

  PlanOptions plan_options;
  plan_options.max_dims = options.max_dims;
  plan_options.latency_override = options.latency_override;
  auto iteration = [&](std::size_t n, std::string* dims, double* comm) {
    if (n == 0 || n > all.size()) {
      throw InvalidArgument("cannot place " + std::to_string(n) + " ranks on " +
                            std::to_string(all.size()) + " devices");
    }
    std::vector<std::string> devices(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n));
    const Plan p = plan(topology, devices, options.size_gb, plan_options);
    if (dims) *dims = format_dims(p.decomposition.sizes());
    if (comm) *comm = p.estimate.total;
    return options.compute_s + p.estimate.total;
  };

  SweepReport report;
  report.baseline = options.baseline;
  if (options.baseline == Baseline::node) {
    const int host = topology.node(all.front()).host;
    report.baseline_ranks = static_cast<std::size_t>(std::count_if(
        all.begin(), all.end(), [&](const std::string& d) { return topology.node(d).host == host; }));
  }
  report.baseline_t_iter_s = iteration(report.baseline_ranks, nullptr, nullptr);

  for (std::size_t n : options.rank_counts) {
    SweepRow row;
    row.ranks = n;
    row.t_iter_s = iteration(n, &row.dims, &row.modeled_comm_s);
    row.overhead_s = communication_overhead(row.t_iter_s, report.baseline_t_iter_s);
    row.efficiency = row.t_iter_s > 0.0 && report.baseline_t_iter_s > 0.0
                         ? scaling_efficiency(report.baseline_t_iter_s, row.t_iter_s, n)
                         : 1.0;
    report.rows.push_back(std::move(row));
  }
  return report;
}

void write_sweep_csv(std::ostream& out, const SweepReport& report) {
  out << "n,t_iter_s,efficiency,overhead_s,modeled_comm_s\n";
  char buf[160];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.9g,%.9g\n", r.ranks, r.t_iter_s, r.efficiency,
                  r.overhead_s, r.modeled_comm_s);
    out << buf;
  }
}

std::string sweep_to_json(const SweepReport& report) {
  nlohmann::json doc;
  doc["baseline"] = to_string(report.baseline);
  doc["baseline_ranks"] = report.baseline_ranks;
  doc["baseline_t_iter_s"] = report.baseline_t_iter_s;
  doc["rows"] = nlohmann::json::array();
  for (const auto& r : report.rows) {
    doc["rows"].push_back({{"n", r.ranks},
                           {"dims", r.dims},
                           {"t_iter_s", r.t_iter_s},
                           {"efficiency", r.efficiency},
                           {"overhead_s", r.overhead_s},
                           {"modeled_comm_s", r.modeled_comm_s}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace ddl
