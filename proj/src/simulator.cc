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

#include "ddl/simulator.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "json.hpp"

#include "ddl/error.h"

namespace ddl {

SimResult simulate(const Topology& topology, const Schedule& schedule, const RingOrder& order,
                   std::size_t bytes_per_element) {
  if (order.size() != schedule.ranks) {
    throw InvalidArgument("schedule has " + std::to_string(schedule.ranks) +
                          " ranks but the order maps " + std::to_string(order.size()));
  }
  std::vector<int> node(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    node[r] = topology.node_index(order.device_of(static_cast<int>(r)));
  }

  SimResult result;
  for (std::size_t p = 0; p < schedule.phases.size(); ++p) {
    std::map<LinkUse, std::vector<double>> load;
    for (const auto& t : schedule.phases[p].transfers) {
      if (t.src < 0 || t.dst < 0 || static_cast<std::size_t>(t.src) >= order.size() ||
          static_cast<std::size_t>(t.dst) >= order.size()) {
        throw InvalidArgument("transfer references a rank outside the order");
      }
      const double bytes = static_cast<double>(t.length * bytes_per_element);
      for (const auto& use : topology.route(node[t.src], node[t.dst])) {
        load[use].push_back(bytes);
      }
    }

    PhaseResult phase{p, 0.0, 0.0, ""};
    double transfer_time = 0.0;
    double latency = 0.0;
    for (auto& [use, transfers] : load) {
      const Link& link = topology.links()[use.link];
      latency = std::max(latency, topology.levels()[link.level].latency_s);
      std::sort(transfers.begin(), transfers.end(), std::greater<>());
      std::vector<double> lanes(static_cast<std::size_t>(link.lanes), 0.0);
      for (double bytes : transfers) {
        *std::min_element(lanes.begin(), lanes.end()) += bytes;
      }
      const double busiest = *std::max_element(lanes.begin(), lanes.end());
      const double seconds = busiest / (link.bandwidth_gbps * 1e9);
      if (phase.binding_link.empty() || seconds > transfer_time) {
        transfer_time = seconds;
        phase.max_link_bytes = busiest;
        phase.binding_link = topology.link_name(use);
      }
      if (static_cast<int>(transfers.size()) > link.lanes) {
        result.contention_events.push_back({p, topology.link_name(use), use.direction,
                                            static_cast<int>(transfers.size()), link.lanes});
      }
    }
    phase.seconds = transfer_time + latency;
    result.elapsed += phase.seconds;
    result.per_phase.push_back(std::move(phase));
  }
  return result;
}

ModelComparison compare_model(const Topology& topology, const Plan& plan) {
  ModelComparison c;
  c.sim = simulate(topology, plan.schedule, plan.order(), plan.bytes_per_element);
  c.modeled = plan.estimate.total;
  c.simulated = c.sim.elapsed;
  if (c.modeled != 0.0) {
    c.relative_gap = (c.simulated - c.modeled) / c.modeled;
  } else if (c.simulated != 0.0) {
    c.relative_gap = std::copysign(INFINITY, c.simulated);
  }
  return c;
}

std::string sim_to_json(const SimResult& result) {
  nlohmann::json doc;
  doc["elapsed_s"] = result.elapsed;
  doc["phases"] = nlohmann::json::array();
  for (const auto& p : result.per_phase) {
    doc["phases"].push_back({{"phase", p.phase},
                             {"seconds", p.seconds},
                             {"max_link_bytes", p.max_link_bytes},
                             {"binding_link", p.binding_link}});
  }
  doc["contention_events"] = nlohmann::json::array();
  for (const auto& e : result.contention_events) {
    doc["contention_events"].push_back({{"phase", e.phase},
                                        {"link", e.link},
                                        {"direction", e.direction == Direction::up ? "up" : "down"},
                                        {"transfers", e.transfers},
                                        {"lanes", e.lanes}});
  }
  return doc.dump(2) + "\n";
}

void write_phase_csv(std::ostream& out, const SimResult& result) {
  out << "phase,seconds,binding_link,bytes\n";
  char buf[64];
  for (const auto& p : result.per_phase) {
    std::snprintf(buf, sizeof buf, "%.17g", p.seconds);
    out << p.phase << ',' << buf << ',' << p.binding_link << ',';
    std::snprintf(buf, sizeof buf, "%.17g", p.max_link_bytes);
    out << buf << '\n';
  }
}

}  // namespace ddl
