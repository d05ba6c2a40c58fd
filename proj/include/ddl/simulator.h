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

#ifndef DDL_SIMULATOR_H_
#define DDL_SIMULATOR_H_

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "ddl/multiring.h"
#include "ddl/ring.h"
#include "ddl/topology.h"

namespace ddl {

struct PhaseResult {
  std::size_t phase = 0;
  double seconds = 0.0;
  // Largest byte count serialized on one lane of one directed link.
  double max_link_bytes = 0.0;
  std::string binding_link;
};

struct ContentionEvent {
  std::size_t phase = 0;
  std::string link;
  Direction direction = Direction::up;
  int transfers = 0;
  int lanes = 1;
};

struct SimResult {
  double elapsed = 0.0;
  std::vector<PhaseResult> per_phase;
  std::vector<ContentionEvent> contention_events;
};

// Phase-synchronous replay of `schedule` on `topology`. Each transfer is
// routed; transfers sharing a directed link are placed on its lanes
// (largest first, least-loaded lane) and serialize within a lane. A phase
// lasts as long as its most loaded lane plus the largest level latency among
// the links it touches.
SimResult simulate(const Topology& topology, const Schedule& schedule, const RingOrder& order,
                   std::size_t bytes_per_element);

struct ModelComparison {
  double modeled = 0.0;
  double simulated = 0.0;
  // (simulated - modeled) / modeled; 0 when both are 0.
  double relative_gap = 0.0;
  SimResult sim;
};

ModelComparison compare_model(const Topology& topology, const Plan& plan);

std::string sim_to_json(const SimResult& result);
// `phase,seconds,binding_link,bytes`
void write_phase_csv(std::ostream& out, const SimResult& result);

}  // namespace ddl

#endif  // DDL_SIMULATOR_H_
