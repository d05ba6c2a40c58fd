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

// Command-line front end: plan, simulate, run and bench.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ddl/bench.h"
#include "ddl/costmodel.h"
#include "ddl/error.h"
#include "ddl/launcher.h"
#include "ddl/multiring.h"
#include "ddl/ring.h"
#include "ddl/simulator.h"
#include "ddl/socket.h"
#include "ddl/topology.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Usage and validation problems detected after argument parsing.
struct UsageError : ddl::Error {
  using ddl::Error::Error;
};

struct Common {
  std::string topology;
  double size_gb = 0.35;
  std::optional<double> latency_s;
  std::string format = "text";
  std::uint64_t seed = 1;
};

void add_common(CLI::App* cmd, Common& c, bool topology_required) {
  auto* t = cmd->add_option("--topology", c.topology, "Topology file (JSON)");
  if (topology_required) t->required();
  cmd->add_option("--size-gb", c.size_gb, "Payload size in gigabytes (1e9 bytes)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--latency-s", c.latency_s, "Per-phase latency, overriding every level")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"text", "json"}));
  cmd->add_option("--seed", c.seed, "Seed for generated data");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << contents;
}

ddl::Topology load(const std::string& path, std::optional<double> latency_s = std::nullopt) {
  read_file(path);  // turns a missing file into a usage error
  auto topology = ddl::load_topology(path);
  if (!latency_s) return topology;
  auto levels = topology.levels();
  for (auto& level : levels) level.latency_s = *latency_s;
  return ddl::Topology::build(std::move(levels), topology.specs());
}

std::vector<std::string> first_devices(const ddl::Topology& t, std::optional<std::size_t> ranks) {
  const auto& all = t.devices();
  const std::size_t n = ranks.value_or(all.size());
  if (n == 0 || n > all.size()) {
    throw UsageError("cannot place " + std::to_string(n) + " ranks on " +
                     std::to_string(all.size()) + " devices");
  }
  return {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n)};
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

// ---- plan -----------------------------------------------------------------

struct PlanArgs {
  Common common;
  std::optional<std::size_t> ranks;
  std::size_t max_dims = 3;
  std::string alignment = "level";
  std::string dims;
  std::string out;
};

void print_plan_summary(const ddl::Plan& p) {
  std::vector<std::string> levels;
  std::string bound_level;
  double bound = 0.0;
  for (const auto& d : p.decomposition.dims) {
    if (d.size > 1 && (bound_level.empty() || d.bandwidth_gbps < bound)) {
      bound = d.bandwidth_gbps;
      bound_level = d.level;
    }
  }
  std::cout << "ranks        " << p.devices.size() << "\n";
  std::cout << "dims         " << ddl::format_dims(p.decomposition.sizes()) << " (";
  for (std::size_t i = 0; i < p.decomposition.dims.size(); ++i) {
    std::cout << (i ? ", " : "") << p.decomposition.dims[i].level;
  }
  std::cout << ")\n";
  for (std::size_t i = 0; i < p.decomposition.dims.size(); ++i) {
    const auto& d = p.decomposition.dims[i];
    std::cout << "  dim " << i << "      d=" << d.size << " B=" << d.bandwidth_gbps
              << " GB/s L=" << d.latency_s << " s phases=" << p.estimate.per_dimension[i].phases
              << " time=" << fmt("%.6f", p.estimate.per_dimension[i].seconds) << " s\n";
  }
  std::cout << "modeled      " << fmt("%.6f", p.estimate.total) << " s over " << p.estimate.phases
            << " phases\n";
  if (!bound_level.empty()) {
    std::cout << "bottleneck   " << bound_level << " at " << bound << " GB/s\n";
  }
}

int cmd_plan(const PlanArgs& a) {
  const auto topology = load(a.common.topology, a.common.latency_s);
  if (!(a.common.size_gb > 0.0)) throw UsageError("--size-gb must be positive");
  ddl::PlanOptions options;
  options.max_dims = a.max_dims;
  options.alignment =
      a.alignment == "exhaustive" ? ddl::Alignment::exhaustive : ddl::Alignment::level_aligned;
  options.latency_override = a.common.latency_s;
  auto devices = first_devices(topology, a.ranks);
  const ddl::Plan p =
      a.dims.empty()
          ? ddl::plan(topology, devices, a.common.size_gb, options)
          : ddl::make_plan(topology, devices, a.common.size_gb, ddl::parse_dims(a.dims), options);
  const std::string doc = ddl::plan_to_json(p);
  if (!a.out.empty()) write_file(a.out, doc);
  if (a.common.format == "json") {
    std::cout << doc;
  } else {
    print_plan_summary(p);
    if (!a.out.empty()) std::cout << "plan written to " << a.out << "\n";
  }
  return 0;
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  Common common;
  std::string plan;
  std::optional<std::size_t> ranks;
  std::string dims;
  std::string order = "plan";
  std::string devices;
  std::string dump_schedule;
  std::string csv;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, sep);) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_simulate(const SimulateArgs& a) {
  const auto topology = load(a.common.topology, a.common.latency_s);
  ddl::Plan p;
  if (!a.plan.empty()) {
    p = ddl::plan_from_json(read_file(a.plan));
  } else {
    ddl::PlanOptions options;
    auto devices = first_devices(topology, a.ranks);
    p = a.dims.empty() ? ddl::plan(topology, devices, a.common.size_gb, options)
                       : ddl::make_plan(topology, devices, a.common.size_gb,
                                        ddl::parse_dims(a.dims), options);
  }

  // A flat ring whose rank -> device mapping is given explicitly.
  std::vector<std::string> ring_devices;
  if (!a.devices.empty()) {
    ring_devices = split(a.devices, ',');
  } else if (a.order == "dfs" || a.order == "swapped") {
    ring_devices = p.devices;
    if (a.order == "swapped") {
      if (ring_devices.size() < 3) throw UsageError("--order swapped needs at least 3 ranks");
      std::swap(ring_devices[0], ring_devices[2]);
    }
  }

  ddl::ModelComparison cmp;
  ddl::Schedule schedule;
  if (ring_devices.empty()) {
    cmp = ddl::compare_model(topology, p);
    schedule = p.schedule;
  } else {
    const std::size_t n = ring_devices.size();
    schedule = ddl::multiring_schedule(ddl::Grid({n}), p.element_count());
    cmp.sim = ddl::simulate(topology, schedule, ddl::RingOrder(ring_devices), p.bytes_per_element);
    cmp.simulated = cmp.sim.elapsed;
    if (n > 1) {
      double latency = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (const auto& use : topology.route(ring_devices[i], ring_devices[(i + 1) % n])) {
          const auto& level = topology.levels()[topology.links()[use.link].level];
          latency = std::max(latency, level.latency_s);
        }
      }
      cmp.modeled = ddl::allreduce_time(p.size_gb, n, topology.min_bandwidth(ring_devices), latency)
                        .total;
    }
    cmp.relative_gap = cmp.modeled > 0.0 ? (cmp.simulated - cmp.modeled) / cmp.modeled : 0.0;
  }

  if (!a.dump_schedule.empty()) {
    std::ofstream out(a.dump_schedule);
    if (!out) throw UsageError("cannot write '" + a.dump_schedule + "'");
    ddl::write_schedule(out, schedule);
  }
  if (!a.csv.empty()) {
    std::ofstream out(a.csv);
    if (!out) throw UsageError("cannot write '" + a.csv + "'");
    ddl::write_phase_csv(out, cmp.sim);
  }

  if (a.common.format == "json") {
    auto doc = nlohmann::json::parse(ddl::sim_to_json(cmp.sim));
    doc["modeled_s"] = cmp.modeled;
    doc["simulated_s"] = cmp.simulated;
    doc["relative_gap"] = cmp.relative_gap;
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << "phases       " << cmp.sim.per_phase.size() << "\n";
    std::cout << "modeled      " << fmt("%.9f", cmp.modeled) << " s\n";
    std::cout << "simulated    " << fmt("%.9f", cmp.simulated) << " s\n";
    std::cout << "gap          " << fmt("%.3e", cmp.relative_gap) << "\n";
    std::cout << "contention   " << cmp.sim.contention_events.size() << " event(s)\n";
    for (const auto& e : cmp.sim.contention_events) {
      std::cout << "  phase " << e.phase << ": " << e.link << " carries " << e.transfers
                << " transfers on " << e.lanes << " lane(s)\n";
    }
  }
  return 0;
}

// ---- run ------------------------------------------------------------------

struct RunArgs {
  Common common;
  std::size_t ranks = 4;
  std::size_t length = 1024;
  int iters = 1;
  std::string dtype = "f32";
  std::string rendezvous;
  std::string plan;
  std::string dims;
  double timeout_s = 30.0;
  std::size_t max_procs = 16;
};

// Serial left-to-right sum of every rank's input.
template <typename T>
std::vector<T> serial_sum(ddl::DType dtype, std::size_t length, std::size_t ranks,
                          std::uint64_t seed) {
  std::vector<T> sum(length, T{});
  ddl::DdlObject input(dtype, length);
  for (std::size_t r = 0; r < ranks; ++r) {
    ddl::fill_input(input, seed, static_cast<int>(r));
    auto v = input.view<T>();
    for (std::size_t i = 0; i < length; ++i) {
      if constexpr (std::is_integral_v<T>) {
        sum[i] = static_cast<T>(static_cast<std::uint64_t>(sum[i]) + static_cast<std::uint64_t>(v[i]));
      } else {
        sum[i] += v[i];
      }
    }
  }
  return sum;
}

int cmd_run(const RunArgs& a) {
  std::size_t ranks = a.ranks;
  std::vector<std::size_t> dims;
  if (!a.plan.empty()) {
    const auto p = ddl::plan_from_json(read_file(a.plan));
    ranks = p.devices.size();
    dims = p.decomposition.sizes();
  } else if (!a.dims.empty()) {
    dims = ddl::parse_dims(a.dims);
  } else {
    dims = {ranks};
  }
  if (ranks == 0) throw UsageError("-n must be at least 1");
  if (ranks > a.max_procs) {
    throw UsageError(std::to_string(ranks) + " ranks exceed the process cap of " +
                     std::to_string(a.max_procs));
  }
  ddl::Grid check = ddl::build_grid(ranks, dims);
  (void)check;

  ddl::Workload w;
  w.dtype = ddl::parse_dtype(a.dtype);
  w.length = a.length;
  w.iterations = a.iters;
  w.seed = a.common.seed;
  w.collect_results = true;
  ddl::LaunchOptions options;
  if (!a.rendezvous.empty()) {
    options.rendezvous = a.rendezvous;
  } else if (const char* env = std::getenv("DDL_RENDEZVOUS")) {
    options.rendezvous = env;
  }
  options.timeout = std::chrono::milliseconds(static_cast<long long>(a.timeout_s * 1000));

  const auto report = ddl::launch(ranks, dims, w, options);
  nlohmann::json doc;
  doc["ranks"] = ranks;
  doc["dims"] = ddl::format_dims(dims);
  doc["dtype"] = a.dtype;
  doc["length"] = a.length;
  doc["rendezvous"] = report.rendezvous;
  if (!report.ok()) {
    const auto& f = *report.failure;
    doc["ok"] = false;
    doc["failure"] = {{"kind", f.kind},
                      {"rank", f.rank},
                      {"phase", f.phase},
                      {"message", f.message},
                      {"ranks_notified", f.ranks_notified}};
    if (a.common.format == "json") {
      std::cout << doc.dump(2) << "\n";
    } else {
      std::cerr << "run failed (" << f.kind << "): " << f.message << "\n";
    }
    return kExitFailure;
  }

  bool digests_agree = true;
  for (const auto& r : report.ranks) digests_agree &= r.digest == report.ranks.front().digest;

  // Compare against a serial oracle: exact for integers, relative for floats.
  double worst = 0.0;
  bool exact = true;
  if (w.dtype == ddl::DType::i64) {
    const auto expect = serial_sum<std::int64_t>(w.dtype, w.length, ranks, w.seed);
    for (const auto& r : report.ranks) exact &= r.integer_values == expect;
  } else {
    std::vector<double> expect;
    if (w.dtype == ddl::DType::f32) {
      ddl::DdlObject input(w.dtype, w.length);
      expect.assign(w.length, 0.0);
      for (std::size_t r = 0; r < ranks; ++r) {
        ddl::fill_input(input, w.seed, static_cast<int>(r));
        auto v = input.view<float>();
        for (std::size_t i = 0; i < w.length; ++i) expect[i] += v[i];
      }
    } else {
      expect = serial_sum<double>(w.dtype, w.length, ranks, w.seed);
    }
    for (const auto& r : report.ranks) {
      for (std::size_t i = 0; i < w.length; ++i) {
        const double scale = std::max(std::abs(expect[i]), 1e-300);
        worst = std::max(worst, std::abs(r.values[i] - expect[i]) / scale);
      }
    }
  }
  const double tolerance = w.dtype == ddl::DType::f32 ? 1e-6 : 1e-12;
  const bool oracle_ok = w.dtype == ddl::DType::i64 ? exact : worst <= tolerance;

  std::vector<double> slowest(static_cast<std::size_t>(a.iters), 0.0);
  for (const auto& r : report.ranks) {
    for (std::size_t i = 0; i < r.iteration_seconds.size(); ++i) {
      slowest[i] = std::max(slowest[i], r.iteration_seconds[i]);
    }
  }
  const auto& traffic = report.ranks.front().traffic;
  doc["ok"] = digests_agree && oracle_ok;
  doc["digest"] = report.ranks.front().digest;
  doc["digests_agree"] = digests_agree;
  doc["oracle_match"] = oracle_ok;
  doc["max_relative_error"] = worst;
  doc["iteration_seconds"] = slowest;
  doc["payload_bytes_sent_per_rank"] = nlohmann::json::array();
  for (const auto& r : report.ranks) {
    doc["payload_bytes_sent_per_rank"].push_back(r.traffic.payload_bytes_sent);
  }

  if (a.common.format == "json") {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << "ranks        " << ranks << " (dims " << ddl::format_dims(dims) << ")\n";
    for (std::size_t i = 0; i < slowest.size(); ++i) {
      std::cout << "iteration " << i << "  " << fmt("%.6f", slowest[i]) << " s\n";
    }
    char digest[32];
    std::snprintf(digest, sizeof digest, "%016llx",
                  static_cast<unsigned long long>(report.ranks.front().digest));
    std::cout << "digest       " << digest << (digests_agree ? " (all ranks agree)" : " (MISMATCH)")
              << "\n";
    std::cout << "oracle       " << (oracle_ok ? "match" : "MISMATCH");
    if (w.dtype != ddl::DType::i64) std::cout << " (max rel err " << fmt("%.2e", worst) << ")";
    std::cout << "\n";
    std::cout << "traffic      " << traffic.payload_bytes_sent / static_cast<std::uint64_t>(a.iters)
              << " payload bytes sent per rank per allreduce (rank 0)\n";
  }
  return digests_agree && oracle_ok ? 0 : kExitFailure;
}

// ---- bench ----------------------------------------------------------------

struct BenchArgs {
  Common common;
  std::string ranks;
  double compute_s = 0.156;
  std::string baseline = "node";
  int iters = 5;
  int warmup = 2;
  bool measure = false;
  std::size_t length = 1 << 16;
  std::size_t max_procs = 16;
  std::string output = "csv";
};

int cmd_bench(const BenchArgs& a) {
  const auto topology = load(a.common.topology);
  ddl::SweepOptions options;
  options.size_gb = a.common.size_gb;
  options.latency_override = a.common.latency_s;
  options.compute_s = a.compute_s;
  options.baseline = ddl::parse_baseline(a.baseline);
  const std::size_t leaves = topology.devices().size();
  if (!a.ranks.empty()) {
    for (const auto& item : split(a.ranks, ',')) {
      if (item.find_first_not_of("0123456789") != std::string::npos) {
        throw UsageError("bad rank count '" + item + "'");
      }
      options.rank_counts.push_back(std::stoul(item));
    }
  } else {
    for (std::size_t n = 1; n <= leaves; n *= 2) options.rank_counts.push_back(n);
    if (options.rank_counts.back() != leaves) options.rank_counts.push_back(leaves);
  }
  for (std::size_t n : options.rank_counts) {
    if (n == 0 || n > leaves) {
      throw UsageError("rank count " + std::to_string(n) + " does not fit " +
                       std::to_string(leaves) + " devices");
    }
  }
  auto report = ddl::sweep(topology, options);

  if (a.measure) {
    if (a.warmup < 0 || a.iters <= a.warmup) throw UsageError("--iters must exceed --warmup");
    auto measure = [&](std::size_t n) {
      std::vector<std::string> devices(topology.devices().begin(),
                                       topology.devices().begin() + static_cast<std::ptrdiff_t>(n));
      const auto p = ddl::plan(topology, devices, options.size_gb);
      ddl::Workload w;
      w.length = a.length;
      w.iterations = a.iters;
      w.seed = a.common.seed;
      const auto run = ddl::launch(p, w);
      if (!run.ok()) throw ddl::Error("measurement at n=" + std::to_string(n) + " failed: " +
                                      run.failure->message);
      ddl::IterationTiming timing;
      timing.ranks = n;
      timing.warmup = static_cast<std::size_t>(a.warmup);
      timing.compute_baseline = a.compute_s;
      timing.seconds.assign(static_cast<std::size_t>(a.iters), 0.0);
      for (const auto& r : run.ranks) {
        for (std::size_t i = 0; i < r.iteration_seconds.size(); ++i) {
          timing.seconds[i] = std::max(timing.seconds[i], r.iteration_seconds[i]);
        }
      }
      return a.compute_s + timing.median();
    };
    if (report.baseline_ranks > a.max_procs) throw UsageError("baseline exceeds the process cap");
    report.baseline_t_iter_s = measure(report.baseline_ranks);
    std::vector<ddl::SweepRow> rows;
    for (auto row : report.rows) {
      if (row.ranks > a.max_procs) continue;
      row.t_iter_s = measure(row.ranks);
      row.overhead_s = ddl::communication_overhead(row.t_iter_s, report.baseline_t_iter_s);
      row.efficiency = ddl::scaling_efficiency(report.baseline_t_iter_s, row.t_iter_s, row.ranks);
      rows.push_back(row);
    }
    report.rows = std::move(rows);
  }

  const std::string out = a.common.format == "json" ? "json" : a.output;
  if (out == "json") {
    std::cout << ddl::sweep_to_json(report);
  } else if (out == "csv") {
    ddl::write_sweep_csv(std::cout, report);
  } else {
    std::cout << "baseline " << ddl::to_string(report.baseline) << " (" << report.baseline_ranks
              << " rank(s), " << fmt("%.6f", report.baseline_t_iter_s) << " s/iter)\n";
    std::cout << "     n  dims        t_iter_s  efficiency  overhead_s  modeled_comm_s\n";
    for (const auto& r : report.rows) {
      char line[160];
      std::snprintf(line, sizeof line, "%6zu  %-10s  %8.6f  %10.4f  %10.6f  %14.6f\n", r.ranks,
                    r.dims.c_str(), r.t_iter_s, r.efficiency, r.overhead_s, r.modeled_comm_s);
      std::cout << line;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topology-aware multi-dimensional ring allreduce toolkit"};
  app.require_subcommand(1);

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "Choose a ring decomposition for a topology");
  add_common(plan_cmd, plan.common, true);
  plan_cmd->add_option("--ranks", plan.ranks, "Use the first N devices (default: all)");
  plan_cmd->add_option("--max-dims", plan.max_dims, "Largest number of grid dimensions")
      ->check(CLI::PositiveNumber);
  plan_cmd->add_option("--alignment", plan.alignment, "Candidate decompositions")
      ->check(CLI::IsMember({"level", "exhaustive"}));
  plan_cmd->add_option("--dims", plan.dims, "Fixed decomposition, e.g. 4x16x4");
  plan_cmd->add_option("--out", plan.out, "Write the plan JSON here");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Replay a schedule on the topology");
  add_common(sim_cmd, sim.common, true);
  sim_cmd->add_option("--plan", sim.plan, "Plan file from `plan --out`");
  sim_cmd->add_option("--ranks", sim.ranks, "Use the first N devices (default: all)");
  sim_cmd->add_option("--dims", sim.dims, "Fixed decomposition, e.g. 4x16x4");
  sim_cmd->add_option("--order", sim.order, "plan: the plan's schedule; dfs/swapped: flat ring")
      ->check(CLI::IsMember({"plan", "dfs", "swapped"}));
  sim_cmd->add_option("--devices", sim.devices, "Flat ring over these devices (comma separated)");
  sim_cmd->add_option("--dump-schedule", sim.dump_schedule, "Write the transfer listing here");
  sim_cmd->add_option("--csv", sim.csv, "Write per-phase CSV here");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run allreduce across local worker processes");
  add_common(run_cmd, run.common, false);
  run_cmd->add_option("-n,--ranks", run.ranks, "Number of worker processes");
  run_cmd->add_option("--len", run.length, "Elements per vector");
  run_cmd->add_option("--iters", run.iters, "Allreduce iterations")->check(CLI::PositiveNumber);
  run_cmd->add_option("--dtype", run.dtype, "Element type")
      ->check(CLI::IsMember({"f32", "f64", "i64"}));
  run_cmd->add_option("--rendezvous", run.rendezvous,
                      "Coordinator host:port (default $DDL_RENDEZVOUS or an ephemeral port)");
  run_cmd->add_option("--plan", run.plan, "Plan file from `plan --out`");
  run_cmd->add_option("--dims", run.dims, "Grid decomposition, e.g. 2x4");
  run_cmd->add_option("--timeout-s", run.timeout_s, "Rendezvous and phase timeout")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--max-procs", run.max_procs, "Process cap");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Scaling-efficiency sweep");
  add_common(bench_cmd, bench.common, true);
  bench_cmd->add_option("--ranks", bench.ranks, "Comma-separated rank counts");
  bench_cmd->add_option("--compute-s", bench.compute_s, "Compute time per iteration")
      ->check(CLI::NonNegativeNumber);
  bench_cmd->add_option("--baseline", bench.baseline, "Efficiency baseline")
      ->check(CLI::IsMember({"gpu", "node"}));
  bench_cmd->add_option("--iters", bench.iters, "Measured iterations per rank count");
  bench_cmd->add_option("--warmup", bench.warmup, "Iterations excluded from statistics");
  bench_cmd->add_flag("--measure", bench.measure, "Measure allreduce with worker processes");
  bench_cmd->add_option("--len", bench.length, "Elements per vector when measuring");
  bench_cmd->add_option("--max-procs", bench.max_procs, "Process cap when measuring");
  bench_cmd->add_option("--output", bench.output, "Text output flavour")
      ->check(CLI::IsMember({"csv", "table", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*plan_cmd) return cmd_plan(plan);
    if (*sim_cmd) return cmd_simulate(sim);
    if (*run_cmd) return cmd_run(run);
    if (*bench_cmd) return cmd_bench(bench);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ddl::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ddl::TopologyError& e) {
    std::cerr << "error: topology: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ddl::AddressInUse& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
