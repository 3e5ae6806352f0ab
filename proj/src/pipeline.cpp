/**
 * Copyright (c) dagpart contributors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "dagpart/pipeline.hpp"

#include "dagpart/io.hpp"
#include "dagpart/levels.hpp"
#include "dagpart/log.hpp"

#include <array>
#include <chrono>
#include <fstream>

#include <spdlog/spdlog.h>

namespace dagpart {

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 5> kMethods{{
    {Method::ParDnn, "pardnn"},
    {Method::RoundRobin, "rr"},
    {Method::CriticalPath, "cp"},
    {Method::LinearClustering, "lc"},
    {Method::Oracle, "oracle"},
}};

constexpr std::array<std::pair<MemHeuristic, std::string_view>, 3> kHeuristics{{
    {MemHeuristic::None, "none"},
    {MemHeuristic::Overflow, "overflow"},
    {MemHeuristic::Balance, "balance"},
}};

class Stopwatch {
public:
  double lap_ms() {
    auto now = std::chrono::steady_clock::now();
    double ms = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
    return ms;
  }

private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

Placement run_pardnn(const CompGraph &g, const DeviceProfile &profile,
                     const PipelineOptions &options, PipelineResult &out) {
  Stopwatch sw;
  SliceResult sliced = slice(g, profile.k);
  out.times.slice_ms = sw.lap_ms();

  if (options.mem_heuristic == MemHeuristic::Balance) {
    out.split_stats = split_critical_path(sliced, g, profile);
    out.times.split_ms = sw.lap_ms();
    if (out.split_stats->triggered)
      logger().info("critical path split: donor {} gave {} chunks",
                   out.split_stats->donor, out.split_stats->chunks);
  }

  MappingState state(g, std::move(sliced.primaries),
                     std::move(sliced.secondaries), profile.k);
  const double ratio = g.total_comp() > 0 ? ccr(g) : 0.0;
  out.map_stats = map_clusters(state, ratio, MapOptions{options.ccr_threshold});
  colocate_references(state);
  out.times.map_ms = sw.lap_ms();
  logger().info("mapping: ccr {:.3f}, {} lookahead passes, {} merged early, {} "
               "balanced",
               ratio, out.map_stats.lookahead_passes,
               out.map_stats.lookahead_merged, out.map_stats.balanced);

  if (options.refine) {
    out.refine_stats = refine(state, profile.k);
    out.times.refine_ms = sw.lap_ms();
    logger().info("refine: {} swaps, {} node moves", out.refine_stats->swaps,
                 out.refine_stats->node_moves);
  }
  out.merges = state.history();
  out.primaries = state.primaries();
  out.secondaries = state.secondaries();
  return state.placement();
}

} // namespace

std::string_view to_string(Method m) {
  for (const auto &[value, name] : kMethods)
    if (value == m)
      return name;
  return "?";
}

std::string_view to_string(MemHeuristic h) {
  for (const auto &[value, name] : kHeuristics)
    if (value == h)
      return name;
  return "?";
}

Method parse_method(std::string_view name) {
  for (const auto &[value, n] : kMethods)
    if (n == name)
      return value;
  throw DagpartError(ErrorKind::Input,
                     "unknown method '" + std::string(name) + "'");
}

MemHeuristic parse_mem_heuristic(std::string_view name) {
  for (const auto &[value, n] : kHeuristics)
    if (n == name)
      return value;
  throw DagpartError(ErrorKind::Input,
                     "unknown memory heuristic '" + std::string(name) + "'");
}

PipelineResult partition(const CompGraph &g, const DeviceProfile &profile,
                         const PipelineOptions &options) {
  profile.validate();
  const std::uint32_t k = profile.k;
  PipelineResult out;
  Stopwatch total;
  Stopwatch sw;

  Placement placement;
  switch (options.method) {
  case Method::ParDnn:
    placement = run_pardnn(g, profile, options, out);
    break;
  case Method::RoundRobin:
    placement = round_robin(g, k);
    break;
  case Method::CriticalPath:
    placement = cp_heuristic(g, k);
    break;
  case Method::LinearClustering:
    placement = linear_clustering_glb(g, k);
    break;
  case Method::Oracle:
    placement = brute_force_optimal(g, k, profile).placement;
    break;
  }
  sw.lap_ms();

  if (options.mem_heuristic == MemHeuristic::Overflow) {
    Schedule s = emulate(g, placement, profile);
    MemoryTimeline tl = track(g, s, placement);
    if (tl.first_overflow(profile)) {
      ResolveResult r = resolve_overflows(g, s, placement, tl, profile);
      placement = std::move(r.placement);
      out.overflow_moves = r.moves;
      logger().info("overflow handler: {} moves, resolved={}", r.moves,
                   r.resolved);
    } else {
      out.overflow_moves = 0;
    }
  } else if (options.mem_heuristic == MemHeuristic::Balance) {
    out.balance_stats = balance_memory(g, placement);
    logger().info("memory balance: {} residual moves",
                 out.balance_stats->moves);
  }
  out.times.memory_ms = sw.lap_ms();
  const double partition_ms = total.lap_ms();

  Schedule s = emulate(g, placement, profile);
  MemoryTimeline tl = track(g, s, placement);
  out.result.method = to_string(options.method);
  out.result.placement = std::move(placement);
  out.result.makespan = s.makespan;
  out.result.partition_ms = partition_ms;
  for (const DeviceTimeline &d : tl.devices)
    out.result.peak_mem.push_back(d.peak);
  out.residual_overflow = tl.first_overflow(profile);
  out.feasible = !out.residual_overflow.has_value();
  return out;
}

PipelineResult run_pipeline(const RunConfig &config) {
  CompGraph g = load_graph(config.graph, config.profile);
  logger().info("loaded {} nodes, {} edges", g.num_real_nodes(),
               g.num_edges());
  PipelineResult r = partition(g, config.profile, config.options);

  auto open = [](const std::filesystem::path &p) {
    std::ofstream f(p);
    if (!f)
      throw DagpartError(ErrorKind::Input, "cannot write " + p.string());
    return f;
  };
  if (config.placement_out) {
    auto f = open(*config.placement_out);
    write_placement(f, g, r.result.placement);
  }
  if (config.report_out) {
    auto f = open(*config.report_out);
    write_report(f, std::span(&r.result, 1));
  }
  if (config.schedule_out || config.timeline_out) {
    Schedule s = emulate(g, r.result.placement, config.profile);
    if (config.schedule_out) {
      auto f = open(*config.schedule_out);
      write_schedule(f, g, r.result.placement, s);
    }
    if (config.timeline_out) {
      auto f = open(*config.timeline_out);
      write_timeline(f, track(g, s, r.result.placement));
    }
  }
  return r;
}

} // namespace dagpart
