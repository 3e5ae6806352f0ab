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
#pragma once

#include "dagpart/baselines.hpp"
#include "dagpart/mapper.hpp"
#include "dagpart/memory.hpp"

#include <filesystem>
#include <optional>
#include <string_view>

namespace dagpart {

enum class Method { ParDnn, RoundRobin, CriticalPath, LinearClustering, Oracle };
enum class MemHeuristic { None, Overflow, Balance };

std::string_view to_string(Method m);
std::string_view to_string(MemHeuristic h);
/// Throws DagpartError(Input) for unknown names.
Method parse_method(std::string_view name);
MemHeuristic parse_mem_heuristic(std::string_view name);

/// Knobs of one partitioning run on an already loaded graph.
struct PipelineOptions {
  Method method = Method::ParDnn;
  MemHeuristic mem_heuristic = MemHeuristic::None;
  bool refine = false;
  double ccr_threshold = 10.0;
};

/// Wall-clock milliseconds spent in each stage.
struct StageTimes {
  double slice_ms = 0;
  double split_ms = 0;
  double map_ms = 0;
  double refine_ms = 0;
  double memory_ms = 0;
};

struct PipelineResult {
  PlacementResult result;
  /// No device exceeds its effective capacity in the final placement.
  bool feasible = true;
  /// First overflow left in the final placement, if any.
  std::optional<OverflowEvent> residual_overflow;
  StageTimes times;
  // Stage details; only the ones the chosen method ran are filled.
  MapStats map_stats;
  std::vector<MergeRecord> merges;
  std::vector<Cluster> primaries;
  std::vector<Cluster> secondaries;
  std::optional<RefineStats> refine_stats;
  std::optional<SplitStats> split_stats;
  std::optional<BalanceStats> balance_stats;
  std::optional<std::size_t> overflow_moves;
};

/// Runs one method on \p g and evaluates the resulting placement with the
/// shared emulator and tracker. For pardnn: slice, optional critical-path
/// split, map, reference colocation, optional refinement; then the selected
/// memory heuristic for every method.
PipelineResult partition(const CompGraph &g, const DeviceProfile &profile,
                         const PipelineOptions &options);

/// Everything one CLI invocation needs.
struct RunConfig {
  std::filesystem::path graph;
  DeviceProfile profile;
  PipelineOptions options;
  std::uint64_t seed = 1;
  std::optional<std::filesystem::path> placement_out;
  std::optional<std::filesystem::path> report_out;
  std::optional<std::filesystem::path> schedule_out;
  std::optional<std::filesystem::path> timeline_out;
};

/// Loads the graph, partitions it and writes the requested outputs.
PipelineResult run_pipeline(const RunConfig &config);

} // namespace dagpart
