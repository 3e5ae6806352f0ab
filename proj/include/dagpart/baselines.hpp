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

#include "dagpart/emulator.hpp"

#include <span>
#include <string>
#include <vector>

namespace dagpart {

/// A placement together with its measured quality. Makespan and peaks always
/// come from emulate() and track(), never from the method itself.
struct PlacementResult {
  std::string method;
  Placement placement;
  TimeNs makespan = 0;
  std::vector<Bytes> peak_mem;
  double partition_ms = 0;
};

/// Emulates and tracks \p placement, filling makespan and peak_mem.
PlacementResult evaluate(const CompGraph &g, const Placement &placement,
                         const DeviceProfile &profile, std::string method = {},
                         double partition_ms = 0);

/// Nodes in topological order (ties by id), node i on device i mod k.
Placement round_robin(const CompGraph &g, std::uint32_t k);

/// Critical path on device 0, every other node in topological order on the
/// device with the least compute so far.
Placement cp_heuristic(const CompGraph &g, std::uint32_t k);

struct LinearClustering {
  std::vector<std::vector<NodeIndex>> clusters;
  /// One level computation per extracted cluster.
  std::size_t iterations = 0;
};

/// Full linear clustering: the heaviest path is extracted with fresh levels
/// every time until no node remains.
LinearClustering linear_clustering(const CompGraph &g);

/// Linear clustering followed by guided load balancing: clusters, heaviest
/// first, go to the device with the least accumulated compute.
Placement linear_clustering_glb(const CompGraph &g, std::uint32_t k);

/// Upper bounds of the exhaustive search.
inline constexpr std::size_t kOracleMaxNodes = 12;
inline constexpr std::uint32_t kOracleMaxDevices = 3;

struct OracleResult {
  Placement placement;
  TimeNs makespan = 0;
  /// Placements emulated (one per device-relabeling class).
  std::size_t evaluated = 0;
};

/// Exhaustive search over all placements up to device relabeling. Among
/// placements of equal makespan the lexicographically smallest assignment
/// (nodes in id order) wins. Throws DagpartError(SizeGuard) beyond
/// kOracleMaxNodes real nodes or kOracleMaxDevices devices.
OracleResult brute_force_optimal(const CompGraph &g, std::uint32_t k,
                                 const DeviceProfile &profile);

/// Single-threaded reference of brute_force_optimal.
OracleResult brute_force_optimal_serial(const CompGraph &g, std::uint32_t k,
                                        const DeviceProfile &profile);

/// Makespan of every placement, evaluated concurrently when OpenMP is
/// available.
std::vector<TimeNs> batch_makespans(const CompGraph &g,
                                    std::span<const Placement> placements,
                                    const DeviceProfile &profile);

/// Single-threaded reference of batch_makespans.
std::vector<TimeNs> batch_makespans_serial(const CompGraph &g,
                                           std::span<const Placement> placements,
                                           const DeviceProfile &profile);

} // namespace dagpart
