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

#include "dagpart/graph.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace dagpart {

/// Restricts and reweights a level computation.
struct LevelOptions {
  /// Nodes with alive[n] == 0 and their incident edges are ignored. Empty
  /// means every node is alive. Virtual endpoints are always alive.
  std::span<const std::uint8_t> alive;
  /// Edges whose endpoints share a non-negative group id cost nothing. Used
  /// for cluster contexts (group = cluster) and placements (group = device).
  std::span<const std::int32_t> group;
  /// Ignore communication entirely.
  bool zero_comm = false;
};

struct LevelAnnotations {
  std::vector<TimeNs> tl;
  std::vector<TimeNs> bl;
  std::vector<TimeNs> w_lvl;
  /// Largest w_lvl among alive nodes; the critical-path length.
  TimeNs cp_length = 0;

  /// Work counters of the last computation (both passes combined).
  std::size_t nodes_visited = 0;
  std::size_t edges_visited = 0;
};

/// Top level, bottom level and weighted level of every node.
///
/// tl is the costliest source-to-node path excluding the node, bl the costliest
/// node-to-sink path including it. Each pass visits every alive node and every
/// alive edge once.
LevelAnnotations compute_levels(const CompGraph &g,
                                const LevelOptions &options = {});

/// Communication-to-computation ratio using cross-device cost for every edge.
/// Throws DagpartError(Degenerate) when total compute is zero.
double ccr(const CompGraph &g);

/// Average degree of parallelism: total compute over the compute-only
/// critical-path length.
double dop(const CompGraph &g);

} // namespace dagpart
