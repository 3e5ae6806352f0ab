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

#include "dagpart/levels.hpp"

#include <optional>
#include <vector>

namespace dagpart {

/// Half-open interval on the top-level axis.
struct Span {
  TimeNs lo = 0;
  TimeNs hi = 0;
  bool operator==(const Span &) const = default;
};

/// A linear cluster: a directed path of nodes, or a single node.
struct Cluster {
  std::uint32_t id = 0;
  /// Path order, head first.
  std::vector<NodeIndex> members;
  /// Device index for primary clusters.
  std::optional<DeviceIndex> primary;
  TimeNs weight = 0;
  /// Communication of edges with exactly one endpoint in the cluster.
  TimeNs ext_comm = 0;
  TimeNs criticality = 0;
  Span span;

  bool is_primary() const { return primary.has_value(); }
  bool operator==(const Cluster &) const = default;
};

struct SliceResult {
  std::vector<Cluster> primaries;
  std::vector<Cluster> secondaries;
  /// Level passes after the initial one; min(k, paths extracted).
  std::size_t level_recomputations = 0;
  /// Nodes handed out by path extraction; equals the real node count.
  std::size_t nodes_extracted = 0;

  bool operator==(const SliceResult &) const = default;
};

/// Heaviest remaining path: starts at the unvisited node of largest w_lvl and
/// grows forward, then backward, always through the unvisited neighbour of
/// largest w_lvl (ties by node id) until a dead end. Virtual endpoints are
/// never part of a path. Returns an empty list when every node is visited.
std::vector<NodeIndex> find_heaviest_path(const CompGraph &g,
                                          const LevelAnnotations &lvls,
                                          std::span<const std::uint8_t> visited);

/// Splits \p g into up to \p k primary clusters (critical paths, levels
/// recomputed after each) and secondary clusters extracted without further
/// recomputation. Cluster ids are dense in extraction order.
SliceResult slice(const CompGraph &g, std::uint32_t k);

/// Group id per node (cluster id, or -1 for unclustered nodes).
std::vector<std::int32_t> cluster_groups(const CompGraph &g,
                                         std::span<const Cluster> primaries,
                                         std::span<const Cluster> secondaries);

/// Recomputes weight, ext_comm, criticality and span of every cluster using
/// levels in which edges internal to a cluster cost nothing. Returns those
/// levels.
LevelAnnotations annotate_clusters(const CompGraph &g,
                                   std::vector<Cluster> &primaries,
                                   std::vector<Cluster> &secondaries);

/// Span of a path given its levels: from the latest parent finish of the head
/// to the earliest child start of the tail.
Span cluster_span(const CompGraph &g, const LevelAnnotations &lvls,
                  std::span<const NodeIndex> members);

} // namespace dagpart
