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

#include "dagpart/fenwick.hpp"
#include "dagpart/placement.hpp"
#include "dagpart/slicer.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace dagpart {

enum class CommClass { TotallyCommunicating, MaximallyCommunicating, Neither };

struct Classification {
  CommClass kind = CommClass::Neither;
  DeviceIndex primary = 0;
};

enum class MergePhase { Lookahead, Balance };

/// One secondary-to-primary merge, in the order it happened.
struct MergeRecord {
  std::uint32_t cluster_id;
  DeviceIndex primary;
  MergePhase phase;
  /// Lookahead condition that admitted the merge: 'a', 'b' or 'c'.
  char condition = 0;
  std::uint32_t pass = 0;
};

/// Secondary clusters being merged into K primaries.
///
/// Keeps per-level work sums for each primary plus mapped and unmapped work,
/// all indexed by the cluster-context top level of each node.
class MappingState {
public:
  /// Pads \p primaries to \p k entries with empty clusters and computes
  /// criticality and span of every secondary.
  MappingState(const CompGraph &g, std::vector<Cluster> primaries,
               std::vector<Cluster> secondaries, std::uint32_t k);

  const CompGraph &graph() const { return *g_; }
  std::uint32_t k() const { return k_; }
  const std::vector<Cluster> &primaries() const { return primaries_; }
  const std::vector<Cluster> &secondaries() const { return secondaries_; }
  /// Levels with intra-cluster communication zeroed.
  const LevelAnnotations &levels() const { return lvls_; }

  /// Unmapped secondaries (positions) in criticality order.
  std::vector<std::uint32_t> unmapped() const;
  std::optional<DeviceIndex> owner(std::uint32_t sec) const;
  /// Primary currently holding \p n, or -1.
  std::int32_t node_primary(NodeIndex n) const { return node_primary_[n]; }

  TimeNs span_work(DeviceIndex p, Span span) const { return work(p, span); }
  /// span_work of every primary at once; \p out is resized to k.
  void span_work_all(Span span, std::vector<TimeNs> &out) const;
  TimeNs unmapped_work(Span span) const { return work(k_ + 1, span); }
  TimeNs mapped_work(Span span) const { return work(k_, span); }

  /// Communication of secondary \p sec with each primary (size k).
  std::vector<TimeNs> comm_with_primaries(std::uint32_t sec) const;

  void merge(std::uint32_t sec, DeviceIndex p, MergePhase phase,
             char condition = 0, std::uint32_t pass = 0);
  /// Reassign a single node; trees follow.
  void move_node(NodeIndex n, DeviceIndex p);

  /// Placement of every node; unmapped nodes land on device 0.
  Placement placement() const;
  const std::vector<MergeRecord> &history() const { return history_; }
  /// Total communication over edges whose endpoints sit on different
  /// primaries (unmapped endpoints excluded).
  TimeNs cross_primary_comm() const;

private:
  TimeNs work(std::size_t col, Span span) const {
    return span.hi <= span.lo
               ? 0
               : trees_.range(axis_->lower(span.lo), axis_->lower(span.hi), col);
  }
  void add_work(NodeIndex v, std::size_t col, TimeNs w) {
    trees_.add(rank_[v], col, w);
  }

  const CompGraph *g_;
  std::uint32_t k_;
  std::vector<Cluster> primaries_;
  std::vector<Cluster> secondaries_;
  LevelAnnotations lvls_;
  std::vector<std::int32_t> group_;
  std::vector<std::int32_t> node_primary_;
  std::vector<std::int32_t> sec_owner_;
  std::vector<std::uint32_t> criticality_order_;
  std::shared_ptr<const LevelAxis> axis_;
  /// Level rank of every node on axis_.
  std::vector<std::uint32_t> rank_;
  /// Columns 0..k-1: primaries; k: all mapped work; k+1: unmapped work.
  FenwickColumns<TimeNs> trees_;
  std::vector<MergeRecord> history_;
};

/// Whether an unmapped secondary talks only to one primary, mostly to one
/// primary (more than ext_comm / k), or neither. Zero external
/// communication classifies as Neither.
Classification classify(const MappingState &state, std::uint32_t sec);

struct MapOptions {
  double ccr_threshold = 10.0;
};

/// One locality-first lookahead pass over the unmapped secondaries. Returns
/// the number of clusters merged.
std::size_t locality_first_lookahead(MappingState &state, double ccr_value,
                                     const MapOptions &options = {},
                                     std::uint32_t pass = 0);

/// Merges every remaining secondary into the primary with the least work
/// inside its span plus communication with the other primaries.
void level_aware_balance(MappingState &state);

struct MapStats {
  std::uint32_t lookahead_passes = 0;
  std::size_t lookahead_merged = 0;
  std::size_t balanced = 0;
};

/// Repeated lookahead (at most ceil(log2 |V|) passes) followed by
/// level-aware balancing.
MapStats map_clusters(MappingState &state, double ccr_value,
                      const MapOptions &options = {});

/// Moves Reference nodes onto their referent's primary.
void colocate_references(MappingState &state);

struct RefineStats {
  std::size_t swaps = 0;
  std::size_t node_moves = 0;
  std::uint32_t node_passes = 0;
  TimeNs comm_before = 0;
  TimeNs comm_after_swaps = 0;
  TimeNs cp_before = 0;
  /// Swaps only watch communication, so this may exceed cp_before.
  TimeNs cp_after_swaps = 0;
  TimeNs cp_after = 0;
  /// Cross-primary communication after each accepted swap.
  std::vector<TimeNs> swap_trace;
  /// Critical-path proxy after each accepted node move.
  std::vector<TimeNs> move_trace;
};

struct RefineOptions {
  /// Overlapping clusters examined per cluster in the swap phase.
  std::size_t swap_window = 32;
  /// Candidate moves verified per node-level pass.
  std::size_t node_trials = 8;
};

/// Cluster swaps that cut cross-primary communication without raising the
/// span load, then k passes of critical-path boundary node moves that shorten
/// the placement-aware critical path.
RefineStats refine(MappingState &state, std::uint32_t k,
                   const RefineOptions &options = {});

} // namespace dagpart
