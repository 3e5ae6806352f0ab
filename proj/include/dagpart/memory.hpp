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
#include "dagpart/slicer.hpp"

#include <optional>
#include <vector>

namespace dagpart {

struct MemoryEvent {
  TimeNs time;
  Bytes delta;
  NodeIndex node;
};

/// M_cons right after every event at \p time has been applied.
struct MemorySample {
  TimeNs time;
  Bytes mcons;
};

struct DeviceTimeline {
  std::vector<MemoryEvent> events;
  std::vector<MemorySample> samples;
  /// Bytes pinned by Residual nodes placed on this device.
  Bytes residual = 0;
  Bytes peak = 0;
};

struct OverflowEvent {
  DeviceIndex device;
  TimeNs time;
  /// M_cons minus the effective capacity; always positive.
  Bytes overflow_bytes;
};

/// Per-device memory consumption over an emulated schedule.
///
/// Memory is held over half-open intervals [begin, end):
///  - a Residual output for the whole run on its device;
///  - a Normal output on its own device from its start until the later of its
///    finish and the finish of its last consumer there;
///  - a copy of any non-Reference output on every other device that consumes
///    it, from the producer's finish until the last consumer there finishes.
/// Reference nodes hold nothing.
class MemoryTimeline {
public:
  std::vector<DeviceTimeline> devices;

  Bytes mcons(DeviceIndex d, TimeNs t) const;
  Bytes peak(DeviceIndex d) const { return devices[d].peak; }

  /// Every sample above the effective capacity, earliest first (ties by
  /// device).
  std::vector<OverflowEvent> overflows(const DeviceProfile &profile) const;
  std::optional<OverflowEvent> first_overflow(const DeviceProfile &profile) const;

  /// Memory a node pins on its device at time \p t: its own output while it
  /// runs (always, for Residual nodes) plus the outputs of direct ancestors
  /// already executed whose last consumer on this device is \p n.
  Bytes potential(NodeIndex n, TimeNs t) const;

  /// Finish time of the last consumer of \p n on device \p d, if any.
  std::optional<TimeNs> last_consumer_finish(NodeIndex n, DeviceIndex d) const;

private:
  friend MemoryTimeline track(const CompGraph &, const Schedule &,
                              const Placement &);
  struct Consumer {
    DeviceIndex device;
    NodeIndex last;
    TimeNs last_ft;
  };

  const CompGraph *g_ = nullptr;
  std::vector<TimeNs> st_;
  std::vector<TimeNs> ft_;
  Placement placement_;
  std::vector<std::vector<Consumer>> consumers_;
};

/// Builds the memory timeline in one pass over nodes ordered by start time.
/// The returned object refers to \p g, which must outlive it.
/// Throws DagpartError(Colocation) when a Reference node is placed apart
/// from its referent.
MemoryTimeline track(const CompGraph &g, const Schedule &schedule,
                     const Placement &placement);

/// comp(n) plus the communication of n's edges to neighbours on n's device.
TimeNs move_cost(NodeIndex n, const Placement &placement, const CompGraph &g);

struct ResolveResult {
  Placement placement;
  bool resolved = false;
  /// The overflow that could not be removed when resolved is false.
  std::optional<OverflowEvent> residual_overflow;
  std::size_t moves = 0;
  /// Moves per node; never above one.
  std::vector<std::uint8_t> move_count;
};

/// Greedy min-knapsack overflow handler. Overflows are handled earliest
/// first; at each one the cheapest node (by move_cost / potential, or by
/// move_cost among nodes whose potential alone covers the overflow) is moved
/// to the least loaded device that can absorb it, then the schedule and the
/// timeline are rebuilt. A node moves at most once; Reference nodes travel
/// with their referent.
ResolveResult resolve_overflows(const CompGraph &g, const Schedule &schedule,
                                const Placement &placement,
                                const MemoryTimeline &timeline,
                                const DeviceProfile &profile);

/// Residual and Normal memory held per device (sum of out_mem).
struct MemoryShares {
  std::vector<Bytes> residual;
  std::vector<Bytes> normal;
  Bytes total_residual = 0;
  Bytes total_normal = 0;

  /// residual share + normal share of device \p d; a kind with no memory at
  /// all counts as evenly spread.
  double share_sum(DeviceIndex d) const;
  /// (k / 2) * share_sum(d) >= 1 for every device.
  bool balanced() const;
};

MemoryShares memory_shares(const CompGraph &g, const Placement &placement);

struct BalanceStats {
  std::size_t moves = 0;
  double max_share_before = 0;
  double max_share_after = 0;
};

/// Moves Residual nodes (with their Reference satellites) from the device with
/// the largest share sum to the one with the smallest until every device
/// satisfies the balance condition or no move lowers the larger of the two.
/// Each node moves at most once.
BalanceStats balance_memory(const CompGraph &g, Placement &placement);

struct SplitStats {
  bool triggered = false;
  std::uint32_t donor = 0;
  std::size_t chunks = 0;
};

/// Hands contiguous chunks of the most memory-hungry primary to every lighter
/// primary when its estimated memory (sum of out_mem) exceeds the effective
/// capacity. Pads the primaries to k entries first; new clusters get fresh
/// ids.
SplitStats split_critical_path(SliceResult &sliced, const CompGraph &g,
                               const DeviceProfile &profile);

} // namespace dagpart
