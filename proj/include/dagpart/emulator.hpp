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

#include "dagpart/placement.hpp"

#include <vector>

namespace dagpart {

struct Schedule {
  std::vector<TimeNs> st;
  std::vector<TimeNs> ft;
  /// Time a node entered its device queue.
  std::vector<TimeNs> ready;
  TimeNs makespan = 0;
  /// Execution order per device, virtual endpoints included on device 0.
  std::vector<std::vector<NodeIndex>> order;

  bool operator==(const Schedule &) const = default;
};

/// Emulates a FIFO executor per device.
///
/// A node is ready once every predecessor has finished and its output has
/// arrived (cross-device edges add their transfer time, transfers overlap
/// computation and never contend). Each device runs one node at a time and
/// always starts the queued node that became ready first, ties broken by node
/// id. Throws DagpartError(Input) if \p placement does not cover \p g.
Schedule emulate(const CompGraph &g, const Placement &placement,
                 const DeviceProfile &profile);
Schedule emulate(const CompGraph &g, const Placement &placement);

/// Latest finish time over all nodes.
TimeNs makespan_of(const Schedule &schedule);

} // namespace dagpart
