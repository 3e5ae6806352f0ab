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

#include <map>
#include <string>
#include <vector>

namespace dagpart {

/// Total map from node index to device. Virtual endpoints live on device 0.
class Placement {
public:
  Placement() = default;
  Placement(const CompGraph &g, std::uint32_t k)
      : k_(k), device_(g.num_nodes(), 0) {}

  std::uint32_t k() const { return k_; }
  std::size_t size() const { return device_.size(); }
  DeviceIndex operator[](NodeIndex n) const { return device_[n]; }
  void assign(NodeIndex n, DeviceIndex d) { device_[n] = d; }
  const std::vector<DeviceIndex> &devices() const { return device_; }

  bool operator==(const Placement &) const = default;

  /// Name-keyed view without the virtual endpoints, sorted by node id.
  std::map<std::string, DeviceIndex> by_name(const CompGraph &g) const;
  static Placement from_names(const CompGraph &g, std::uint32_t k,
                              const std::map<std::string, DeviceIndex> &map);

private:
  std::uint32_t k_ = 1;
  std::vector<DeviceIndex> device_;
};

/// Move every Reference node onto its referent's device.
void enforce_colocation(const CompGraph &g, Placement &placement);

/// Throws DagpartError(Colocation) if a Reference node sits apart from its
/// referent.
void check_colocation(const CompGraph &g, const Placement &placement);

/// Sum of edge communication crossing devices.
TimeNs cross_comm(const CompGraph &g, const Placement &placement);

} // namespace dagpart
