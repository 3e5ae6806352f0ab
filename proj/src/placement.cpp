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
#include "dagpart/placement.hpp"

namespace dagpart {

std::map<std::string, DeviceIndex> Placement::by_name(const CompGraph &g) const {
  std::map<std::string, DeviceIndex> out;
  for (NodeIndex n = 0; n < g.num_nodes(); ++n)
    if (!g.is_virtual(n))
      out.emplace(g.name(n), device_[n]);
  return out;
}

Placement Placement::from_names(const CompGraph &g, std::uint32_t k,
                                const std::map<std::string, DeviceIndex> &map) {
  Placement p(g, k);
  std::vector<std::uint8_t> seen(g.num_nodes(), 0);
  for (const auto &[name, dev] : map) {
    NodeIndex n = g.at(name);
    if (g.is_virtual(n))
      continue;
    if (dev >= k)
      throw DagpartError(ErrorKind::Input,
                         "device " + std::to_string(dev) + " for '" + name +
                             "' is outside [0, " + std::to_string(k) + ")");
    p.assign(n, dev);
    seen[n] = 1;
  }
  for (NodeIndex n = 0; n < g.num_nodes(); ++n)
    if (!g.is_virtual(n) && !seen[n])
      throw DagpartError(ErrorKind::Input,
                         "placement is missing node '" + g.name(n) + "'");
  return p;
}

void enforce_colocation(const CompGraph &g, Placement &placement) {
  for (NodeIndex n = 0; n < g.num_nodes(); ++n)
    if (g.referent(n) != kNoNode)
      placement.assign(n, placement[g.referent(n)]);
}

void check_colocation(const CompGraph &g, const Placement &placement) {
  for (NodeIndex n = 0; n < g.num_nodes(); ++n) {
    NodeIndex r = g.referent(n);
    if (r != kNoNode && placement[n] != placement[r])
      throw DagpartError(ErrorKind::Colocation,
                         "reference node '" + g.name(n) + "' on device " +
                             std::to_string(placement[n]) + " but '" +
                             g.name(r) + "' on device " +
                             std::to_string(placement[r]));
  }
}

TimeNs cross_comm(const CompGraph &g, const Placement &placement) {
  TimeNs total = 0;
  for (EdgeIndex e = 0; e < g.num_edges(); ++e)
    if (placement[g.edge_src(e)] != placement[g.edge_dst(e)])
      total += g.edge_comm(e);
  return total;
}

} // namespace dagpart
