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
#include "dagpart/baselines.hpp"

#include "dagpart/levels.hpp"
#include "dagpart/memory.hpp"
#include "dagpart/slicer.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace dagpart {

PlacementResult evaluate(const CompGraph &g, const Placement &placement,
                         const DeviceProfile &profile, std::string method,
                         double partition_ms) {
  PlacementResult r;
  r.method = std::move(method);
  r.placement = placement;
  r.partition_ms = partition_ms;
  Schedule s = emulate(g, placement, profile);
  r.makespan = s.makespan;
  MemoryTimeline tl = track(g, s, placement);
  for (const DeviceTimeline &d : tl.devices)
    r.peak_mem.push_back(d.peak);
  return r;
}

Placement round_robin(const CompGraph &g, std::uint32_t k) {
  if (k < 1)
    throw DagpartError(ErrorKind::Input, "k must be at least 1");
  Placement p(g, k);
  std::uint32_t i = 0;
  for (NodeIndex v : g.topo_order())
    if (!g.is_virtual(v))
      p.assign(v, i++ % k);
  enforce_colocation(g, p);
  return p;
}

namespace {

/// Device with the least load; ties go to the lowest index.
DeviceIndex least_loaded(const std::vector<TimeNs> &load) {
  return static_cast<DeviceIndex>(std::min_element(load.begin(), load.end()) -
                                  load.begin());
}

} // namespace

Placement cp_heuristic(const CompGraph &g, std::uint32_t k) {
  if (k < 1)
    throw DagpartError(ErrorKind::Input, "k must be at least 1");
  Placement p(g, k);
  std::vector<std::uint8_t> on_cp(g.num_nodes(), 0);
  LevelAnnotations lvls = compute_levels(g);
  std::vector<TimeNs> load(k, 0);
  for (NodeIndex v : find_heaviest_path(g, lvls, on_cp)) {
    on_cp[v] = 1;
    load[0] += g.comp(v);
  }
  for (NodeIndex v : g.topo_order()) {
    if (g.is_virtual(v) || on_cp[v])
      continue;
    DeviceIndex d = least_loaded(load);
    p.assign(v, d);
    load[d] += g.comp(v);
  }
  enforce_colocation(g, p);
  return p;
}

LinearClustering linear_clustering(const CompGraph &g) {
  LinearClustering out;
  std::vector<std::uint8_t> visited(g.num_nodes(), 0);
  std::vector<std::uint8_t> alive(g.num_nodes(), 1);
  LevelOptions opts;
  opts.alive = alive;
  std::size_t remaining = g.num_real_nodes();
  while (remaining > 0) {
    LevelAnnotations lvls = compute_levels(g, opts);
    ++out.iterations;
    std::vector<NodeIndex> path = find_heaviest_path(g, lvls, visited);
    for (NodeIndex v : path) {
      visited[v] = 1;
      alive[v] = 0;
    }
    remaining -= path.size();
    out.clusters.push_back(std::move(path));
  }
  return out;
}

Placement linear_clustering_glb(const CompGraph &g, std::uint32_t k) {
  if (k < 1)
    throw DagpartError(ErrorKind::Input, "k must be at least 1");
  LinearClustering lc = linear_clustering(g);
  std::vector<TimeNs> weight(lc.clusters.size(), 0);
  for (std::size_t c = 0; c < lc.clusters.size(); ++c)
    for (NodeIndex v : lc.clusters[c])
      weight[c] += g.comp(v);
  std::vector<std::size_t> order(lc.clusters.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return weight[a] > weight[b];
                   });

  Placement p(g, k);
  std::vector<TimeNs> load(k, 0);
  for (std::size_t c : order) {
    DeviceIndex d = least_loaded(load);
    for (NodeIndex v : lc.clusters[c])
      p.assign(v, d);
    load[d] += weight[c];
  }
  enforce_colocation(g, p);
  return p;
}

// ---------------------------------------------------------------------------
// Oracle

namespace {

/// Walks restricted-growth strings in lexicographic order: a[0] = 0 and
/// a[i] <= max(a[0..i)) + 1, capped at k - 1.
class RgsCursor {
public:
  RgsCursor(std::size_t n, std::uint32_t k) : a_(n, 0), max_(n, 0), k_(k) {}

  const std::vector<std::uint32_t> &value() const { return a_; }

  bool next() {
    for (std::size_t i = a_.size(); i-- > 1;) {
      std::uint32_t cap = std::min(max_[i - 1] + 1, k_ - 1);
      if (a_[i] < cap) {
        ++a_[i];
        max_[i] = std::max(max_[i - 1], a_[i]);
        for (std::size_t j = i + 1; j < a_.size(); ++j) {
          a_[j] = 0;
          max_[j] = max_[i];
        }
        return true;
      }
    }
    return false;
  }

private:
  std::vector<std::uint32_t> a_;
  std::vector<std::uint32_t> max_;
  std::uint32_t k_;
};

struct OracleSetup {
  std::vector<NodeIndex> nodes;
};

OracleSetup oracle_setup(const CompGraph &g, std::uint32_t k) {
  if (k < 1)
    throw DagpartError(ErrorKind::Input, "k must be at least 1");
  if (g.num_real_nodes() > kOracleMaxNodes || k > kOracleMaxDevices)
    throw DagpartError(ErrorKind::SizeGuard,
                       "oracle limited to " + std::to_string(kOracleMaxNodes) +
                           " nodes and " + std::to_string(kOracleMaxDevices) +
                           " devices");
  OracleSetup s;
  for (NodeIndex v = 0; v < g.num_nodes(); ++v)
    if (!g.is_virtual(v))
      s.nodes.push_back(v);
  std::sort(s.nodes.begin(), s.nodes.end(), [&](NodeIndex a, NodeIndex b) {
    return g.id_rank(a) < g.id_rank(b);
  });
  return s;
}

/// Applies an assignment; false when it separates a Reference node from its
/// referent.
bool apply(const CompGraph &g, const OracleSetup &s,
           const std::vector<std::uint32_t> &a, Placement &p) {
  for (std::size_t i = 0; i < s.nodes.size(); ++i)
    p.assign(s.nodes[i], a[i]);
  for (NodeIndex v : s.nodes)
    if (g.kind(v) == NodeKind::Reference && p[v] != p[g.referent(v)])
      return false;
  return true;
}

} // namespace

OracleResult brute_force_optimal_serial(const CompGraph &g, std::uint32_t k,
                                        const DeviceProfile &profile) {
  OracleSetup s = oracle_setup(g, k);
  OracleResult best;
  best.placement = Placement(g, k);
  best.makespan = std::numeric_limits<TimeNs>::max();
  Placement p(g, k);
  RgsCursor cur(s.nodes.size(), k);
  do {
    if (!apply(g, s, cur.value(), p))
      continue;
    ++best.evaluated;
    TimeNs m = emulate(g, p, profile).makespan;
    if (m < best.makespan) {
      best.makespan = m;
      best.placement = p;
    }
  } while (cur.next());
  return best;
}

OracleResult brute_force_optimal(const CompGraph &g, std::uint32_t k,
                                 const DeviceProfile &profile) {
  OracleSetup s = oracle_setup(g, k);
  std::vector<Placement> all;
  Placement p(g, k);
  RgsCursor cur(s.nodes.size(), k);
  do {
    if (apply(g, s, cur.value(), p))
      all.push_back(p);
  } while (cur.next());

  std::vector<TimeNs> spans = batch_makespans(g, all, profile);
  // First minimum = lexicographically smallest, since enumeration is ordered.
  auto it = std::min_element(spans.begin(), spans.end());
  OracleResult best;
  best.evaluated = all.size();
  best.makespan = *it;
  best.placement = std::move(all[static_cast<std::size_t>(it - spans.begin())]);
  return best;
}

std::vector<TimeNs> batch_makespans_serial(const CompGraph &g,
                                           std::span<const Placement> placements,
                                           const DeviceProfile &profile) {
  std::vector<TimeNs> out(placements.size());
  for (std::size_t i = 0; i < placements.size(); ++i)
    out[i] = emulate(g, placements[i], profile).makespan;
  return out;
}

std::vector<TimeNs> batch_makespans(const CompGraph &g,
                                    std::span<const Placement> placements,
                                    const DeviceProfile &profile) {
  std::vector<TimeNs> out(placements.size());
  const auto n = static_cast<std::ptrdiff_t>(placements.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] =
        emulate(g, placements[static_cast<std::size_t>(i)], profile).makespan;
  return out;
}

} // namespace dagpart
