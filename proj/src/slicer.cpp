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
#include "dagpart/slicer.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace dagpart {

namespace {

/// True if \p a should be preferred over \p b: larger w_lvl, then smaller id.
bool heavier(const CompGraph &g, const LevelAnnotations &lvls, NodeIndex a,
             NodeIndex b) {
  if (lvls.w_lvl[a] != lvls.w_lvl[b])
    return lvls.w_lvl[a] > lvls.w_lvl[b];
  return g.id_rank(a) < g.id_rank(b);
}

std::vector<NodeIndex> grow_path(const CompGraph &g,
                                 const LevelAnnotations &lvls,
                                 std::span<const std::uint8_t> visited,
                                 NodeIndex start) {
  auto open = [&](NodeIndex v) { return !g.is_virtual(v) && !visited[v]; };
  // Equal w_lvl: stay on a tight edge so the path keeps the level's length.
  auto better = [&](NodeIndex a, bool a_tight, NodeIndex b, bool b_tight) {
    if (lvls.w_lvl[a] != lvls.w_lvl[b])
      return lvls.w_lvl[a] > lvls.w_lvl[b];
    if (a_tight != b_tight)
      return a_tight;
    return g.id_rank(a) < g.id_rank(b);
  };

  std::vector<NodeIndex> forward{start};
  for (NodeIndex cur = start;;) {
    NodeIndex best = kNoNode;
    bool best_tight = false;
    for (EdgeIndex e : g.out_edges(cur)) {
      NodeIndex w = g.edge_dst(e);
      if (!open(w))
        continue;
      bool tight = lvls.tl[cur] + g.comp(cur) + g.edge_comm(e) == lvls.tl[w];
      if (best == kNoNode || better(w, tight, best, best_tight)) {
        best = w;
        best_tight = tight;
      }
    }
    if (best == kNoNode)
      break;
    forward.push_back(best);
    cur = best;
  }

  std::vector<NodeIndex> backward;
  for (NodeIndex cur = start;;) {
    NodeIndex best = kNoNode;
    bool best_tight = false;
    for (EdgeIndex e : g.in_edges(cur)) {
      NodeIndex u = g.edge_src(e);
      if (!open(u))
        continue;
      bool tight = lvls.tl[u] + g.comp(u) + g.edge_comm(e) == lvls.tl[cur];
      if (best == kNoNode || better(u, tight, best, best_tight)) {
        best = u;
        best_tight = tight;
      }
    }
    if (best == kNoNode)
      break;
    backward.push_back(best);
    cur = best;
  }

  std::vector<NodeIndex> path(backward.rbegin(), backward.rend());
  path.insert(path.end(), forward.begin(), forward.end());
  return path;
}

std::vector<NodeIndex> candidates_by_weight(const CompGraph &g,
                                            const LevelAnnotations &lvls,
                                            std::span<const std::uint8_t> visited) {
  // Sorting packed keys keeps the comparisons off the level arrays.
  struct Key {
    TimeNs w_lvl;
    std::uint32_t rank;
    NodeIndex node;
  };
  std::vector<Key> keys;
  keys.reserve(g.num_nodes());
  for (NodeIndex v = 0; v < g.num_nodes(); ++v)
    if (!g.is_virtual(v) && !visited[v])
      keys.push_back({lvls.w_lvl[v], g.id_rank(v), v});
  std::sort(keys.begin(), keys.end(), [](const Key &a, const Key &b) {
    if (a.w_lvl != b.w_lvl)
      return a.w_lvl > b.w_lvl;
    return a.rank < b.rank;
  });
  std::vector<NodeIndex> order(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i)
    order[i] = keys[i].node;
  return order;
}

Cluster make_cluster(const CompGraph &g, std::uint32_t id,
                     std::vector<NodeIndex> members) {
  Cluster c;
  c.id = id;
  c.members = std::move(members);
  for (NodeIndex v : c.members)
    c.weight += g.comp(v);
  return c;
}

} // namespace

std::vector<NodeIndex> find_heaviest_path(const CompGraph &g,
                                          const LevelAnnotations &lvls,
                                          std::span<const std::uint8_t> visited) {
  NodeIndex start = kNoNode;
  for (NodeIndex v = 0; v < g.num_nodes(); ++v) {
    if (g.is_virtual(v) || visited[v])
      continue;
    if (start == kNoNode || heavier(g, lvls, v, start))
      start = v;
  }
  if (start == kNoNode)
    return {};
  return grow_path(g, lvls, visited, start);
}

SliceResult slice(const CompGraph &g, std::uint32_t k) {
  if (k < 1)
    throw DagpartError(ErrorKind::Input, "slice needs k >= 1");
  SliceResult out;
  std::vector<std::uint8_t> visited(g.num_nodes(), 0);
  // Levels are computed on the remaining graph: alive = !visited.
  std::vector<std::uint8_t> alive(g.num_nodes(), 1);

  LevelOptions opts;
  opts.alive = alive;
  LevelAnnotations lvls = compute_levels(g, opts);
  std::vector<NodeIndex> order = candidates_by_weight(g, lvls, visited);
  std::size_t cursor = 0;
  std::uint32_t next_id = 0;
  std::size_t remaining = g.num_real_nodes();

  while (remaining > 0) {
    while (visited[order[cursor]])
      ++cursor;
    std::vector<NodeIndex> path = grow_path(g, lvls, visited, order[cursor]);
    for (NodeIndex v : path) {
      visited[v] = 1;
      alive[v] = 0;
    }
    remaining -= path.size();
    out.nodes_extracted += path.size();

    Cluster c = make_cluster(g, next_id++, std::move(path));
    if (out.primaries.size() < k) {
      c.primary = static_cast<DeviceIndex>(out.primaries.size());
      out.primaries.push_back(std::move(c));
      lvls = compute_levels(g, opts);
      ++out.level_recomputations;
      order = candidates_by_weight(g, lvls, visited);
      cursor = 0;
    } else {
      out.secondaries.push_back(std::move(c));
    }
  }
  annotate_clusters(g, out.primaries, out.secondaries);
  return out;
}

std::vector<std::int32_t> cluster_groups(const CompGraph &g,
                                         std::span<const Cluster> primaries,
                                         std::span<const Cluster> secondaries) {
  std::vector<std::int32_t> group(g.num_nodes(), -1);
  for (auto list : {primaries, secondaries})
    for (const Cluster &c : list)
      for (NodeIndex v : c.members)
        group[v] = static_cast<std::int32_t>(c.id);
  return group;
}

Span cluster_span(const CompGraph &g, const LevelAnnotations &lvls,
                  std::span<const NodeIndex> members) {
  Span span;
  if (members.empty())
    return span;
  NodeIndex head = members.front();
  NodeIndex tail = members.back();
  for (EdgeIndex e : g.in_edges(head)) {
    NodeIndex p = g.edge_src(e);
    span.lo = std::max(span.lo, lvls.tl[p] + g.comp(p));
  }
  span.hi = std::numeric_limits<TimeNs>::max();
  for (EdgeIndex e : g.out_edges(tail))
    span.hi = std::min(span.hi, lvls.tl[g.edge_dst(e)]);
  if (span.hi == std::numeric_limits<TimeNs>::max())
    span.hi = lvls.tl[g.sink()];
  return span;
}

LevelAnnotations annotate_clusters(const CompGraph &g,
                                   std::vector<Cluster> &primaries,
                                   std::vector<Cluster> &secondaries) {
  std::vector<std::int32_t> group = cluster_groups(g, primaries, secondaries);
  LevelOptions opts;
  opts.group = group;
  LevelAnnotations lvls = compute_levels(g, opts);

  // Cluster id -> position, for ext_comm accumulation.
  std::size_t max_id = 0;
  for (auto *list : {&primaries, &secondaries})
    for (const Cluster &c : *list)
      max_id = std::max<std::size_t>(max_id, c.id + 1);
  std::vector<Cluster *> by_id(max_id, nullptr);
  for (auto *list : {&primaries, &secondaries})
    for (Cluster &c : *list) {
      by_id[c.id] = &c;
      c.ext_comm = 0;
      c.weight = 0;
      for (NodeIndex v : c.members)
        c.weight += g.comp(v);
    }
  for (EdgeIndex e = 0; e < g.num_edges(); ++e) {
    if (g.edge_is_virtual(e))
      continue;
    std::int32_t a = group[g.edge_src(e)];
    std::int32_t b = group[g.edge_dst(e)];
    if (a == b)
      continue;
    if (a >= 0)
      by_id[a]->ext_comm += g.edge_comm(e);
    if (b >= 0)
      by_id[b]->ext_comm += g.edge_comm(e);
  }

  for (auto *list : {&primaries, &secondaries})
    for (Cluster &c : *list) {
      if (c.members.empty()) {
        c.criticality = 0;
        c.span = {};
        continue;
      }
      NodeIndex head = c.members.front();
      NodeIndex tail = c.members.back();
      c.criticality = lvls.tl[head] + c.weight + lvls.bl[tail] - g.comp(tail);
      c.span = cluster_span(g, lvls, c.members);
    }
  return lvls;
}

} // namespace dagpart
