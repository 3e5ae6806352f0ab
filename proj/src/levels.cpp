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
#include "dagpart/levels.hpp"

#include <algorithm>

namespace dagpart {

LevelAnnotations compute_levels(const CompGraph &g,
                                const LevelOptions &options) {
  const std::size_t n = g.num_nodes();
  LevelAnnotations out;
  out.tl.assign(n, 0);
  out.bl.assign(n, 0);
  out.w_lvl.assign(n, 0);

  auto alive = [&](NodeIndex v) {
    return options.alive.empty() || g.is_virtual(v) || options.alive[v] != 0;
  };
  auto edge_cost = [&](EdgeIndex e) -> TimeNs {
    if (options.zero_comm)
      return 0;
    if (!options.group.empty()) {
      std::int32_t a = options.group[g.edge_src(e)];
      std::int32_t b = options.group[g.edge_dst(e)];
      if (a >= 0 && a == b)
        return 0;
    }
    return g.edge_comm(e);
  };

  auto order = g.topo_order();
  for (NodeIndex v : order) {
    if (!alive(v))
      continue;
    ++out.nodes_visited;
    TimeNs best = 0;
    for (EdgeIndex e : g.in_edges(v)) {
      NodeIndex u = g.edge_src(e);
      if (!alive(u))
        continue;
      ++out.edges_visited;
      best = std::max(best, out.tl[u] + g.comp(u) + edge_cost(e));
    }
    out.tl[v] = best;
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    NodeIndex v = *it;
    if (!alive(v))
      continue;
    ++out.nodes_visited;
    TimeNs best = 0;
    for (EdgeIndex e : g.out_edges(v)) {
      NodeIndex w = g.edge_dst(e);
      if (!alive(w))
        continue;
      ++out.edges_visited;
      best = std::max(best, edge_cost(e) + out.bl[w]);
    }
    out.bl[v] = g.comp(v) + best;
    out.w_lvl[v] = out.tl[v] + out.bl[v];
    out.cp_length = std::max(out.cp_length, out.w_lvl[v]);
  }
  return out;
}

double ccr(const CompGraph &g) {
  if (g.total_comp() <= 0)
    throw DagpartError(ErrorKind::Degenerate,
                       "CCR is undefined for a graph with zero computation");
  return static_cast<double>(g.total_comm()) /
         static_cast<double>(g.total_comp());
}

double dop(const CompGraph &g) {
  LevelOptions opts;
  opts.zero_comm = true;
  TimeNs cp = compute_levels(g, opts).cp_length;
  if (cp <= 0)
    throw DagpartError(ErrorKind::Degenerate,
                       "DoP is undefined for a zero-length critical path");
  return static_cast<double>(g.total_comp()) / static_cast<double>(cp);
}

} // namespace dagpart
