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
#include "dagpart/emulator.hpp"

#include <algorithm>
#include <queue>
#include <tuple>

namespace dagpart {

namespace {

enum class EventType : std::uint8_t { Finish, Arrive };

struct Event {
  TimeNs time;
  EventType type;
  std::uint32_t rank;
  NodeIndex node;

  bool operator>(const Event &o) const {
    return std::tie(time, type, rank) > std::tie(o.time, o.type, o.rank);
  }
};

struct Queued {
  TimeNs ready;
  std::uint32_t rank;
  NodeIndex node;

  bool operator>(const Queued &o) const {
    return std::tie(ready, rank) > std::tie(o.ready, o.rank);
  }
};

template <typename T>
using MinHeap = std::priority_queue<T, std::vector<T>, std::greater<T>>;

} // namespace

Schedule emulate(const CompGraph &g, const Placement &placement,
                 const DeviceProfile &profile) {
  const std::size_t n = g.num_nodes();
  if (placement.size() != n)
    throw DagpartError(ErrorKind::Input,
                       "placement does not cover every node of the graph");
  const std::uint32_t k = placement.k();
  for (NodeIndex v = 0; v < n; ++v)
    if (placement[v] >= k)
      throw DagpartError(ErrorKind::Input,
                         "node '" + g.name(v) + "' placed on device " +
                             std::to_string(placement[v]) + " >= k");

  Schedule s;
  s.st.assign(n, 0);
  s.ft.assign(n, 0);
  s.ready.assign(n, 0);
  s.order.assign(k, {});

  std::vector<std::uint32_t> pending(n);
  for (NodeIndex v = 0; v < n; ++v)
    pending[v] = static_cast<std::uint32_t>(g.in_edges(v).size());

  MinHeap<Event> events;
  std::vector<MinHeap<Queued>> queues(k);
  std::vector<std::uint8_t> busy(k, 0);

  for (NodeIndex v = 0; v < n; ++v)
    if (pending[v] == 0)
      events.push({0, EventType::Arrive, g.id_rank(v), v});

  std::size_t finished = 0;
  while (!events.empty()) {
    const TimeNs now = events.top().time;
    while (!events.empty() && events.top().time == now) {
      Event ev = events.top();
      events.pop();
      const DeviceIndex dev = placement[ev.node];
      if (ev.type == EventType::Arrive) {
        queues[dev].push({s.ready[ev.node], g.id_rank(ev.node), ev.node});
        continue;
      }
      busy[dev] = 0;
      ++finished;
      for (EdgeIndex e : g.out_edges(ev.node)) {
        NodeIndex w = g.edge_dst(e);
        bool cross = placement[w] != dev;
        TimeNs arrival =
            now + (g.edge_is_virtual(e)
                       ? 0
                       : comm_cost(g.edge_bytes(e), profile, cross));
        s.ready[w] = std::max(s.ready[w], arrival);
        if (--pending[w] == 0)
          events.push({s.ready[w], EventType::Arrive, g.id_rank(w), w});
      }
    }
    for (DeviceIndex d = 0; d < k; ++d) {
      if (busy[d] || queues[d].empty())
        continue;
      Queued q = queues[d].top();
      queues[d].pop();
      busy[d] = 1;
      s.st[q.node] = now;
      s.ft[q.node] = now + g.comp(q.node);
      s.order[d].push_back(q.node);
      events.push({s.ft[q.node], EventType::Finish, g.id_rank(q.node), q.node});
    }
  }
  if (finished != n)
    throw DagpartError(ErrorKind::Structural,
                       "emulation stalled; graph is not a DAG");
  s.makespan = makespan_of(s);
  return s;
}

Schedule emulate(const CompGraph &g, const Placement &placement) {
  return emulate(g, placement, g.profile());
}

TimeNs makespan_of(const Schedule &schedule) {
  TimeNs best = 0;
  for (TimeNs t : schedule.ft)
    best = std::max(best, t);
  return best;
}

} // namespace dagpart
