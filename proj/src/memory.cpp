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
#include "dagpart/memory.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>
#include <tuple>

namespace dagpart {

namespace {

__extension__ typedef __int128 Wide;

} // namespace

// ---------------------------------------------------------------------------
// Tracker

MemoryTimeline track(const CompGraph &g, const Schedule &schedule,
                     const Placement &placement) {
  check_colocation(g, placement);
  const std::size_t n = g.num_nodes();
  const std::uint32_t k = placement.k();

  MemoryTimeline tl;
  tl.g_ = &g;
  tl.st_ = schedule.st;
  tl.ft_ = schedule.ft;
  tl.placement_ = placement;
  tl.consumers_.assign(n, {});
  tl.devices.assign(k, {});

  // Last consumer of every output on every consuming device.
  for (EdgeIndex e = 0; e < g.num_edges(); ++e) {
    if (g.edge_is_virtual(e))
      continue;
    NodeIndex src = g.edge_src(e), dst = g.edge_dst(e);
    DeviceIndex d = placement[dst];
    auto &list = tl.consumers_[src];
    auto it = std::find_if(list.begin(), list.end(),
                           [&](const auto &c) { return c.device == d; });
    auto later = [&](NodeIndex a, NodeIndex b) {
      return std::make_tuple(schedule.ft[a], schedule.st[a], g.id_rank(a)) >
             std::make_tuple(schedule.ft[b], schedule.st[b], g.id_rank(b));
    };
    if (it == list.end())
      list.push_back({d, dst, schedule.ft[dst]});
    else if (later(dst, it->last)) {
      it->last = dst;
      it->last_ft = schedule.ft[dst];
    }
  }

  std::vector<NodeIndex> by_start;
  by_start.reserve(n);
  for (NodeIndex v = 0; v < n; ++v)
    if (!g.is_virtual(v))
      by_start.push_back(v);
  std::sort(by_start.begin(), by_start.end(), [&](NodeIndex a, NodeIndex b) {
    return std::make_pair(schedule.st[a], g.id_rank(a)) <
           std::make_pair(schedule.st[b], g.id_rank(b));
  });

  auto hold = [&](DeviceIndex d, NodeIndex v, TimeNs begin, TimeNs end,
                  Bytes bytes) {
    if (end <= begin || bytes == 0)
      return;
    tl.devices[d].events.push_back({begin, bytes, v});
    tl.devices[d].events.push_back({end, -bytes, v});
  };

  for (NodeIndex v : by_start) {
    const NodeKind kind = g.kind(v);
    const Bytes mem = g.mem(v);
    if (kind == NodeKind::Reference || mem == 0)
      continue;
    const DeviceIndex home = placement[v];
    if (kind == NodeKind::Residual) {
      tl.devices[home].residual += mem;
      tl.devices[home].events.push_back({0, mem, v});
    } else {
      TimeNs end = schedule.ft[v];
      if (auto last = tl.last_consumer_finish(v, home))
        end = std::max(end, *last);
      hold(home, v, schedule.st[v], end, mem);
    }
    for (const auto &c : tl.consumers_[v])
      if (c.device != home)
        hold(c.device, v, schedule.ft[v], c.last_ft, mem);
  }

  for (DeviceTimeline &dev : tl.devices) {
    std::stable_sort(dev.events.begin(), dev.events.end(),
                     [](const MemoryEvent &a, const MemoryEvent &b) {
                       return a.time < b.time;
                     });
    Bytes running = 0;
    for (std::size_t i = 0; i < dev.events.size();) {
      const TimeNs t = dev.events[i].time;
      for (; i < dev.events.size() && dev.events[i].time == t; ++i)
        running += dev.events[i].delta;
      if (running < 0)
        throw DagpartError(ErrorKind::Structural,
                           "memory tracker went negative");
      dev.samples.push_back({t, running});
      dev.peak = std::max(dev.peak, running);
    }
  }
  return tl;
}

Bytes MemoryTimeline::mcons(DeviceIndex d, TimeNs t) const {
  const auto &s = devices[d].samples;
  auto it = std::upper_bound(
      s.begin(), s.end(), t,
      [](TimeNs value, const MemorySample &m) { return value < m.time; });
  if (it == s.begin())
    return 0;
  return std::prev(it)->mcons;
}

std::vector<OverflowEvent>
MemoryTimeline::overflows(const DeviceProfile &profile) const {
  std::vector<OverflowEvent> out;
  for (DeviceIndex d = 0; d < devices.size(); ++d) {
    const Bytes cap = profile.effective_capacity(d);
    for (const MemorySample &s : devices[d].samples)
      if (s.mcons > cap)
        out.push_back({d, s.time, s.mcons - cap});
  }
  std::sort(out.begin(), out.end(),
            [](const OverflowEvent &a, const OverflowEvent &b) {
              return std::tie(a.time, a.device) < std::tie(b.time, b.device);
            });
  return out;
}

std::optional<OverflowEvent>
MemoryTimeline::first_overflow(const DeviceProfile &profile) const {
  std::optional<OverflowEvent> best;
  for (DeviceIndex d = 0; d < devices.size(); ++d) {
    const Bytes cap = profile.effective_capacity(d);
    for (const MemorySample &s : devices[d].samples)
      if (s.mcons > cap) {
        if (!best || s.time < best->time)
          best = OverflowEvent{d, s.time, s.mcons - cap};
        break;
      }
  }
  return best;
}

std::optional<TimeNs> MemoryTimeline::last_consumer_finish(NodeIndex n,
                                                           DeviceIndex d) const {
  for (const auto &c : consumers_[n])
    if (c.device == d)
      return c.last_ft;
  return std::nullopt;
}

Bytes MemoryTimeline::potential(NodeIndex n, TimeNs t) const {
  const CompGraph &g = *g_;
  if (g.is_virtual(n))
    return 0;
  const DeviceIndex home = placement_[n];
  Bytes pot = 0;
  switch (g.kind(n)) {
  case NodeKind::Residual:
    pot += g.mem(n);
    break;
  case NodeKind::Normal:
    if (st_[n] <= t && t < ft_[n])
      pot += g.mem(n);
    break;
  case NodeKind::Reference:
    break;
  }
  for (EdgeIndex e : g.in_edges(n)) {
    if (g.edge_is_virtual(e))
      continue;
    NodeIndex a = g.edge_src(e);
    if (g.kind(a) == NodeKind::Reference || g.mem(a) == 0 || ft_[a] > t)
      continue;
    const bool local = placement_[a] == home;
    if (local && g.kind(a) == NodeKind::Residual)
      continue;
    for (const auto &c : consumers_[a]) {
      if (c.device != home || c.last != n)
        continue;
      TimeNs begin = local ? st_[a] : ft_[a];
      TimeNs end = local ? std::max(ft_[a], c.last_ft) : c.last_ft;
      if (begin <= t && t < end)
        pot += g.mem(a);
    }
  }
  return pot;
}

TimeNs move_cost(NodeIndex n, const Placement &placement, const CompGraph &g) {
  TimeNs cost = g.comp(n);
  for (EdgeIndex e : g.in_edges(n))
    if (!g.edge_is_virtual(e) && placement[g.edge_src(e)] == placement[n])
      cost += g.edge_comm(e);
  for (EdgeIndex e : g.out_edges(n))
    if (!g.edge_is_virtual(e) && placement[g.edge_dst(e)] == placement[n])
      cost += g.edge_comm(e);
  return cost;
}

// ---------------------------------------------------------------------------
// Overflow handler

namespace {

struct HeapEntry {
  long double key;
  TimeNs cost;
  std::uint32_t rank;
  NodeIndex node;

  bool operator>(const HeapEntry &o) const {
    return std::tie(key, cost, rank) > std::tie(o.key, o.cost, o.rank);
  }
};

using EntryHeap =
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>>;

void move_group(const CompGraph &g, Placement &placement, NodeIndex n,
                DeviceIndex dest, std::vector<std::uint8_t> &moved) {
  placement.assign(n, dest);
  moved[n] = 1;
  for (NodeIndex s : g.satellites(n)) {
    placement.assign(s, dest);
    moved[s] = 1;
  }
}

} // namespace

ResolveResult resolve_overflows(const CompGraph &g, const Schedule &schedule,
                                const Placement &placement,
                                const MemoryTimeline &timeline,
                                const DeviceProfile &profile) {
  ResolveResult out;
  out.placement = placement;
  out.move_count.assign(g.num_nodes(), 0);

  Schedule sched = schedule;
  MemoryTimeline tl = timeline;
  const std::uint32_t k = placement.k();

  for (;;) {
    std::optional<OverflowEvent> ov = tl.first_overflow(profile);
    if (!ov) {
      out.resolved = true;
      return out;
    }
    const DeviceIndex dev = ov->device;
    const TimeNs t = ov->time;

    EntryHeap by_ratio, by_cost;
    std::vector<Bytes> pot(g.num_nodes(), 0);
    std::vector<TimeNs> cost(g.num_nodes(), 0);
    for (NodeIndex n = 0; n < g.num_nodes(); ++n) {
      if (g.is_virtual(n) || out.placement[n] != dev || out.move_count[n] ||
          g.kind(n) == NodeKind::Reference)
        continue;
      pot[n] = tl.potential(n, t);
      if (pot[n] <= 0)
        continue;
      cost[n] = move_cost(n, out.placement, g);
      long double ratio =
          static_cast<long double>(cost[n]) / static_cast<long double>(pot[n]);
      by_ratio.push({ratio, cost[n], g.id_rank(n), n});
      if (pot[n] > ov->overflow_bytes)
        by_cost.push({static_cast<long double>(cost[n]), cost[n],
                      g.id_rank(n), n});
    }

    std::vector<std::uint8_t> dropped(g.num_nodes(), 0);
    auto pop_valid = [&](EntryHeap &heap) -> std::optional<HeapEntry> {
      while (!heap.empty()) {
        HeapEntry top = heap.top();
        heap.pop();
        if (!dropped[top.node])
          return top;
      }
      return std::nullopt;
    };

    bool moved = false;
    for (;;) {
      std::optional<HeapEntry> a = pop_valid(by_ratio);
      std::optional<HeapEntry> b = pop_valid(by_cost);
      if (!a && !b)
        break;
      NodeIndex pick;
      if (a && b) {
        if (b->cost < a->cost) {
          pick = b->node;
          by_ratio.push(*a);
        } else {
          pick = a->node;
          if (b->node != a->node)
            by_cost.push(*b);
        }
      } else {
        pick = a ? a->node : b->node;
      }
      dropped[pick] = 1;

      std::optional<DeviceIndex> dest;
      for (DeviceIndex d = 0; d < k; ++d) {
        if (d == dev || tl.peak(d) + pot[pick] > profile.effective_capacity(d))
          continue;
        if (!dest || tl.peak(d) < tl.peak(*dest))
          dest = d;
      }
      if (!dest)
        continue;
      move_group(g, out.placement, pick, *dest, out.move_count);
      ++out.moves;
      moved = true;
      break;
    }
    if (!moved) {
      out.resolved = false;
      out.residual_overflow = ov;
      return out;
    }
    sched = emulate(g, out.placement, profile);
    tl = track(g, sched, out.placement);
  }
}

// ---------------------------------------------------------------------------
// Residual balancing

MemoryShares memory_shares(const CompGraph &g, const Placement &placement) {
  MemoryShares s;
  s.residual.assign(placement.k(), 0);
  s.normal.assign(placement.k(), 0);
  for (NodeIndex n = 0; n < g.num_nodes(); ++n) {
    if (g.is_virtual(n))
      continue;
    if (g.kind(n) == NodeKind::Residual) {
      s.residual[placement[n]] += g.mem(n);
      s.total_residual += g.mem(n);
    } else if (g.kind(n) == NodeKind::Normal) {
      s.normal[placement[n]] += g.mem(n);
      s.total_normal += g.mem(n);
    }
  }
  return s;
}

namespace {

/// share_sum(d) scaled by a common positive factor so that comparisons and
/// the balance condition are exact.
struct ScaledShares {
  Wide scale;
  std::vector<Wide> sum;
  Wide per_residual_byte;
};

ScaledShares scaled(const MemoryShares &s) {
  const Wide k = static_cast<Wide>(s.residual.size());
  const Wide r = s.total_residual > 0 ? s.total_residual : 1;
  const Wide nrm = s.total_normal > 0 ? s.total_normal : 1;
  ScaledShares out;
  // share_sum * k * r * nrm
  out.scale = k * r * nrm;
  out.per_residual_byte = s.total_residual > 0 ? k * nrm : 0;
  out.sum.resize(s.residual.size());
  for (std::size_t d = 0; d < s.residual.size(); ++d) {
    Wide res = s.total_residual > 0 ? k * nrm * s.residual[d] : r * nrm;
    Wide nor = s.total_normal > 0 ? k * r * s.normal[d] : r * nrm;
    out.sum[d] = res + nor;
  }
  return out;
}

} // namespace

double MemoryShares::share_sum(DeviceIndex d) const {
  const double k = static_cast<double>(residual.size());
  double res = total_residual > 0 ? double(residual[d]) / double(total_residual)
                                  : 1.0 / k;
  double nor =
      total_normal > 0 ? double(normal[d]) / double(total_normal) : 1.0 / k;
  return res + nor;
}

bool MemoryShares::balanced() const {
  ScaledShares sc = scaled(*this);
  const Wide k = static_cast<Wide>(residual.size());
  // (k / 2) * share >= 1  <=>  k * sum >= 2 * scale
  return std::all_of(sc.sum.begin(), sc.sum.end(),
                     [&](Wide v) { return k * v >= 2 * sc.scale; });
}

BalanceStats balance_memory(const CompGraph &g, Placement &placement) {
  BalanceStats stats;
  const std::uint32_t k = placement.k();
  MemoryShares shares = memory_shares(g, placement);
  for (DeviceIndex d = 0; d < k; ++d)
    stats.max_share_before = std::max(stats.max_share_before, shares.share_sum(d));
  stats.max_share_after = stats.max_share_before;
  if (k < 2 || shares.total_residual == 0)
    return stats;

  ScaledShares sc = scaled(shares);
  using Item = std::tuple<Bytes, std::uint32_t, NodeIndex>;
  std::vector<std::set<Item>> movable(k);
  for (NodeIndex n = 0; n < g.num_nodes(); ++n)
    if (!g.is_virtual(n) && g.kind(n) == NodeKind::Residual && g.mem(n) > 0)
      movable[placement[n]].insert({g.mem(n), g.id_rank(n), n});

  const Wide kk = k;
  auto satisfied = [&](Wide v) { return kk * v >= 2 * sc.scale; };

  for (;;) {
    if (std::all_of(sc.sum.begin(), sc.sum.end(), satisfied))
      break;
    DeviceIndex hi = 0, lo = 0;
    for (DeviceIndex d = 1; d < k; ++d) {
      if (sc.sum[d] > sc.sum[hi])
        hi = d;
      if (sc.sum[d] < sc.sum[lo])
        lo = d;
    }
    if (hi == lo || movable[hi].empty())
      break;
    // max(sum[hi] - x, sum[lo] + x) is smallest for x nearest the midpoint.
    const Wide gap = sc.sum[hi] - sc.sum[lo];
    const Wide unit = sc.per_residual_byte;
    const Bytes ideal = static_cast<Bytes>(gap / (2 * unit));
    auto it = movable[hi].lower_bound({ideal, 0, 0});
    std::optional<Item> best;
    Wide best_peak = 0;
    for (auto cand : {it, it == movable[hi].begin() ? it : std::prev(it)}) {
      if (cand == movable[hi].end())
        continue;
      Wide x = unit * std::get<0>(*cand);
      Wide peak = std::max(sc.sum[hi] - x, sc.sum[lo] + x);
      if (!best || peak < best_peak) {
        best = *cand;
        best_peak = peak;
      }
    }
    if (!best || best_peak >= sc.sum[hi])
      break;
    movable[hi].erase(*best);
    const NodeIndex node = std::get<2>(*best);
    const Wide x = unit * std::get<0>(*best);
    sc.sum[hi] -= x;
    sc.sum[lo] += x;
    placement.assign(node, lo);
    for (NodeIndex s : g.satellites(node))
      placement.assign(s, lo);
    ++stats.moves;
  }
  shares = memory_shares(g, placement);
  stats.max_share_after = 0;
  for (DeviceIndex d = 0; d < k; ++d)
    stats.max_share_after = std::max(stats.max_share_after, shares.share_sum(d));
  return stats;
}

// ---------------------------------------------------------------------------
// Critical-path splitting

SplitStats split_critical_path(SliceResult &sliced, const CompGraph &g,
                               const DeviceProfile &profile) {
  SplitStats stats;
  const std::uint32_t k = profile.k;
  auto &prims = sliced.primaries;
  std::uint32_t next_id = 0;
  for (const auto *list : {&sliced.primaries, &sliced.secondaries})
    for (const Cluster &c : *list)
      next_id = std::max(next_id, c.id + 1);
  while (prims.size() < k) {
    Cluster empty;
    empty.id = next_id++;
    empty.primary = static_cast<DeviceIndex>(prims.size());
    prims.push_back(std::move(empty));
  }
  if (k < 2)
    return stats;

  std::vector<Bytes> mem(k, 0);
  for (DeviceIndex p = 0; p < k; ++p)
    for (NodeIndex v : prims[p].members)
      mem[p] += g.mem(v);
  const Bytes total = std::accumulate(mem.begin(), mem.end(), Bytes{0});
  const auto donor = static_cast<DeviceIndex>(
      std::max_element(mem.begin(), mem.end()) - mem.begin());
  stats.donor = donor;
  if (mem[donor] <= profile.effective_capacity(donor) ||
      mem[donor] * static_cast<Bytes>(k) <= total)
    return stats;
  stats.triggered = true;

  // Equal-memory target; every lighter primary asks for the difference.
  const Bytes target = total / static_cast<Bytes>(k);
  std::vector<std::pair<DeviceIndex, Bytes>> needs;
  Bytes donated = 0;
  for (DeviceIndex p = 0; p < k; ++p)
    if (p != donor && mem[p] < target) {
      needs.emplace_back(p, target - mem[p]);
      donated += target - mem[p];
    }

  const std::vector<NodeIndex> path = prims[donor].members;
  std::vector<Bytes> prefix(path.size() + 1, 0);
  for (std::size_t i = 0; i < path.size(); ++i)
    prefix[i + 1] = prefix[i] + g.mem(path[i]);

  // Cut i splits path into [0, i) and [i, n): the cut whose prefix memory is
  // nearest the cumulative goal, never before the previous cut.
  auto nearest_cut = [&](Bytes goal, std::size_t from) {
    std::size_t best = from;
    for (std::size_t i = from; i <= path.size(); ++i) {
      Bytes diff = std::abs(prefix[i] - goal);
      if (diff < std::abs(prefix[best] - goal))
        best = i;
      if (prefix[i] > goal)
        break;
    }
    return best;
  };

  Bytes goal = mem[donor] - donated;
  std::size_t cut = nearest_cut(goal, 1);
  std::vector<NodeIndex> keep(path.begin(), path.begin() + cut);
  for (std::size_t j = 0; j < needs.size(); ++j) {
    goal += needs[j].second;
    std::size_t next = j + 1 == needs.size() ? path.size()
                                             : nearest_cut(goal, cut);
    if (next > cut) {
      auto &dst = prims[needs[j].first].members;
      dst.insert(dst.end(), path.begin() + cut, path.begin() + next);
      ++stats.chunks;
    }
    cut = next;
  }
  prims[donor].members = std::move(keep);
  annotate_clusters(g, sliced.primaries, sliced.secondaries);
  return stats;
}

} // namespace dagpart
