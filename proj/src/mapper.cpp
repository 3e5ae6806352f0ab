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
#include "dagpart/mapper.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <numeric>
#include <unordered_set>

namespace dagpart {

MappingState::MappingState(const CompGraph &g, std::vector<Cluster> primaries,
                           std::vector<Cluster> secondaries, std::uint32_t k)
    : g_(&g), k_(k), primaries_(std::move(primaries)),
      secondaries_(std::move(secondaries)) {
  if (k_ < 1)
    throw DagpartError(ErrorKind::Input, "mapping needs k >= 1");
  if (primaries_.size() > k_)
    throw DagpartError(ErrorKind::Input, "more primaries than devices");
  std::uint32_t next_id = 0;
  for (auto *list : {&primaries_, &secondaries_})
    for (const Cluster &c : *list)
      next_id = std::max(next_id, c.id + 1);
  while (primaries_.size() < k_) {
    Cluster empty;
    empty.id = next_id++;
    primaries_.push_back(std::move(empty));
  }
  for (DeviceIndex p = 0; p < k_; ++p)
    primaries_[p].primary = p;
  for (Cluster &c : secondaries_)
    c.primary.reset();

  lvls_ = annotate_clusters(g, primaries_, secondaries_);
  group_ = cluster_groups(g, primaries_, secondaries_);

  std::vector<TimeNs> levels;
  levels.reserve(g.num_nodes());
  for (NodeIndex v = 0; v < g.num_nodes(); ++v)
    levels.push_back(lvls_.tl[v]);
  axis_ = std::make_shared<LevelAxis>(std::move(levels));
  rank_.resize(g.num_nodes());
  for (NodeIndex v = 0; v < g.num_nodes(); ++v)
    rank_[v] = static_cast<std::uint32_t>(axis_->rank(lvls_.tl[v]));
  trees_ = FenwickColumns<TimeNs>(axis_->size(), k_ + 2);

  node_primary_.assign(g.num_nodes(), -1);
  for (DeviceIndex p = 0; p < k_; ++p)
    for (NodeIndex v : primaries_[p].members) {
      node_primary_[v] = static_cast<std::int32_t>(p);
      add_work(v, p, g.comp(v));
      add_work(v, k_, g.comp(v));
    }
  for (const Cluster &c : secondaries_)
    for (NodeIndex v : c.members)
      add_work(v, k_ + 1, g.comp(v));

  sec_owner_.assign(secondaries_.size(), -1);
  criticality_order_.resize(secondaries_.size());
  std::iota(criticality_order_.begin(), criticality_order_.end(), 0u);
  std::stable_sort(criticality_order_.begin(), criticality_order_.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     const Cluster &ca = secondaries_[a];
                     const Cluster &cb = secondaries_[b];
                     if (ca.criticality != cb.criticality)
                       return ca.criticality > cb.criticality;
                     return ca.id < cb.id;
                   });
}

std::vector<std::uint32_t> MappingState::unmapped() const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t s : criticality_order_)
    if (sec_owner_[s] < 0)
      out.push_back(s);
  return out;
}

std::optional<DeviceIndex> MappingState::owner(std::uint32_t sec) const {
  if (sec_owner_[sec] < 0)
    return std::nullopt;
  return static_cast<DeviceIndex>(sec_owner_[sec]);
}

std::vector<TimeNs> MappingState::comm_with_primaries(std::uint32_t sec) const {
  std::vector<TimeNs> comm(k_, 0);
  const Cluster &c = secondaries_[sec];
  const std::int32_t self = static_cast<std::int32_t>(c.id);
  auto visit = [&](EdgeIndex e, NodeIndex other) {
    if (g_->edge_is_virtual(e) || group_[other] == self)
      return;
    if (node_primary_[other] >= 0)
      comm[node_primary_[other]] += g_->edge_comm(e);
  };
  for (NodeIndex v : c.members) {
    for (EdgeIndex e : g_->out_edges(v))
      visit(e, g_->edge_dst(e));
    for (EdgeIndex e : g_->in_edges(v))
      visit(e, g_->edge_src(e));
  }
  return comm;
}

void MappingState::span_work_all(Span span, std::vector<TimeNs> &out) const {
  std::vector<TimeNs> all(k_ + 2);
  if (span.lo < span.hi)
    trees_.range_all(axis_->lower(span.lo), axis_->lower(span.hi), all.data());
  out.assign(all.begin(), all.begin() + k_);
}

void MappingState::merge(std::uint32_t sec, DeviceIndex p, MergePhase phase,
                         char condition, std::uint32_t pass) {
  if (sec_owner_[sec] >= 0)
    throw DagpartError(ErrorKind::Input, "secondary cluster already mapped");
  sec_owner_[sec] = static_cast<std::int32_t>(p);
  for (NodeIndex v : secondaries_[sec].members) {
    node_primary_[v] = static_cast<std::int32_t>(p);
    add_work(v, k_ + 1, -g_->comp(v));
    add_work(v, k_, g_->comp(v));
    add_work(v, p, g_->comp(v));
  }
  history_.push_back({secondaries_[sec].id, p, phase, condition, pass});
}

void MappingState::move_node(NodeIndex n, DeviceIndex p) {
  std::int32_t old = node_primary_[n];
  if (old < 0)
    throw DagpartError(ErrorKind::Input, "cannot move an unmapped node");
  if (old == static_cast<std::int32_t>(p))
    return;
  add_work(n, static_cast<std::size_t>(old), -g_->comp(n));
  add_work(n, p, g_->comp(n));
  node_primary_[n] = static_cast<std::int32_t>(p);
}

Placement MappingState::placement() const {
  Placement out(*g_, k_);
  for (NodeIndex v = 0; v < g_->num_nodes(); ++v)
    out.assign(v, node_primary_[v] < 0 ? 0 : node_primary_[v]);
  return out;
}

TimeNs MappingState::cross_primary_comm() const {
  TimeNs total = 0;
  for (EdgeIndex e = 0; e < g_->num_edges(); ++e) {
    std::int32_t a = node_primary_[g_->edge_src(e)];
    std::int32_t b = node_primary_[g_->edge_dst(e)];
    if (a >= 0 && b >= 0 && a != b)
      total += g_->edge_comm(e);
  }
  return total;
}

Classification classify(const MappingState &state, std::uint32_t sec) {
  const Cluster &c = state.secondaries()[sec];
  if (c.ext_comm <= 0)
    return {};
  std::vector<TimeNs> comm = state.comm_with_primaries(sec);
  auto best = std::max_element(comm.begin(), comm.end());
  DeviceIndex p = static_cast<DeviceIndex>(best - comm.begin());
  if (*best == c.ext_comm)
    return {CommClass::TotallyCommunicating, p};
  if (*best * static_cast<TimeNs>(state.k()) > c.ext_comm)
    return {CommClass::MaximallyCommunicating, p};
  return {};
}

std::size_t locality_first_lookahead(MappingState &state, double ccr_value,
                                     const MapOptions &options,
                                     std::uint32_t pass) {
  const CompGraph &g = state.graph();
  const TimeNs k = state.k();
  const bool take_maximal = ccr_value >= options.ccr_threshold;
  std::size_t merged = 0;

  for (std::uint32_t sec : state.unmapped()) {
    Classification cls = classify(state, sec);
    if (cls.kind == CommClass::Neither ||
        (cls.kind == CommClass::MaximallyCommunicating && !take_maximal))
      continue;
    const Cluster &c = state.secondaries()[sec];
    const DeviceIndex p = cls.primary;
    const Span span = c.span;

    TimeNs own_in_span = 0;
    for (NodeIndex v : c.members) {
      TimeNs tl = state.levels().tl[v];
      if (tl >= span.lo && tl < span.hi)
        own_in_span += g.comp(v);
    }
    const TimeNs w = c.weight;
    const TimeNs work_p = state.span_work(p, span);
    const TimeNs mapped = state.mapped_work(span);
    const TimeNs unmapped_other = state.unmapped_work(span) - own_in_span;
    const TimeNs comm_p = state.comm_with_primaries(sec)[p];

    // Deviations from the mean span load, scaled by k to stay integral.
    const TimeNs dev_after = k * (work_p + w) - (mapped + w);
    const TimeNs dev_before = k * work_p - mapped;
    const TimeNs imbalance = std::max<TimeNs>(0, dev_after);

    char condition = 0;
    if (imbalance > 0 && k * unmapped_other >= imbalance)
      condition = 'a';
    else if (imbalance == 0 || std::llabs(dev_after) < std::llabs(dev_before))
      condition = 'b';
    else if (comm_p > w && comm_p > work_p && comm_p > unmapped_other)
      condition = 'c';
    if (condition == 0)
      continue;
    state.merge(sec, p, MergePhase::Lookahead, condition, pass);
    ++merged;
  }
  return merged;
}

void level_aware_balance(MappingState &state) {
  std::vector<std::uint32_t> order = state.unmapped();
  const auto &secs = state.secondaries();
  // Heaviest first; criticality order breaks ties (stable sort).
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     return secs[a].weight > secs[b].weight;
                   });
  const std::uint32_t k = state.k();
  std::vector<TimeNs> work;
  for (std::uint32_t sec : order) {
    const Cluster &c = secs[sec];
    std::vector<TimeNs> comm = state.comm_with_primaries(sec);
    const TimeNs comm_total = std::accumulate(comm.begin(), comm.end(),
                                              TimeNs{0});
    state.span_work_all(c.span, work);
    DeviceIndex best = 0;
    TimeNs best_score = 0;
    for (DeviceIndex p = 0; p < k; ++p) {
      TimeNs score = work[p] + (comm_total - comm[p]);
      if (p == 0 || score < best_score ||
          (score == best_score && comm[p] > comm[best])) {
        best = p;
        best_score = score;
      }
    }
    state.merge(sec, best, MergePhase::Balance);
  }
}

MapStats map_clusters(MappingState &state, double ccr_value,
                      const MapOptions &options) {
  MapStats stats;
  const std::size_t v = std::max<std::size_t>(2, state.graph().num_real_nodes());
  const std::uint32_t max_passes =
      static_cast<std::uint32_t>(std::bit_width(v - 1)); // ceil(log2 v)
  std::size_t merged = 0;
  do {
    merged = locality_first_lookahead(state, ccr_value, options,
                                      stats.lookahead_passes);
    stats.lookahead_merged += merged;
    ++stats.lookahead_passes;
  } while (merged > 0 && stats.lookahead_passes < max_passes);
  stats.balanced = state.unmapped().size();
  level_aware_balance(state);
  return stats;
}

void colocate_references(MappingState &state) {
  const CompGraph &g = state.graph();
  for (NodeIndex n = 0; n < g.num_nodes(); ++n) {
    NodeIndex r = g.referent(n);
    if (r == kNoNode)
      continue;
    std::int32_t target = state.node_primary(r);
    if (target >= 0 && state.node_primary(n) >= 0)
      state.move_node(n, static_cast<DeviceIndex>(target));
  }
}

namespace {

/// Nodes that must travel with others: Reference nodes and referenced
/// Residuals.
bool pinned(const CompGraph &g, NodeIndex n) {
  return g.referent(n) != kNoNode || !g.satellites(n).empty();
}

/// Change in cross-primary communication if clusters \p a and \p b trade
/// primaries.
TimeNs swap_delta(const MappingState &state, const Cluster &a,
                  const Cluster &b, std::int32_t pa, std::int32_t pb,
                  const std::unordered_set<NodeIndex> &in_a,
                  const std::unordered_set<NodeIndex> &in_b) {
  const CompGraph &g = state.graph();
  auto after = [&](NodeIndex v) {
    if (in_a.count(v))
      return pb;
    if (in_b.count(v))
      return pa;
    return state.node_primary(v);
  };
  TimeNs delta = 0;
  auto account = [&](EdgeIndex e) {
    NodeIndex s = g.edge_src(e), d = g.edge_dst(e);
    std::int32_t s0 = state.node_primary(s), d0 = state.node_primary(d);
    std::int32_t s1 = after(s), d1 = after(d);
    TimeNs c = g.edge_comm(e);
    if (s0 >= 0 && d0 >= 0 && s0 != d0)
      delta -= c;
    if (s1 >= 0 && d1 >= 0 && s1 != d1)
      delta += c;
  };
  for (const Cluster *cl : {&a, &b})
    for (NodeIndex v : cl->members) {
      for (EdgeIndex e : g.out_edges(v))
        account(e);
      for (EdgeIndex e : g.in_edges(v)) {
        NodeIndex s = g.edge_src(e);
        if (!in_a.count(s) && !in_b.count(s))
          account(e);
      }
    }
  return delta;
}

TimeNs span_load(const MappingState &state, std::int32_t pa, std::int32_t pb,
                 Span sa, Span sb) {
  TimeNs load = 0;
  for (std::int32_t p : {pa, pb})
    for (Span s : {sa, sb})
      load = std::max(load, state.span_work(static_cast<DeviceIndex>(p), s));
  return load;
}

void move_cluster(MappingState &state, const Cluster &c, DeviceIndex p) {
  for (NodeIndex v : c.members)
    state.move_node(v, p);
}

void swap_phase(MappingState &state, const RefineOptions &options,
                RefineStats &stats) {
  const CompGraph &g = state.graph();
  const auto &secs = state.secondaries();

  std::vector<std::uint32_t> order;
  for (std::uint32_t s = 0; s < secs.size(); ++s) {
    const Cluster &c = secs[s];
    if (c.members.empty() || !state.owner(s))
      continue;
    bool movable = std::none_of(c.members.begin(), c.members.end(),
                                [&](NodeIndex v) { return pinned(g, v); });
    // A cluster is swappable only while all its nodes sit together.
    for (NodeIndex v : c.members)
      movable = movable && state.node_primary(v) == state.node_primary(c.members[0]);
    if (movable)
      order.push_back(s);
  }
  auto head_tl = [&](std::uint32_t s) {
    return state.levels().tl[secs[s].members.front()];
  };
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (head_tl(a) != head_tl(b))
      return head_tl(a) < head_tl(b);
    return secs[a].id < secs[b].id;
  });
  std::vector<TimeNs> heads;
  heads.reserve(order.size());
  for (std::uint32_t s : order)
    heads.push_back(head_tl(s));

  std::vector<std::uint8_t> marked(secs.size(), 0);
  TimeNs comm = state.cross_primary_comm();
  for (std::uint32_t a : order) {
    if (marked[a])
      continue;
    const Cluster &ca = secs[a];
    auto first = std::lower_bound(heads.begin(), heads.end(), ca.span.lo);
    auto last = std::lower_bound(heads.begin(), heads.end(), ca.span.hi);
    std::size_t examined = 0;
    for (auto it = first; it != last && examined < options.swap_window; ++it) {
      std::uint32_t b = order[static_cast<std::size_t>(it - heads.begin())];
      if (b == a || marked[b])
        continue;
      const Cluster &cb = secs[b];
      std::int32_t pa = state.node_primary(ca.members[0]);
      std::int32_t pb = state.node_primary(cb.members[0]);
      if (pa == pb)
        continue;
      ++examined;
      std::unordered_set<NodeIndex> in_a(ca.members.begin(), ca.members.end());
      std::unordered_set<NodeIndex> in_b(cb.members.begin(), cb.members.end());
      TimeNs delta = swap_delta(state, ca, cb, pa, pb, in_a, in_b);
      if (delta >= 0)
        continue;
      TimeNs load_before = span_load(state, pa, pb, ca.span, cb.span);
      move_cluster(state, ca, static_cast<DeviceIndex>(pb));
      move_cluster(state, cb, static_cast<DeviceIndex>(pa));
      if (span_load(state, pa, pb, ca.span, cb.span) > load_before) {
        move_cluster(state, ca, static_cast<DeviceIndex>(pa));
        move_cluster(state, cb, static_cast<DeviceIndex>(pb));
        continue;
      }
      marked[a] = marked[b] = 1;
      comm += delta;
      ++stats.swaps;
      stats.swap_trace.push_back(comm);
      break;
    }
  }
}

TimeNs placement_cp(const MappingState &state, LevelAnnotations *out) {
  const CompGraph &g = state.graph();
  std::vector<std::int32_t> group(g.num_nodes());
  for (NodeIndex v = 0; v < g.num_nodes(); ++v)
    group[v] = state.node_primary(v);
  LevelOptions opts;
  opts.group = group;
  LevelAnnotations lv = compute_levels(g, opts);
  TimeNs cp = lv.cp_length;
  if (out)
    *out = std::move(lv);
  return cp;
}

struct MoveCandidate {
  NodeIndex node;
  DeviceIndex target;
  TimeNs gain;
};

void node_phase(MappingState &state, std::uint32_t k,
                const RefineOptions &options, RefineStats &stats) {
  const CompGraph &g = state.graph();
  for (std::uint32_t pass = 0; pass < k; ++pass) {
    ++stats.node_passes;
    LevelAnnotations lv;
    TimeNs cp = placement_cp(state, &lv);

    auto cost = [&](EdgeIndex e, std::int32_t a, std::int32_t b) -> TimeNs {
      return (a >= 0 && a == b) ? 0 : g.edge_comm(e);
    };

    std::vector<MoveCandidate> candidates;
    for (NodeIndex n = 0; n < g.num_nodes(); ++n) {
      if (g.is_virtual(n) || lv.w_lvl[n] != cp || pinned(g, n))
        continue;
      const std::int32_t home = state.node_primary(n);
      // Heaviest incident real edge decides whether n sits on a boundary.
      EdgeIndex heaviest = 0;
      NodeIndex other = kNoNode;
      auto consider = [&](EdgeIndex e, NodeIndex w) {
        if (g.edge_is_virtual(e))
          return;
        if (other == kNoNode || g.edge_comm(e) > g.edge_comm(heaviest) ||
            (g.edge_comm(e) == g.edge_comm(heaviest) &&
             g.id_rank(w) < g.id_rank(other))) {
          heaviest = e;
          other = w;
        }
      };
      for (EdgeIndex e : g.in_edges(n))
        consider(e, g.edge_src(e));
      for (EdgeIndex e : g.out_edges(n))
        consider(e, g.edge_dst(e));
      if (other == kNoNode || state.node_primary(other) == home)
        continue;
      const std::int32_t target = state.node_primary(other);

      // Longest path through n once it lives on target; tl of predecessors
      // and bl of successors do not depend on n's device.
      TimeNs in_best = 0, out_best = 0;
      for (EdgeIndex e : g.in_edges(n)) {
        NodeIndex u = g.edge_src(e);
        in_best = std::max(in_best, lv.tl[u] + g.comp(u) +
                                        cost(e, state.node_primary(u), target));
      }
      for (EdgeIndex e : g.out_edges(n)) {
        NodeIndex w = g.edge_dst(e);
        out_best = std::max(out_best,
                            cost(e, target, state.node_primary(w)) + lv.bl[w]);
      }
      TimeNs through = in_best + g.comp(n) + out_best;
      if (through < cp)
        candidates.push_back(
            {n, static_cast<DeviceIndex>(target), cp - through});
    }
    std::sort(candidates.begin(), candidates.end(),
              [&](const MoveCandidate &a, const MoveCandidate &b) {
                if (a.gain != b.gain)
                  return a.gain > b.gain;
                return g.id_rank(a.node) < g.id_rank(b.node);
              });
    if (candidates.size() > options.node_trials)
      candidates.resize(options.node_trials);
    for (const MoveCandidate &c : candidates) {
      const auto home = static_cast<DeviceIndex>(state.node_primary(c.node));
      state.move_node(c.node, c.target);
      TimeNs next = placement_cp(state, nullptr);
      if (next < cp) {
        cp = next;
        ++stats.node_moves;
        stats.move_trace.push_back(cp);
      } else {
        state.move_node(c.node, home);
      }
    }
  }
}

} // namespace

RefineStats refine(MappingState &state, std::uint32_t k,
                   const RefineOptions &options) {
  RefineStats stats;
  stats.comm_before = state.cross_primary_comm();
  stats.cp_before = placement_cp(state, nullptr);
  swap_phase(state, options, stats);
  stats.comm_after_swaps = state.cross_primary_comm();
  stats.cp_after_swaps = placement_cp(state, nullptr);
  node_phase(state, k, options, stats);
  stats.cp_after = placement_cp(state, nullptr);
  return stats;
}

} // namespace dagpart
