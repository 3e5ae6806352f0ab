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
#include "dagpart/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <unordered_set>

namespace dagpart {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
  case NodeKind::Normal:
    return "Normal";
  case NodeKind::Residual:
    return "Residual";
  case NodeKind::Reference:
    return "Reference";
  }
  return "Normal";
}

NodeKind parse_node_kind(std::string_view text) {
  if (text == "Normal" || text == "normal")
    return NodeKind::Normal;
  if (text == "Residual" || text == "residual")
    return NodeKind::Residual;
  if (text == "Reference" || text == "reference")
    return NodeKind::Reference;
  throw DagpartError(ErrorKind::Input,
                     "unknown node kind '" + std::string(text) + "'");
}

void DeviceProfile::validate() const {
  if (k < 1)
    throw DagpartError(ErrorKind::Input, "device count must be >= 1");
  if (!capacity_override.empty() && capacity_override.size() != k)
    throw DagpartError(ErrorKind::Input,
                       "per-device capacity list must have k entries");
  for (DeviceIndex d = 0; d < k; ++d)
    if (capacity(d) <= 0)
      throw DagpartError(ErrorKind::Input, "memory capacity must be > 0");
  if (!(bandwidth_bps > 0))
    throw DagpartError(ErrorKind::Input, "bandwidth must be > 0");
  if (latency < 0)
    throw DagpartError(ErrorKind::Input, "latency must be >= 0");
  if (!(reserve_ratio >= 0.0 && reserve_ratio < 1.0))
    throw DagpartError(ErrorKind::Input, "reserve ratio must be in [0, 1)");
}

Bytes DeviceProfile::capacity(DeviceIndex d) const {
  return capacity_override.empty() ? mem_capacity : capacity_override.at(d);
}

Bytes DeviceProfile::effective_capacity(DeviceIndex d) const {
  long double exact = (1.0L - static_cast<long double>(reserve_ratio)) *
                     static_cast<long double>(capacity(d));
  // 0.1 is not representable; snap values within rounding noise of an
  // integer before flooring so 0.9 * 1000 stays 900.
  long double nearest = std::nearbyint(exact);
  if (std::fabs(exact - nearest) < 1e-6L * std::max(1.0L, exact))
    return static_cast<Bytes>(nearest);
  return static_cast<Bytes>(std::floor(exact));
}

TimeNs comm_cost(Bytes bytes, const DeviceProfile &profile,
                 bool cross_device) {
  if (!cross_device)
    return 0;
  long double transfer = static_cast<long double>(bytes) * 1e9L /
                         static_cast<long double>(profile.bandwidth_bps);
  return profile.latency + static_cast<TimeNs>(std::llround(transfer));
}

std::span<const NodeIndex> CompGraph::satellites(NodeIndex n) const {
  return {sat_.data() + sat_off_[n], sat_off_[n + 1] - sat_off_[n]};
}

std::optional<NodeIndex> CompGraph::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end())
    return std::nullopt;
  return it->second;
}

NodeIndex CompGraph::at(std::string_view id) const {
  auto n = find(id);
  if (!n)
    throw DagpartError(ErrorKind::Input,
                       "unknown node id '" + std::string(id) + "'");
  return *n;
}

std::vector<OpNode> CompGraph::real_nodes() const {
  std::vector<OpNode> out;
  out.reserve(num_real_nodes());
  for (NodeIndex n = 0; n < num_nodes(); ++n) {
    if (is_virtual(n))
      continue;
    OpNode node{names_[n], comp_[n], mem_[n], kind_[n], std::nullopt};
    if (referent_[n] != kNoNode)
      node.colocate_with = names_[referent_[n]];
    out.push_back(std::move(node));
  }
  return out;
}

std::vector<CommEdge> CompGraph::real_edges() const {
  std::vector<CommEdge> out;
  for (EdgeIndex e = 0; e < num_edges(); ++e)
    if (!edge_is_virtual(e))
      out.push_back({names_[src_[e]], names_[dst_[e]], bytes_[e]});
  return out;
}

GraphBuilder &GraphBuilder::add_node(OpNode node) {
  nodes_.push_back(std::move(node));
  return *this;
}

GraphBuilder &GraphBuilder::add_edge(CommEdge edge) {
  edges_.push_back(std::move(edge));
  return *this;
}

GraphBuilder &GraphBuilder::node(std::string id, TimeNs comp, Bytes mem,
                                 NodeKind kind,
                                 std::optional<std::string> colocate_with) {
  return add_node(
      OpNode{std::move(id), comp, mem, kind, std::move(colocate_with)});
}

GraphBuilder &GraphBuilder::edge(std::string src, std::string dst,
                                 Bytes bytes) {
  return add_edge(CommEdge{std::move(src), std::move(dst), bytes});
}

namespace {

[[noreturn]] void structural(const std::string &msg) {
  throw DagpartError(ErrorKind::Structural, msg);
}

} // namespace

CompGraph GraphBuilder::build(const DeviceProfile &profile) const {
  profile.validate();
  CompGraph g;
  g.profile_ = profile;

  const std::size_t n_real = nodes_.size();
  const std::size_t n_all = n_real + 2;
  g.names_.reserve(n_all);
  g.comp_.reserve(n_all);
  g.mem_.reserve(n_all);
  g.kind_.reserve(n_all);
  g.index_.reserve(n_all);

  for (const OpNode &node : nodes_) {
    if (node.id.empty())
      structural("node id must not be empty");
    if (node.id == kSourceId || node.id == kSinkId)
      structural("node id '" + node.id + "' is reserved");
    if (node.comp < 0 || node.out_mem < 0)
      structural("node '" + node.id + "' has a negative weight");
    auto [it, fresh] =
        g.index_.emplace(node.id, static_cast<NodeIndex>(g.names_.size()));
    if (!fresh)
      structural("duplicate node id '" + node.id + "'");
    g.names_.push_back(node.id);
    g.comp_.push_back(node.comp);
    g.mem_.push_back(node.out_mem);
    g.kind_.push_back(node.kind);
  }
  g.source_ = static_cast<NodeIndex>(n_real);
  g.sink_ = static_cast<NodeIndex>(n_real + 1);
  for (std::string_view id : {kSourceId, kSinkId}) {
    g.index_.emplace(std::string(id), static_cast<NodeIndex>(g.names_.size()));
    g.names_.emplace_back(id);
    g.comp_.push_back(0);
    g.mem_.push_back(0);
    g.kind_.push_back(NodeKind::Normal);
  }

  // Reference nodes and their referents.
  g.referent_.assign(n_all, kNoNode);
  std::vector<std::uint32_t> sat_count(n_all + 1, 0);
  for (std::size_t i = 0; i < n_real; ++i) {
    const OpNode &node = nodes_[i];
    if (node.kind == NodeKind::Reference) {
      if (!node.colocate_with)
        structural("reference node '" + node.id + "' lacks colocate_with");
      auto it = g.index_.find(*node.colocate_with);
      if (it == g.index_.end() || it->second >= n_real)
        structural("reference node '" + node.id + "' names unknown node '" +
                   *node.colocate_with + "'");
      if (g.kind_[it->second] != NodeKind::Residual)
        structural("reference node '" + node.id +
                   "' must be colocated with a Residual node");
      g.referent_[i] = it->second;
      ++sat_count[it->second];
    } else if (node.colocate_with) {
      structural("only Reference nodes may set colocate_with ('" + node.id +
                 "')");
    }
  }
  g.sat_off_.assign(n_all + 1, 0);
  for (std::size_t i = 0; i < n_all; ++i)
    g.sat_off_[i + 1] = g.sat_off_[i] + sat_count[i];
  g.sat_.resize(g.sat_off_[n_all]);
  {
    std::vector<std::uint32_t> fill(g.sat_off_.begin(), g.sat_off_.end() - 1);
    for (NodeIndex i = 0; i < n_real; ++i)
      if (g.referent_[i] != kNoNode)
        g.sat_[fill[g.referent_[i]]++] = i;
  }

  // Lexicographic id ranks for deterministic tie-breaking.
  {
    std::vector<NodeIndex> order(n_all);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](NodeIndex a, NodeIndex b) {
      return g.names_[a] < g.names_[b];
    });
    g.id_rank_.assign(n_all, 0);
    for (std::uint32_t r = 0; r < n_all; ++r)
      g.id_rank_[order[r]] = r;
  }

  // Real edges.
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(edges_.size() * 2);
  std::vector<std::uint32_t> indeg(n_all, 0), outdeg(n_all, 0);
  for (const CommEdge &e : edges_) {
    auto s = g.index_.find(e.src);
    auto d = g.index_.find(e.dst);
    if (s == g.index_.end() || s->second >= n_real)
      structural("edge source '" + e.src + "' does not exist");
    if (d == g.index_.end() || d->second >= n_real)
      structural("edge destination '" + e.dst + "' does not exist");
    if (s->second == d->second)
      structural("self loop on '" + e.src + "'");
    if (e.bytes < 0)
      structural("edge " + e.src + "->" + e.dst + " has negative size");
    std::uint64_t key = (std::uint64_t(s->second) << 32) | d->second;
    if (!seen.insert(key).second)
      structural("duplicate edge " + e.src + "->" + e.dst);
    g.src_.push_back(s->second);
    g.dst_.push_back(d->second);
    g.bytes_.push_back(e.bytes);
    g.comm_.push_back(comm_cost(e.bytes, profile, true));
    g.edge_virtual_.push_back(0);
    ++outdeg[s->second];
    ++indeg[d->second];
  }

  // Virtual endpoints attach to every entry and exit node.
  for (NodeIndex n = 0; n < n_real; ++n) {
    if (indeg[n] == 0) {
      g.src_.push_back(g.source_);
      g.dst_.push_back(n);
      g.bytes_.push_back(0);
      g.comm_.push_back(0);
      g.edge_virtual_.push_back(1);
    }
    if (outdeg[n] == 0) {
      g.src_.push_back(n);
      g.dst_.push_back(g.sink_);
      g.bytes_.push_back(0);
      g.comm_.push_back(0);
      g.edge_virtual_.push_back(1);
    }
  }
  if (n_real == 0) {
    g.src_.push_back(g.source_);
    g.dst_.push_back(g.sink_);
    g.bytes_.push_back(0);
    g.comm_.push_back(0);
    g.edge_virtual_.push_back(1);
  }

  // CSR adjacency.
  const std::size_t m = g.src_.size();
  g.out_off_.assign(n_all + 1, 0);
  g.in_off_.assign(n_all + 1, 0);
  for (std::size_t e = 0; e < m; ++e) {
    ++g.out_off_[g.src_[e] + 1];
    ++g.in_off_[g.dst_[e] + 1];
  }
  for (std::size_t i = 0; i < n_all; ++i) {
    g.out_off_[i + 1] += g.out_off_[i];
    g.in_off_[i + 1] += g.in_off_[i];
  }
  g.out_edges_.resize(m);
  g.in_edges_.resize(m);
  {
    std::vector<std::uint32_t> of(g.out_off_.begin(), g.out_off_.end() - 1);
    std::vector<std::uint32_t> inf(g.in_off_.begin(), g.in_off_.end() - 1);
    for (EdgeIndex e = 0; e < m; ++e) {
      g.out_edges_[of[g.src_[e]]++] = e;
      g.in_edges_[inf[g.dst_[e]]++] = e;
    }
  }

  // Kahn's algorithm; the heap keeps the order independent of input order.
  {
    std::vector<std::uint32_t> pending(n_all);
    for (NodeIndex n = 0; n < n_all; ++n)
      pending[n] = g.in_off_[n + 1] - g.in_off_[n];
    auto later = [&](NodeIndex a, NodeIndex b) {
      return g.id_rank_[a] > g.id_rank_[b];
    };
    std::priority_queue<NodeIndex, std::vector<NodeIndex>, decltype(later)>
        ready(later);
    for (NodeIndex n = 0; n < n_all; ++n)
      if (pending[n] == 0)
        ready.push(n);
    g.topo_.reserve(n_all);
    while (!ready.empty()) {
      NodeIndex n = ready.top();
      ready.pop();
      g.topo_.push_back(n);
      for (EdgeIndex e : g.out_edges(n))
        if (--pending[g.dst_[e]] == 0)
          ready.push(g.dst_[e]);
    }
    if (g.topo_.size() != n_all)
      structural("graph contains a cycle");
  }

  for (NodeIndex n = 0; n < n_all; ++n)
    g.total_comp_ += g.comp_[n];
  for (EdgeIndex e = 0; e < m; ++e)
    g.total_comm_ += g.comm_[e];
  return g;
}

} // namespace dagpart
