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

#include "dagpart/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dagpart {

/// Memory semantics of an operation's output.
enum class NodeKind : std::uint8_t {
  /// Output allocated at start, released after the last same-device consumer.
  Normal,
  /// Parameter-like output that lives for the whole run.
  Residual,
  /// Mutates a Residual in place; holds no memory and must share its device.
  Reference,
};

std::string_view to_string(NodeKind kind);
NodeKind parse_node_kind(std::string_view text);

struct OpNode {
  std::string id;
  TimeNs comp = 0;
  Bytes out_mem = 0;
  NodeKind kind = NodeKind::Normal;
  std::optional<std::string> colocate_with;
};

struct CommEdge {
  std::string src;
  std::string dst;
  Bytes bytes = 0;
};

/// Device count, memory and interconnect of the target machine.
struct DeviceProfile {
  std::uint32_t k = 1;
  Bytes mem_capacity = 0;
  /// Optional per-device capacities; when non-empty must have k entries.
  std::vector<Bytes> capacity_override;
  double bandwidth_bps = 1e9;
  TimeNs latency = 0;
  double reserve_ratio = 0.10;

  /// Throws DagpartError(Input) when the profile is unusable.
  void validate() const;
  Bytes capacity(DeviceIndex d) const;
  /// Capacity left after the reserve fraction is set aside.
  Bytes effective_capacity(DeviceIndex d) const;
};

/// Transfer time of \p bytes between two devices; zero when on one device.
TimeNs comm_cost(Bytes bytes, const DeviceProfile &profile, bool cross_device);

/// Immutable weighted DAG with virtual source and sink. Node and edge indices
/// are dense; the virtual endpoints are always the last two nodes.
class CompGraph {
public:
  std::size_t num_nodes() const { return comp_.size(); }
  std::size_t num_edges() const { return src_.size(); }
  /// Number of nodes excluding the virtual endpoints.
  std::size_t num_real_nodes() const { return comp_.size() - 2; }

  NodeIndex source() const { return source_; }
  NodeIndex sink() const { return sink_; }
  bool is_virtual(NodeIndex n) const { return n == source_ || n == sink_; }

  const std::string &name(NodeIndex n) const { return names_[n]; }
  TimeNs comp(NodeIndex n) const { return comp_[n]; }
  Bytes mem(NodeIndex n) const { return mem_[n]; }
  NodeKind kind(NodeIndex n) const { return kind_[n]; }
  /// Referent of a Reference node, kNoNode otherwise.
  NodeIndex referent(NodeIndex n) const { return referent_[n]; }
  /// Reference nodes pinned to Residual \p n.
  std::span<const NodeIndex> satellites(NodeIndex n) const;
  /// Position of the node id in lexicographic order; used for tie-breaking.
  std::uint32_t id_rank(NodeIndex n) const { return id_rank_[n]; }
  std::optional<NodeIndex> find(std::string_view id) const;
  NodeIndex at(std::string_view id) const;

  NodeIndex edge_src(EdgeIndex e) const { return src_[e]; }
  NodeIndex edge_dst(EdgeIndex e) const { return dst_[e]; }
  Bytes edge_bytes(EdgeIndex e) const { return bytes_[e]; }
  /// Cross-device transfer time of the edge; zero for virtual edges.
  TimeNs edge_comm(EdgeIndex e) const { return comm_[e]; }
  bool edge_is_virtual(EdgeIndex e) const { return edge_virtual_[e] != 0; }

  std::span<const EdgeIndex> out_edges(NodeIndex n) const {
    return {out_edges_.data() + out_off_[n], out_off_[n + 1] - out_off_[n]};
  }
  std::span<const EdgeIndex> in_edges(NodeIndex n) const {
    return {in_edges_.data() + in_off_[n], in_off_[n + 1] - in_off_[n]};
  }

  /// Deterministic topological order (Kahn, ties by id rank).
  std::span<const NodeIndex> topo_order() const { return topo_; }

  TimeNs total_comp() const { return total_comp_; }
  /// Sum of cross-device cost over all real edges.
  TimeNs total_comm() const { return total_comm_; }

  /// Rebuild the original node/edge lists without virtual endpoints.
  std::vector<OpNode> real_nodes() const;
  std::vector<CommEdge> real_edges() const;

  const DeviceProfile &profile() const { return profile_; }

private:
  friend class GraphBuilder;
  CompGraph() = default;

  std::vector<std::string> names_;
  std::vector<TimeNs> comp_;
  std::vector<Bytes> mem_;
  std::vector<NodeKind> kind_;
  std::vector<NodeIndex> referent_;
  std::vector<std::uint32_t> sat_off_;
  std::vector<NodeIndex> sat_;
  std::vector<std::uint32_t> id_rank_;
  std::unordered_map<std::string, NodeIndex> index_;

  std::vector<NodeIndex> src_, dst_;
  std::vector<Bytes> bytes_;
  std::vector<TimeNs> comm_;
  std::vector<std::uint8_t> edge_virtual_;

  std::vector<std::uint32_t> out_off_, in_off_;
  std::vector<EdgeIndex> out_edges_, in_edges_;
  std::vector<NodeIndex> topo_;

  NodeIndex source_ = kNoNode;
  NodeIndex sink_ = kNoNode;
  TimeNs total_comp_ = 0;
  TimeNs total_comm_ = 0;
  DeviceProfile profile_;
};

/// Collects nodes and edges, validates them and produces a CompGraph.
class GraphBuilder {
public:
  static constexpr std::string_view kSourceId = "__source__";
  static constexpr std::string_view kSinkId = "__sink__";

  GraphBuilder &add_node(OpNode node);
  GraphBuilder &add_edge(CommEdge edge);

  /// Convenience overloads used heavily by tests.
  GraphBuilder &node(std::string id, TimeNs comp, Bytes mem = 0,
                     NodeKind kind = NodeKind::Normal,
                     std::optional<std::string> colocate_with = std::nullopt);
  GraphBuilder &edge(std::string src, std::string dst, Bytes bytes = 0);

  /// Validates and freezes the graph. Edge durations are derived from
  /// \p profile. Throws DagpartError(Structural) on duplicate ids, dangling
  /// endpoints, duplicate edges, self loops or cycles.
  CompGraph build(const DeviceProfile &profile) const;

  const std::vector<OpNode> &nodes() const { return nodes_; }
  const std::vector<CommEdge> &edges() const { return edges_; }

private:
  std::vector<OpNode> nodes_;
  std::vector<CommEdge> edges_;
};

} // namespace dagpart
