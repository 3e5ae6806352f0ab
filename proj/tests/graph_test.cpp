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
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace dagpart;
using namespace dagpart::testing;

namespace {

ErrorKind build_error(const GraphBuilder &b) {
  try {
    b.build(unit_profile());
  } catch (const DagpartError &e) {
    return e.kind();
  }
  ADD_FAILURE() << "build succeeded";
  return ErrorKind::Input;
}

/// Diamond a -> {b, c} -> d with unit comps; comms (a,b)=2 (a,c)=1 (c,d)=1
/// (b,d)=2 in microseconds.
CompGraph diamond() {
  return GraphBuilder()
      .node("a", 1000)
      .node("b", 1000)
      .node("c", 1000)
      .node("d", 1000)
      .edge("a", "b", 2)
      .edge("a", "c", 1)
      .edge("c", "d", 1)
      .edge("b", "d", 2)
      .build(unit_profile());
}

} // namespace

TEST(CommCost, IntraDeviceIsFree) {
  DeviceProfile p = unit_profile();
  p.latency = 5000;
  EXPECT_EQ(comm_cost(123456, p, false), 0);
  EXPECT_EQ(comm_cost(0, p, false), 0);
}

TEST(CommCost, LatencyOnlyTransfer) {
  DeviceProfile p = unit_profile();
  p.latency = 1000;
  EXPECT_EQ(comm_cost(0, p, true), 1000);
}

TEST(CommCost, LatencyPlusBandwidth) {
  DeviceProfile p = unit_profile();
  p.bandwidth_bps = 1e9;
  p.latency = 5000;
  // 5 us + 4096 B / (1 GB/s) = 5000 + 4096 ns.
  EXPECT_EQ(comm_cost(4096, p, true), 9096);
}

TEST(DeviceProfile, EffectiveCapacityKeepsReserve) {
  DeviceProfile p = unit_profile(2, 1000);
  EXPECT_EQ(p.effective_capacity(0), 900);
  p.reserve_ratio = 0;
  EXPECT_EQ(p.effective_capacity(1), 1000);
  p.capacity_override = {100, 200};
  p.reserve_ratio = 0.5;
  EXPECT_EQ(p.effective_capacity(0), 50);
  EXPECT_EQ(p.effective_capacity(1), 100);
}

TEST(DeviceProfile, RejectsUnusableValues) {
  auto bad = [](auto mutate) {
    DeviceProfile p = unit_profile();
    mutate(p);
    EXPECT_THROW(p.validate(), DagpartError);
  };
  bad([](DeviceProfile &p) { p.k = 0; });
  bad([](DeviceProfile &p) { p.mem_capacity = 0; });
  bad([](DeviceProfile &p) { p.bandwidth_bps = 0; });
  bad([](DeviceProfile &p) { p.latency = -1; });
  bad([](DeviceProfile &p) { p.reserve_ratio = 1.0; });
  bad([](DeviceProfile &p) { p.reserve_ratio = -0.1; });
  bad([](DeviceProfile &p) { p.capacity_override = {1}; });
}

TEST(GraphBuilder, AddsVirtualEndpoints) {
  CompGraph g = GraphBuilder()
                    .node("x", 1000)
                    .node("y", 2000)
                    .edge("x", "y", 3)
                    .build(unit_profile());
  EXPECT_EQ(g.num_real_nodes(), 2u);
  EXPECT_EQ(g.num_nodes(), 4u);
  EXPECT_EQ(g.name(g.source()), "__source__");
  EXPECT_EQ(g.name(g.sink()), "__sink__");
  EXPECT_EQ(g.comp(g.source()), 0);
  EXPECT_EQ(g.mem(g.sink()), 0);
  // source -> x, x -> y, y -> sink.
  EXPECT_EQ(g.num_edges(), 3u);
  EXPECT_EQ(g.edge_comm(0), 3000);
  for (EdgeIndex e = 0; e < g.num_edges(); ++e) {
    if (g.edge_is_virtual(e)) {
      EXPECT_EQ(g.edge_comm(e), 0);
    }
  }
}

TEST(GraphBuilder, EmptyGraphLinksSourceToSink) {
  CompGraph g = GraphBuilder().build(unit_profile());
  EXPECT_EQ(g.num_real_nodes(), 0u);
  ASSERT_EQ(g.num_edges(), 1u);
  EXPECT_EQ(g.edge_src(0), g.source());
  EXPECT_EQ(g.edge_dst(0), g.sink());
}

TEST(GraphBuilder, RejectsStructuralProblems) {
  EXPECT_EQ(build_error(GraphBuilder().node("a", 1).node("a", 1)),
            ErrorKind::Structural);
  EXPECT_EQ(build_error(GraphBuilder().node("a", 1).edge("a", "zz")),
            ErrorKind::Structural);
  EXPECT_EQ(build_error(GraphBuilder().node("a", 1).edge("a", "a")),
            ErrorKind::Structural);
  EXPECT_EQ(build_error(GraphBuilder().node("a", 1).node("b", 1).edge("a", "b")
                            .edge("a", "b")),
            ErrorKind::Structural);
  EXPECT_EQ(build_error(GraphBuilder()
                            .node("a", 1)
                            .node("b", 1)
                            .node("c", 1)
                            .edge("a", "b")
                            .edge("b", "c")
                            .edge("c", "a")),
            ErrorKind::Structural);
  EXPECT_EQ(build_error(GraphBuilder().node("__sink__", 1)),
            ErrorKind::Structural);
  EXPECT_EQ(build_error(GraphBuilder().node("a", -1)), ErrorKind::Structural);
}

TEST(GraphBuilder, ValidatesReferenceNodes) {
  // Reference without colocate_with.
  EXPECT_EQ(build_error(GraphBuilder().node("r", 1, 0, NodeKind::Reference)),
            ErrorKind::Structural);
  // Referent must be a Residual.
  EXPECT_EQ(build_error(GraphBuilder()
                            .node("w", 1, 8, NodeKind::Normal)
                            .node("r", 1, 0, NodeKind::Reference, "w")),
            ErrorKind::Structural);
  // colocate_with only on Reference nodes.
  EXPECT_EQ(build_error(GraphBuilder()
                            .node("w", 1, 8, NodeKind::Residual)
                            .node("x", 1, 0, NodeKind::Normal, "w")),
            ErrorKind::Structural);

  CompGraph g = GraphBuilder()
                    .node("w", 1, 8, NodeKind::Residual)
                    .node("r", 1, 0, NodeKind::Reference, "w")
                    .edge("w", "r")
                    .build(unit_profile());
  NodeIndex w = g.at("w"), r = g.at("r");
  EXPECT_EQ(g.referent(r), w);
  ASSERT_EQ(g.satellites(w).size(), 1u);
  EXPECT_EQ(g.satellites(w)[0], r);
}

TEST(GraphBuilder, TopologicalOrderBreaksTiesById) {
  CompGraph g = GraphBuilder()
                    .node("c", 1)
                    .node("a", 1)
                    .node("b", 1)
                    .edge("c", "b")
                    .build(unit_profile());
  std::vector<std::string> names;
  for (NodeIndex v : g.topo_order())
    if (!g.is_virtual(v))
      names.push_back(g.name(v));
  EXPECT_EQ(names, (std::vector<std::string>{"a", "c", "b"}));
}

TEST(ComputeLevels, SingleNode) {
  CompGraph g = GraphBuilder().node("n", 5000).build(unit_profile());
  LevelAnnotations l = compute_levels(g);
  NodeIndex n = g.at("n");
  EXPECT_EQ(l.tl[n], 0);
  EXPECT_EQ(l.bl[n], 5000);
  EXPECT_EQ(l.w_lvl[n], 5000);
  EXPECT_EQ(l.cp_length, 5000);
}

TEST(ComputeLevels, ChainWithCommunication) {
  CompGraph g = GraphBuilder()
                    .node("a", 1000)
                    .node("b", 1000)
                    .edge("a", "b", 2)
                    .build(unit_profile());
  LevelAnnotations l = compute_levels(g);
  NodeIndex a = g.at("a"), b = g.at("b");
  EXPECT_EQ(l.tl[b], 3000);
  EXPECT_EQ(l.bl[a], 4000);
  EXPECT_EQ(l.w_lvl[a], 4000);
  EXPECT_EQ(l.w_lvl[b], 4000);
}

TEST(ComputeLevels, DiamondMatchesPathEnumeration) {
  CompGraph g = diamond();
  LevelAnnotations l = compute_levels(g);
  // a-b-d costs 1 + 2 + 1 + 2 + 1, a-c-d costs 1 + 1 + 1 + 1 + 1.
  EXPECT_EQ(l.w_lvl[g.at("b")], 7000);
  EXPECT_EQ(l.w_lvl[g.at("c")], 5000);
  NaiveLevels naive = naive_levels(g, full_comm(g));
  EXPECT_EQ(l.cp_length, naive.cp);
  for (NodeIndex v = 0; v < g.num_nodes(); ++v) {
    EXPECT_EQ(l.tl[v], naive.tl[v]);
    EXPECT_EQ(l.bl[v], naive.bl[v]);
  }
  // Critical path a, b, d: every node on it attains cp_length.
  for (const char *id : {"a", "b", "d"})
    EXPECT_EQ(l.w_lvl[g.at(id)], l.cp_length);
  EXPECT_LT(l.w_lvl[g.at("c")], l.cp_length);
}

TEST(ComputeLevels, GroupZeroesInternalEdges) {
  CompGraph g = diamond();
  std::vector<std::int32_t> group(g.num_nodes(), -1);
  group[g.at("a")] = group[g.at("b")] = group[g.at("d")] = 7;
  LevelOptions opts;
  opts.group = group;
  LevelAnnotations l = compute_levels(g, opts);
  // a-b-d costs 3; a-c-d costs 1 + 1 + 1 + 1 + 1 = 5.
  EXPECT_EQ(l.cp_length, 5000);
  EXPECT_EQ(l.tl[g.at("b")], 1000);
}

TEST(ComputeLevels, ZeroCommEqualsCommFreeGraph) {
  CompGraph g = diamond();
  CompGraph free = GraphBuilder()
                       .node("a", 1000)
                       .node("b", 1000)
                       .node("c", 1000)
                       .node("d", 1000)
                       .edge("a", "b")
                       .edge("a", "c")
                       .edge("c", "d")
                       .edge("b", "d")
                       .build(unit_profile());
  LevelOptions opts;
  opts.zero_comm = true;
  LevelAnnotations a = compute_levels(g, opts);
  LevelAnnotations b = compute_levels(free);
  EXPECT_EQ(a.tl, b.tl);
  EXPECT_EQ(a.bl, b.bl);
}

TEST(ComputeLevels, AliveMaskDropsNodes) {
  CompGraph g = diamond();
  std::vector<std::uint8_t> alive(g.num_nodes(), 1);
  alive[g.at("b")] = 0;
  LevelOptions opts;
  opts.alive = alive;
  LevelAnnotations l = compute_levels(g, opts);
  EXPECT_EQ(l.cp_length, 5000);
}

TEST(ComputeLevels, VisitsEachNodeAndEdgeOncePerPass) {
  std::mt19937_64 rng(11);
  CompGraph g = random_dag(rng, 30, 0.2).build(unit_profile());
  LevelAnnotations l = compute_levels(g);
  EXPECT_EQ(l.nodes_visited, 2 * g.num_nodes());
  EXPECT_EQ(l.edges_visited, 2 * g.num_edges());
}

TEST(Ccr, ZeroCommunication) {
  CompGraph g = GraphBuilder()
                    .node("a", 1000)
                    .node("b", 1000)
                    .edge("a", "b", 0)
                    .build(unit_profile());
  EXPECT_DOUBLE_EQ(ccr(g), 0.0);
}

TEST(Ccr, ChainRatio) {
  CompGraph g = GraphBuilder()
                    .node("a", 1000)
                    .node("b", 1000)
                    .node("c", 1000)
                    .edge("a", "b", 3)
                    .edge("b", "c", 3)
                    .build(unit_profile());
  EXPECT_DOUBLE_EQ(ccr(g), 2.0);
}

TEST(Ccr, FormatMatchesHighRatioExample) {
  // Sum of comm 29, sum of comp 2.
  CompGraph g = GraphBuilder()
                    .node("a", 1000)
                    .node("b", 1000)
                    .edge("a", "b", 29)
                    .build(unit_profile());
  EXPECT_DOUBLE_EQ(ccr(g), 14.5);
}

TEST(Ccr, ZeroComputeIsDegenerate) {
  CompGraph g = GraphBuilder().node("a", 0).build(unit_profile());
  try {
    ccr(g);
    FAIL() << "expected an error";
  } catch (const DagpartError &e) {
    EXPECT_EQ(e.kind(), ErrorKind::Degenerate);
  }
}

TEST(Dop, ChainHasNoParallelism) {
  CompGraph g = GraphBuilder()
                    .node("a", 1000)
                    .node("b", 2000)
                    .node("c", 3000)
                    .edge("a", "b", 10)
                    .edge("b", "c", 10)
                    .build(unit_profile());
  EXPECT_DOUBLE_EQ(dop(g), 1.0);
}

TEST(Dop, IndependentChainsGiveK) {
  GraphBuilder b;
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < 3; ++i)
      b.node("c" + std::to_string(c) + "_" + std::to_string(i), 1000);
    for (int i = 0; i + 1 < 3; ++i)
      b.edge("c" + std::to_string(c) + "_" + std::to_string(i),
             "c" + std::to_string(c) + "_" + std::to_string(i + 1), 5);
  }
  EXPECT_DOUBLE_EQ(dop(b.build(unit_profile())), 4.0);
}

TEST(Dop, UnitDiamond) {
  EXPECT_DOUBLE_EQ(dop(diamond()), 4.0 / 3.0);
}

TEST(LevelProperties, EdgeConsistencyOnRandomGraphs) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    CompGraph g = random_dag(rng, 9, 0.3).build(unit_profile());
    LevelAnnotations l = compute_levels(g);
    NaiveLevels naive = naive_levels(g, full_comm(g));
    EXPECT_EQ(l.cp_length, naive.cp);
    for (NodeIndex v = 0; v < g.num_nodes(); ++v) {
      EXPECT_EQ(l.tl[v], naive.tl[v]);
      EXPECT_EQ(l.bl[v], naive.bl[v]);
      EXPECT_EQ(l.w_lvl[v], l.tl[v] + l.bl[v]);
      EXPECT_LE(l.w_lvl[v], l.cp_length);
      bool tight = g.in_edges(v).empty();
      for (EdgeIndex e : g.in_edges(v)) {
        NodeIndex u = g.edge_src(e);
        TimeNs via = l.tl[u] + g.comp(u) + g.edge_comm(e);
        EXPECT_GE(l.tl[v], via);
        tight |= l.tl[v] == via;
      }
      EXPECT_TRUE(tight);
    }
    EXPECT_EQ(l.tl[g.source()], 0);
    EXPECT_EQ(l.bl[g.sink()], g.comp(g.sink()));
  }
}
