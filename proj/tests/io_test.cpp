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
#include "dagpart/generator.hpp"
#include "dagpart/io.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace dagpart;
using namespace dagpart::testing;

namespace {

ErrorKind graph_error(const std::string &text) {
  std::istringstream in(text);
  try {
    parse_graph(in).build(unit_profile());
  } catch (const DagpartError &e) {
    return e.kind();
  }
  ADD_FAILURE() << "parsed: " << text;
  return ErrorKind::Degenerate;
}

std::string to_text(const GraphBuilder &b) {
  std::ostringstream out;
  write_graph(out, b.nodes(), b.edges());
  return out.str();
}

bool reachable_from_source_and_to_sink(const CompGraph &g) {
  std::vector<int> fwd(g.num_nodes(), 0), bwd(g.num_nodes(), 0);
  // Undirected connectivity over real edges only.
  std::vector<std::vector<NodeIndex>> adj(g.num_nodes());
  for (EdgeIndex e = 0; e < g.num_edges(); ++e)
    if (!g.edge_is_virtual(e)) {
      adj[g.edge_src(e)].push_back(g.edge_dst(e));
      adj[g.edge_dst(e)].push_back(g.edge_src(e));
    }
  std::vector<NodeIndex> stack;
  NodeIndex first = kNoNode;
  for (NodeIndex v = 0; v < g.num_nodes(); ++v)
    if (!g.is_virtual(v)) {
      first = v;
      break;
    }
  if (first == kNoNode)
    return true;
  stack.push_back(first);
  fwd[first] = 1;
  while (!stack.empty()) {
    NodeIndex v = stack.back();
    stack.pop_back();
    for (NodeIndex w : adj[v])
      if (!fwd[w]) {
        fwd[w] = 1;
        stack.push_back(w);
      }
  }
  for (NodeIndex v = 0; v < g.num_nodes(); ++v)
    if (!g.is_virtual(v) && !fwd[v])
      return false;
  (void)bwd;
  return true;
}

} // namespace

TEST(ParseGraph, ReadsNodesAndEdges) {
  std::istringstream in(R"({
    "nodes": [
      {"id": "a", "comp_us": 2, "mem_bytes": 8},
      {"id": "w", "comp_us": 1.5, "mem_bytes": 64, "kind": "Residual"},
      {"id": "r", "comp_us": 0, "kind": "Reference", "colocate_with": "w"}
    ],
    "edges": [
      {"src": "a", "dst": "r", "bytes": 4},
      {"src": "w", "dst": "r"}
    ]
  })");
  CompGraph g = parse_graph(in).build(unit_profile());
  EXPECT_EQ(g.num_real_nodes(), 3u);
  EXPECT_EQ(g.comp(g.at("a")), 2000);
  EXPECT_EQ(g.comp(g.at("w")), 1500);
  EXPECT_EQ(g.mem(g.at("w")), 64);
  EXPECT_EQ(g.kind(g.at("w")), NodeKind::Residual);
  EXPECT_EQ(g.referent(g.at("r")), g.at("w"));
  EXPECT_EQ(g.edge_bytes(0), 4);
  EXPECT_EQ(g.edge_comm(0), 4000);
}

TEST(ParseGraph, RejectsMalformedInput) {
  EXPECT_EQ(graph_error("not json"), ErrorKind::Input);
  EXPECT_EQ(graph_error("[]"), ErrorKind::Input);
  EXPECT_EQ(graph_error(R"({"edges": []})"), ErrorKind::Input);
  EXPECT_EQ(graph_error(R"({"nodes": [{"comp_us": 1}]})"), ErrorKind::Input);
  EXPECT_EQ(graph_error(R"({"nodes": [{"id": "a"}]})"), ErrorKind::Input);
  EXPECT_EQ(graph_error(R"({"nodes": [{"id": "a", "comp_us": "x"}]})"),
            ErrorKind::Input);
  EXPECT_EQ(graph_error(R"({"nodes": [{"id": "a", "comp_us": 1, "kind": "odd"}]})"),
            ErrorKind::Input);
  EXPECT_EQ(graph_error(R"({"nodes": [{"id": "a", "comp_us": 1}],
                            "edges": [{"src": "a"}]})"),
            ErrorKind::Input);
  // Well-formed JSON describing a bad graph is structural.
  EXPECT_EQ(graph_error(R"({"nodes": [{"id": "a", "comp_us": 1}],
                            "edges": [{"src": "a", "dst": "b"}]})"),
            ErrorKind::Structural);
}

TEST(WriteGraph, RoundTrips) {
  std::mt19937_64 rng(131);
  GraphBuilder b = random_dag(rng, 15, 0.2, 0.2, 0.2);
  std::string text = to_text(b);
  std::istringstream in(text);
  GraphBuilder back = parse_graph(in);
  EXPECT_EQ(to_text(back), text);
  CompGraph g1 = b.build(unit_profile());
  CompGraph g2 = back.build(unit_profile());
  EXPECT_EQ(g1.total_comp(), g2.total_comp());
  EXPECT_EQ(g1.total_comm(), g2.total_comm());
}

TEST(Profile, ParsesScalarAndPerDeviceCapacity) {
  std::istringstream a(R"({"k": 2, "mem_capacity_bytes": 1000,
                           "bandwidth_bps": 1e9, "latency_us": 5})");
  DeviceProfile p = parse_profile(a);
  EXPECT_EQ(p.k, 2u);
  EXPECT_EQ(p.mem_capacity, 1000);
  EXPECT_EQ(p.latency, 5000);
  EXPECT_DOUBLE_EQ(p.reserve_ratio, 0.10);
  std::istringstream b(R"({"k": 2, "mem_capacity_bytes": [100, 200],
                           "bandwidth_bps": 1e6, "latency_us": 0,
                           "reserve_ratio": 0.5})");
  DeviceProfile q = parse_profile(b);
  EXPECT_EQ(q.capacity(1), 200);
  EXPECT_EQ(q.effective_capacity(1), 100);

  std::ostringstream out;
  write_profile(out, q);
  std::istringstream again(out.str());
  DeviceProfile r = parse_profile(again);
  EXPECT_EQ(r.capacity_override, q.capacity_override);
  EXPECT_DOUBLE_EQ(r.reserve_ratio, 0.5);
}

TEST(Profile, RejectsBadValues) {
  for (const char *text :
       {R"({"k": 0, "mem_capacity_bytes": 1, "bandwidth_bps": 1})",
        R"({"k": 2, "mem_capacity_bytes": [1], "bandwidth_bps": 1})",
        R"({"k": 1, "mem_capacity_bytes": 1, "bandwidth_bps": 0})",
        R"({"k": 1, "mem_capacity_bytes": 1, "bandwidth_bps": 1,
            "reserve_ratio": 1.0})",
        R"({"k": 1, "bandwidth_bps": 1})"}) {
    std::istringstream in(text);
    EXPECT_THROW(parse_profile(in), DagpartError) << text;
  }
}

TEST(PlacementFile, RoundTripsAndIsSorted) {
  std::mt19937_64 rng(137);
  CompGraph g = random_dag(rng, 12, 0.2, 0.2, 0.2).build(unit_profile(3));
  Placement p = round_robin(g, 3);
  std::ostringstream out;
  write_placement(out, g, p);
  std::string text = out.str();
  std::istringstream lines(text);
  std::string line, prev;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    auto tab = line.find('\t');
    ASSERT_NE(tab, std::string::npos);
    std::string id = line.substr(0, tab);
    int dev = std::stoi(line.substr(tab + 1));
    EXPECT_GE(dev, 0);
    EXPECT_LT(dev, 3);
    EXPECT_LT(prev, id);
    prev = id;
    ++count;
  }
  EXPECT_EQ(count, g.num_real_nodes());
  std::istringstream in(text);
  EXPECT_EQ(read_placement(in, g, 3), p);
}

TEST(PlacementFile, RejectsBadLines) {
  CompGraph g = GraphBuilder()
                    .node("a", 1)
                    .node("b", 1)
                    .build(unit_profile());
  for (const char *text : {"a 0\nb\t0\n", "a\t2\nb\t0\n", "a\t0\na\t1\nb\t0\n",
                           "a\t0\nzz\t0\nb\t0\n", "a\t0\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(read_placement(in, g, 2), DagpartError) << text;
  }
}

TEST(Report, HeaderAndRows) {
  PlacementResult r;
  r.method = "pardnn";
  r.makespan = 13000;
  r.peak_mem = {10, 20};
  r.partition_ms = 1.25;
  std::ostringstream out;
  write_report(out, std::vector<PlacementResult>{r});
  EXPECT_EQ(out.str(),
            "method,makespan_ns,peak_mem_bytes_per_device,partition_time_ms\n"
            "pardnn,13000,10;20,1.250\n");
}

TEST(Timeline, CsvHasHeaderAndSamples) {
  CompGraph g = GraphBuilder()
                    .node("a", 2000, 8)
                    .node("b", 3000)
                    .edge("a", "b")
                    .build(unit_profile());
  Placement p(g, 2);
  Schedule s = emulate(g, p, g.profile());
  MemoryTimeline t = track(g, s, p);
  std::ostringstream out;
  write_timeline(out, t);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "device,time_ns,mcons_bytes");
  bool saw_release = false;
  while (std::getline(in, line))
    saw_release |= line == "0,5000,0";
  EXPECT_TRUE(saw_release);

  std::ostringstream js;
  write_schedule(js, g, p, s);
  EXPECT_NE(js.str().find("\"st_ns\""), std::string::npos);
}

TEST(Generator, SingleNode) {
  GenSpec spec;
  spec.layers = 1;
  spec.width = {1, 1};
  CompGraph g = generate_graph(spec).build(unit_profile());
  EXPECT_EQ(g.num_real_nodes(), 1u);
}

TEST(Generator, FixedWidthLayers) {
  GenSpec spec;
  spec.layers = 3;
  spec.width = {2, 2};
  CompGraph g = generate_graph(spec).build(unit_profile());
  EXPECT_EQ(g.num_real_nodes(), 6u);
  EXPECT_EQ(g.topo_order().size(), g.num_nodes());
}

TEST(Generator, DeterministicPerSeed) {
  GenSpec spec;
  spec.layers = 12;
  spec.residual_fraction = 0.2;
  spec.reference_fraction = 0.1;
  spec.seed = 42;
  EXPECT_EQ(to_text(generate_graph(spec)), to_text(generate_graph(spec)));
  GenSpec other = spec;
  other.seed = 43;
  EXPECT_NE(to_text(generate_graph(spec)), to_text(generate_graph(other)));
}

TEST(Generator, RejectsDegenerateSpecs) {
  auto bad = [](auto mutate) {
    GenSpec spec;
    mutate(spec);
    try {
      generate_graph(spec);
    } catch (const DagpartError &e) {
      EXPECT_EQ(e.kind(), ErrorKind::Input);
      return;
    }
    ADD_FAILURE() << "accepted a degenerate spec";
  };
  bad([](GenSpec &s) { s.layers = 0; });
  bad([](GenSpec &s) { s.width = {3, 2}; });
  bad([](GenSpec &s) { s.width = {0, 2}; });
  bad([](GenSpec &s) { s.comp_us = {-1, 2}; });
  bad([](GenSpec &s) { s.residual_fraction = 1.5; });
}

TEST(GeneratorProperties, ValidConnectedGraphs) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    GenSpec spec;
    spec.layers = 2 + seed % 9;
    spec.width = {1, 1 + std::int64_t(seed % 6)};
    spec.fan_in = {1, 3};
    spec.residual_fraction = (seed % 3) * 0.15;
    spec.reference_fraction = (seed % 2) * 0.1;
    spec.seed = seed;
    GraphBuilder b = generate_graph(spec);
    CompGraph g = b.build(unit_profile());
    EXPECT_TRUE(reachable_from_source_and_to_sink(g)) << seed;
    EXPECT_GE(g.num_edges(), g.num_real_nodes() - 1);
    for (NodeIndex v = 0; v < g.num_nodes(); ++v) {
      if (g.kind(v) == NodeKind::Residual) {
        for (EdgeIndex e : g.in_edges(v))
          EXPECT_TRUE(g.edge_is_virtual(e));
      }
    }
  }
}
