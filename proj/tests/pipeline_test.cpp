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
#include "dagpart/io.hpp"
#include "dagpart/pipeline.hpp"
#include "support/worked_example.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace dagpart;
using namespace dagpart::testing;

namespace {

/// Scratch directory removed when the test ends.
class TempDir {
public:
  TempDir() {
    const auto *info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = std::filesystem::temp_directory_path() /
            (std::string("dagpart_") + info->test_suite_name() + "_" +
             info->name());
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::filesystem::path operator/(const std::string &name) const {
    return path_ / name;
  }

private:
  std::filesystem::path path_;
};

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const std::filesystem::path &p, const std::string &text) {
  std::ofstream(p) << text;
}

void write_builder(const std::filesystem::path &p, const GraphBuilder &b) {
  std::ofstream f(p);
  write_graph(f, b.nodes(), b.edges());
}

constexpr std::array kAllMethods{Method::ParDnn, Method::RoundRobin,
                                 Method::CriticalPath,
                                 Method::LinearClustering, Method::Oracle};

} // namespace

TEST(Partition, SingleNodeMakespanIsComp) {
  GraphBuilder b;
  b.node("only", 7 * kNsPerUs, 32);
  CompGraph g = b.build(unit_profile(3));
  for (Method m : kAllMethods) {
    PipelineOptions o;
    o.method = m;
    PipelineResult r = partition(g, unit_profile(3), o);
    EXPECT_EQ(r.result.makespan, 7000) << to_string(m);
    EXPECT_TRUE(r.feasible);
    EXPECT_EQ(r.result.peak_mem.size(), 3u);
  }
}

TEST(Partition, MethodNamesRoundTrip) {
  for (Method m : kAllMethods)
    EXPECT_EQ(parse_method(to_string(m)), m);
  for (auto h : {MemHeuristic::None, MemHeuristic::Overflow,
                 MemHeuristic::Balance})
    EXPECT_EQ(parse_mem_heuristic(to_string(h)), h);
  EXPECT_THROW(parse_method("metis"), DagpartError);
  EXPECT_THROW(parse_mem_heuristic("greedy"), DagpartError);
}

TEST(RunPipeline, WorkedExampleFromFiles) {
  TempDir dir;
  write_builder(dir / "g.json", worked_example_graph());
  {
    std::ofstream f(dir / "p.json");
    write_profile(f, unit_profile(2));
  }
  RunConfig cfg;
  cfg.graph = dir / "g.json";
  cfg.profile = load_profile(dir / "p.json");
  cfg.placement_out = dir / "out.tsv";
  cfg.report_out = dir / "report.csv";
  cfg.schedule_out = dir / "sched.json";
  cfg.timeline_out = dir / "mem.csv";
  PipelineResult r = run_pipeline(cfg);
  EXPECT_EQ(r.result.makespan, 13000);

  std::istringstream placement(slurp(dir / "out.tsv"));
  std::string line;
  std::size_t lines = 0;
  while (std::getline(placement, line))
    ++lines;
  EXPECT_EQ(lines, 17u);
  std::string report = slurp(dir / "report.csv");
  EXPECT_EQ(report.rfind("method,makespan_ns,", 0), 0u);
  EXPECT_NE(report.find("pardnn,13000,"), std::string::npos);
  EXPECT_NE(slurp(dir / "sched.json").find("\"ft_ns\""), std::string::npos);
  EXPECT_EQ(slurp(dir / "mem.csv").rfind("device,time_ns,mcons_bytes\n", 0),
            0u);
}

TEST(RunPipeline, MissingGraphIsInputError) {
  RunConfig cfg;
  cfg.graph = "/nonexistent/graph.json";
  cfg.profile = unit_profile();
  try {
    run_pipeline(cfg);
    FAIL();
  } catch (const DagpartError &e) {
    EXPECT_EQ(e.kind(), ErrorKind::Input);
  }
}

TEST(Partition, OverflowHeuristicRecordsMoves) {
  // Round-robin over sorted ids puts r0 and t0 together on device 0.
  GraphBuilder b;
  b.node("r0", 0, 60, NodeKind::Residual);
  b.node("s1", kNsPerUs, 1);
  b.node("s2", kNsPerUs, 1);
  b.node("t0", 0, 60, NodeKind::Residual);
  b.edge("s1", "s2", 0);
  DeviceProfile p = unit_profile(3, 100);
  CompGraph g = b.build(p);

  PipelineOptions o;
  o.method = Method::RoundRobin;
  PipelineResult none = partition(g, p, o);
  ASSERT_FALSE(none.feasible);
  EXPECT_EQ(none.residual_overflow->overflow_bytes, 30);
  EXPECT_FALSE(none.overflow_moves.has_value());

  o.mem_heuristic = MemHeuristic::Overflow;
  PipelineResult fixed = partition(g, p, o);
  EXPECT_TRUE(fixed.feasible);
  ASSERT_TRUE(fixed.overflow_moves.has_value());
  EXPECT_EQ(*fixed.overflow_moves, 1u);
}

TEST(Partition, BalanceHeuristicFillsStats) {
  std::mt19937_64 rng(5);
  CompGraph g = random_dag(rng, 40, 0.1, 0.3).build(unit_profile(2));
  PipelineOptions o;
  o.mem_heuristic = MemHeuristic::Balance;
  PipelineResult r = partition(g, unit_profile(2), o);
  EXPECT_TRUE(r.split_stats.has_value());
  EXPECT_TRUE(r.balance_stats.has_value());
  EXPECT_LE(r.balance_stats->max_share_after,
            r.balance_stats->max_share_before + 1e-12);
}

TEST(PartitionProperties, EveryMethodKeepsReferencesColocated) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const std::uint32_t k = 2 + trial % 2;
    DeviceProfile p = unit_profile(k);
    CompGraph g = random_dag(rng, 9, 0.3, 0.3, 0.4).build(p);
    for (Method m : kAllMethods)
      for (auto h : {MemHeuristic::None, MemHeuristic::Balance}) {
        PipelineOptions o;
        o.method = m;
        o.mem_heuristic = h;
        o.refine = trial % 2 == 0;
        PipelineResult r = partition(g, p, o);
        EXPECT_NO_THROW(check_colocation(g, r.result.placement))
            << "trial " << trial << " " << to_string(m);
      }
  }
}

TEST(PartitionProperties, DeterministicUnderFixedInput) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GenSpec spec;
    spec.layers = 6;
    spec.width = {2, 6};
    spec.residual_fraction = 0.3;
    spec.reference_fraction = 0.5;
    spec.seed = seed;
    DeviceProfile p = unit_profile(3, 4000);
    CompGraph g1 = generate_graph(spec).build(p);
    CompGraph g2 = generate_graph(spec).build(p);
    for (auto h : {MemHeuristic::None, MemHeuristic::Overflow,
                   MemHeuristic::Balance}) {
      PipelineOptions o;
      o.mem_heuristic = h;
      o.refine = true;
      PipelineResult a = partition(g1, p, o);
      PipelineResult b = partition(g2, p, o);
      EXPECT_EQ(a.result.placement, b.result.placement) << "seed " << seed;
      EXPECT_EQ(a.result.makespan, b.result.makespan);
      EXPECT_EQ(a.feasible, b.feasible);
    }
  }
}

// The command-line tool, driven through the shell.
namespace {

int run_cli(const std::string &args) {
  std::string cmd = std::string("\"") + DAGPART_CLI_PATH + "\" " + args +
                    " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const std::string kUnit = " --bandwidth 1e6 --latency-us 0";

} // namespace

TEST(Cli, GenPartitionEmulateRoundTrip) {
  TempDir dir;
  auto g = (dir / "g.json").string();
  auto out = (dir / "p.tsv").string();
  auto rep = (dir / "r.csv").string();
  ASSERT_EQ(run_cli("gen --layers 5 --seed 3 --out " + g), 0);
  ASSERT_EQ(run_cli("partition --graph " + g + " --devices 2 --refine --out " +
                    out + kUnit),
            0);
  ASSERT_EQ(run_cli("emulate --graph " + g + " --placement " + out +
                    " --devices 2 --report " + rep + kUnit),
            0);
  EXPECT_EQ(slurp(rep).rfind("method,makespan_ns,", 0), 0u);
}

TEST(Cli, WorkedExampleMakespan) {
  TempDir dir;
  write_builder(dir / "g.json", worked_example_graph());
  auto rep = (dir / "r.csv").string();
  ASSERT_EQ(run_cli("partition --graph " + (dir / "g.json").string() +
                    " --devices 2 --report " + rep + kUnit),
            0);
  EXPECT_NE(slurp(rep).find("pardnn,13000,"), std::string::npos);
}

TEST(Cli, CompareListsEveryMethod) {
  TempDir dir;
  write_builder(dir / "g.json", worked_example_graph());
  auto rep = (dir / "r.csv").string();
  ASSERT_EQ(run_cli("compare --graph " + (dir / "g.json").string() +
                    " --devices 2 --methods pardnn,rr,cp,lc --report " +
                    rep + kUnit),
            0);
  std::string text = slurp(rep);
  for (const char *m : {"\npardnn,", "\nrr,", "\ncp,", "\nlc,"})
    EXPECT_NE(text.find(m), std::string::npos) << m;
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  auto bad = (dir / "bad.json").string();
  write_text(bad, "{\"nodes\": [");
  EXPECT_EQ(run_cli("partition --graph " + bad + kUnit), 2);

  auto dangling = (dir / "dangling.json").string();
  write_text(dangling, R"({"nodes":[{"id":"a","comp_us":1}],
                           "edges":[{"src":"a","dst":"zz","bytes":1}]})");
  EXPECT_EQ(run_cli("partition --graph " + dangling + kUnit), 2);

  auto heavy = (dir / "heavy.json").string();
  write_text(heavy, R"({"nodes":[{"id":"w","comp_us":0,"mem_bytes":100,
                                  "kind":"Residual"},
                                 {"id":"a","comp_us":1,"mem_bytes":1}],
                        "edges":[{"src":"w","dst":"a","bytes":0}]})");
  EXPECT_EQ(run_cli("partition --graph " + heavy +
                    " --devices 2 --mem-capacity 50 --mem-heuristic overflow" +
                    kUnit),
            3);
  EXPECT_EQ(run_cli("partition --graph " + heavy +
                    " --devices 2 --mem-capacity 1000" + kUnit),
            0);
  EXPECT_EQ(run_cli("partition --graph " + heavy + " --method metis" + kUnit),
            2);
  EXPECT_EQ(run_cli("partition" + kUnit), 2);
}
