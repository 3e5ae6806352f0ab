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
/// Serial reference against the OpenMP kernel: batch placement evaluation
/// and the exhaustive oracle built on it.

#include "dagpart/baselines.hpp"
#include "dagpart/generator.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace dagpart;

namespace {

DeviceProfile profile(std::uint32_t k) {
  DeviceProfile p;
  p.k = k;
  p.mem_capacity = Bytes{1} << 40;
  p.bandwidth_bps = 1e9;
  return p;
}

/// Layered graph with exactly layers * width nodes.
CompGraph layered(std::uint32_t layers, std::int64_t width, std::uint32_t k) {
  GenSpec spec;
  spec.layers = layers;
  spec.width = {width, width};
  spec.fan_in = {1, 3};
  spec.seed = 42;
  return generate_graph(spec).build(profile(k));
}

std::vector<Placement> random_placements(const CompGraph &g, std::uint32_t k,
                                         std::size_t count) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<DeviceIndex> dev(0, k - 1);
  std::vector<Placement> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Placement p(g, k);
    for (NodeIndex v = 0; v < g.num_nodes(); ++v)
      if (!g.is_virtual(v))
        p.assign(v, dev(rng));
    out.push_back(std::move(p));
  }
  return out;
}

void BM_BatchSerial(benchmark::State &state) {
  CompGraph g = layered(static_cast<std::uint32_t>(state.range(0)), 8, 4);
  auto ps = random_placements(g, 4, 2048);
  for (auto _ : state)
    benchmark::DoNotOptimize(batch_makespans_serial(g, ps, g.profile()));
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(ps.size()));
}

void BM_BatchParallel(benchmark::State &state) {
  CompGraph g = layered(static_cast<std::uint32_t>(state.range(0)), 8, 4);
  auto ps = random_placements(g, 4, 2048);
  for (auto _ : state)
    benchmark::DoNotOptimize(batch_makespans(g, ps, g.profile()));
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(ps.size()));
}

void BM_OracleSerial(benchmark::State &state) {
  CompGraph g = layered(static_cast<std::uint32_t>(state.range(0)), 3, 3);
  for (auto _ : state)
    benchmark::DoNotOptimize(brute_force_optimal_serial(g, 3, g.profile()));
}

void BM_OracleParallel(benchmark::State &state) {
  CompGraph g = layered(static_cast<std::uint32_t>(state.range(0)), 3, 3);
  for (auto _ : state)
    benchmark::DoNotOptimize(brute_force_optimal(g, 3, g.profile()));
}

} // namespace

BENCHMARK(BM_BatchSerial)->Arg(4)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchParallel)->Arg(4)->Arg(32)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_OracleSerial)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OracleParallel)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
