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
#include "dagpart/generator.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <set>

namespace dagpart {

namespace {

void check_range(const IntRange &r, const char *what, std::int64_t min) {
  if (r.lo > r.hi || r.lo < min)
    throw DagpartError(ErrorKind::Input,
                       std::string("generator: bad range for ") + what);
}

std::string node_id(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "n%08zu", i);
  return buf;
}

} // namespace

GraphBuilder generate_graph(const GenSpec &spec) {
  if (spec.layers == 0)
    throw DagpartError(ErrorKind::Input, "generator: zero layers");
  check_range(spec.width, "width", 1);
  check_range(spec.fan_in, "fan_in", 1);
  check_range(spec.comp_us, "comp_us", 0);
  check_range(spec.mem_bytes, "mem_bytes", 0);
  check_range(spec.edge_bytes, "edge_bytes", 0);
  if (!(spec.residual_fraction >= 0 && spec.residual_fraction <= 1) ||
      !(spec.reference_fraction >= 0 && spec.reference_fraction <= 1))
    throw DagpartError(ErrorKind::Input, "generator: fractions must be in [0,1]");

  std::mt19937_64 rng(spec.seed);
  auto draw = [&](const IntRange &r) {
    return std::uniform_int_distribution<std::int64_t>(r.lo, r.hi)(rng);
  };
  auto coin = [&](double p) {
    return p > 0 && std::uniform_real_distribution<double>(0, 1)(rng) < p;
  };

  GraphBuilder b;
  std::size_t next = 0;
  auto make = [&](NodeKind kind, std::optional<std::string> ref = {}) {
    std::string id = node_id(next++);
    Bytes mem = kind == NodeKind::Reference ? 0 : draw(spec.mem_bytes);
    b.node(id, draw(spec.comp_us) * kNsPerUs, mem, kind, std::move(ref));
    return id;
  };

  struct LayerNode {
    std::string id;
    bool residual;
    std::size_t index;
  };
  // Union-find over node indices, used to keep the graph connected.
  std::vector<std::size_t> root;
  auto find = [&](std::size_t x) {
    while (root[x] != x)
      x = root[x] = root[root[x]];
    return x;
  };
  auto link = [&](const LayerNode &a, const LayerNode &c) {
    b.edge(a.id, c.id, draw(spec.edge_bytes));
    root[find(a.index)] = find(c.index);
  };
  std::vector<LayerNode> prev;
  // Reference nodes waiting for a consumer two layers down.
  std::vector<std::string> pending_refs;

  for (std::uint32_t layer = 0; layer < spec.layers; ++layer) {
    const bool last = layer + 1 == spec.layers;
    const auto width = static_cast<std::size_t>(draw(spec.width));
    std::vector<LayerNode> cur;
    cur.reserve(width);
    for (std::size_t i = 0; i < width; ++i) {
      // Slot 0 stays Normal so every layer can feed the next one.
      bool residual = !last && i > 0 && coin(spec.residual_fraction);
      std::size_t index = next;
      cur.push_back({make(residual ? NodeKind::Residual : NodeKind::Normal),
                     residual, index});
      root.resize(next);
      root[index] = index;
    }

    std::vector<std::size_t> normals;
    for (std::size_t i = 0; i < cur.size(); ++i)
      if (!cur[i].residual)
        normals.push_back(i);

    if (!prev.empty()) {
      std::vector<std::uint8_t> fed(prev.size(), 0);
      for (std::size_t i : normals) {
        auto want = static_cast<std::size_t>(draw(spec.fan_in));
        want = std::min(want, prev.size());
        std::set<std::size_t> parents;
        while (parents.size() < want)
          parents.insert(static_cast<std::size_t>(
              std::uniform_int_distribution<std::size_t>(0, prev.size() - 1)(
                  rng)));
        for (std::size_t p : parents) {
          link(prev[p], cur[i]);
          fed[p] = 1;
        }
      }
      // Every output gets a consumer; otherwise a first-layer node nobody
      // picked would be left isolated.
      for (std::size_t p = 0; p < prev.size(); ++p) {
        if (fed[p])
          continue;
        std::size_t i = normals[std::uniform_int_distribution<std::size_t>(
            0, normals.size() - 1)(rng)];
        link(prev[p], cur[i]);
      }
      // Parallel chains never meet on their own: give every normal node
      // outside the first one's component an extra parent from it.
      std::size_t anchor = 0;
      while (find(prev[anchor].index) != find(cur[normals[0]].index))
        ++anchor;
      for (std::size_t i : normals)
        if (find(cur[i].index) != find(cur[normals[0]].index))
          link(prev[anchor], cur[i]);
      for (const std::string &ref : pending_refs) {
        std::size_t i = normals[std::uniform_int_distribution<std::size_t>(
            0, normals.size() - 1)(rng)];
        b.edge(ref, cur[i].id, draw(spec.edge_bytes));
      }
      pending_refs.clear();
    }

    for (const LayerNode &n : cur) {
      if (!n.residual || !coin(spec.reference_fraction))
        continue;
      std::size_t index = next;
      std::string ref = make(NodeKind::Reference, n.id);
      root.resize(next);
      root[index] = find(n.index);
      b.edge(n.id, ref, draw(spec.edge_bytes));
      pending_refs.push_back(std::move(ref));
    }
    prev = std::move(cur);
  }
  return b;
}

} // namespace dagpart
