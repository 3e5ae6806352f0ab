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

#include "dagpart/graph.hpp"

#include <cstdint>

namespace dagpart {

/// Closed integer range sampled uniformly.
struct IntRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

/// Shape of a random layered DAG.
struct GenSpec {
  std::uint32_t layers = 4;
  IntRange width{1, 4};
  /// Parents drawn from the previous layer for every non-source node.
  IntRange fan_in{1, 2};
  IntRange comp_us{1, 10};
  IntRange mem_bytes{0, 1024};
  IntRange edge_bytes{0, 4096};
  /// Probability that a node outside the last layer is a Residual source.
  double residual_fraction = 0.0;
  /// Probability that a Residual node gets a Reference child.
  double reference_fraction = 0.0;
  std::uint64_t seed = 1;
};

/// Samples a layered DAG. Every node outside layer 0 has a parent in the
/// previous layer unless it is a Residual (those are parentless and always
/// feed the next layer). Node ids sort in creation order. Identical specs
/// give identical graphs. Throws DagpartError(Input) for zero layers, empty
/// widths or inverted ranges.
GraphBuilder generate_graph(const GenSpec &spec);

} // namespace dagpart
