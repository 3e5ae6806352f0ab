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

#include "dagpart/baselines.hpp"
#include "dagpart/memory.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>

namespace dagpart {

/// Parses the graph JSON format:
///   {"nodes": [{"id", "comp_us", "mem_bytes", "kind", "colocate_with"?}],
///    "edges": [{"src", "dst", "bytes"}]}
/// comp_us is converted to nanoseconds. Throws DagpartError(Input) on
/// malformed documents; structural problems surface from build().
GraphBuilder parse_graph(std::istream &in);
CompGraph load_graph(const std::filesystem::path &path,
                     const DeviceProfile &profile);
void write_graph(std::ostream &out, std::span<const OpNode> nodes,
                 std::span<const CommEdge> edges);
void write_graph(std::ostream &out, const CompGraph &g);

/// Parses {"k", "mem_capacity_bytes", "bandwidth_bps", "latency_us",
/// "reserve_ratio"?}. mem_capacity_bytes may also be a list with one entry
/// per device.
DeviceProfile parse_profile(std::istream &in);
DeviceProfile load_profile(const std::filesystem::path &path);
void write_profile(std::ostream &out, const DeviceProfile &profile);

/// One "node_id<TAB>device" line per real node, sorted by id.
void write_placement(std::ostream &out, const CompGraph &g,
                     const Placement &placement);
Placement read_placement(std::istream &in, const CompGraph &g, std::uint32_t k);

/// JSON list of {node, device, st_ns, ft_ns}, virtual endpoints excluded.
void write_schedule(std::ostream &out, const CompGraph &g,
                    const Placement &placement, const Schedule &schedule);

/// CSV rows device,time_ns,mcons_bytes with a header line.
void write_timeline(std::ostream &out, const MemoryTimeline &timeline);

/// CSV rows method,makespan_ns,peak_mem_bytes_per_device,partition_time_ms;
/// per-device peaks are joined with ';'.
void write_report(std::ostream &out, std::span<const PlacementResult> results);

} // namespace dagpart
