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

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace dagpart {

using nlohmann::json;

namespace {

[[noreturn]] void bad_input(const std::string &what) {
  throw DagpartError(ErrorKind::Input, what);
}

json parse_json(std::istream &in, const char *what) {
  try {
    return json::parse(in);
  } catch (const json::exception &e) {
    bad_input(std::string("malformed ") + what + " JSON: " + e.what());
  }
}

const json &field(const json &obj, const char *key, const std::string &ctx) {
  auto it = obj.find(key);
  if (it == obj.end())
    bad_input(ctx + ": missing \"" + key + "\"");
  return *it;
}

std::string string_field(const json &obj, const char *key,
                         const std::string &ctx) {
  const json &v = field(obj, key, ctx);
  if (!v.is_string())
    bad_input(ctx + ": \"" + key + "\" must be a string");
  return v.get<std::string>();
}

std::int64_t int_field(const json &obj, const char *key,
                       const std::string &ctx) {
  const json &v = field(obj, key, ctx);
  if (v.is_number_integer())
    return v.get<std::int64_t>();
  if (v.is_number_float()) {
    double d = v.get<double>();
    if (std::trunc(d) == d && std::abs(d) < 9e18)
      return static_cast<std::int64_t>(d);
  }
  bad_input(ctx + ": \"" + key + "\" must be an integer");
}

double number_field(const json &obj, const char *key, const std::string &ctx) {
  const json &v = field(obj, key, ctx);
  if (!v.is_number())
    bad_input(ctx + ": \"" + key + "\" must be a number");
  return v.get<double>();
}

/// Microseconds to nanoseconds, exact for integers and rounded otherwise.
TimeNs us_to_ns(const json &v, const std::string &ctx) {
  if (v.is_number_integer())
    return v.get<std::int64_t>() * kNsPerUs;
  if (v.is_number_float())
    return std::llround(v.get<double>() * static_cast<double>(kNsPerUs));
  bad_input(ctx + ": duration must be a number");
}

json us_value(TimeNs ns) {
  if (ns % kNsPerUs == 0)
    return ns / kNsPerUs;
  return static_cast<double>(ns) / static_cast<double>(kNsPerUs);
}

std::ifstream open_in(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    bad_input("cannot open " + path.string());
  return in;
}

} // namespace

GraphBuilder parse_graph(std::istream &in) {
  json doc = parse_json(in, "graph");
  if (!doc.is_object())
    bad_input("graph document must be an object");
  const json &nodes = field(doc, "nodes", "graph");
  if (!nodes.is_array())
    bad_input("graph: \"nodes\" must be an array");
  GraphBuilder b;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const json &n = nodes[i];
    const std::string ctx = "node #" + std::to_string(i);
    if (!n.is_object())
      bad_input(ctx + " must be an object");
    OpNode op;
    op.id = string_field(n, "id", ctx);
    op.comp = us_to_ns(field(n, "comp_us", ctx), ctx);
    op.out_mem = n.contains("mem_bytes") ? int_field(n, "mem_bytes", ctx) : 0;
    if (n.contains("kind")) {
      try {
        op.kind = parse_node_kind(string_field(n, "kind", ctx));
      } catch (const DagpartError &e) {
        bad_input(ctx + ": " + e.what());
      }
    }
    if (n.contains("colocate_with") && !n["colocate_with"].is_null())
      op.colocate_with = string_field(n, "colocate_with", ctx);
    b.add_node(std::move(op));
  }
  if (doc.contains("edges")) {
    const json &edges = doc["edges"];
    if (!edges.is_array())
      bad_input("graph: \"edges\" must be an array");
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const json &e = edges[i];
      const std::string ctx = "edge #" + std::to_string(i);
      if (!e.is_object())
        bad_input(ctx + " must be an object");
      CommEdge edge;
      edge.src = string_field(e, "src", ctx);
      edge.dst = string_field(e, "dst", ctx);
      edge.bytes = e.contains("bytes") ? int_field(e, "bytes", ctx) : 0;
      b.add_edge(std::move(edge));
    }
  }
  return b;
}

CompGraph load_graph(const std::filesystem::path &path,
                     const DeviceProfile &profile) {
  std::ifstream in = open_in(path);
  return parse_graph(in).build(profile);
}

void write_graph(std::ostream &out, std::span<const OpNode> nodes,
                 std::span<const CommEdge> edges) {
  json doc;
  json &jn = doc["nodes"] = json::array();
  for (const OpNode &n : nodes) {
    json o = {{"id", n.id},
              {"comp_us", us_value(n.comp)},
              {"mem_bytes", n.out_mem},
              {"kind", std::string(to_string(n.kind))}};
    if (n.colocate_with)
      o["colocate_with"] = *n.colocate_with;
    jn.push_back(std::move(o));
  }
  json &je = doc["edges"] = json::array();
  for (const CommEdge &e : edges)
    je.push_back({{"src", e.src}, {"dst", e.dst}, {"bytes", e.bytes}});
  out << doc.dump(1) << '\n';
}

void write_graph(std::ostream &out, const CompGraph &g) {
  write_graph(out, g.real_nodes(), g.real_edges());
}

DeviceProfile parse_profile(std::istream &in) {
  json doc = parse_json(in, "device profile");
  if (!doc.is_object())
    bad_input("device profile must be an object");
  const std::string ctx = "device profile";
  DeviceProfile p;
  std::int64_t k = int_field(doc, "k", ctx);
  if (k < 1 || k > 1 << 16)
    bad_input(ctx + ": k out of range");
  p.k = static_cast<std::uint32_t>(k);
  const json &cap = field(doc, "mem_capacity_bytes", ctx);
  if (cap.is_array()) {
    for (const json &c : cap) {
      if (!c.is_number_integer())
        bad_input(ctx + ": capacities must be integers");
      p.capacity_override.push_back(c.get<Bytes>());
    }
    p.mem_capacity = p.capacity_override.empty()
                         ? 0
                         : *std::max_element(p.capacity_override.begin(),
                                             p.capacity_override.end());
  } else {
    p.mem_capacity = int_field(doc, "mem_capacity_bytes", ctx);
  }
  p.bandwidth_bps = number_field(doc, "bandwidth_bps", ctx);
  p.latency = doc.contains("latency_us")
                  ? us_to_ns(doc["latency_us"], ctx)
                  : 0;
  if (doc.contains("reserve_ratio"))
    p.reserve_ratio = number_field(doc, "reserve_ratio", ctx);
  p.validate();
  return p;
}

DeviceProfile load_profile(const std::filesystem::path &path) {
  std::ifstream in = open_in(path);
  return parse_profile(in);
}

void write_profile(std::ostream &out, const DeviceProfile &profile) {
  json doc = {{"k", profile.k},
              {"bandwidth_bps", profile.bandwidth_bps},
              {"latency_us", us_value(profile.latency)},
              {"reserve_ratio", profile.reserve_ratio}};
  if (profile.capacity_override.empty())
    doc["mem_capacity_bytes"] = profile.mem_capacity;
  else
    doc["mem_capacity_bytes"] = profile.capacity_override;
  out << doc.dump(1) << '\n';
}

void write_placement(std::ostream &out, const CompGraph &g,
                     const Placement &placement) {
  for (const auto &[id, dev] : placement.by_name(g))
    out << id << '\t' << dev << '\n';
}

Placement read_placement(std::istream &in, const CompGraph &g,
                         std::uint32_t k) {
  std::map<std::string, DeviceIndex> map;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    auto tab = line.rfind('\t');
    if (tab == std::string::npos)
      bad_input("placement line " + std::to_string(lineno) + ": missing tab");
    std::string id = line.substr(0, tab);
    std::string dev = line.substr(tab + 1);
    std::size_t used = 0;
    unsigned long d = 0;
    try {
      d = std::stoul(dev, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used == 0 || used != dev.size())
      bad_input("placement line " + std::to_string(lineno) +
                ": bad device index '" + dev + "'");
    if (!map.emplace(id, static_cast<DeviceIndex>(d)).second)
      bad_input("placement lists '" + id + "' twice");
  }
  return Placement::from_names(g, k, map);
}

void write_schedule(std::ostream &out, const CompGraph &g,
                    const Placement &placement, const Schedule &schedule) {
  json doc = json::array();
  for (NodeIndex v : g.topo_order()) {
    if (g.is_virtual(v))
      continue;
    doc.push_back({{"node", g.name(v)},
                   {"device", placement[v]},
                   {"st_ns", schedule.st[v]},
                   {"ft_ns", schedule.ft[v]}});
  }
  out << doc.dump(1) << '\n';
}

void write_timeline(std::ostream &out, const MemoryTimeline &timeline) {
  out << "device,time_ns,mcons_bytes\n";
  for (DeviceIndex d = 0; d < timeline.devices.size(); ++d)
    for (const MemorySample &s : timeline.devices[d].samples)
      out << d << ',' << s.time << ',' << s.mcons << '\n';
}

void write_report(std::ostream &out, std::span<const PlacementResult> results) {
  out << "method,makespan_ns,peak_mem_bytes_per_device,partition_time_ms\n";
  for (const PlacementResult &r : results) {
    out << r.method << ',' << r.makespan << ',';
    for (std::size_t d = 0; d < r.peak_mem.size(); ++d)
      out << (d ? ";" : "") << r.peak_mem[d];
    std::ostringstream ms;
    ms << std::fixed << std::setprecision(3) << r.partition_ms;
    out << ',' << ms.str() << '\n';
  }
}

} // namespace dagpart
