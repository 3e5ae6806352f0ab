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
#include "dagpart/io.hpp"
#include "dagpart/log.hpp"
#include "dagpart/pipeline.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <limits>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

using namespace dagpart;

namespace {

enum ExitCode : int {
  kOk = 0,
  kOther = 1,
  kBadInput = 2,
  kOverflow = 3,
};

/// Device options shared by every subcommand that evaluates placements.
struct DeviceArgs {
  std::string devices = "1";
  std::optional<Bytes> mem_capacity;
  std::optional<double> bandwidth;
  std::optional<double> latency_us;
  std::optional<double> reserve_ratio;

  void attach(CLI::App *cmd) {
    cmd->add_option("--devices", devices,
                    "Device count, or path to a device profile JSON")
        ->capture_default_str();
    cmd->add_option("--mem-capacity", mem_capacity,
                    "Memory per device in bytes (default: unlimited)");
    cmd->add_option("--bandwidth", bandwidth,
                    "Interconnect bandwidth in bytes/s (default 1e9)");
    cmd->add_option("--latency-us", latency_us,
                    "Interconnect latency in microseconds (default 0)");
    cmd->add_option("--reserve-ratio", reserve_ratio,
                    "Fraction of memory kept in reserve (default 0.1)");
  }

  DeviceProfile resolve() const {
    DeviceProfile p;
    std::uint32_t k = 0;
    auto [ptr, ec] =
        std::from_chars(devices.data(), devices.data() + devices.size(), k);
    if (ec == std::errc() && ptr == devices.data() + devices.size()) {
      p.k = k;
      // Four exabytes stands in for "no limit" without overflowing sums.
      p.mem_capacity = std::numeric_limits<Bytes>::max() / 2;
    } else {
      p = load_profile(devices);
    }
    if (mem_capacity) {
      p.mem_capacity = *mem_capacity;
      p.capacity_override.clear();
    }
    if (bandwidth)
      p.bandwidth_bps = *bandwidth;
    if (latency_us)
      p.latency = std::llround(*latency_us * static_cast<double>(kNsPerUs));
    if (reserve_ratio)
      p.reserve_ratio = *reserve_ratio;
    p.validate();
    return p;
  }
};

struct PipelineArgs {
  std::string method = "pardnn";
  std::string mem_heuristic = "none";
  bool refine = false;
  double ccr_threshold = 10.0;

  void attach(CLI::App *cmd, bool with_method) {
    if (with_method)
      cmd->add_option("--method", method, "pardnn, rr, cp, lc or oracle")
          ->capture_default_str();
    cmd->add_option("--mem-heuristic", mem_heuristic,
                    "none, overflow or balance")
        ->capture_default_str();
    cmd->add_flag("--refine", refine, "Run cluster swaps and node moves");
    cmd->add_option("--ccr-threshold", ccr_threshold,
                    "CCR above which mostly-communicating clusters are merged "
                    "early")
        ->capture_default_str();
  }

  PipelineOptions resolve() const {
    PipelineOptions o;
    o.method = parse_method(method);
    o.mem_heuristic = parse_mem_heuristic(mem_heuristic);
    o.refine = refine;
    o.ccr_threshold = ccr_threshold;
    return o;
  }
};

std::ofstream open_out(const std::string &path) {
  std::ofstream f(path);
  if (!f)
    throw DagpartError(ErrorKind::Input, "cannot write " + path);
  return f;
}

void print_summary(const PlacementResult &r, bool feasible) {
  std::cout << r.method << ": makespan_ns=" << r.makespan << " peak_mem=";
  for (std::size_t d = 0; d < r.peak_mem.size(); ++d)
    std::cout << (d ? ";" : "") << r.peak_mem[d];
  std::cout << " partition_ms=" << r.partition_ms
            << " feasible=" << (feasible ? "yes" : "no") << '\n';
}

void report_overflow(const OverflowEvent &ov) {
  std::cerr << "unresolved memory overflow: device " << ov.device << " at "
            << ov.time << " ns exceeds capacity by " << ov.overflow_bytes
            << " bytes\n";
}

} // namespace

int main(int argc, char **argv) {
  configure_logging();
  CLI::App app{"Partition an annotated operation DAG across memory-limited "
               "devices"};
  app.require_subcommand(1);

  // partition
  RunConfig run;
  std::string graph_path, out_path, report_path, schedule_path, timeline_path;
  DeviceArgs part_dev;
  PipelineArgs part_opts;
  auto *part = app.add_subcommand("partition", "Compute a placement");
  part->add_option("--graph", graph_path, "Graph JSON")->required();
  part_dev.attach(part);
  part_opts.attach(part, true);
  part->add_option("--seed", run.seed, "Random seed (recorded only)");
  part->add_option("--out", out_path, "Placement file to write");
  part->add_option("--report", report_path, "Report CSV to write");
  part->add_option("--schedule", schedule_path, "Schedule JSON to write");
  part->add_option("--timeline", timeline_path, "Memory timeline CSV to write");

  // compare
  std::string cmp_graph, cmp_report;
  std::vector<std::string> cmp_methods{"pardnn", "rr", "cp", "lc"};
  DeviceArgs cmp_dev;
  PipelineArgs cmp_opts;
  std::uint64_t cmp_seed = 1;
  auto *cmp = app.add_subcommand("compare", "Run several methods on one graph");
  cmp->add_option("--graph", cmp_graph, "Graph JSON")->required();
  cmp_dev.attach(cmp);
  cmp_opts.attach(cmp, false);
  cmp->add_option("--methods", cmp_methods, "Methods to compare")
      ->delimiter(',')
      ->capture_default_str();
  cmp->add_option("--seed", cmp_seed, "Random seed (recorded only)");
  cmp->add_option("--report", cmp_report, "Report CSV (default: stdout)");

  // emulate
  std::string emu_graph, emu_placement, emu_schedule, emu_timeline, emu_report;
  DeviceArgs emu_dev;
  auto *emu = app.add_subcommand("emulate", "Evaluate an existing placement");
  emu->add_option("--graph", emu_graph, "Graph JSON")->required();
  emu->add_option("--placement", emu_placement, "Placement file")->required();
  emu_dev.attach(emu);
  emu->add_option("--schedule", emu_schedule, "Schedule JSON to write");
  emu->add_option("--timeline", emu_timeline, "Memory timeline CSV to write");
  emu->add_option("--report", emu_report, "Report CSV to write");

  // gen
  GenSpec spec;
  std::string gen_out;
  auto *gen = app.add_subcommand("gen", "Generate a random layered DAG");
  gen->add_option("--layers", spec.layers)->capture_default_str();
  gen->add_option("--width-min", spec.width.lo)->capture_default_str();
  gen->add_option("--width-max", spec.width.hi)->capture_default_str();
  gen->add_option("--fan-in-min", spec.fan_in.lo)->capture_default_str();
  gen->add_option("--fan-in-max", spec.fan_in.hi)->capture_default_str();
  gen->add_option("--comp-us-min", spec.comp_us.lo)->capture_default_str();
  gen->add_option("--comp-us-max", spec.comp_us.hi)->capture_default_str();
  gen->add_option("--mem-min", spec.mem_bytes.lo)->capture_default_str();
  gen->add_option("--mem-max", spec.mem_bytes.hi)->capture_default_str();
  gen->add_option("--bytes-min", spec.edge_bytes.lo)->capture_default_str();
  gen->add_option("--bytes-max", spec.edge_bytes.hi)->capture_default_str();
  gen->add_option("--residual-fraction", spec.residual_fraction)
      ->capture_default_str();
  gen->add_option("--reference-fraction", spec.reference_fraction)
      ->capture_default_str();
  gen->add_option("--seed", spec.seed)->capture_default_str();
  gen->add_option("--out", gen_out, "Output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kBadInput;
  }

  try {
    if (*part) {
      run.graph = graph_path;
      run.profile = part_dev.resolve();
      run.options = part_opts.resolve();
      if (!out_path.empty())
        run.placement_out = out_path;
      if (!report_path.empty())
        run.report_out = report_path;
      if (!schedule_path.empty())
        run.schedule_out = schedule_path;
      if (!timeline_path.empty())
        run.timeline_out = timeline_path;
      PipelineResult r = run_pipeline(run);
      print_summary(r.result, r.feasible);
      if (!r.feasible) {
        report_overflow(*r.residual_overflow);
        return kOverflow;
      }
      return kOk;
    }

    if (*cmp) {
      DeviceProfile profile = cmp_dev.resolve();
      PipelineOptions base = cmp_opts.resolve();
      CompGraph g = load_graph(cmp_graph, profile);
      std::vector<PlacementResult> results;
      for (const std::string &m : cmp_methods) {
        PipelineOptions o = base;
        o.method = parse_method(m);
        PipelineResult r = partition(g, profile, o);
        results.push_back(std::move(r.result));
      }
      if (cmp_report.empty()) {
        write_report(std::cout, results);
      } else {
        auto f = open_out(cmp_report);
        write_report(f, results);
      }
      return kOk;
    }

    if (*emu) {
      DeviceProfile profile = emu_dev.resolve();
      CompGraph g = load_graph(emu_graph, profile);
      std::ifstream in(emu_placement);
      if (!in)
        throw DagpartError(ErrorKind::Input, "cannot open " + emu_placement);
      Placement p = read_placement(in, g, profile.k);
      Schedule s = emulate(g, p, profile);
      MemoryTimeline tl = track(g, s, p);
      PlacementResult r;
      r.method = "placement";
      r.placement = p;
      r.makespan = s.makespan;
      for (const DeviceTimeline &d : tl.devices)
        r.peak_mem.push_back(d.peak);
      if (!emu_schedule.empty()) {
        auto f = open_out(emu_schedule);
        write_schedule(f, g, p, s);
      }
      if (!emu_timeline.empty()) {
        auto f = open_out(emu_timeline);
        write_timeline(f, tl);
      }
      if (!emu_report.empty()) {
        auto f = open_out(emu_report);
        write_report(f, std::span(&r, 1));
      }
      auto ov = tl.first_overflow(profile);
      print_summary(r, !ov);
      if (ov) {
        report_overflow(*ov);
        return kOverflow;
      }
      return kOk;
    }

    if (*gen) {
      GraphBuilder b = generate_graph(spec);
      if (gen_out.empty()) {
        write_graph(std::cout, b.nodes(), b.edges());
      } else {
        auto f = open_out(gen_out);
        write_graph(f, b.nodes(), b.edges());
      }
      return kOk;
    }
  } catch (const DagpartError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::Degenerate ? kOther : kBadInput;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
  return kOther;
}
