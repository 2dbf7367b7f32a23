#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pscsim/core.hpp"
#include "pscsim/scenario.hpp"
#include "pscsim/simcore.hpp"
#include "pscsim/trace.hpp"

namespace pscsim {

/// Parses a bit/s rate with an optional k/M/G suffix: "500k", "10M", "2.5G".
inline double parse_rate(const std::string& text) {
  if (text.empty()) throw SimError("rate: empty value");
  double scale = 1.0;
  std::string digits = text;
  switch (text.back()) {
    case 'k': scale = 1e3; digits.pop_back(); break;
    case 'M': scale = 1e6; digits.pop_back(); break;
    case 'G': scale = 1e9; digits.pop_back(); break;
    default: break;
  }
  size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(digits, &used);
  } catch (const std::exception&) {
    throw SimError(strf("rate: cannot parse '%s'", text.c_str()));
  }
  if (used != digits.size() || value <= 0.0) {
    throw SimError(strf("rate: cannot parse '%s'", text.c_str()));
  }
  return value * scale;
}

/// Parses a seed list: "7", "1,2,5" or the inclusive range "1..10".
inline std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  auto parse_one = [](const std::string& s) {
    size_t used = 0;
    unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw SimError(strf("seeds: cannot parse '%s'", s.c_str()));
    return static_cast<std::uint64_t>(v);
  };
  size_t range = text.find("..");
  try {
    if (range != std::string::npos) {
      std::uint64_t lo = parse_one(text.substr(0, range));
      std::uint64_t hi = parse_one(text.substr(range + 2));
      if (hi < lo) throw SimError(strf("seeds: empty range '%s'", text.c_str()));
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      size_t pos = 0;
      while (pos <= text.size()) {
        size_t comma = text.find(',', pos);
        std::string part = text.substr(pos, comma == std::string::npos ? std::string::npos
                                                                       : comma - pos);
        if (part.empty()) throw SimError(strf("seeds: cannot parse '%s'", text.c_str()));
        seeds.push_back(parse_one(part));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
    }
  } catch (const SimError&) {
    throw;
  } catch (const std::exception&) {
    throw SimError(strf("seeds: cannot parse '%s'", text.c_str()));
  }
  if (seeds.empty()) throw SimError("seeds: none given");
  return seeds;
}

/// Everything one invocation runs: a subcommand, its configuration, the seed
/// sweep and the output location.
struct RunManifest {
  std::string subcommand;  // mva | chemical | school | walk-demo | group-demo
  MvaConfig mva;
  ChemConfig chem;
  SchoolConfig school;
  LinkModelParams link;
  std::vector<std::uint64_t> seeds{1};
  std::string out_dir;  // empty: $PSCSIM_OUT/<subcommand> or ./out/<subcommand>
  double horizon_s = 10.0;
  double window_s = 0.1;
  bool ns2 = false;  // also export movement.ns_movements per seed

  // demo knobs
  int demo_boxes = 5;
  Bounds demo_bounds{Box{-10.0, 100.0, -10.0, 90.0}};
  int demo_masters = 2;
  int demo_slaves = 2;  // per master
};

namespace detail {

inline std::filesystem::path resolve_out_dir(const RunManifest& manifest) {
  if (!manifest.out_dir.empty()) return manifest.out_dir;
  if (const char* env = std::getenv("PSCSIM_OUT")) {
    return std::filesystem::path(env) / manifest.subcommand;
  }
  return std::filesystem::path("out") / manifest.subcommand;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SimError(strf("cannot write %s", path.string().c_str()));
  out << content;
}

inline std::vector<Box> demo_boxes(const RunManifest& manifest, Rng& rng) {
  std::vector<Box> boxes;
  const Box& area = manifest.demo_bounds.rect;
  for (int i = 0; i < manifest.demo_boxes; ++i) {
    double w = rng.uniform(0.08, 0.2) * area.height();
    double l = rng.uniform(0.08, 0.2) * area.width();
    boxes.push_back(
        place_random_obstacle(area, w, l, ObstacleOrientation::aligned, boxes, rng));
  }
  return boxes;
}

struct SeedOutputs {
  std::string trace_csv;
  std::string ns2;
  std::optional<MetricsReport> report;
  std::string metrics_csv;
  std::string timeseries_csv;
  std::string scenario_json;
};

inline SeedOutputs run_scenario_seed(const RunManifest& manifest, std::uint64_t seed) {
  ScenarioSpec spec;
  if (manifest.subcommand == "mva") {
    MvaConfig config = manifest.mva;
    config.horizon_s = manifest.horizon_s;
    spec = gen_mva(config, seed);
  } else if (manifest.subcommand == "chemical") {
    ChemConfig config = manifest.chem;
    config.horizon_s = manifest.horizon_s;
    spec = gen_chemical_plant(config, seed);
  } else if (manifest.subcommand == "school") {
    SchoolConfig config = manifest.school;
    config.horizon_s = manifest.horizon_s;
    spec = gen_school_shooting(config, seed);
  } else {
    throw SimError(strf("unknown subcommand '%s'", manifest.subcommand.c_str()));
  }
  spec.link = manifest.link;

  std::vector<PositionSample> samples;
  EngineObserver obs;
  obs.on_position = [&samples](double t, int node, Point2 p) {
    samples.push_back({t, node, p.x, p.y});
  };
  MetricsReport report = run(spec, spec.link, manifest.window_s, seed, obs);

  SeedOutputs outputs;
  std::ostringstream trace;
  write_trace_csv(trace, samples);
  outputs.trace_csv = trace.str();
  if (manifest.ns2) {
    std::ostringstream ns2;
    export_ns2_trace(ns2, samples);
    outputs.ns2 = ns2.str();
  }
  std::ostringstream metrics, series;
  write_metrics_csv(metrics, report);
  write_timeseries_csv(series, report);
  outputs.metrics_csv = metrics.str();
  outputs.timeseries_csv = series.str();
  outputs.scenario_json = to_json(spec).dump(2) + "\n";
  outputs.report = std::move(report);
  return outputs;
}

inline SeedOutputs run_walk_demo_seed(const RunManifest& manifest, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Box> boxes = demo_boxes(manifest, rng);
  WalkParams params;
  params.bounds = manifest.demo_bounds;
  Point2 start = sample_outdoor_position(manifest.demo_bounds, boxes, rng);
  WalkState state = init_walk(params, WalkKind::building_aware, start, boxes, rng);

  std::vector<PositionSample> samples{{0.0, 0, start.x, start.y}};
  WalkCallbacks cb;
  cb.position = [&samples](double t, Point2 p) { samples.push_back({t, 0, p.x, p.y}); };
  advance_walk(state, params, boxes, manifest.horizon_s, rng, cb);

  SeedOutputs outputs;
  std::ostringstream trace;
  write_trace_csv(trace, samples);
  outputs.trace_csv = trace.str();
  if (manifest.ns2) {
    std::ostringstream ns2;
    export_ns2_trace(ns2, samples);
    outputs.ns2 = ns2.str();
  }
  return outputs;
}

inline SeedOutputs run_group_demo_seed(const RunManifest& manifest, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Box> boxes = demo_boxes(manifest, rng);
  bool aware = !boxes.empty();

  PositionConstraint constraint;
  if (aware) constraint = outdoor_constraint(boxes, manifest.demo_bounds);

  std::vector<Group> groups;
  for (int m = 0; m < manifest.demo_masters; ++m) {
    MasterSpec master;
    master.kind = MasterSpec::Kind::walk;
    master.walk_kind = aware ? WalkKind::building_aware : WalkKind::plain;
    master.walk.bounds = manifest.demo_bounds;
    // without obstacles, alternate plain and correlated walkers
    if (!aware && m % 2 == 1) master.walk.direction_memory = 0.85;
    master.start = sample_outdoor_position(manifest.demo_bounds, boxes, rng);
    groups.push_back(
        build_group(master, manifest.demo_slaves, DeviationDist{}, constraint, 100,
                    boxes, rng));
  }

  std::vector<PositionSample> samples;
  double step = 0.1;
  int node_base = 0;
  for (const Group& g : groups) {
    for (int member = 0; member < g.size(); ++member) {
      Point2 p = g.position(member);
      samples.push_back({0.0, node_base + member, p.x, p.y});
    }
    node_base += g.size();
  }
  for (double t = step; t <= manifest.horizon_s + 1e-9; t += step) {
    node_base = 0;
    for (Group& g : groups) {
      g.advance_to(t, rng);
      for (int member = 0; member < g.size(); ++member) {
        Point2 p = g.position(member);
        samples.push_back({t, node_base + member, p.x, p.y});
      }
      node_base += g.size();
    }
  }

  SeedOutputs outputs;
  std::ostringstream trace;
  write_trace_csv(trace, samples);
  outputs.trace_csv = trace.str();
  if (manifest.ns2) {
    std::ostringstream ns2;
    export_ns2_trace(ns2, samples);
    outputs.ns2 = ns2.str();
  }
  return outputs;
}

}  // namespace detail

/// Runs the manifest: one directory per seed plus a sweep summary. Outputs are
/// deterministic, so re-running an identical manifest rewrites identical bytes.
inline int run_cli(const RunManifest& manifest) {
  if (manifest.seeds.empty()) throw SimError("run_cli: no seeds");
  namespace fs = std::filesystem;
  fs::path root = detail::resolve_out_dir(manifest);
  fs::create_directories(root);

  bool demo = manifest.subcommand == "walk-demo" || manifest.subcommand == "group-demo";
  std::vector<double> aggregates;
  std::vector<double> p_rx;
  bool p_rx_everywhere = true;

  for (std::uint64_t seed : manifest.seeds) {
    detail::SeedOutputs outputs;
    if (manifest.subcommand == "walk-demo") {
      outputs = detail::run_walk_demo_seed(manifest, seed);
    } else if (manifest.subcommand == "group-demo") {
      outputs = detail::run_group_demo_seed(manifest, seed);
    } else {
      outputs = detail::run_scenario_seed(manifest, seed);
    }

    fs::path dir = root / strf("seed-%llu", static_cast<unsigned long long>(seed));
    fs::create_directories(dir);
    detail::write_file(dir / "trace.csv", outputs.trace_csv);
    if (manifest.ns2) detail::write_file(dir / "movement.ns_movements", outputs.ns2);
    if (outputs.report.has_value()) {
      detail::write_file(dir / "metrics.csv", outputs.metrics_csv);
      detail::write_file(dir / "timeseries.csv", outputs.timeseries_csv);
      detail::write_file(dir / "scenario.json", outputs.scenario_json);
      aggregates.push_back(outputs.report->aggregate_uplink_bps);
      if (outputs.report->p_rx_ctrl.has_value()) {
        p_rx.push_back(*outputs.report->p_rx_ctrl);
      } else {
        p_rx_everywhere = false;
      }
    }
  }

  if (!demo) {
    auto stats = [](const std::vector<double>& xs) {
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= static_cast<double>(xs.size());
      double ss = 0.0;
      for (double x : xs) ss += (x - mean) * (x - mean);
      double sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
      return std::pair{mean, sd};
    };
    std::ostringstream summary;
    summary << "metric,mean,stddev,n_seeds\n";
    auto [am, as] = stats(aggregates);
    summary << "aggregate_uplink_bps," << csv::num(am) << ',' << csv::num(as) << ','
            << aggregates.size() << '\n';
    if (!p_rx.empty() && p_rx_everywhere) {
      auto [pm, ps] = stats(p_rx);
      summary << "p_rx_ctrl," << csv::num(pm) << ',' << csv::num(ps) << ',' << p_rx.size()
              << '\n';
    }
    detail::write_file(root / "summary.csv", summary.str());
  }
  return 0;
}

}  // namespace pscsim
