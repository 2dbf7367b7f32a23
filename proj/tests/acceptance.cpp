// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion pins its tolerances in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pscsim/cli.hpp"
#include "pscsim/simcore.hpp"

using namespace pscsim;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

double elapsed_s(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

// --------------------------------------------------------------------------
// 1. outdoor invariant: random layouts, 10^4-step building-aware walks

Check outdoor_invariant() {
  Check check;
  auto t0 = std::chrono::steady_clock::now();
  Bounds bounds{Box{-10, 100, -10, 90}};
  long positions = 0;

  for (int run_i = 0; run_i < 100 && check.ok; ++run_i) {
    Rng rng(9000 + static_cast<std::uint64_t>(run_i));
    std::vector<Box> boxes;
    int n_boxes = 3 + run_i % 5;
    for (int b = 0; b < n_boxes; ++b) {
      double w = rng.uniform(8.0, 20.0);
      double l = rng.uniform(8.0, 22.0);
      boxes.push_back(place_random_obstacle(bounds.rect, w, l,
                                            ObstacleOrientation::aligned, boxes, rng));
    }
    WalkParams params;
    params.bounds = bounds;
    Point2 start = sample_outdoor_position(bounds, boxes, rng);
    WalkState state = init_walk(params, WalkKind::building_aware, start, boxes, rng);

    Point2 prev = start;
    int bad_indoor = 0, bad_segment = 0;
    WalkCallbacks cb;
    cb.position = [&](double, Point2 p) {
      positions++;
      if (!contains(bounds.rect, p)) bad_indoor++;
      for (const Box& box : boxes) {
        if (contains(box, p)) bad_indoor++;
      }
      if (!is_line_clear(prev, p, boxes)) bad_segment++;
      prev = p;
    };
    advance_walk(state, params, boxes, 1000.0, rng, cb);  // 10^4 sub-steps
    check.expect(bad_indoor == 0, strf("run %d: %d indoor positions", run_i, bad_indoor));
    check.expect(bad_segment == 0, strf("run %d: %d blocked segments", run_i, bad_segment));
  }

  double dt = elapsed_s(t0);
  check.expect(positions >= 100 * 10000, strf("only %ld positions recorded", positions));
  check.expect(dt < 30.0, strf("took %.1f s (limit 30 s)", dt));
  check.note(strf("%ld positions across 100 runs in %.1f s", positions, dt));
  return check;
}

// --------------------------------------------------------------------------
// 2. geometry oracle equivalence

Check geometry_oracles() {
  Check check;
  Rng rng(777);
  auto random_box = [&rng]() {
    double x0 = rng.uniform(-10, 10), y0 = rng.uniform(-10, 10);
    return Box{x0, x0 + rng.uniform(0.5, 6.0), y0, y0 + rng.uniform(0.5, 6.0)};
  };
  auto robust = [](Point2 a, Point2 b, const Box& box) {
    double margin = 1e-6;
    Box grown{box.x_min - margin, box.x_max + margin, box.y_min - margin,
              box.y_max + margin};
    Box shrunk{box.x_min + margin, box.x_max - margin, box.y_min + margin,
               box.y_max - margin};
    return shrunk.valid() &&
           segment_intersects_box(a, b, grown) == segment_intersects_box(a, b, shrunk);
  };

  int intersect_cases = 0, mismatches = 0;
  while (intersect_cases < 1000) {
    Box box = random_box();
    Point2 a{rng.uniform(-12, 12), rng.uniform(-12, 12)};
    Point2 b{rng.uniform(-12, 12), rng.uniform(-12, 12)};
    if (!robust(a, b, box)) continue;
    intersect_cases++;
    if (segment_intersects_box(a, b, box) != oracle::segment_hits_box_sampled(a, b, box)) {
      mismatches++;
    }
  }
  check.expect(mismatches == 0, strf("%d intersection mismatches", mismatches));

  int hit_cases = 0, hit_bad = 0;
  while (hit_cases < 1000) {
    Box box = random_box();
    Point2 a{rng.uniform(-12, 12), rng.uniform(-12, 12)};
    Point2 b{rng.uniform(-12, 12), rng.uniform(-12, 12)};
    if (contains(box, a) || !robust(a, b, box)) continue;
    auto t = first_hit_parameter(a, b, box);
    if (!t) continue;
    double t_oracle = oracle::first_hit_bisect(a, b, box);
    if (t_oracle < 0) continue;
    hit_cases++;
    if (std::abs(*t - t_oracle) > 1e-6) hit_bad++;
  }
  check.expect(hit_bad == 0, strf("%d first-hit deviations beyond 1e-6", hit_bad));
  check.note(strf("1000 intersection + 1000 first-hit cases"));
  return check;
}

// --------------------------------------------------------------------------
// 3. group mobility statistics

Check group_statistics() {
  Check check;
  DeviationDist dev;  // defaults: gaussian mu 0, sigma 1, bound 20
  Rng rng(321);
  std::vector<double> xs, ys;
  bool bound_ok = true;
  for (int i = 0; i < 100000; ++i) {
    Vec2 off = sample_offset(dev, nullptr, {0, 0}, 100, rng);
    bound_ok = bound_ok && std::abs(off.x) <= 20.0 && std::abs(off.y) <= 20.0;
    xs.push_back(off.x);
    ys.push_back(off.y);
  }
  auto sx = oracle::mean_std(xs);
  auto sy = oracle::mean_std(ys);
  check.expect(std::abs(sx.mean) <= 0.02, strf("x mean %.4f", sx.mean));
  check.expect(std::abs(sy.mean) <= 0.02, strf("y mean %.4f", sy.mean));
  check.expect(std::abs(sx.stddev - 1.0) <= 0.05, strf("x std %.4f", sx.stddev));
  check.expect(std::abs(sy.stddev - 1.0) <= 0.05, strf("y std %.4f", sy.stddev));
  check.expect(bound_ok, "offset exceeded the 20 m bound");

  int calls = 0;
  PositionConstraint never = [&calls](Point2) {
    calls++;
    return false;
  };
  bool threw = false;
  try {
    bind_group(0, dev, never, 73, {0, 0}, rng);
  } catch (const SimError&) {
    threw = true;
  }
  check.expect(threw, "unsatisfiable constraint did not fail");
  check.expect(calls == 73, strf("constraint drawn %d times, expected 73", calls));
  check.note(strf("mean (%.3f, %.3f), std (%.3f, %.3f)", sx.mean, sy.mean, sx.stddev,
                  sy.stddev));
  return check;
}

// --------------------------------------------------------------------------
// 4. multi-vehicle accident throughput regimes

double mva_mean_aggregate(int n, double rate, bool with_mmwave, int n_seeds) {
  double sum = 0.0;
  for (int s = 1; s <= n_seeds; ++s) {
    MvaConfig config;
    config.n_responders = n;
    config.video_rate = rate;
    config.with_mmwave = with_mmwave;
    ScenarioSpec spec = gen_mva(config, static_cast<std::uint64_t>(s));
    sum += run(spec, spec.link, 0.1, static_cast<std::uint64_t>(s)).aggregate_uplink_bps;
  }
  return sum / n_seeds;
}

Check mva_throughput() {
  Check check;
  auto t0 = std::chrono::steady_clock::now();
  const int seeds = 10;

  double lte5 = mva_mean_aggregate(5, 100e6, false, seeds);
  double lte10 = mva_mean_aggregate(10, 100e6, false, seeds);
  double mm5 = mva_mean_aggregate(5, 100e6, true, seeds);
  double mm10 = mva_mean_aggregate(10, 100e6, true, seeds);

  // (a) LTE-only saturation plateau, flat across N
  double plateau_var = std::abs(lte5 - lte10) / std::max(lte5, lte10);
  check.expect(plateau_var < 0.10, strf("LTE plateau varies %.1f%%", plateau_var * 100));
  check.expect(std::abs(lte10 - 66e6) / 66e6 < 0.15,
               strf("LTE plateau %.1f Mbit/s off the 66 Mbit/s target", lte10 / 1e6));

  // (b) the mmWave layer lifts the saturated uplink, monotone in N
  check.expect(mm5 > lte5, strf("mmWave N=5 %.1fM not above LTE %.1fM", mm5 / 1e6, lte5 / 1e6));
  check.expect(mm10 > lte10,
               strf("mmWave N=10 %.1fM not above LTE %.1fM", mm10 / 1e6, lte10 / 1e6));
  check.expect(mm10 > mm5, strf("mmWave not monotone: %.1fM -> %.1fM", mm5 / 1e6, mm10 / 1e6));

  // (c) at 1 Mbit/s both configurations are demand-limited within 2%
  for (bool mmwave : {false, true}) {
    double agg = mva_mean_aggregate(10, 1e6, mmwave, seeds);
    check.expect(std::abs(agg - 10e6) / 10e6 <= 0.02,
                 strf("1M source delivered %.3f Mbit/s of 10", agg / 1e6));
  }

  double dt = elapsed_s(t0);
  check.expect(dt < 60.0, strf("took %.1f s (limit 60 s)", dt));
  check.note(strf("LTE %.1f/%.1f, LTE+mmWave %.1f/%.1f Mbit/s (N=5/10), %.1f s", lte5 / 1e6,
                  lte10 / 1e6, mm5 / 1e6, mm10 / 1e6, dt));
  return check;
}

// --------------------------------------------------------------------------
// 5. chemical plant control packet reliability

Check chem_control_reliability() {
  Check check;
  const int seeds = 10;
  const double rates[] = {1e6, 10e6, 100e6};

  std::map<std::pair<bool, int>, double> p_pooled;
  for (bool with_lte : {true, false}) {
    for (int r = 0; r < 3; ++r) {
      double tx = 0.0, rx = 0.0;
      for (int s = 1; s <= seeds; ++s) {
        ChemConfig config;
        config.with_lte = with_lte;
        config.video_rate = rates[r];
        ScenarioSpec spec = gen_chemical_plant(config, static_cast<std::uint64_t>(s));
        MetricsReport report = run(spec, spec.link, 0.1, static_cast<std::uint64_t>(s));
        for (const FlowMetrics& m : report.flows) {
          if (m.kind == FlowKind::control) {
            tx += m.tx_packets;
            rx += m.rx_packets;
          }
        }
      }
      p_pooled[{with_lte, r}] = rx / tx;
    }
  }

  for (int r = 0; r < 3; ++r) {
    double p = p_pooled[{true, r}];
    check.expect(std::abs(p - 1.0) <= 1e-9,
                 strf("dedicated LTE p_rx %.6f at %.0fM", p, rates[r] / 1e6));
  }
  double m1 = p_pooled[{false, 0}], m10 = p_pooled[{false, 1}], m100 = p_pooled[{false, 2}];
  check.expect(m1 < 1.0, strf("shared mmWave p_rx %.4f not below 1", m1));
  check.expect(m10 <= m1 + 1e-9, strf("p_rx increased 1M->10M: %.4f -> %.4f", m1, m10));
  check.expect(m100 <= m10 + 1e-9, strf("p_rx increased 10M->100M: %.4f -> %.4f", m10, m100));
  check.note(strf("LTE p=1.0 at all rates; mmWave p = %.3f/%.3f/%.3f", m1, m10, m100));
  return check;
}

// --------------------------------------------------------------------------
// 6. school shooting relay gain across antenna configurations

Check school_relay_gain() {
  Check check;
  const int seeds = 10;
  struct Arm {
    int bs, ue;
  };
  const Arm arms[] = {{16, 4}, {64, 4}, {64, 16}};

  double with_iab[3], without_iab[3];
  for (int a = 0; a < 3; ++a) {
    for (bool iab : {false, true}) {
      double sum = 0.0;
      for (int s = 1; s <= seeds; ++s) {
        SchoolConfig config;
        config.antenna_bs = arms[a].bs;
        config.antenna_ue = arms[a].ue;
        config.with_iab = iab;
        config.horizon_s = 50.0;  // teams cross the building in ~46 s
        ScenarioSpec spec = gen_school_shooting(config, static_cast<std::uint64_t>(s));
        sum += run(spec, spec.link, 0.1, static_cast<std::uint64_t>(s)).aggregate_uplink_bps;
      }
      (iab ? with_iab : without_iab)[a] = sum / seeds;
    }
  }

  double gaps[3];
  for (int a = 0; a < 3; ++a) {
    gaps[a] = with_iab[a] - without_iab[a];
    check.expect(with_iab[a] >= without_iab[a] * (1.0 - 1e-6),
                 strf("%dx%d: IAB %.1fM below %.1fM", arms[a].bs, arms[a].ue,
                      with_iab[a] / 1e6, without_iab[a] / 1e6));
  }
  double slack = 1e-6 * without_iab[0];
  check.expect(gaps[0] >= gaps[1] - slack,
               strf("gap grew 16x4->64x4: %.1fM -> %.1fM", gaps[0] / 1e6, gaps[1] / 1e6));
  check.expect(gaps[1] >= gaps[2] - slack,
               strf("gap grew 64x4->64x16: %.1fM -> %.1fM", gaps[1] / 1e6, gaps[2] / 1e6));
  for (int a = 0; a + 1 < 3; ++a) {
    check.expect(without_iab[a] <= without_iab[a + 1] + slack,
                 strf("without-IAB not monotone at arm %d", a));
    check.expect(with_iab[a] <= with_iab[a + 1] + slack,
                 strf("with-IAB not monotone at arm %d", a));
  }
  check.note(strf("without %.1f/%.1f/%.1f, with %.1f/%.1f/%.1f Mbit/s",
                  without_iab[0] / 1e6, without_iab[1] / 1e6, without_iab[2] / 1e6,
                  with_iab[0] / 1e6, with_iab[1] / 1e6, with_iab[2] / 1e6));
  return check;
}

// --------------------------------------------------------------------------
// 7. end-to-end determinism of every subcommand

Check cli_determinism() {
  Check check;
  fs::path root = fs::temp_directory_path() / "pscsim_acceptance_det";
  fs::remove_all(root);

  std::vector<RunManifest> manifests;
  {
    RunManifest m;
    m.subcommand = "mva";
    m.mva.n_responders = 5;
    m.seeds = {1, 2};
    m.horizon_s = 3.0;
    m.ns2 = true;
    manifests.push_back(m);
  }
  {
    RunManifest m;
    m.subcommand = "chemical";
    m.seeds = {3};
    m.horizon_s = 3.0;
    manifests.push_back(m);
  }
  {
    RunManifest m;
    m.subcommand = "school";
    m.school.with_iab = true;
    m.seeds = {4};
    m.horizon_s = 5.0;
    manifests.push_back(m);
  }
  {
    RunManifest m;
    m.subcommand = "walk-demo";
    m.seeds = {5};
    m.horizon_s = 30.0;
    m.ns2 = true;
    manifests.push_back(m);
  }
  {
    RunManifest m;
    m.subcommand = "group-demo";
    m.seeds = {6};
    m.horizon_s = 10.0;
    manifests.push_back(m);
  }

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
  };

  for (RunManifest manifest : manifests) {
    fs::path a = root / (manifest.subcommand + "-a");
    fs::path b = root / (manifest.subcommand + "-b");
    manifest.out_dir = a.string();
    run_cli(manifest);
    manifest.out_dir = b.string();
    run_cli(manifest);

    int compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
      if (!entry.is_regular_file()) continue;
      fs::path rel = fs::relative(entry.path(), a);
      compared++;
      if (slurp(entry.path()) != slurp(b / rel)) {
        check.expect(false, strf("%s: %s differs between runs",
                                 manifest.subcommand.c_str(), rel.string().c_str()));
      }
    }
    check.expect(compared > 0, strf("%s produced no files", manifest.subcommand.c_str()));
  }
  fs::remove_all(root);
  check.note("five subcommands, byte-compared outputs");
  return check;
}

// --------------------------------------------------------------------------
// 8. allocation fairness and conservation

Check allocation_fairness() {
  Check check;
  Rng rng(606);
  int bad = 0, over = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    int n = 1 + rng.uniform_int(15);
    std::vector<FlowDemand> flows;
    std::vector<double> caps;
    for (int i = 0; i < n; ++i) {
      double achievable = rng.uniform() < 0.15 ? 0.0 : rng.uniform(0.0, 300.0);
      double offered = rng.uniform(0.5, 200.0);
      flows.push_back({i, achievable, offered});
      caps.push_back(std::min(achievable, offered));
    }
    double capacity = rng.uniform(5.0, 600.0);
    auto grants = allocate(capacity, flows);
    auto expected = oracle::waterfill_level(capacity, caps);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double g = grants[static_cast<size_t>(i)].rate;
      double e = expected[static_cast<size_t>(i)];
      if (std::abs(g - e) > 1e-9 * std::max(1.0, std::abs(e))) bad++;
      if (g > caps[static_cast<size_t>(i)] + 1e-9) over++;
      total += g;
    }
    if (total > capacity * (1.0 + 1e-9) + 1e-9) over++;
  }
  check.expect(bad == 0, strf("%d grants deviate from the oracle", bad));
  check.expect(over == 0, strf("%d capacity/cap violations", over));
  check.note("1000 randomized progressive-filling comparisons");
  return check;
}

// --------------------------------------------------------------------------
// 9. NS-2 movement round-trip

Check ns2_round_trip() {
  Check check;
  Rng rng(31415);
  int bad = 0;
  for (int walk = 0; walk < 100; ++walk) {
    WalkParams params;
    params.bounds = Bounds{Box{-60, 60, -60, 60}};
    Point2 start{rng.uniform(-50, 50), rng.uniform(-50, 50)};
    WalkState state = init_walk(params, WalkKind::plain, start, {}, rng);

    std::vector<PositionSample> samples{{0.0, 0, start.x, start.y}};
    WalkCallbacks cb;
    cb.position = [&samples](double t, Point2 p) { samples.push_back({t, 0, p.x, p.y}); };
    advance_walk(state, params, {}, 12.0, rng, cb);

    std::ostringstream out;
    export_ns2_trace(out, samples);
    std::istringstream in(out.str());
    Ns2Trace trace = parse_ns2_trace(in);
    for (const PositionSample& s : samples) {
      Point2 p = trace.position_at(0, s.t);
      if (std::abs(p.x - s.x) > 1e-3 || std::abs(p.y - s.y) > 1e-3) bad++;
    }
  }
  check.expect(bad == 0, strf("%d replayed endpoints off by more than 1e-3 m", bad));
  check.note("100 walks exported, parsed and replayed");
  return check;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Check()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "outdoor invariant (100 walks x 10^4 steps)", outdoor_invariant},
      {2, "geometry oracle equivalence", geometry_oracles},
      {3, "group mobility statistics", group_statistics},
      {4, "accident scenario throughput regimes", mva_throughput},
      {5, "plant control packet reliability", chem_control_reliability},
      {6, "school relay gain ordering", school_relay_gain},
      {7, "end-to-end determinism", cli_determinism},
      {8, "allocation fairness and conservation", allocation_fairness},
      {9, "ns-2 trace round-trip", ns2_round_trip},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    Check result;
    try {
      result = c.run();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = strf("exception: %s", e.what());
    }
    std::printf("[%s] criterion %d: %s%s%s\n", result.ok ? "PASS" : "FAIL", c.id, c.name,
                result.detail.empty() ? "" : " — ", result.detail.c_str());
    std::fflush(stdout);
    if (!result.ok) failures++;
  }
  if (failures > 0) {
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
