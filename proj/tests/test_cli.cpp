#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "pscsim/cli.hpp"

using namespace pscsim;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("parse_rate accepts k/M/G suffixes") {
  CHECK(parse_rate("500k") == doctest::Approx(500e3));
  CHECK(parse_rate("10M") == doctest::Approx(10e6));
  CHECK(parse_rate("2.5G") == doctest::Approx(2.5e9));
  CHECK(parse_rate("1234") == doctest::Approx(1234.0));
  CHECK_THROWS_AS(parse_rate("10Q"), SimError);
  CHECK_THROWS_AS(parse_rate("fast"), SimError);
  CHECK_THROWS_AS(parse_rate("-3M"), SimError);
}

TEST_CASE("parse_seeds accepts singles, lists and ranges") {
  CHECK(parse_seeds("7") == std::vector<std::uint64_t>{7});
  CHECK(parse_seeds("1,2,5") == std::vector<std::uint64_t>{1, 2, 5});
  CHECK(parse_seeds("3..6") == std::vector<std::uint64_t>{3, 4, 5, 6});
  CHECK_THROWS_AS(parse_seeds("6..3"), SimError);
  CHECK_THROWS_AS(parse_seeds("a..b"), SimError);
  CHECK_THROWS_AS(parse_seeds(""), SimError);
}

TEST_CASE("mva sweep writes per-seed artifacts and a summary") {
  TempDir tmp("pscsim_test_mva");
  RunManifest manifest;
  manifest.subcommand = "mva";
  manifest.mva.n_responders = 3;
  manifest.mva.video_rate = 1e6;
  manifest.seeds = {1, 2, 3};
  manifest.horizon_s = 2.0;
  manifest.out_dir = (tmp.path / "mva").string();
  manifest.ns2 = true;

  REQUIRE(run_cli(manifest) == 0);
  for (std::uint64_t s : manifest.seeds) {
    fs::path dir = tmp.path / "mva" / strf("seed-%llu", (unsigned long long)s);
    CHECK(fs::exists(dir / "metrics.csv"));
    CHECK(fs::exists(dir / "timeseries.csv"));
    CHECK(fs::exists(dir / "trace.csv"));
    CHECK(fs::exists(dir / "scenario.json"));
    CHECK(fs::exists(dir / "movement.ns_movements"));
  }
  std::string summary = slurp(tmp.path / "mva" / "summary.csv");
  CHECK(summary.find("aggregate_uplink_bps") != std::string::npos);

  SUBCASE("the scenario snapshot round-trips") {
    fs::path snap = tmp.path / "mva" / "seed-1" / "scenario.json";
    ScenarioSpec parsed = scenario_from_json(nlohmann::json::parse(slurp(snap)));
    validate(parsed);
    CHECK(parsed.name == "mva");
    CHECK(parsed.seed == 1);
  }
}

TEST_CASE("identical manifests rewrite byte-identical outputs") {
  TempDir tmp("pscsim_test_det");
  RunManifest manifest;
  manifest.subcommand = "chemical";
  manifest.chem.n_responders = 4;
  manifest.seeds = {5};
  manifest.horizon_s = 2.0;
  manifest.out_dir = (tmp.path / "a").string();
  REQUIRE(run_cli(manifest) == 0);

  std::vector<std::string> names{"metrics.csv", "timeseries.csv", "trace.csv",
                                 "scenario.json"};
  std::vector<std::string> first;
  for (const std::string& n : names) first.push_back(slurp(tmp.path / "a" / "seed-5" / n));

  manifest.out_dir = (tmp.path / "b").string();
  REQUIRE(run_cli(manifest) == 0);
  for (size_t i = 0; i < names.size(); ++i) {
    CHECK(first[i] == slurp(tmp.path / "b" / "seed-5" / names[i]));
  }

  // overwrite in place stays identical too
  REQUIRE(run_cli(manifest) == 0);
  for (size_t i = 0; i < names.size(); ++i) {
    CHECK(first[i] == slurp(tmp.path / "b" / "seed-5" / names[i]));
  }
}

TEST_CASE("walk-demo trace stays outdoors") {
  TempDir tmp("pscsim_test_walk");
  RunManifest manifest;
  manifest.subcommand = "walk-demo";
  manifest.demo_boxes = 5;
  manifest.seeds = {11};
  manifest.horizon_s = 50.0;
  manifest.out_dir = (tmp.path / "walk").string();
  REQUIRE(run_cli(manifest) == 0);

  // regenerate the same layout to check the trace against it
  Rng rng(11);
  std::vector<Box> boxes;
  const Box& area = manifest.demo_bounds.rect;
  for (int i = 0; i < manifest.demo_boxes; ++i) {
    double w = rng.uniform(0.08, 0.2) * area.height();
    double l = rng.uniform(0.08, 0.2) * area.width();
    boxes.push_back(place_random_obstacle(area, w, l, ObstacleOrientation::aligned, boxes, rng));
  }

  std::ifstream in(tmp.path / "walk" / "seed-11" / "trace.csv");
  std::string line;
  std::getline(in, line);  // header
  int rows = 0;
  while (std::getline(in, line)) {
    double t, x, y;
    int node;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%d,%lf,%lf", &t, &node, &x, &y) == 4);
    Point2 p{x, y};
    REQUIRE(contains(area, p));
    for (const Box& b : boxes) REQUIRE_FALSE(contains(b, p));
    rows++;
  }
  CHECK(rows > 400);
}

TEST_CASE("group-demo keeps every slave within the deviation bound") {
  TempDir tmp("pscsim_test_group");
  RunManifest manifest;
  manifest.subcommand = "group-demo";
  manifest.demo_boxes = 0;
  manifest.demo_masters = 2;
  manifest.demo_slaves = 2;
  manifest.seeds = {3};
  manifest.horizon_s = 20.0;
  manifest.out_dir = (tmp.path / "group").string();
  REQUIRE(run_cli(manifest) == 0);

  // node ids: 0 master, 1-2 slaves, 3 master, 4-5 slaves
  std::map<double, std::map<int, Point2>> at;
  std::ifstream in(tmp.path / "group" / "seed-3" / "trace.csv");
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    double t, x, y;
    int node;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%d,%lf,%lf", &t, &node, &x, &y) == 4);
    at[t][node] = Point2{x, y};
  }
  REQUIRE(at.size() > 100);
  for (const auto& [t, nodes] : at) {
    REQUIRE(nodes.size() == 6);
    for (int master : {0, 3}) {
      Point2 mp = nodes.at(master);
      for (int s = 1; s <= 2; ++s) {
        Point2 sp = nodes.at(master + s);
        REQUIRE(std::abs(sp.x - mp.x) <= 20.0);
        REQUIRE(std::abs(sp.y - mp.y) <= 20.0);
      }
    }
  }
}
