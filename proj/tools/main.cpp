// pscsim command line: scenario sweeps and mobility demos.
//
//   pscsim mva --responders 10 --video-rate 100M --seeds 1..10 --out runs/mva
//   pscsim chemical --video-rate 10M --with-lte --seeds 1..10
//   pscsim school --with-iab --antenna-bs 64 --antenna-ue 16 --seeds 1..10
//   pscsim walk-demo --boxes 5 --bounds -10,-10,100,90 --seeds 1
//   pscsim group-demo --masters 2 --slaves 2 --boxes 0 --seeds 1

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "pscsim/cli.hpp"

namespace {

pscsim::Bounds parse_bounds(const std::string& text) {
  double x0, y0, x1, y1;
  if (std::sscanf(text.c_str(), "%lf,%lf,%lf,%lf", &x0, &y0, &x1, &y1) != 4 || x0 >= x1 ||
      y0 >= y1) {
    throw pscsim::SimError(
        pscsim::strf("bounds: expected x_min,y_min,x_max,y_max, got '%s'", text.c_str()));
  }
  return pscsim::Bounds{pscsim::Box{x0, x1, y0, y1}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"public safety scenario simulator"};
  app.require_subcommand(1);

  pscsim::RunManifest manifest;
  std::string seeds_text = "1";
  std::string video_rate, control_rate, bounds_text;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seeds", seeds_text, "seed list: 7 | 1,2,5 | 1..10");
    cmd->add_option("--out", manifest.out_dir,
                    "output directory (default $PSCSIM_OUT/<cmd> or ./out/<cmd>)");
    cmd->add_option("--horizon", manifest.horizon_s, "simulated seconds")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--window", manifest.window_s, "re-evaluation window, seconds")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--ns2", manifest.ns2, "also export NS-2 movement files");
  };

  CLI::App* mva = app.add_subcommand("mva", "multi-vehicle accident scenario");
  mva->add_option("--responders", manifest.mva.n_responders)->check(CLI::PositiveNumber);
  mva->add_option("--ar-fraction", manifest.mva.ar_fraction)->check(CLI::Range(0.0, 1.0));
  mva->add_option("--cars", manifest.mva.n_cars);
  mva->add_option("--trucks", manifest.mva.n_trucks);
  mva->add_option("--video-rate", video_rate, "per-responder uplink rate, e.g. 10M");
  mva->add_option("--rsu-isd", manifest.mva.rsu_isd);
  mva->add_option("--lte-distance", manifest.mva.lte_distance);
  mva->add_flag("--with-mmwave,!--lte-only", manifest.mva.with_mmwave,
                "deploy the roadside mmWave units (default on)");
  add_common(mva);

  CLI::App* chem = app.add_subcommand("chemical", "chemical plant explosion scenario");
  chem->add_option("--responders", manifest.chem.n_responders)->check(CLI::PositiveNumber);
  chem->add_option("--area-side", manifest.chem.area_side)->check(CLI::PositiveNumber);
  chem->add_option("--buildings", manifest.chem.n_buildings);
  chem->add_option("--bs", manifest.chem.n_mmwave_bs)->check(CLI::PositiveNumber);
  chem->add_flag("--with-lte,!--no-lte", manifest.chem.with_lte,
                 "dedicated LTE layer for the robot control (default on)");
  chem->add_option("--video-rate", video_rate);
  chem->add_option("--control-rate", control_rate);
  add_common(chem);

  CLI::App* school = app.add_subcommand("school", "school shooting SWAT scenario");
  school->add_option("--teams", manifest.school.n_teams)->check(CLI::PositiveNumber);
  school->add_option("--team-size", manifest.school.team_size)->check(CLI::PositiveNumber);
  school->add_flag("--with-iab", manifest.school.with_iab, "nomadic mmWave relays");
  school->add_option("--antenna-bs", manifest.school.antenna_bs)
      ->check(CLI::IsMember({16, 64}));
  school->add_option("--antenna-ue", manifest.school.antenna_ue)
      ->check(CLI::IsMember({4, 16}));
  school->add_option("--video-rate", video_rate);
  add_common(school);

  CLI::App* walk = app.add_subcommand("walk-demo", "building-aware random walk trace");
  walk->add_option("--boxes", manifest.demo_boxes)->check(CLI::NonNegativeNumber);
  walk->add_option("--bounds", bounds_text, "x_min,y_min,x_max,y_max");
  add_common(walk);

  CLI::App* group = app.add_subcommand("group-demo", "master/slave group mobility trace");
  group->add_option("--masters", manifest.demo_masters)->check(CLI::PositiveNumber);
  group->add_option("--slaves", manifest.demo_slaves, "slaves per master")
      ->check(CLI::NonNegativeNumber);
  group->add_option("--boxes", manifest.demo_boxes, "0 = open space")
      ->check(CLI::NonNegativeNumber);
  group->add_option("--bounds", bounds_text, "x_min,y_min,x_max,y_max");
  add_common(group);

  CLI11_PARSE(app, argc, argv);

  try {
    manifest.subcommand = app.get_subcommands().front()->get_name();
    manifest.seeds = pscsim::parse_seeds(seeds_text);
    if (!bounds_text.empty()) manifest.demo_bounds = parse_bounds(bounds_text);
    if (!video_rate.empty()) {
      double rate = pscsim::parse_rate(video_rate);
      manifest.mva.video_rate = rate;
      manifest.chem.video_rate = rate;
      manifest.school.video_rate = rate;
    }
    if (!control_rate.empty()) manifest.chem.control_rate = pscsim::parse_rate(control_rate);
    return pscsim::run_cli(manifest);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "pscsim: %s\n", e.what());
    return 1;
  }
}
