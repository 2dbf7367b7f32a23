#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pscsim/core.hpp"
#include "pscsim/geometry.hpp"
#include "pscsim/group.hpp"
#include "pscsim/mobility.hpp"
#include "pscsim/radio.hpp"
#include "pscsim/random.hpp"

namespace pscsim {

enum class NodeRole { responder, robot, team_leader, team_member };
enum class FlowKind { video, control };
enum class FlowDirection { uplink, downlink };

/// Station eligibility + selection rule for one flow. `best` considers every
/// station, `mmwave_only` restricts to mmWave cells (and relays), `prefer_lte`
/// pins the flow to LTE whenever an LTE station exists.
enum class FlowPolicy { best, prefer_lte, mmwave_only };

/// How one node moves. Slaves reference their master node and resolve to a
/// group binding when the simulation is built.
struct MobilityAssignment {
  enum class Kind { walk, waypoints, group_slave };

  Kind kind = Kind::walk;
  // walk
  WalkKind walk_kind = WalkKind::building_aware;
  WalkParams walk;
  Point2 start;
  // waypoints
  WaypointPath path;
  // group_slave
  int master = -1;
  DeviationDist deviation;
  bool outdoor_constrained = false;
  int max_iterations = 100;
};

struct NodeSpec {
  int id = -1;
  NodeRole role = NodeRole::responder;
  MobilityAssignment mobility;
};

struct StationSpec {
  int id = -1;
  StationKind kind = StationKind::mmwave_bs;
  Point2 position;
  int antennas = 64;
  int parent = -1;   // serving station, relays only
  int follows = -1;  // tracked node, nomadic relays only
};

struct FlowSpec {
  int id = -1;
  int node = -1;  // radio endpoint; the IC station is the other end
  FlowDirection direction = FlowDirection::uplink;
  FlowKind kind = FlowKind::video;
  double offered_bps = 0.0;
  double start_s = 0.0;
  int packet_bytes = 0;  // control flows only
  FlowPolicy policy = FlowPolicy::best;
};

/// Complete generated world: geometry, nodes, infrastructure, traffic.
struct ScenarioSpec {
  std::string name;
  std::uint64_t seed = 0;
  double horizon_s = 10.0;
  int ue_antennas = 16;
  Bounds bounds;
  std::vector<Box> boxes;
  std::vector<NodeSpec> nodes;
  std::vector<StationSpec> stations;
  std::vector<FlowSpec> flows;
  std::vector<Point2> relay_sites;  // candidate positions for nomadic relays
  LinkModelParams link;

  const NodeSpec* find_node(int id) const {
    for (const NodeSpec& n : nodes) {
      if (n.id == id) return &n;
    }
    return nullptr;
  }
  const StationSpec* find_station(int id) const {
    for (const StationSpec& s : stations) {
      if (s.id == id) return &s;
    }
    return nullptr;
  }
};

// ---------------------------------------------------------------------------
// scenario configurations

struct MvaConfig {
  int n_responders = 10;
  double ar_fraction = 0.3;  // share of responders wearing AR displays
  int n_cars = 2;
  int n_trucks = 1;
  double road_width = 5.5;       // m
  double incident_length = 25.0; // m
  double video_rate = 10e6;      // bit/s per uplink feed
  double rsu_isd = 50.0;         // m between the two roadside units
  double lte_distance = 500.0;   // m from the scenario
  bool with_mmwave = true;       // false = LTE-only arm
  double horizon_s = 10.0;
};

struct ChemConfig {
  int n_responders = 10;
  double area_side = 1000.0;  // m, 1 km^2 plant
  int n_buildings = 10;
  int n_mmwave_bs = 5;
  bool with_lte = true;        // dedicated coverage layer for the robot control
  double video_rate = 10e6;    // bit/s
  double control_rate = 500e3; // bit/s
  int control_packet_bytes = 1250;
  Box robot_area;  // invalid (0-area) = centered square, side area_side/5
  double horizon_s = 10.0;
};

struct SchoolConfig {
  int rooms_per_side = 4;
  double room_side = 20.0;     // m
  double corridor_width = 4.0; // m
  int n_teams = 4;
  int team_size = 4;  // leader + members
  bool with_iab = false;
  int antenna_bs = 64;
  int antenna_ue = 16;
  double video_rate = 10e6;  // bit/s per officer camera
  double horizon_s = 10.0;
};

// ---------------------------------------------------------------------------
// generation

enum class ObstacleOrientation { aligned, orthogonal };

/// Drops a width-by-length obstacle uniformly inside the street, rejecting
/// placements that overlap existing obstacles. `aligned` lays the long side
/// along the street axis (x), `orthogonal` across it.
inline Box place_random_obstacle(const Box& street, double width, double length,
                                 ObstacleOrientation orientation,
                                 std::span<const Box> existing, Rng& rng,
                                 int max_attempts = 200) {
  double ex = orientation == ObstacleOrientation::aligned ? length : width;
  double ey = orientation == ObstacleOrientation::aligned ? width : length;
  if (ex > street.width() || ey > street.height()) {
    throw SimError(strf("place_random_obstacle: %gx%g obstacle cannot fit a %gx%g street",
                        ex, ey, street.width(), street.height()));
  }
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    double x0 = rng.uniform(street.x_min, street.x_max - ex);
    double y0 = rng.uniform(street.y_min, street.y_max - ey);
    Box candidate{x0, x0 + ex, y0, y0 + ey};
    bool clear = true;
    for (const Box& other : existing) {
      if (candidate.overlaps(other)) {
        clear = false;
        break;
      }
    }
    if (clear) return candidate;
  }
  throw SimError(strf("place_random_obstacle: street over-packed after %d attempts",
                      max_attempts));
}

namespace detail {

inline double flow_start(Rng& rng) { return rng.uniform(0.0, 0.1); }

// Vehicle footprints (m); the reference material does not size them.
inline constexpr double kCarLength = 5.0;
inline constexpr double kCarWidth = 2.0;
inline constexpr double kTruckLength = 10.0;
inline constexpr double kTruckWidth = 2.5;
inline constexpr double kMvaShoulder = 3.0;   // walkable margin around the road
inline constexpr double kRsuLateralOffset = 1.0;

}  // namespace detail

/// Multi-vehicle accident: obstacles on a road section, N responders on
/// building-aware walks, two roadside mmWave units straddling the incident
/// plus one distant LTE cell, uplink video per responder and downlink AR
/// feeds for a fraction of them.
inline ScenarioSpec gen_mva(const MvaConfig& config, std::uint64_t seed) {
  if (config.ar_fraction < 0.0 || config.ar_fraction > 1.0) {
    throw SimError("gen_mva: ar_fraction must lie in [0, 1]");
  }
  Rng rng(seed);
  ScenarioSpec spec;
  spec.name = "mva";
  spec.seed = seed;
  spec.horizon_s = config.horizon_s;

  Box street{0.0, config.incident_length, 0.0, config.road_width};
  for (int i = 0; i < config.n_trucks; ++i) {
    spec.boxes.push_back(place_random_obstacle(street, detail::kTruckWidth,
                                               detail::kTruckLength,
                                               ObstacleOrientation::aligned,
                                               spec.boxes, rng));
  }
  for (int i = 0; i < config.n_cars; ++i) {
    auto orientation = rng.uniform() < 0.5 ? ObstacleOrientation::aligned
                                           : ObstacleOrientation::orthogonal;
    spec.boxes.push_back(place_random_obstacle(street, detail::kCarWidth,
                                               detail::kCarLength, orientation,
                                               spec.boxes, rng));
  }

  double m = detail::kMvaShoulder;
  spec.bounds = Bounds{Box{street.x_min - m, street.x_max + m, street.y_min - m,
                           street.y_max + m}};

  for (int i = 0; i < config.n_responders; ++i) {
    NodeSpec node;
    node.id = i;
    node.role = NodeRole::responder;
    node.mobility.kind = MobilityAssignment::Kind::walk;
    node.mobility.walk_kind = WalkKind::building_aware;
    node.mobility.walk.bounds = spec.bounds;
    node.mobility.start = sample_outdoor_position(spec.bounds, spec.boxes, rng);
    spec.nodes.push_back(node);
  }

  StationSpec lte;
  lte.id = 100;
  lte.kind = StationKind::lte;
  lte.position = {config.incident_length / 2.0, -config.lte_distance};
  lte.antennas = 1;
  spec.stations.push_back(lte);
  if (config.with_mmwave) {
    // two RSUs straddle the incident at the configured inter-site distance,
    // with a random longitudinal offset, 1 m off the road edge
    double x1 = rng.uniform(config.incident_length - config.rsu_isd, 0.0);
    double y = config.road_width + detail::kRsuLateralOffset;
    spec.stations.push_back({101, StationKind::mmwave_bs, {x1, y}, 64, -1, -1});
    spec.stations.push_back(
        {102, StationKind::mmwave_bs, {x1 + config.rsu_isd, y}, 64, -1, -1});
  }

  int flow_id = 0;
  for (int i = 0; i < config.n_responders; ++i) {
    spec.flows.push_back({flow_id++, i, FlowDirection::uplink, FlowKind::video,
                          config.video_rate, detail::flow_start(rng), 0,
                          FlowPolicy::best});
  }
  int n_ar = static_cast<int>(std::floor(config.ar_fraction * config.n_responders));
  for (int i = 0; i < n_ar; ++i) {
    spec.flows.push_back({flow_id++, i, FlowDirection::downlink, FlowKind::video,
                          config.video_rate, detail::flow_start(rng), 0,
                          FlowPolicy::best});
  }
  return spec;
}

/// Chemical plant explosion: random buildings over the plant area, roaming
/// responders, a remotely controlled robot confined to the central area,
/// mmWave coverage with an optional dedicated LTE layer for the robot control.
inline ScenarioSpec gen_chemical_plant(const ChemConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  ScenarioSpec spec;
  spec.name = "chemical";
  spec.seed = seed;
  spec.horizon_s = config.horizon_s;

  double side = config.area_side;
  Box area{0.0, side, 0.0, side};
  spec.bounds = Bounds{area};

  Box robot_area = config.robot_area;
  if (!robot_area.valid()) {
    double half = side / 10.0;  // centered square, side/5 across
    robot_area = Box{side / 2 - half, side / 2 + half, side / 2 - half, side / 2 + half};
  }
  if (!(robot_area.x_min >= area.x_min && robot_area.x_max <= area.x_max &&
        robot_area.y_min >= area.y_min && robot_area.y_max <= area.y_max)) {
    throw SimError("gen_chemical_plant: robot_area must lie inside the plant area");
  }

  for (int i = 0; i < config.n_buildings; ++i) {
    double w = rng.uniform(0.05 * side, 0.15 * side);
    double l = rng.uniform(0.05 * side, 0.15 * side);
    spec.boxes.push_back(place_random_obstacle(area, w, l, ObstacleOrientation::aligned,
                                               spec.boxes, rng));
  }

  for (int i = 0; i < config.n_responders; ++i) {
    NodeSpec node;
    node.id = i;
    node.role = NodeRole::responder;
    node.mobility.kind = MobilityAssignment::Kind::walk;
    node.mobility.walk_kind = WalkKind::building_aware;
    node.mobility.walk.bounds = spec.bounds;
    node.mobility.start = sample_outdoor_position(spec.bounds, spec.boxes, rng);
    spec.nodes.push_back(node);
  }

  NodeSpec robot;
  robot.id = config.n_responders;
  robot.role = NodeRole::robot;
  robot.mobility.kind = MobilityAssignment::Kind::walk;
  robot.mobility.walk_kind = WalkKind::building_aware;
  robot.mobility.walk.bounds = Bounds{robot_area};
  robot.mobility.walk.speed = ScalarDist::uniform(0.5, 1.2);  // tracked vehicle pace
  robot.mobility.start = sample_outdoor_position(Bounds{robot_area}, spec.boxes, rng);
  spec.nodes.push_back(robot);

  for (int i = 0; i < config.n_mmwave_bs; ++i) {
    StationSpec bs;
    bs.id = 100 + i;
    bs.kind = StationKind::mmwave_bs;
    bs.position = sample_outdoor_position(spec.bounds, spec.boxes, rng);
    bs.antennas = 64;
    spec.stations.push_back(bs);
  }
  if (config.with_lte) {
    StationSpec lte;
    lte.id = 100 + config.n_mmwave_bs;
    lte.kind = StationKind::lte;
    lte.position = {side / 2.0, side / 2.0};
    lte.antennas = 1;
    spec.stations.push_back(lte);
  }

  // video feeds stay on the plant's mmWave network; the robot control flow
  // rides the LTE layer whenever one is deployed
  int flow_id = 0;
  for (int i = 0; i < config.n_responders; ++i) {
    spec.flows.push_back({flow_id++, i, FlowDirection::uplink, FlowKind::video,
                          config.video_rate, detail::flow_start(rng), 0,
                          FlowPolicy::mmwave_only});
  }
  spec.flows.push_back({flow_id++, robot.id, FlowDirection::uplink, FlowKind::video,
                        config.video_rate, detail::flow_start(rng), 0,
                        FlowPolicy::mmwave_only});
  spec.flows.push_back({flow_id++, robot.id, FlowDirection::downlink, FlowKind::control,
                        config.control_rate, detail::flow_start(rng),
                        config.control_packet_bytes, FlowPolicy::prefer_lte});
  return spec;
}

/// Room grid of the school building: rooms_per_side^2 square rooms separated
/// by corridors, no perimeter corridor. Deterministic.
inline std::vector<Box> gen_school_building(const SchoolConfig& config) {
  if (config.rooms_per_side < 1) throw SimError("gen_school_building: rooms_per_side < 1");
  std::vector<Box> rooms;
  double pitch = config.room_side + config.corridor_width;
  for (int j = 0; j < config.rooms_per_side; ++j) {
    for (int i = 0; i < config.rooms_per_side; ++i) {
      double x0 = i * pitch;
      double y0 = j * pitch;
      rooms.push_back(Box{x0, x0 + config.room_side, y0, y0 + config.room_side});
    }
  }
  return rooms;
}

namespace detail {

inline constexpr double kSchoolEntryInset = 1.0;   // m inside the footprint
inline constexpr double kSchoolStationOffset = 1.0; // m outside the footprint
inline constexpr double kSwatSpeed = 1.5;           // m/s

}  // namespace detail

/// School shooting: SWAT teams enter at the four building corners and move
/// along corridors toward the center. Each team is a waypoint-scripted leader
/// with corridor-constrained group slaves. Corner mmWave stations sit at the
/// entry corridor mouths; optional nomadic relays follow the leaders.
inline ScenarioSpec gen_school_shooting(const SchoolConfig& config, std::uint64_t seed) {
  if (config.rooms_per_side < 2) {
    throw SimError("gen_school_shooting: needs at least 2 rooms per side for corridors");
  }
  if (config.n_teams < 1 || config.team_size < 1) {
    throw SimError("gen_school_shooting: n_teams and team_size must be >= 1");
  }
  Rng rng(seed);
  ScenarioSpec spec;
  spec.name = "school";
  spec.seed = seed;
  spec.horizon_s = config.horizon_s;
  spec.ue_antennas = config.antenna_ue;
  spec.boxes = gen_school_building(config);

  int r = config.rooms_per_side;
  double pitch = config.room_side + config.corridor_width;
  double footprint = r * config.room_side + (r - 1) * config.corridor_width;
  spec.bounds = Bounds{Box{0.0, footprint, 0.0, footprint}};

  std::vector<double> corridor_centers;
  for (int k = 1; k < r; ++k) corridor_centers.push_back(k * pitch - config.corridor_width / 2.0);
  double first = corridor_centers.front();
  double last = corridor_centers.back();

  for (double cx : corridor_centers) {
    for (double cy : corridor_centers) spec.relay_sites.push_back({cx, cy});
  }
  Point2 center{footprint / 2.0, footprint / 2.0};
  Point2 target = spec.relay_sites.front();
  for (Point2 site : spec.relay_sites) {
    if ((site - center).norm() < (target - center).norm()) target = site;
  }

  double in = detail::kSchoolEntryInset;
  double out = detail::kSchoolStationOffset;
  // entry corridor mouths nearest each corner, rotationally symmetric;
  // vertical-corridor entries on the S/N faces, horizontal on the E/W faces
  struct Corner {
    Point2 entry;
    Point2 station;
    bool vertical;  // entry corridor runs along y
  };
  std::vector<Corner> corners{
      {{first, in}, {first, -out}, true},                          // SW
      {{footprint - in, first}, {footprint + out, first}, false},  // SE
      {{last, footprint - in}, {last, footprint + out}, true},     // NE
      {{in, last}, {-out, last}, false},                           // NW
  };

  for (size_t i = 0; i < corners.size(); ++i) {
    StationSpec bs;
    bs.id = 100 + static_cast<int>(i);
    bs.kind = StationKind::mmwave_bs;
    bs.position = corners[i].station;
    bs.antennas = config.antenna_bs;
    spec.stations.push_back(bs);
  }

  PositionConstraint corridor_only;  // resolved at simulation build time
  int node_id = 0;
  for (int t = 0; t < config.n_teams; ++t) {
    const Corner& corner = corners[static_cast<size_t>(t) % corners.size()];
    Point2 turn = corner.vertical ? Point2{corner.entry.x, target.y}
                                  : Point2{target.x, corner.entry.y};

    NodeSpec leader;
    leader.id = node_id++;
    leader.role = NodeRole::team_leader;
    leader.mobility.kind = MobilityAssignment::Kind::waypoints;
    leader.mobility.path.speed = detail::kSwatSpeed;
    leader.mobility.path.points = {corner.entry, turn, target};
    spec.nodes.push_back(leader);

    for (int s = 1; s < config.team_size; ++s) {
      NodeSpec member;
      member.id = node_id++;
      member.role = NodeRole::team_member;
      member.mobility.kind = MobilityAssignment::Kind::group_slave;
      member.mobility.master = leader.id;
      member.mobility.outdoor_constrained = true;
      spec.nodes.push_back(member);
    }

    if (config.with_iab) {
      StationSpec relay;
      relay.id = 104 + t;
      relay.kind = StationKind::mmwave_relay;
      relay.position = turn;
      relay.antennas = config.antenna_bs;
      relay.parent = 100 + (t % static_cast<int>(corners.size()));
      relay.follows = leader.id;
      spec.stations.push_back(relay);
    }
  }

  int flow_id = 0;
  for (const NodeSpec& node : spec.nodes) {
    spec.flows.push_back({flow_id++, node.id, FlowDirection::uplink, FlowKind::video,
                          config.video_rate, detail::flow_start(rng), 0,
                          FlowPolicy::best});
  }
  return spec;
}

// ---------------------------------------------------------------------------
// document serialization (JSON; field names are the repo schema, see
// docs/formats.md)

namespace schema {

using nlohmann::json;

inline json to_json(Point2 p) { return json{{"x", p.x}, {"y", p.y}}; }
inline Point2 point_from(const json& j) { return {j.at("x").get<double>(), j.at("y").get<double>()}; }

inline json to_json(const Box& b) {
  return json{{"x_min", b.x_min}, {"x_max", b.x_max}, {"y_min", b.y_min}, {"y_max", b.y_max}};
}
inline Box box_from(const json& j) {
  return {j.at("x_min").get<double>(), j.at("x_max").get<double>(),
          j.at("y_min").get<double>(), j.at("y_max").get<double>()};
}

inline const char* name_of(ScalarDist::Kind k) {
  switch (k) {
    case ScalarDist::Kind::constant: return "constant";
    case ScalarDist::Kind::uniform: return "uniform";
    case ScalarDist::Kind::normal: return "normal";
  }
  return "?";
}

inline json to_json(const ScalarDist& d) {
  return json{{"kind", name_of(d.kind)}, {"a", d.a}, {"b", d.b}};
}
inline ScalarDist dist_from(const json& j) {
  ScalarDist d;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") d.kind = ScalarDist::Kind::constant;
  else if (kind == "uniform") d.kind = ScalarDist::Kind::uniform;
  else if (kind == "normal") d.kind = ScalarDist::Kind::normal;
  else throw SimError(strf("scenario document: bad distribution kind '%s'", kind.c_str()));
  d.a = j.at("a").get<double>();
  d.b = j.at("b").get<double>();
  return d;
}

inline json to_json(const WalkParams& w) {
  return json{{"bounds", to_json(w.bounds.rect)},
              {"speed", to_json(w.speed)},
              {"direction", to_json(w.direction)},
              {"mode", w.mode == LegMode::time_based ? "time" : "distance"},
              {"leg_time", w.leg_time},
              {"leg_distance", w.leg_distance},
              {"update_step", w.update_step},
              {"avoid_retries", w.avoid_retries},
              {"direction_memory", w.direction_memory}};
}
inline WalkParams walk_from(const json& j) {
  WalkParams w;
  w.bounds = Bounds{box_from(j.at("bounds"))};
  w.speed = dist_from(j.at("speed"));
  w.direction = dist_from(j.at("direction"));
  w.mode = j.at("mode").get<std::string>() == "time" ? LegMode::time_based
                                                     : LegMode::distance_based;
  w.leg_time = j.at("leg_time").get<double>();
  w.leg_distance = j.at("leg_distance").get<double>();
  w.update_step = j.at("update_step").get<double>();
  w.avoid_retries = j.at("avoid_retries").get<int>();
  w.direction_memory = j.at("direction_memory").get<double>();
  return w;
}

inline json to_json(const DeviationDist& d) {
  const char* family = nullptr;
  switch (d.family) {
    case DeviationDist::Family::gaussian: family = "gaussian"; break;
    case DeviationDist::Family::uniform: family = "uniform"; break;
    case DeviationDist::Family::custom:
      throw SimError("scenario document: custom deviation samplers are not serializable");
  }
  return json{{"family", family}, {"mu", d.mu}, {"sigma", d.sigma}, {"bound", d.bound}};
}
inline DeviationDist deviation_from(const json& j) {
  DeviationDist d;
  std::string family = j.at("family").get<std::string>();
  if (family == "gaussian") d.family = DeviationDist::Family::gaussian;
  else if (family == "uniform") d.family = DeviationDist::Family::uniform;
  else throw SimError(strf("scenario document: bad deviation family '%s'", family.c_str()));
  d.mu = j.at("mu").get<double>();
  d.sigma = j.at("sigma").get<double>();
  d.bound = j.at("bound").get<double>();
  return d;
}

inline const char* name_of(NodeRole r) {
  switch (r) {
    case NodeRole::responder: return "responder";
    case NodeRole::robot: return "robot";
    case NodeRole::team_leader: return "team_leader";
    case NodeRole::team_member: return "team_member";
  }
  return "?";
}
inline NodeRole role_from(const std::string& s) {
  if (s == "responder") return NodeRole::responder;
  if (s == "robot") return NodeRole::robot;
  if (s == "team_leader") return NodeRole::team_leader;
  if (s == "team_member") return NodeRole::team_member;
  throw SimError(strf("scenario document: bad role '%s'", s.c_str()));
}

inline const char* name_of(StationKind k) {
  switch (k) {
    case StationKind::lte: return "lte";
    case StationKind::mmwave_bs: return "mmwave_bs";
    case StationKind::mmwave_relay: return "mmwave_relay";
  }
  return "?";
}
inline StationKind station_kind_from(const std::string& s) {
  if (s == "lte") return StationKind::lte;
  if (s == "mmwave_bs") return StationKind::mmwave_bs;
  if (s == "mmwave_relay") return StationKind::mmwave_relay;
  throw SimError(strf("scenario document: bad station kind '%s'", s.c_str()));
}

inline const char* name_of(FlowPolicy p) {
  switch (p) {
    case FlowPolicy::best: return "best";
    case FlowPolicy::prefer_lte: return "prefer_lte";
    case FlowPolicy::mmwave_only: return "mmwave_only";
  }
  return "?";
}
inline FlowPolicy policy_from(const std::string& s) {
  if (s == "best") return FlowPolicy::best;
  if (s == "prefer_lte") return FlowPolicy::prefer_lte;
  if (s == "mmwave_only") return FlowPolicy::mmwave_only;
  throw SimError(strf("scenario document: bad flow policy '%s'", s.c_str()));
}

inline json to_json(const MobilityAssignment& m) {
  json j;
  switch (m.kind) {
    case MobilityAssignment::Kind::walk:
      j["kind"] = "walk";
      j["walk_kind"] = m.walk_kind == WalkKind::building_aware ? "building_aware" : "plain";
      j["start"] = to_json(m.start);
      j["params"] = to_json(m.walk);
      break;
    case MobilityAssignment::Kind::waypoints: {
      j["kind"] = "waypoints";
      j["speed"] = m.path.speed;
      j["start_time"] = m.path.start_time;
      json pts = json::array();
      for (Point2 p : m.path.points) pts.push_back(to_json(p));
      j["points"] = std::move(pts);
      break;
    }
    case MobilityAssignment::Kind::group_slave:
      j["kind"] = "group_slave";
      j["master"] = m.master;
      j["deviation"] = to_json(m.deviation);
      j["outdoor_constrained"] = m.outdoor_constrained;
      j["max_iterations"] = m.max_iterations;
      break;
  }
  return j;
}
inline MobilityAssignment mobility_from(const json& j) {
  MobilityAssignment m;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "walk") {
    m.kind = MobilityAssignment::Kind::walk;
    m.walk_kind = j.at("walk_kind").get<std::string>() == "building_aware"
                      ? WalkKind::building_aware
                      : WalkKind::plain;
    m.start = point_from(j.at("start"));
    m.walk = walk_from(j.at("params"));
  } else if (kind == "waypoints") {
    m.kind = MobilityAssignment::Kind::waypoints;
    m.path.speed = j.at("speed").get<double>();
    m.path.start_time = j.at("start_time").get<double>();
    for (const json& p : j.at("points")) m.path.points.push_back(point_from(p));
  } else if (kind == "group_slave") {
    m.kind = MobilityAssignment::Kind::group_slave;
    m.master = j.at("master").get<int>();
    m.deviation = deviation_from(j.at("deviation"));
    m.outdoor_constrained = j.at("outdoor_constrained").get<bool>();
    m.max_iterations = j.at("max_iterations").get<int>();
  } else {
    throw SimError(strf("scenario document: bad mobility kind '%s'", kind.c_str()));
  }
  return m;
}

inline json to_json(const LinkModelParams& p) {
  json curves = json::array();
  for (const AntennaCurve& c : p.mmwave_curves) {
    json pts = json::array();
    for (auto [d, rate] : c.curve.points) pts.push_back(json::array({d, rate}));
    curves.push_back(json{{"antennas_bs", c.antennas_bs},
                          {"antennas_ue", c.antennas_ue},
                          {"points", std::move(pts)}});
  }
  return json{{"lte_cell_capacity", p.lte_cell_capacity},
              {"lte_efficiency", p.lte_efficiency},
              {"mmwave_nlos_factor", p.mmwave_nlos_factor},
              {"mmwave_max_range", p.mmwave_max_range},
              {"relay_backhaul_share", p.relay_backhaul_share},
              {"mmwave_curves", std::move(curves)}};
}
inline LinkModelParams link_from(const json& j) {
  LinkModelParams p;
  p.lte_cell_capacity = j.at("lte_cell_capacity").get<double>();
  p.lte_efficiency = j.at("lte_efficiency").get<double>();
  p.mmwave_nlos_factor = j.at("mmwave_nlos_factor").get<double>();
  p.mmwave_max_range = j.at("mmwave_max_range").get<double>();
  p.relay_backhaul_share = j.at("relay_backhaul_share").get<double>();
  p.mmwave_curves.clear();
  for (const json& c : j.at("mmwave_curves")) {
    AntennaCurve curve;
    curve.antennas_bs = c.at("antennas_bs").get<int>();
    curve.antennas_ue = c.at("antennas_ue").get<int>();
    for (const json& pt : c.at("points")) {
      curve.curve.points.emplace_back(pt.at(0).get<double>(), pt.at(1).get<double>());
    }
    p.mmwave_curves.push_back(std::move(curve));
  }
  return p;
}

}  // namespace schema

inline nlohmann::json to_json(const ScenarioSpec& spec) {
  using nlohmann::json;
  json j;
  j["name"] = spec.name;
  j["seed"] = spec.seed;
  j["horizon_s"] = spec.horizon_s;
  j["ue_antennas"] = spec.ue_antennas;
  j["bounds"] = schema::to_json(spec.bounds.rect);
  json boxes = json::array();
  for (const Box& b : spec.boxes) boxes.push_back(schema::to_json(b));
  j["boxes"] = std::move(boxes);
  json nodes = json::array();
  for (const NodeSpec& n : spec.nodes) {
    nodes.push_back(json{{"id", n.id},
                         {"role", schema::name_of(n.role)},
                         {"mobility", schema::to_json(n.mobility)}});
  }
  j["nodes"] = std::move(nodes);
  json stations = json::array();
  for (const StationSpec& s : spec.stations) {
    stations.push_back(json{{"id", s.id},
                            {"kind", schema::name_of(s.kind)},
                            {"position", schema::to_json(s.position)},
                            {"antennas", s.antennas},
                            {"parent", s.parent},
                            {"follows", s.follows}});
  }
  j["stations"] = std::move(stations);
  json flows = json::array();
  for (const FlowSpec& f : spec.flows) {
    flows.push_back(json{
        {"id", f.id},
        {"source", f.direction == FlowDirection::uplink ? json(strf("node:%d", f.node)) : json("ic")},
        {"sink", f.direction == FlowDirection::uplink ? json("ic") : json(strf("node:%d", f.node))},
        {"direction", f.direction == FlowDirection::uplink ? "uplink" : "downlink"},
        {"kind", f.kind == FlowKind::video ? "video" : "control"},
        {"rate_bps", f.offered_bps},
        {"start_s", f.start_s},
        {"packet_bytes", f.packet_bytes},
        {"policy", schema::name_of(f.policy)}});
  }
  j["flows"] = std::move(flows);
  json sites = json::array();
  for (Point2 p : spec.relay_sites) sites.push_back(schema::to_json(p));
  j["relay_sites"] = std::move(sites);
  j["link"] = schema::to_json(spec.link);
  return j;
}

inline ScenarioSpec scenario_from_json(const nlohmann::json& j) {
  using nlohmann::json;
  ScenarioSpec spec;
  spec.name = j.at("name").get<std::string>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  spec.horizon_s = j.at("horizon_s").get<double>();
  spec.ue_antennas = j.at("ue_antennas").get<int>();
  spec.bounds = Bounds{schema::box_from(j.at("bounds"))};
  for (const json& b : j.at("boxes")) spec.boxes.push_back(schema::box_from(b));
  for (const json& n : j.at("nodes")) {
    NodeSpec node;
    node.id = n.at("id").get<int>();
    node.role = schema::role_from(n.at("role").get<std::string>());
    node.mobility = schema::mobility_from(n.at("mobility"));
    spec.nodes.push_back(std::move(node));
  }
  for (const json& s : j.at("stations")) {
    StationSpec st;
    st.id = s.at("id").get<int>();
    st.kind = schema::station_kind_from(s.at("kind").get<std::string>());
    st.position = schema::point_from(s.at("position"));
    st.antennas = s.at("antennas").get<int>();
    st.parent = s.at("parent").get<int>();
    st.follows = s.at("follows").get<int>();
    spec.stations.push_back(st);
  }
  for (const json& f : j.at("flows")) {
    FlowSpec flow;
    flow.id = f.at("id").get<int>();
    flow.direction = f.at("direction").get<std::string>() == "uplink"
                         ? FlowDirection::uplink
                         : FlowDirection::downlink;
    std::string endpoint = f.at(flow.direction == FlowDirection::uplink ? "source" : "sink")
                               .get<std::string>();
    if (endpoint.rfind("node:", 0) != 0) {
      throw SimError(strf("scenario document: bad flow endpoint '%s'", endpoint.c_str()));
    }
    flow.node = std::stoi(endpoint.substr(5));
    flow.kind = f.at("kind").get<std::string>() == "video" ? FlowKind::video
                                                           : FlowKind::control;
    flow.offered_bps = f.at("rate_bps").get<double>();
    flow.start_s = f.at("start_s").get<double>();
    flow.packet_bytes = f.at("packet_bytes").get<int>();
    flow.policy = schema::policy_from(f.at("policy").get<std::string>());
    spec.flows.push_back(flow);
  }
  for (const nlohmann::json& p : j.at("relay_sites")) {
    spec.relay_sites.push_back(schema::point_from(p));
  }
  spec.link = schema::link_from(j.at("link"));
  return spec;
}

/// Structural sanity: every reference resolves and every box is well-formed.
inline void validate(const ScenarioSpec& spec) {
  if (!spec.bounds.rect.valid()) throw SimError("scenario: invalid bounds");
  for (const Box& b : spec.boxes) {
    if (!b.valid()) throw SimError("scenario: invalid box");
  }
  for (const NodeSpec& n : spec.nodes) {
    if (n.mobility.kind == MobilityAssignment::Kind::group_slave &&
        spec.find_node(n.mobility.master) == nullptr) {
      throw SimError(strf("scenario: node %d references missing master %d", n.id,
                          n.mobility.master));
    }
  }
  for (const StationSpec& s : spec.stations) {
    if (s.kind == StationKind::mmwave_relay) {
      const StationSpec* parent = spec.find_station(s.parent);
      if (parent == nullptr || parent->kind != StationKind::mmwave_bs) {
        throw SimError(strf("scenario: relay %d has no mmwave_bs parent", s.id));
      }
      if (spec.find_node(s.follows) == nullptr) {
        throw SimError(strf("scenario: relay %d follows missing node %d", s.id, s.follows));
      }
    }
  }
  for (const FlowSpec& f : spec.flows) {
    if (spec.find_node(f.node) == nullptr) {
      throw SimError(strf("scenario: flow %d references missing node %d", f.id, f.node));
    }
    if (f.offered_bps <= 0.0) throw SimError(strf("scenario: flow %d has no rate", f.id));
    if (f.start_s < 0.0) throw SimError(strf("scenario: flow %d starts before 0", f.id));
  }
}

}  // namespace pscsim
