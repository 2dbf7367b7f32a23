#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "pscsim/core.hpp"
#include "pscsim/geometry.hpp"

namespace pscsim {

/// One recorded position: (time s, node id, x m, y m).
struct PositionSample {
  double t = 0.0;
  int node = -1;
  double x = 0.0;
  double y = 0.0;
};

inline void write_trace_csv(std::ostream& out, std::span<const PositionSample> samples) {
  out << "time_s,node_id,x_m,y_m\n";
  for (const PositionSample& s : samples) {
    out << strf("%.9g,%d,%.9g,%.9g\n", s.t, s.node, s.x, s.y);
  }
}

// ---------------------------------------------------------------------------
// NS-2 movement format
//
//   $node_(0) set X_ 12.5
//   $node_(0) set Y_ 3.25
//   $ns_ at 1.5 "$node_(0) setdest 20.0 30.0 2.5"
//
// A setdest at time t starts a straight leg toward (x, y) at the given speed.
// Stationary nodes emit only the two initial set lines.

/// Exports per-node movement. Requires strictly increasing timestamps per
/// node; duplicates or out-of-order samples are an error.
inline void export_ns2_trace(std::ostream& out, std::span<const PositionSample> samples) {
  std::map<int, std::vector<PositionSample>> per_node;
  for (const PositionSample& s : samples) per_node[s.node].push_back(s);

  for (auto& [node, list] : per_node) {
    for (size_t i = 0; i + 1 < list.size(); ++i) {
      if (list[i + 1].t <= list[i].t) {
        throw SimError(strf("export_ns2_trace: node %d has non-increasing timestamps "
                            "(%.9g then %.9g)",
                            node, list[i].t, list[i + 1].t));
      }
    }
  }

  for (const auto& [node, list] : per_node) {
    if (list.empty()) continue;
    out << strf("$node_(%d) set X_ %.9g\n", node, list.front().x);
    out << strf("$node_(%d) set Y_ %.9g\n", node, list.front().y);
  }
  for (const auto& [node, list] : per_node) {
    for (size_t i = 0; i + 1 < list.size(); ++i) {
      const PositionSample& a = list[i];
      const PositionSample& b = list[i + 1];
      double dist = std::hypot(b.x - a.x, b.y - a.y);
      if (dist == 0.0) continue;  // no movement, no setdest
      double speed = dist / (b.t - a.t);
      out << strf("$ns_ at %.9g \"$node_(%d) setdest %.9g %.9g %.9g\"\n", a.t, node,
                  b.x, b.y, speed);
    }
  }
}

/// Parsed NS-2 movement script.
struct Ns2Trace {
  struct Leg {
    double at = 0.0;
    double x = 0.0;
    double y = 0.0;
    double speed = 0.0;
  };
  struct Node {
    Point2 initial;
    std::vector<Leg> legs;  // sorted by `at`
  };
  std::map<int, Node> nodes;

  /// Replays the script: linear motion toward the active destination, where a
  /// later setdest preempts the current leg mid-flight.
  Point2 position_at(int node, double t) const {
    auto it = nodes.find(node);
    if (it == nodes.end()) throw SimError(strf("ns2 replay: unknown node %d", node));
    Point2 pos = it->second.initial;
    for (const Leg& leg : it->second.legs) {
      if (leg.at >= t) break;
      double until = std::min(t, next_start(it->second, leg));
      double dist = std::hypot(leg.x - pos.x, leg.y - pos.y);
      if (dist <= 0.0 || leg.speed <= 0.0) continue;
      double f = std::min(1.0, leg.speed * (until - leg.at) / dist);
      pos = pos + (Point2{leg.x, leg.y} - pos) * f;
    }
    return pos;
  }

 private:
  static double next_start(const Node& node, const Leg& leg) {
    for (const Leg& other : node.legs) {
      if (other.at > leg.at) return other.at;
    }
    return std::numeric_limits<double>::infinity();
  }
};

inline Ns2Trace parse_ns2_trace(std::istream& in) {
  Ns2Trace trace;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int node = -1;
    double v = 0.0;
    char axis = 0;
    if (std::sscanf(line.c_str(), "$node_(%d) set %c_ %lf", &node, &axis, &v) == 3) {
      if (axis == 'X') trace.nodes[node].initial.x = v;
      else if (axis == 'Y') trace.nodes[node].initial.y = v;
      else throw SimError(strf("ns2 parse: bad axis in '%s'", line.c_str()));
      continue;
    }
    double at = 0.0, x = 0.0, y = 0.0, speed = 0.0;
    if (std::sscanf(line.c_str(), "$ns_ at %lf \"$node_(%d) setdest %lf %lf %lf\"", &at,
                    &node, &x, &y, &speed) == 5) {
      trace.nodes[node].legs.push_back({at, x, y, speed});
      continue;
    }
    throw SimError(strf("ns2 parse: unrecognized line '%s'", line.c_str()));
  }
  for (auto& [node, data] : trace.nodes) {
    std::sort(data.legs.begin(), data.legs.end(),
              [](const Ns2Trace::Leg& a, const Ns2Trace::Leg& b) { return a.at < b.at; });
  }
  return trace;
}

}  // namespace pscsim
