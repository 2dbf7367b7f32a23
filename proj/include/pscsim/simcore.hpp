#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "pscsim/core.hpp"
#include "pscsim/geometry.hpp"
#include "pscsim/group.hpp"
#include "pscsim/mobility.hpp"
#include "pscsim/radio.hpp"
#include "pscsim/scenario.hpp"

namespace pscsim {

// ---------------------------------------------------------------------------
// event queue

enum class EventKind {
  flow_start,
  mobility_update,
  link_reeval,
  metric_sample,
  relay_reposition,
  end,
};

struct Event {
  double time = 0.0;
  std::uint64_t seq = 0;  // caller-assigned tiebreaker; pops follow (time, seq)
  EventKind kind = EventKind::end;
  int subject = -1;  // flow id / window index, kind-dependent
};

/// Time-ordered queue with a total (time, seq) order: the pop sequence is a
/// function of the event set alone, not of insertion order. Scheduling into
/// the past of the last pop is rejected.
class EventQueue {
 public:
  void push(const Event& e) {
    if (e.time < now_) {
      throw SimError(strf("EventQueue: event at %g scheduled in the past (now %g)",
                          e.time, now_));
    }
    heap_.push(e);
  }

  bool empty() const { return heap_.empty(); }
  size_t size() const { return heap_.size(); }

  Event pop() {
    if (heap_.empty()) throw SimError("EventQueue: pop on empty queue");
    Event e = heap_.top();
    heap_.pop();
    now_ = e.time;
    return e;
  }

  double now() const { return now_; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  double now_ = 0.0;
};

// ---------------------------------------------------------------------------
// flow accounting and metrics

struct FlowRecord {
  FlowSpec flow;
  double delivered_bits = 0.0;
  double tx_packets = 0.0;  // control flows; accounted in expectation
  double rx_packets = 0.0;
  std::vector<double> window_bits;  // delivered per window
};

struct FlowMetrics {
  int flow_id = -1;
  int node = -1;
  FlowDirection direction = FlowDirection::uplink;
  FlowKind kind = FlowKind::video;
  double offered_bps = 0.0;
  double start_s = 0.0;
  double delivered_bits = 0.0;
  double mean_throughput_bps = 0.0;
  double tx_packets = 0.0;
  double rx_packets = 0.0;
  std::vector<double> window_bits;
};

struct MetricsReport {
  double horizon_s = 0.0;
  double window_s = 0.0;
  double first_start_s = 0.0;
  double aggregate_uplink_bps = 0.0;
  std::optional<double> p_rx_ctrl;
  std::vector<FlowMetrics> flows;
  std::vector<double> window_ends;
};

/// Builds the report: per-flow means over [first flow start, horizon], the
/// uplink aggregate as their sum, and p_rx_ctrl as total received over total
/// transmitted control packets (absent when nothing was transmitted).
inline MetricsReport sample_metrics(std::span<const FlowRecord> records, double horizon,
                                    double window,
                                    std::span<const double> window_ends = {}) {
  MetricsReport report;
  report.horizon_s = horizon;
  report.window_s = window;
  report.window_ends.assign(window_ends.begin(), window_ends.end());

  double first_start = horizon;
  for (const FlowRecord& r : records) first_start = std::min(first_start, r.flow.start_s);
  if (records.empty()) first_start = 0.0;
  report.first_start_s = first_start;
  double span_s = std::max(horizon - first_start, 1e-12);

  double ctrl_tx = 0.0, ctrl_rx = 0.0;
  bool has_ctrl = false;
  for (const FlowRecord& r : records) {
    FlowMetrics m;
    m.flow_id = r.flow.id;
    m.node = r.flow.node;
    m.direction = r.flow.direction;
    m.kind = r.flow.kind;
    m.offered_bps = r.flow.offered_bps;
    m.start_s = r.flow.start_s;
    m.delivered_bits = r.delivered_bits;
    m.mean_throughput_bps = r.delivered_bits / span_s;
    m.tx_packets = r.tx_packets;
    m.rx_packets = r.rx_packets;
    m.window_bits = r.window_bits;
    if (r.flow.direction == FlowDirection::uplink) {
      report.aggregate_uplink_bps += m.mean_throughput_bps;
    }
    if (r.flow.kind == FlowKind::control) {
      has_ctrl = true;
      ctrl_tx += r.tx_packets;
      ctrl_rx += r.rx_packets;
    }
    report.flows.push_back(std::move(m));
  }
  if (has_ctrl && ctrl_tx > 0.0) report.p_rx_ctrl = ctrl_rx / ctrl_tx;
  return report;
}

// ---------------------------------------------------------------------------
// engine

/// Hooks for tests and exporters; every callback is optional.
struct EngineObserver {
  /// Per station pool and window: what was granted against what capacity.
  /// `direction` is "ul"/"dl" for LTE pools and "shared" for mmWave cells.
  std::function<void(double window_end, int station_id, const std::string& direction,
                     double granted_bps, double capacity_bps)>
      on_allocation;
  /// Node positions at every window boundary (including t = 0).
  std::function<void(double t, int node_id, Point2 p)> on_position;
  /// Relay moves: (time, station id, new position).
  std::function<void(double t, int station_id, Point2 p)> on_relay_move;
};

namespace detail {

struct MemberRef {
  int group = -1;
  int member = -1;  // 0 = master
};

struct EngineState {
  const ScenarioSpec* spec = nullptr;
  const LinkModelParams* params = nullptr;
  std::vector<Group> groups;
  std::vector<Rng> group_rngs;
  std::map<int, MemberRef> node_members;  // node id -> group member
  std::vector<Point2> relay_pos;          // parallel to spec->stations
  std::vector<bool> flow_active;
  std::vector<FlowRecord> records;

  Point2 node_position(int node_id) const {
    auto it = node_members.find(node_id);
    if (it == node_members.end()) throw SimError(strf("engine: unknown node %d", node_id));
    return groups[static_cast<size_t>(it->second.group)].position(it->second.member);
  }

  Point2 station_position(size_t station_index) const {
    const StationSpec& st = spec->stations[station_index];
    return st.kind == StationKind::mmwave_relay ? relay_pos[station_index] : st.position;
  }
};

inline void build_mobility(EngineState& es, std::uint64_t seed) {
  const ScenarioSpec& spec = *es.spec;
  // masters/standalone movers first, in node order; slaves attach to their
  // master's group in node order
  for (const NodeSpec& node : spec.nodes) {
    if (node.mobility.kind == MobilityAssignment::Kind::group_slave) continue;
    MasterSpec master;
    if (node.mobility.kind == MobilityAssignment::Kind::walk) {
      master.kind = MasterSpec::Kind::walk;
      master.walk_kind = node.mobility.walk_kind;
      master.walk = node.mobility.walk;
      master.start = node.mobility.start;
    } else {
      master.kind = MasterSpec::Kind::waypoints;
      master.path = node.mobility.path;
    }
    es.group_rngs.emplace_back(seed, 1000 + static_cast<std::uint64_t>(node.id));
    es.groups.emplace_back(master, spec.boxes);
    es.groups.back().init_master(es.group_rngs.back());
    es.node_members[node.id] = {static_cast<int>(es.groups.size()) - 1, 0};
  }
  for (const NodeSpec& node : spec.nodes) {
    if (node.mobility.kind != MobilityAssignment::Kind::group_slave) continue;
    auto it = es.node_members.find(node.mobility.master);
    if (it == es.node_members.end() || it->second.member != 0) {
      throw SimError(strf("engine: node %d has invalid master %d", node.id,
                          node.mobility.master));
    }
    int g = it->second.group;
    PositionConstraint constraint;
    if (node.mobility.outdoor_constrained) {
      constraint = outdoor_constraint(spec.boxes, spec.bounds);
    }
    Group& group = es.groups[static_cast<size_t>(g)];
    group.add_slave(node.mobility.deviation, std::move(constraint),
                    node.mobility.max_iterations, es.group_rngs[static_cast<size_t>(g)]);
    es.node_members[node.id] = {g, group.size() - 1};
  }
}

inline LinkAssessment assess_direct(const EngineState& es, Point2 node_pos,
                                    size_t station_index) {
  const ScenarioSpec& spec = *es.spec;
  const LinkModelParams& params = *es.params;
  const StationSpec& st = spec.stations[station_index];
  Point2 sp = es.station_position(station_index);
  LinkAssessment a;
  a.station_id = st.id;
  a.kind = st.kind;
  if (st.kind == StationKind::lte) {
    a.los = true;
    a.achievable_rate = link_rate(StationKind::lte, params, true, st.antennas,
                                  spec.ue_antennas, (sp - node_pos).norm());
    return a;
  }
  double d = (sp - node_pos).norm();
  a.los = is_los(node_pos, sp, spec.boxes);
  if (st.kind == StationKind::mmwave_bs) {
    a.achievable_rate =
        link_rate(StationKind::mmwave_bs, params, a.los, st.antennas, spec.ue_antennas, d);
    return a;
  }
  // relay: bottleneck of access and backhaul on a shared carrier
  const StationSpec* parent = spec.find_station(st.parent);
  if (parent == nullptr) throw SimError(strf("engine: relay %d without parent", st.id));
  double access =
      link_rate(StationKind::mmwave_bs, params, a.los, st.antennas, spec.ue_antennas, d);
  Point2 pp = parent->position;
  bool backhaul_los = is_los(sp, pp, spec.boxes);
  double backhaul = link_rate(StationKind::mmwave_bs, params, backhaul_los,
                              parent->antennas, spec.ue_antennas, (pp - sp).norm());
  a.achievable_rate = relay_path_rate(access, backhaul, params);
  return a;
}

inline double station_capacity(const EngineState& es, const StationSpec& st) {
  const LinkModelParams& params = *es.params;
  switch (st.kind) {
    case StationKind::lte: return params.lte_rate();
    case StationKind::mmwave_bs:
      return params.mmwave_peak_rate(st.antennas, es.spec->ue_antennas);
    case StationKind::mmwave_relay:
      return params.mmwave_peak_rate(st.antennas, es.spec->ue_antennas) *
             params.relay_backhaul_share;
  }
  throw SimError("engine: bad station kind");
}

inline void reposition_relays(EngineState& es, double t, const EngineObserver& obs) {
  const ScenarioSpec& spec = *es.spec;
  for (size_t i = 0; i < spec.stations.size(); ++i) {
    const StationSpec& st = spec.stations[i];
    if (st.kind != StationKind::mmwave_relay) continue;
    const StationSpec* parent = spec.find_station(st.parent);
    Point2 master = es.node_position(st.follows);
    Point2 current = es.relay_pos[i];
    if (is_los(current, master, spec.boxes) && is_los(current, parent->position, spec.boxes)) {
      continue;
    }
    // jump to the nearest candidate site that restores LOS to both endpoints
    const Point2* best = nullptr;
    double best_d = 0.0;
    for (const Point2& site : spec.relay_sites) {
      if (!is_los(site, master, spec.boxes)) continue;
      if (!is_los(site, parent->position, spec.boxes)) continue;
      double d = (site - current).norm();
      if (best == nullptr || d < best_d) {
        best = &site;
        best_d = d;
      }
    }
    if (best != nullptr && !(current == *best)) {
      es.relay_pos[i] = *best;
      if (obs.on_relay_move) obs.on_relay_move(t, st.id, *best);
    }
  }
}

// One window's link re-evaluation: per-flow selection, per-station-pool
// max-min allocation, credit and the packetized control bridge.
inline void evaluate_window(EngineState& es, double w_start, double w_end,
                            const EngineObserver& obs) {
  const ScenarioSpec& spec = *es.spec;
  double window = w_end - w_start;
  if (window <= 0.0) return;

  struct Pick {
    size_t flow_index;
    size_t station_index;
    double achievable;
    double active_s;
  };
  std::vector<Pick> picks;
  for (size_t fi = 0; fi < spec.flows.size(); ++fi) {
    const FlowSpec& flow = spec.flows[fi];
    es.records[fi].window_bits.push_back(0.0);
    if (!es.flow_active[fi]) continue;
    double active_s = w_end - std::max(w_start, flow.start_s);
    if (active_s <= 0.0) continue;

    Point2 node_pos = es.node_position(flow.node);
    std::vector<LinkAssessment> assessments;
    std::vector<size_t> indices;
    for (size_t si = 0; si < spec.stations.size(); ++si) {
      if (flow.policy == FlowPolicy::mmwave_only &&
          spec.stations[si].kind == StationKind::lte) {
        continue;
      }
      assessments.push_back(assess_direct(es, node_pos, si));
      indices.push_back(si);
    }
    if (assessments.empty()) continue;
    LinkPolicy policy = flow.policy == FlowPolicy::prefer_lte ? LinkPolicy::prefer_lte
                                                              : LinkPolicy::best;
    int station_id = select_link(assessments, policy);
    for (size_t k = 0; k < assessments.size(); ++k) {
      if (assessments[k].station_id == station_id) {
        picks.push_back({fi, indices[k], assessments[k].achievable_rate, active_s});
        break;
      }
    }
  }

  // allocate per station pool; LTE splits uplink/downlink (paired spectrum),
  // mmWave shares one pool across both directions (TDD)
  for (size_t si = 0; si < spec.stations.size(); ++si) {
    const StationSpec& st = spec.stations[si];
    double capacity = station_capacity(es, st);
    int pools = st.kind == StationKind::lte ? 2 : 1;
    for (int pool = 0; pool < pools; ++pool) {
      std::vector<FlowDemand> demands;
      std::vector<size_t> flow_of;  // picks index per demand
      for (size_t pi = 0; pi < picks.size(); ++pi) {
        const Pick& pick = picks[pi];
        if (pick.station_index != si) continue;
        const FlowSpec& flow = spec.flows[pick.flow_index];
        if (pools == 2) {
          bool is_ul = flow.direction == FlowDirection::uplink;
          if ((pool == 0) != is_ul) continue;
        }
        demands.push_back({flow.id, pick.achievable, flow.offered_bps});
        flow_of.push_back(pi);
      }
      if (demands.empty()) continue;
      std::vector<Grant> grants = allocate(capacity, demands);
      double granted_sum = 0.0;
      for (size_t k = 0; k < grants.size(); ++k) {
        const Pick& pick = picks[flow_of[k]];
        const FlowSpec& flow = spec.flows[pick.flow_index];
        double rate = grants[k].rate;
        granted_sum += rate;
        double bits = rate * pick.active_s;
        FlowRecord& record = es.records[pick.flow_index];
        record.delivered_bits += bits;
        record.window_bits.back() += bits;
        if (flow.kind == FlowKind::control && flow.packet_bytes > 0) {
          double tx = flow.offered_bps * pick.active_s / (8.0 * flow.packet_bytes);
          double p = std::min(1.0, rate / flow.offered_bps);
          record.tx_packets += tx;
          record.rx_packets += p * tx;
        }
      }
      if (obs.on_allocation) {
        const char* dir = pools == 1 ? "shared" : (pool == 0 ? "ul" : "dl");
        obs.on_allocation(w_end, st.id, dir, granted_sum, capacity);
      }
    }
  }
}

}  // namespace detail

/// Runs the scenario to its horizon with link re-evaluation every `window`
/// seconds. Deterministic: identical (spec, params, window, seed) give an
/// identical report.
inline MetricsReport run(const ScenarioSpec& spec, const LinkModelParams& params,
                         double window, std::uint64_t seed,
                         const EngineObserver& obs = {}) {
  if (spec.horizon_s <= 0.0) throw SimError("run: horizon must be positive");
  if (window <= 0.0) throw SimError("run: window must be positive");
  validate(spec);

  detail::EngineState es;
  es.spec = &spec;
  es.params = &params;
  detail::build_mobility(es, seed);
  es.relay_pos.resize(spec.stations.size());
  for (size_t i = 0; i < spec.stations.size(); ++i) {
    es.relay_pos[i] = spec.stations[i].position;
  }
  es.flow_active.assign(spec.flows.size(), false);
  es.records.clear();
  for (const FlowSpec& flow : spec.flows) {
    FlowRecord r;
    r.flow = flow;
    es.records.push_back(std::move(r));
  }

  bool has_relays = false;
  for (const StationSpec& st : spec.stations) {
    if (st.kind == StationKind::mmwave_relay) has_relays = true;
  }

  // window boundaries; the last window may be partial
  std::vector<double> ends;
  for (int k = 1;; ++k) {
    double t = k * window;
    if (t >= spec.horizon_s - 1e-12) {
      ends.push_back(spec.horizon_s);
      break;
    }
    ends.push_back(t);
  }

  // schedule everything up front in (time, kind) order; seq encodes priority
  struct Pending {
    double time;
    int priority;  // EventKind order
    EventKind kind;
    int subject;
  };
  std::vector<Pending> pending;
  for (size_t fi = 0; fi < spec.flows.size(); ++fi) {
    pending.push_back({spec.flows[fi].start_s, 0, EventKind::flow_start,
                       static_cast<int>(fi)});
  }
  for (size_t k = 0; k < ends.size(); ++k) {
    pending.push_back({ends[k], 1, EventKind::mobility_update, static_cast<int>(k)});
    pending.push_back({ends[k], 2, EventKind::link_reeval, static_cast<int>(k)});
    pending.push_back({ends[k], 3, EventKind::metric_sample, static_cast<int>(k)});
  }
  if (has_relays) {
    for (int s = 1; s * 1.0 < spec.horizon_s; ++s) {
      pending.push_back({s * 1.0, 4, EventKind::relay_reposition, s});
    }
  }
  pending.push_back({spec.horizon_s, 5, EventKind::end, -1});
  std::stable_sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.priority < b.priority;
  });

  EventQueue queue;
  std::uint64_t seq = 0;
  for (const Pending& p : pending) queue.push({p.time, seq++, p.kind, p.subject});

  if (obs.on_position) {
    for (const NodeSpec& node : spec.nodes) {
      obs.on_position(0.0, node.id, es.node_position(node.id));
    }
  }

  while (!queue.empty()) {
    Event e = queue.pop();
    switch (e.kind) {
      case EventKind::flow_start:
        es.flow_active[static_cast<size_t>(e.subject)] = true;
        break;
      case EventKind::mobility_update:
        for (size_t g = 0; g < es.groups.size(); ++g) {
          es.groups[g].advance_to(e.time, es.group_rngs[g]);
        }
        break;
      case EventKind::link_reeval: {
        size_t k = static_cast<size_t>(e.subject);
        double w_start = k == 0 ? 0.0 : ends[k - 1];
        detail::evaluate_window(es, w_start, ends[k], obs);
        break;
      }
      case EventKind::metric_sample:
        if (obs.on_position) {
          for (const NodeSpec& node : spec.nodes) {
            obs.on_position(e.time, node.id, es.node_position(node.id));
          }
        }
        break;
      case EventKind::relay_reposition:
        detail::reposition_relays(es, e.time, obs);
        break;
      case EventKind::end:
        break;
    }
  }

  return sample_metrics(es.records, spec.horizon_s, window, ends);
}

// ---------------------------------------------------------------------------
// CSV output (column names fixed in docs/formats.md)

namespace csv {

inline std::string num(double v) { return strf("%.9g", v); }

inline const char* direction_name(FlowDirection d) {
  return d == FlowDirection::uplink ? "uplink" : "downlink";
}
inline const char* kind_name(FlowKind k) { return k == FlowKind::video ? "video" : "control"; }

}  // namespace csv

/// One row per flow, then an `aggregate` row; a final `p_rx_ctrl` row appears
/// when control traffic was transmitted.
inline void write_metrics_csv(std::ostream& out, const MetricsReport& report) {
  out << "id,node,direction,kind,offered_bps,start_s,delivered_bits,"
         "mean_throughput_bps,tx_packets,rx_packets\n";
  double up_offered = 0.0, up_delivered = 0.0, tx = 0.0, rx = 0.0;
  for (const FlowMetrics& m : report.flows) {
    if (m.direction == FlowDirection::uplink) {
      up_offered += m.offered_bps;
      up_delivered += m.delivered_bits;
    }
    tx += m.tx_packets;
    rx += m.rx_packets;
    out << m.flow_id << ',' << m.node << ',' << csv::direction_name(m.direction) << ','
        << csv::kind_name(m.kind) << ',' << csv::num(m.offered_bps) << ','
        << csv::num(m.start_s) << ',' << csv::num(m.delivered_bits) << ','
        << csv::num(m.mean_throughput_bps) << ',' << csv::num(m.tx_packets) << ','
        << csv::num(m.rx_packets) << '\n';
  }
  out << "aggregate,-1,uplink,all," << csv::num(up_offered) << ',' << csv::num(0.0) << ','
      << csv::num(up_delivered) << ',' << csv::num(report.aggregate_uplink_bps) << ','
      << csv::num(tx) << ',' << csv::num(rx) << '\n';
  if (report.p_rx_ctrl.has_value()) {
    // the probability rides in the mean_throughput_bps column
    out << "p_rx_ctrl,-1,downlink,control,,,," << csv::num(*report.p_rx_ctrl) << ",,\n";
  }
}

/// Long-format window series: one row per (window, flow).
inline void write_timeseries_csv(std::ostream& out, const MetricsReport& report) {
  out << "window_end_s,flow_id,delivered_bits,throughput_bps\n";
  for (size_t k = 0; k < report.window_ends.size(); ++k) {
    double w_start = k == 0 ? 0.0 : report.window_ends[k - 1];
    double w = report.window_ends[k] - w_start;
    for (const FlowMetrics& m : report.flows) {
      double bits = k < m.window_bits.size() ? m.window_bits[k] : 0.0;
      out << csv::num(report.window_ends[k]) << ',' << m.flow_id << ',' << csv::num(bits)
          << ',' << csv::num(w > 0 ? bits / w : 0.0) << '\n';
    }
  }
}

}  // namespace pscsim
