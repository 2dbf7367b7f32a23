#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "pscsim/core.hpp"
#include "pscsim/geometry.hpp"

namespace pscsim {

enum class StationKind { lte, mmwave_bs, mmwave_relay };

/// Achievable rate versus distance, linearly interpolated between breakpoints.
/// Before the first point the first rate applies; past the last point the last
/// rate holds (range cutoff is applied separately).
struct RateCurve {
  std::vector<std::pair<double, double>> points;  // (distance m, rate bit/s)

  double at(double distance) const {
    if (points.empty()) return 0.0;
    if (distance <= points.front().first) return points.front().second;
    for (size_t i = 0; i + 1 < points.size(); ++i) {
      const auto& [d0, r0] = points[i];
      const auto& [d1, r1] = points[i + 1];
      if (distance <= d1) {
        double f = (distance - d0) / (d1 - d0);
        return r0 + f * (r1 - r0);
      }
    }
    return points.back().second;
  }

  bool operator==(const RateCurve&) const = default;
};

/// One antenna configuration's LOS rate curve (bs x ue element counts).
struct AntennaCurve {
  int antennas_bs = 0;
  int antennas_ue = 0;
  RateCurve curve;

  bool operator==(const AntennaCurve&) const = default;
};

/// Abstract capacity model standing in for the full protocol stacks. All
/// values are configuration, calibrated so that desk-scale runs land in the
/// regimes the reference deployments exhibit.
struct LinkModelParams {
  double lte_cell_capacity = 70e6;   // bit/s, per direction
  double lte_efficiency = 0.95;      // scheduler overhead factor
  double mmwave_nlos_factor = 0.05;  // fraction of the LOS rate kept when blocked
  double mmwave_max_range = 200.0;   // m, zero rate beyond
  double relay_backhaul_share = 0.5; // access/backhaul split on the same carrier
  std::vector<AntennaCurve> mmwave_curves = default_curves();

  static std::vector<AntennaCurve> default_curves() {
    auto ramp = [](double peak) {
      return RateCurve{{{0.0, peak}, {200.0, 0.2 * peak}}};
    };
    return {
        {16, 4, ramp(150e6)},
        {64, 4, ramp(400e6)},
        {64, 16, ramp(650e6)},
    };
  }

  const RateCurve& curve_for(int antennas_bs, int antennas_ue) const {
    for (const AntennaCurve& c : mmwave_curves) {
      if (c.antennas_bs == antennas_bs && c.antennas_ue == antennas_ue) return c.curve;
    }
    throw SimError(strf("link_rate: unknown antenna configuration %dx%d",
                        antennas_bs, antennas_ue));
  }

  double lte_rate() const { return lte_cell_capacity * lte_efficiency; }

  double mmwave_peak_rate(int antennas_bs, int antennas_ue) const {
    return curve_for(antennas_bs, antennas_ue).at(0.0);
  }

  bool operator==(const LinkModelParams&) const = default;
};

/// One candidate link from a node to a station (direct or through a relay).
struct LinkAssessment {
  int station_id = -1;
  StationKind kind = StationKind::mmwave_bs;
  bool los = false;
  double achievable_rate = 0.0;  // bit/s
};

/// LOS holds when the straight path between the endpoints misses every box.
inline bool is_los(Point2 a, Point2 b, std::span<const Box> boxes) {
  return is_line_clear(a, b, boxes);
}

/// Achievable link rate. LTE acts as a coverage layer: constant capacity
/// independent of LOS, antennas and distance. mmWave follows the antenna
/// configuration's LOS curve, scaled down when blocked, zero out of range.
inline double link_rate(StationKind kind, const LinkModelParams& params, bool los,
                        int antennas_bs, int antennas_ue, double distance) {
  if (distance < 0.0) throw SimError("link_rate: negative distance");
  if (kind == StationKind::lte) return params.lte_rate();
  if (distance > params.mmwave_max_range) return 0.0;
  double rate = params.curve_for(antennas_bs, antennas_ue).at(distance);
  return los ? rate : rate * params.mmwave_nlos_factor;
}

struct FlowDemand {
  int flow_id = -1;
  double achievable = 0.0;  // bit/s, link cap
  double offered = 0.0;     // bit/s, demand cap
};

struct Grant {
  int flow_id = -1;
  double rate = 0.0;  // bit/s
};

/// Max-min fair (progressive filling) split of a station's capacity, with
/// each flow additionally capped by its own achievable and offered rates.
/// Grants come back in input order.
inline std::vector<Grant> allocate(double capacity, std::span<const FlowDemand> flows) {
  const size_t n = flows.size();
  std::vector<Grant> grants(n);
  std::vector<double> cap(n);
  for (size_t i = 0; i < n; ++i) {
    grants[i].flow_id = flows[i].flow_id;
    cap[i] = std::max(0.0, std::min(flows[i].achievable, flows[i].offered));
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&cap](size_t a, size_t b) { return cap[a] < cap[b]; });

  // raise the water level: flows saturate in cap order, the rest share evenly
  double remaining = std::max(0.0, capacity);
  size_t left = n;
  for (size_t k = 0; k < n; ++k) {
    size_t i = order[k];
    double fair = remaining / static_cast<double>(left);
    double give = std::min(cap[i], fair);
    grants[i].rate = give;
    remaining -= give;
    left -= 1;
  }
  return grants;
}

enum class LinkPolicy { best, prefer_lte };

/// Picks the serving station: highest achievable rate, ties to the lowest
/// station id. prefer_lte short-circuits to the (lowest-id) LTE station
/// whenever one is present.
inline int select_link(std::span<const LinkAssessment> assessments, LinkPolicy policy) {
  if (assessments.empty()) throw SimError("select_link: no candidate stations");
  if (policy == LinkPolicy::prefer_lte) {
    const LinkAssessment* lte = nullptr;
    for (const LinkAssessment& a : assessments) {
      if (a.kind == StationKind::lte && (lte == nullptr || a.station_id < lte->station_id)) {
        lte = &a;
      }
    }
    if (lte != nullptr) return lte->station_id;
  }
  const LinkAssessment* best = &assessments.front();
  for (const LinkAssessment& a : assessments) {
    if (a.achievable_rate > best->achievable_rate ||
        (a.achievable_rate == best->achievable_rate && a.station_id < best->station_id)) {
      best = &a;
    }
  }
  return best->station_id;
}

/// End-to-end rate through a relay whose access and backhaul legs share the
/// carrier: the bottleneck hop scaled by the backhaul share.
inline double relay_path_rate(double access_rate, double backhaul_rate,
                              const LinkModelParams& params) {
  return std::min(access_rate, backhaul_rate) * params.relay_backhaul_share;
}

}  // namespace pscsim
