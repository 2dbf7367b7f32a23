#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "pscsim/core.hpp"
#include "pscsim/geometry.hpp"
#include "pscsim/random.hpp"

namespace pscsim {

enum class WalkKind { plain, building_aware };
enum class LegMode { time_based, distance_based };

/// Distance kept between a stopped walker and the obstacle face it was about
/// to cross. Keeps positions strictly outside under the closed-box convention.
inline constexpr double kObstacleStandoff = 1e-3;

namespace detail {
inline constexpr double kTinyTime = 1e-12;
}

struct WalkParams {
  Bounds bounds;
  ScalarDist speed = ScalarDist::uniform(2.0, 4.0);          // m/s
  ScalarDist direction = ScalarDist::uniform(0.0, 2.0 * M_PI);  // radians
  LegMode mode = LegMode::time_based;
  double leg_time = 1.0;       // s, time_based
  double leg_distance = 10.0;  // m, distance_based
  double update_step = 0.1;    // s, granularity of motion within a leg
  int avoid_retries = 50;      // course redraws after an obstacle truncation
  // 0 = fresh heading each leg; >0 blends the previous heading in, giving a
  // correlated (Gauss-Markov-like) walk.
  double direction_memory = 0.0;

  bool operator==(const WalkParams&) const = default;
};

struct WalkState {
  Point2 position;
  Vec2 velocity;
  double time = 0.0;
  double leg_end_time = 0.0;
  WalkKind kind = WalkKind::plain;

  bool operator==(const WalkState&) const = default;
};

/// Observers for recorded motion. `position` fires at every committed point
/// (sub-step ends, obstacle stops, rebounds); `course_change` fires whenever
/// the velocity is redrawn or reflected.
struct WalkCallbacks {
  std::function<void(double t, Point2 p)> position;
  std::function<void(double t, Point2 p)> course_change;
};

namespace detail {

// Draw order is direction then speed; every course draw consumes exactly two
// samples so plain and building-aware walks stay in RNG lockstep.
inline Vec2 draw_course(const WalkParams& params, Rng& rng, const Vec2* previous) {
  double theta = params.direction.sample(rng);
  double speed = params.speed.sample(rng);
  if (speed <= 0.0) {
    throw SimError(strf("walk: sampled speed %g is not positive", speed));
  }
  Vec2 fresh{std::cos(theta), std::sin(theta)};
  Vec2 dir = fresh;
  if (previous != nullptr && params.direction_memory > 0.0) {
    double n = previous->norm();
    if (n > 0.0) {
      Vec2 blended = (*previous) * (params.direction_memory / n) +
                     fresh * (1.0 - params.direction_memory);
      double bn = blended.norm();
      dir = bn > 1e-12 ? blended * (1.0 / bn) : fresh;
    }
  }
  return dir * speed;
}

inline double leg_duration(const WalkParams& params, double speed) {
  if (params.mode == LegMode::time_based) return params.leg_time;
  return params.leg_distance / speed;
}

struct BoundsExit {
  double t = 0.0;  // parameter along the attempted segment
  bool flip_x = false;
  bool flip_y = false;
};

// First crossing of the bounds rectangle for a segment starting inside it.
inline std::optional<BoundsExit> bounds_exit(Point2 pos, Vec2 delta, const Box& rect) {
  double tx = std::numeric_limits<double>::infinity();
  double ty = std::numeric_limits<double>::infinity();
  if (delta.x > 0.0 && pos.x + delta.x > rect.x_max) tx = (rect.x_max - pos.x) / delta.x;
  if (delta.x < 0.0 && pos.x + delta.x < rect.x_min) tx = (rect.x_min - pos.x) / delta.x;
  if (delta.y > 0.0 && pos.y + delta.y > rect.y_max) ty = (rect.y_max - pos.y) / delta.y;
  if (delta.y < 0.0 && pos.y + delta.y < rect.y_min) ty = (rect.y_min - pos.y) / delta.y;
  double t = std::min(tx, ty);
  if (!std::isfinite(t)) return std::nullopt;
  BoundsExit exit;
  exit.t = std::max(0.0, t);
  exit.flip_x = tx <= t + 1e-12;
  exit.flip_y = ty <= t + 1e-12;
  return exit;
}

}  // namespace detail

/// Redraws courses until one whose next-update-step segment is clear of every
/// box and stays in bounds is found. Throws when the position is trapped.
inline Vec2 avoid_building(Point2 position, const WalkParams& params,
                           std::span<const Box> boxes, Rng& rng, int retries = 50) {
  for (int attempt = 0; attempt < retries; ++attempt) {
    Vec2 v = detail::draw_course(params, rng, nullptr);
    Point2 end = position + v * params.update_step;
    if (contains(params.bounds.rect, end) && is_line_clear(position, end, boxes)) {
      return v;
    }
  }
  throw SimError(strf("avoid_building: no clear course from (%g, %g) after %d retries",
                      position.x, position.y, retries));
}

/// Starts a walk at `start`, drawing the first course. Building-aware walks
/// require an outdoor start.
inline WalkState init_walk(const WalkParams& params, WalkKind kind, Point2 start,
                           std::span<const Box> boxes, Rng& rng) {
  if (!contains(params.bounds.rect, start)) {
    throw SimError(strf("init_walk: start (%g, %g) outside bounds", start.x, start.y));
  }
  if (kind == WalkKind::building_aware) {
    for (const Box& box : boxes) {
      if (contains(box, start)) {
        throw SimError(strf("init_walk: building-aware start (%g, %g) is indoors",
                            start.x, start.y));
      }
    }
  }
  WalkState state;
  state.kind = kind;
  state.position = start;
  state.velocity = detail::draw_course(params, rng, nullptr);
  state.time = 0.0;
  state.leg_end_time = detail::leg_duration(params, state.velocity.norm());
  return state;
}

namespace detail {

// Advances by one sub-step of duration dt, truncating at obstacle hits and
// rebounding off the bounds. Emits every committed point.
inline void step_once(WalkState& state, const WalkParams& params,
                      std::span<const Box> boxes, double dt, Rng& rng,
                      const WalkCallbacks& cb) {
  double remaining = dt;
  for (int guard = 0; guard < 100000 && remaining > kTinyTime; ++guard) {
    double speed = state.velocity.norm();
    if (speed <= 0.0) {
      state.time += remaining;
      return;
    }
    Vec2 delta = state.velocity * remaining;
    Point2 target = state.position + delta;

    double hit_t = std::numeric_limits<double>::infinity();
    for (const Box& box : boxes) {
      auto t = first_hit_parameter(state.position, target, box);
      if (t && *t < hit_t) hit_t = *t;
    }
    auto exit = bounds_exit(state.position, delta, params.bounds.rect);
    double exit_t = exit ? exit->t : std::numeric_limits<double>::infinity();

    if (hit_t <= exit_t && std::isfinite(hit_t)) {
      // walk up to just before the obstacle, then extract a new course
      double leg_len = speed * remaining;
      double stop_dist = std::max(0.0, hit_t * leg_len - kObstacleStandoff);
      double used = stop_dist / speed;
      state.position = state.position + state.velocity * (stop_dist / leg_len * remaining);
      state.time += used;
      remaining -= used;
      if (cb.position && used > 0.0) cb.position(state.time, state.position);
      state.velocity = avoid_building(state.position, params, boxes, rng,
                                      params.avoid_retries);
      if (cb.course_change) cb.course_change(state.time, state.position);
      continue;
    }
    if (exit) {
      // rebound with symmetric direction and velocity at the border
      double used = exit->t * remaining;
      Point2 at = state.position + delta * exit->t;
      if (exit->flip_x) at.x = state.velocity.x > 0 ? params.bounds.rect.x_max
                                                    : params.bounds.rect.x_min;
      if (exit->flip_y) at.y = state.velocity.y > 0 ? params.bounds.rect.y_max
                                                    : params.bounds.rect.y_min;
      state.position = at;
      state.time += used;
      remaining -= used;
      if (exit->flip_x) state.velocity.x = -state.velocity.x;
      if (exit->flip_y) state.velocity.y = -state.velocity.y;
      if (cb.position && used > 0.0) cb.position(state.time, state.position);
      if (cb.course_change) cb.course_change(state.time, state.position);
      continue;
    }
    state.position = target;
    state.time += remaining;
    remaining = 0.0;
    if (cb.position) cb.position(state.time, state.position);
  }
}

}  // namespace detail

/// Advances the walk to `until` in sub-steps of update_step, drawing a fresh
/// course at each leg boundary. Plain walks ignore the boxes; building-aware
/// walks never enter them and every committed point is outdoors.
inline WalkState advance_walk(WalkState state, const WalkParams& params,
                              std::span<const Box> boxes, double until, Rng& rng,
                              const WalkCallbacks& cb = {}) {
  if (until < state.time - detail::kTinyTime) {
    throw SimError(strf("advance_walk: until %g precedes state time %g", until, state.time));
  }
  // tolerance scaled to the target time so accumulated rounding in long runs
  // does not spawn zero-length trailing sub-steps
  const double tol = detail::kTinyTime * std::max(1.0, std::abs(until));
  std::span<const Box> effective =
      state.kind == WalkKind::building_aware ? boxes : std::span<const Box>{};
  while (until - state.time > tol) {
    if (state.leg_end_time - state.time <= tol) {
      state.velocity = detail::draw_course(params, rng, &state.velocity);
      state.leg_end_time =
          state.time + detail::leg_duration(params, state.velocity.norm());
      if (cb.course_change) cb.course_change(state.time, state.position);
    }
    double dt = std::min({params.update_step, state.leg_end_time - state.time,
                          until - state.time});
    detail::step_once(state, params, effective, dt, rng, cb);
  }
  return state;
}

/// Scripted piecewise-linear route at constant speed; clamps at both ends.
struct WaypointPath {
  std::vector<Point2> points;
  double speed = 1.5;       // m/s
  double start_time = 0.0;  // s

  bool operator==(const WaypointPath&) const = default;

  double leg_arrival(size_t leg) const {
    double t = start_time;
    for (size_t i = 0; i + 1 < points.size() && i < leg; ++i) {
      t += (points[i + 1] - points[i]).norm() / speed;
    }
    return t;
  }

  double final_arrival() const {
    return points.empty() ? start_time : leg_arrival(points.size() - 1);
  }

  Point2 position_at(double t) const {
    if (points.empty()) throw SimError("WaypointPath: no points");
    if (t <= start_time) return points.front();
    double cursor = start_time;
    for (size_t i = 0; i + 1 < points.size(); ++i) {
      double leg_time = (points[i + 1] - points[i]).norm() / speed;
      if (t < cursor + leg_time) {
        double f = (t - cursor) / leg_time;
        return points[i] + (points[i + 1] - points[i]) * f;
      }
      cursor += leg_time;
    }
    return points.back();
  }

  /// Course-change instants (waypoint arrivals, including the final stop)
  /// falling in (t0, t1].
  void course_changes_between(double t0, double t1, std::vector<double>& out) const {
    for (size_t i = 1; i < points.size(); ++i) {
      double t = leg_arrival(i);
      if (t > t0 && t <= t1) out.push_back(t);
    }
  }
};

}  // namespace pscsim
