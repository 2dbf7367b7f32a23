#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "pscsim/core.hpp"
#include "pscsim/random.hpp"

namespace pscsim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 r) const { return {x + r.x, y + r.y}; }
  constexpr Vec2 operator-(Vec2 r) const { return {x - r.x, y - r.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  friend constexpr Vec2 operator*(double s, Vec2 v) { return {v.x * s, v.y * s}; }
  constexpr double dot(Vec2 r) const { return x * r.x + y * r.y; }
  double norm() const { return std::hypot(x, y); }
  bool operator==(const Vec2&) const = default;
};

/// Positions and velocities share the same representation.
using Point2 = Vec2;

/// Axis-aligned obstacle/building footprint in meters. Closed on all sides:
/// a point on the boundary counts as inside, a segment touching the boundary
/// counts as intersecting. Blockage checks are therefore conservative and
/// mobility keeps a small standoff to stay strictly outside.
struct Box {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  bool valid() const { return x_min < x_max && y_min < y_max; }
  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  Point2 center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }

  bool overlaps(const Box& o) const {
    return x_min < o.x_max && o.x_min < x_max && y_min < o.y_max && o.y_min < y_max;
  }

  bool operator==(const Box&) const = default;
};

/// Rectangular area that constrains node mobility.
struct Bounds {
  Box rect;
  bool operator==(const Bounds&) const = default;
};

inline bool contains(const Box& box, Point2 p) {
  return p.x >= box.x_min && p.x <= box.x_max && p.y >= box.y_min && p.y <= box.y_max;
}

namespace detail {

// Clips the segment parameter interval [0,1] against the box slabs.
// Returns the surviving [t0, t1], or nullopt when the segment misses.
inline std::optional<std::pair<double, double>> clip_segment(Point2 a, Point2 b,
                                                             const Box& box) {
  double t0 = 0.0;
  double t1 = 1.0;
  const double d[2] = {b.x - a.x, b.y - a.y};
  const double o[2] = {a.x, a.y};
  const double lo[2] = {box.x_min, box.y_min};
  const double hi[2] = {box.x_max, box.y_max};
  for (int axis = 0; axis < 2; ++axis) {
    if (d[axis] == 0.0) {
      if (o[axis] < lo[axis] || o[axis] > hi[axis]) return std::nullopt;
      continue;
    }
    double ta = (lo[axis] - o[axis]) / d[axis];
    double tb = (hi[axis] - o[axis]) / d[axis];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::nullopt;
  }
  return std::make_pair(t0, t1);
}

}  // namespace detail

/// True iff the closed segment ab shares at least one point with the closed
/// box. A degenerate segment (a == b) reduces to containment.
inline bool segment_intersects_box(Point2 a, Point2 b, const Box& box) {
  return detail::clip_segment(a, b, box).has_value();
}

/// True iff the segment ab intersects none of the boxes.
inline bool is_line_clear(Point2 a, Point2 b, std::span<const Box> boxes) {
  for (const Box& box : boxes) {
    if (segment_intersects_box(a, b, box)) return false;
  }
  return true;
}

/// Smallest t in [0,1] with a + t*(b-a) on the box boundary, when the segment
/// intersects the box; t = 0 when a starts on or inside it.
inline std::optional<double> first_hit_parameter(Point2 a, Point2 b, const Box& box) {
  auto clipped = detail::clip_segment(a, b, box);
  if (!clipped) return std::nullopt;
  return clipped->first;
}

/// Uniform rejection sample inside bounds and outside every box. Draws x then
/// y per attempt. Throws when max_attempts is exhausted, which signals an
/// over-packed scenario rather than bad luck.
inline Point2 sample_outdoor_position(const Bounds& bounds, std::span<const Box> boxes,
                                      Rng& rng, int max_attempts = 1000) {
  const Box& r = bounds.rect;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Point2 p{rng.uniform(r.x_min, r.x_max), rng.uniform(r.y_min, r.y_max)};
    bool indoor = false;
    for (const Box& box : boxes) {
      if (contains(box, p)) {
        indoor = true;
        break;
      }
    }
    if (!indoor) return p;
  }
  throw SimError(strf(
      "sample_outdoor_position: no outdoor point in [%g,%g]x[%g,%g] with %zu boxes "
      "after %d attempts",
      r.x_min, r.x_max, r.y_min, r.y_max, boxes.size(), max_attempts));
}

struct ReflectResult {
  Point2 position;
  Vec2 velocity;
};

/// Mirrors an overshooting position back across each violated edge until it
/// lies inside, flipping the matching velocity component per mirror. Points
/// already inside come back unchanged.
inline ReflectResult reflect_in_rectangle(Point2 p, Vec2 v, const Bounds& bounds) {
  const Box& r = bounds.rect;
  for (int guard = 0; guard < 1000; ++guard) {
    bool moved = false;
    if (p.x < r.x_min) {
      p.x = 2.0 * r.x_min - p.x;
      v.x = -v.x;
      moved = true;
    } else if (p.x > r.x_max) {
      p.x = 2.0 * r.x_max - p.x;
      v.x = -v.x;
      moved = true;
    }
    if (p.y < r.y_min) {
      p.y = 2.0 * r.y_min - p.y;
      v.y = -v.y;
      moved = true;
    } else if (p.y > r.y_max) {
      p.y = 2.0 * r.y_max - p.y;
      v.y = -v.y;
      moved = true;
    }
    if (!moved) return {p, v};
  }
  throw SimError("reflect_in_rectangle: did not converge (non-finite input?)");
}

}  // namespace pscsim
