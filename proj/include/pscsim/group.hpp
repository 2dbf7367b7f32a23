#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "pscsim/core.hpp"
#include "pscsim/geometry.hpp"
#include "pscsim/mobility.hpp"
#include "pscsim/random.hpp"

namespace pscsim {

/// Per-axis deviation of a slave around its master's reference point.
/// Components outside [-bound, bound] are rejected and redrawn.
struct DeviationDist {
  enum class Family { gaussian, uniform, custom };

  Family family = Family::gaussian;
  double mu = 0.0;
  double sigma = 1.0;   // gaussian std | uniform half-width around mu
  double bound = 20.0;  // m, per axis
  std::function<double(Rng&)> custom;  // user-supplied per-axis sampler

  double sample_component(Rng& rng) const {
    switch (family) {
      case Family::gaussian: return rng.normal(mu, sigma);
      case Family::uniform: return rng.uniform(mu - sigma, mu + sigma);
      case Family::custom:
        if (!custom) throw SimError("DeviationDist: custom family without sampler");
        return custom(rng);
    }
    throw SimError("DeviationDist: bad family");
  }
};

using PositionConstraint = std::function<bool(Point2)>;

/// Constraint accepting only positions inside bounds and outside every box.
inline PositionConstraint outdoor_constraint(std::vector<Box> boxes, Bounds bounds) {
  return [boxes = std::move(boxes), bounds](Point2 p) {
    if (!contains(bounds.rect, p)) return false;
    for (const Box& box : boxes) {
      if (contains(box, p)) return false;
    }
    return true;
  };
}

namespace detail {

// Per-axis bound rejection: redraw a component until it lands in [-bound, bound].
inline double draw_bounded_component(const DeviationDist& deviation, int max_iterations,
                                     Rng& rng) {
  for (int it = 0; it < max_iterations; ++it) {
    double v = deviation.sample_component(rng);
    if (std::abs(v) <= deviation.bound) return v;
  }
  throw SimError(strf("sample_offset: no component within +/-%g m after %d draws",
                      deviation.bound, max_iterations));
}

}  // namespace detail

/// Draws a slave offset around the master's reference point: each axis is
/// rejection-bounded independently, then the whole position is checked against
/// the constraint. Throws after max_iterations rejected positions.
inline Vec2 sample_offset(const DeviationDist& deviation,
                          const PositionConstraint& constraint, Point2 master_pos,
                          int max_iterations, Rng& rng) {
  for (int it = 0; it < max_iterations; ++it) {
    Vec2 offset{detail::draw_bounded_component(deviation, max_iterations, rng),
                detail::draw_bounded_component(deviation, max_iterations, rng)};
    if (constraint && !constraint(master_pos + offset)) continue;
    return offset;
  }
  throw SimError(strf(
      "sample_offset: no acceptable slave position around (%g, %g) after %d iterations",
      master_pos.x, master_pos.y, max_iterations));
}

/// One slave's attachment to its master.
struct GroupBinding {
  int master_id = -1;
  DeviationDist deviation;
  Vec2 offset;
  PositionConstraint constraint;
  int max_iterations = 100;
  int course_changes = 0;   // notifications received from the master
  int constraint_fixes = 0;  // corrective resamples of an offset gone invalid
};

inline GroupBinding bind_group(int master_id, DeviationDist deviation,
                               PositionConstraint constraint, int max_iterations,
                               Point2 master_pos, Rng& rng) {
  if (max_iterations < 1) throw SimError("bind_group: max_iterations must be >= 1");
  GroupBinding binding;
  binding.master_id = master_id;
  binding.deviation = std::move(deviation);
  binding.constraint = std::move(constraint);
  binding.max_iterations = max_iterations;
  binding.offset = sample_offset(binding.deviation, binding.constraint, master_pos,
                                 binding.max_iterations, rng);
  return binding;
}

/// Resamples the offset and counts the propagated course-change notification.
inline void on_master_course_change(GroupBinding& binding, Point2 master_pos, Rng& rng) {
  binding.offset = sample_offset(binding.deviation, binding.constraint, master_pos,
                                 binding.max_iterations, rng);
  binding.course_changes += 1;
}

/// Pure read: the held offset applied to the master's current position.
inline Point2 slave_position(const GroupBinding& binding, Point2 master_pos) {
  return master_pos + binding.offset;
}

/// Master mobility for a group: any walk flavor, or a scripted route.
struct MasterSpec {
  enum class Kind { walk, waypoints };

  Kind kind = Kind::walk;
  WalkKind walk_kind = WalkKind::plain;
  WalkParams walk;
  Point2 start;
  WaypointPath path;  // kind == waypoints
};

/// A master plus its slave bindings. Member 0 is the master, slaves follow in
/// input order. Slave offsets resample exactly when the master changes course.
class Group {
 public:
  Group(const MasterSpec& spec, std::vector<Box> boxes) : spec_(spec), boxes_(std::move(boxes)) {}

  int size() const { return 1 + static_cast<int>(bindings_.size()); }

  const std::vector<GroupBinding>& bindings() const { return bindings_; }
  std::vector<GroupBinding>& bindings() { return bindings_; }

  double time() const { return time_; }

  Point2 master_position() const {
    return spec_.kind == MasterSpec::Kind::walk ? walk_state_.position
                                                : spec_.path.position_at(time_);
  }

  /// Position of member i (0 = master, i >= 1 = slave i-1) at the current time.
  Point2 position(int member) const {
    if (member == 0) return master_position();
    return slave_position(bindings_.at(static_cast<size_t>(member - 1)), master_position());
  }

  void init_master(Rng& rng) {
    if (spec_.kind == MasterSpec::Kind::walk) {
      walk_state_ = init_walk(spec_.walk, spec_.walk_kind, spec_.start, boxes_, rng);
    }
  }

  void add_slave(const DeviationDist& deviation, PositionConstraint constraint,
                 int max_iterations, Rng& rng) {
    // member 0 is the master
    bindings_.push_back(bind_group(0, deviation, std::move(constraint), max_iterations,
                                   master_position(), rng));
  }

  /// Advances the master to t; each master course change resamples every
  /// slave offset, in slave order, from the same stream. An offset that the
  /// master's motion dragged into violation is re-drawn at the new reference
  /// point, so queried slave positions always satisfy their constraint.
  void advance_to(double t, Rng& rng) {
    if (spec_.kind == MasterSpec::Kind::walk) {
      WalkCallbacks cb;
      cb.course_change = [&](double, Point2 at) {
        for (GroupBinding& binding : bindings_) on_master_course_change(binding, at, rng);
      };
      walk_state_ = advance_walk(walk_state_, spec_.walk, boxes_, t, rng, cb);
    } else {
      std::vector<double> changes;
      spec_.path.course_changes_between(time_, t, changes);
      for (double tc : changes) {
        Point2 at = spec_.path.position_at(tc);
        for (GroupBinding& binding : bindings_) on_master_course_change(binding, at, rng);
      }
    }
    time_ = t;
    Point2 at = master_position();
    for (GroupBinding& binding : bindings_) {
      if (binding.constraint && !binding.constraint(at + binding.offset)) {
        binding.offset = sample_offset(binding.deviation, binding.constraint, at,
                                       binding.max_iterations, rng);
        binding.constraint_fixes += 1;
      }
    }
  }

  const MasterSpec& master_spec() const { return spec_; }

 private:
  MasterSpec spec_;
  std::vector<Box> boxes_;
  WalkState walk_state_;
  std::vector<GroupBinding> bindings_;
  double time_ = 0.0;
};

/// Creates a master and attaches slave_count slaves with the given deviation.
/// Ordering contract: master first, then slaves in creation order.
inline Group build_group(const MasterSpec& spec, int slave_count,
                         const DeviationDist& deviation, PositionConstraint constraint,
                         int max_iterations, std::span<const Box> boxes, Rng& rng) {
  Group group(spec, std::vector<Box>(boxes.begin(), boxes.end()));
  group.init_master(rng);
  for (int i = 0; i < slave_count; ++i) {
    group.add_slave(deviation, constraint, max_iterations, rng);
  }
  return group;
}

}  // namespace pscsim
