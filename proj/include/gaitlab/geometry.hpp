#ifndef GAITLAB_GEOMETRY_HPP
#define GAITLAB_GEOMETRY_HPP

#include <Eigen/Dense>

#include <span>

namespace gaitlab {

using Vec3 = Eigen::Vector3d;

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

/// Axis-aligned box.
struct Box {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Zero();
};

struct Capsule {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  double radius = 0.0;
};

enum class Shape { Sphere, Box };

/// Scene object. `size` is the radius for spheres and the half extents for boxes.
struct Occluder {
  Shape shape = Shape::Sphere;
  Vec3 center = Vec3::Zero();
  Vec3 size = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();

  double volume() const;
  Occluder at(const Vec3& center_now) const;
};

// Solid-shape containment.
bool contains(const Sphere& s, const Vec3& p);
bool contains(const Box& b, const Vec3& p);
bool contains(const Capsule& c, const Vec3& p);
bool contains(const Occluder& o, const Vec3& p);

/// Closest point parameter on segment [p, q] to x, clamped to [0, 1].
double closest_parameter(const Vec3& p, const Vec3& q, const Vec3& x);

/// Squared distance between segments [p1, q1] and [p2, q2].
double segment_segment_distance_sq(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2);

// Whether segment [p, q] touches the solid interior of the shape.
bool segment_hits(const Vec3& p, const Vec3& q, const Sphere& s);
bool segment_hits(const Vec3& p, const Vec3& q, const Box& b);
bool segment_hits(const Vec3& p, const Vec3& q, const Capsule& c);
bool segment_hits(const Vec3& p, const Vec3& q, const Occluder& o);

bool boxes_overlap(const Box& a, const Box& b);
bool intersects(const Occluder& o, const Box& region);

/// Fraction of the ray length trimmed at the target end, so a shape that
/// merely touches the target does not count as an obstruction.
inline constexpr double kRayEndTolerance = 1e-6;

/// True when the segment from `origin` to `target`, shortened by
/// kRayEndTolerance, crosses none of the occluders or body proxies. The
/// caller leaves the target's own body proxies out of `body`.
bool ray_visible(const Vec3& origin, const Vec3& target, std::span<const Occluder> occluders,
                 std::span<const Capsule> body);

}  // namespace gaitlab

#endif  // GAITLAB_GEOMETRY_HPP
