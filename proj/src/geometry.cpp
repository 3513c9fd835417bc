#include "gaitlab/geometry.hpp"

#include "gaitlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gaitlab {

double Occluder::volume() const {
  if (shape == Shape::Sphere) return 4.0 / 3.0 * std::numbers::pi * std::pow(size.x(), 3);
  return 8.0 * size.x() * size.y() * size.z();
}

Occluder Occluder::at(const Vec3& center_now) const {
  Occluder moved = *this;
  moved.center = center_now;
  return moved;
}

bool contains(const Sphere& s, const Vec3& p) { return (p - s.center).squaredNorm() < s.radius * s.radius; }

bool contains(const Box& b, const Vec3& p) {
  return ((p - b.center).cwiseAbs().array() < b.half_extents.array()).all();
}

bool contains(const Capsule& c, const Vec3& p) {
  const double t = closest_parameter(c.a, c.b, p);
  return (c.a + t * (c.b - c.a) - p).squaredNorm() < c.radius * c.radius;
}

bool contains(const Occluder& o, const Vec3& p) {
  if (o.shape == Shape::Sphere) return contains(Sphere{o.center, o.size.x()}, p);
  return contains(Box{o.center, o.size}, p);
}

double closest_parameter(const Vec3& p, const Vec3& q, const Vec3& x) {
  const Vec3 d = q - p;
  const double len_sq = d.squaredNorm();
  if (len_sq <= 0.0) return 0.0;
  return std::clamp((x - p).dot(d) / len_sq, 0.0, 1.0);
}

double segment_segment_distance_sq(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2) {
  // Closest points of two segments (Ericson, Real-Time Collision Detection 5.1.9).
  const Vec3 d1 = q1 - p1, d2 = q2 - p2, r = p1 - p2;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  constexpr double tiny = 1e-300;
  double s = 0.0, t = 0.0;
  if (a <= tiny && e <= tiny) return r.squaredNorm();
  if (a <= tiny) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= tiny) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > 0.0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p1 + s * d1) - (p2 + t * d2)).squaredNorm();
}

bool segment_hits(const Vec3& p, const Vec3& q, const Sphere& s) {
  const double t = closest_parameter(p, q, s.center);
  return (p + t * (q - p) - s.center).squaredNorm() < s.radius * s.radius;
}

bool segment_hits(const Vec3& p, const Vec3& q, const Box& b) {
  // Slab test restricted to t in [0, 1].
  const Vec3 d = q - p;
  const Vec3 lo = b.center - b.half_extents, hi = b.center + b.half_extents;
  double t_enter = 0.0, t_exit = 1.0;
  for (int axis = 0; axis < 3; ++axis) {
    if (std::abs(d[axis]) < 1e-300) {
      if (p[axis] <= lo[axis] || p[axis] >= hi[axis]) return false;
      continue;
    }
    double t0 = (lo[axis] - p[axis]) / d[axis];
    double t1 = (hi[axis] - p[axis]) / d[axis];
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
    if (t_enter >= t_exit) return false;
  }
  return true;
}

bool segment_hits(const Vec3& p, const Vec3& q, const Capsule& c) {
  return segment_segment_distance_sq(p, q, c.a, c.b) < c.radius * c.radius;
}

bool segment_hits(const Vec3& p, const Vec3& q, const Occluder& o) {
  if (o.shape == Shape::Sphere) return segment_hits(p, q, Sphere{o.center, o.size.x()});
  return segment_hits(p, q, Box{o.center, o.size});
}

bool boxes_overlap(const Box& a, const Box& b) {
  return ((a.center - b.center).cwiseAbs().array() < (a.half_extents + b.half_extents).array()).all();
}

bool intersects(const Occluder& o, const Box& region) {
  if (o.shape == Shape::Box) return boxes_overlap(Box{o.center, o.size}, region);
  const Vec3 lo = region.center - region.half_extents, hi = region.center + region.half_extents;
  const Vec3 nearest = o.center.cwiseMax(lo).cwiseMin(hi);
  return (nearest - o.center).squaredNorm() < o.size.x() * o.size.x();
}

bool ray_visible(const Vec3& origin, const Vec3& target, std::span<const Occluder> occluders,
                 std::span<const Capsule> body) {
  const Vec3 ray = target - origin;
  require(ray.squaredNorm() > 0.0, ErrorKind::Parameter, "degenerate visibility ray (camera at target)");
  const Vec3 end = origin + (1.0 - kRayEndTolerance) * ray;
  for (const auto& o : occluders)
    if (segment_hits(origin, end, o)) return false;
  for (const auto& c : body)
    if (segment_hits(origin, end, c)) return false;
  return true;
}

}  // namespace gaitlab
