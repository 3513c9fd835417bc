#include "gaitlab/scene.hpp"

#include "gaitlab/error.hpp"
#include "gaitlab/random.hpp"

#include <cmath>
#include <limits>

namespace gaitlab {

Box body_bounds(const PoseSequence& sequence, double margin) {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& frame : sequence.frames)
    for (const auto& bone : frame.bones) {
      lo = lo.cwiseMin(bone.head).cwiseMin(bone.tail);
      hi = hi.cwiseMax(bone.head).cwiseMax(bone.tail);
    }
  lo.array() -= margin;
  hi.array() += margin;
  return Box{0.5 * (lo + hi), 0.5 * (hi - lo)};
}

Box swept_corridor(const Box& body, double speed, double duration_s) {
  Box swept = body;
  const double travel = speed * duration_s;
  swept.center.x() += 0.5 * travel;
  swept.half_extents.x() += 0.5 * std::abs(travel);
  return swept;
}

std::vector<Occluder> populate_scene(double density, double area, const Box& corridor, std::uint64_t seed,
                                     const SceneConfig& config) {
  require(density >= 0.0, ErrorKind::Parameter, "occluder density must be non-negative");
  require(area > 0.0, ErrorKind::Parameter, "scene area must be positive");

  const auto candidates = static_cast<int>(std::llround(density * area));
  const double half_side = 0.5 * std::sqrt(area);
  Rng rng(seed);
  std::vector<Occluder> kept;
  for (int i = 0; i < candidates; ++i) {
    Occluder o;
    o.shape = rng.uniform() < 0.5 ? Shape::Sphere : Shape::Box;
    if (o.shape == Shape::Sphere) {
      const double r = rng.uniform(config.sphere_radius_min, config.sphere_radius_max);
      o.size = Vec3::Constant(r);
    } else {
      o.size = {rng.uniform(config.box_half_min, config.box_half_max),
                rng.uniform(config.box_half_min, config.box_half_max),
                rng.uniform(config.box_half_min, config.box_half_max)};
    }
    // Objects rest on the floor.
    o.center = {corridor.center.x() + rng.uniform(-half_side, half_side), rng.uniform(-half_side, half_side),
                o.shape == Shape::Sphere ? o.size.x() : o.size.z()};

    const double v = o.volume();
    if (!(v > config.min_volume && v < config.max_volume)) continue;
    if (intersects(o, corridor)) continue;
    kept.push_back(o);
  }
  return kept;
}

std::vector<std::vector<Vec3>> animate_relative_motion(const std::vector<Occluder>& occluders,
                                                       const Vec3& dog_velocity, int frame_count, int fps) {
  require(fps > 0, ErrorKind::Parameter, "fps must be positive");
  std::vector<std::vector<Vec3>> positions(std::max(frame_count, 0));
  for (int f = 0; f < frame_count; ++f) {
    const Vec3 shift = dog_velocity * (static_cast<double>(f) / fps);
    positions[f].reserve(occluders.size());
    for (const auto& o : occluders) positions[f].push_back(o.center - shift);
  }
  return positions;
}

double bone_radius(const std::string& tail_joint) {
  auto starts = [&](const char* prefix) { return tail_joint.rfind(prefix, 0) == 0; };
  if (starts("spine")) return 0.10;
  if (starts("head")) return 0.06;
  if (starts("hip") || starts("shoulder")) return 0.05;
  if (starts("knee") || starts("elbow")) return 0.06;
  if (starts("ankle") || starts("wrist")) return 0.035;
  if (starts("paw")) return 0.025;
  return 0.04;
}

std::vector<Capsule> body_proxies(const PoseFrame& frame, const SkeletonTopology& topology) {
  std::vector<Capsule> capsules;
  capsules.reserve(frame.bones.size());
  for (std::size_t b = 0; b < frame.bones.size(); ++b)
    capsules.push_back({frame.bones[b].head, frame.bones[b].tail, bone_radius(topology.joints[topology.edges[b].second])});
  return capsules;
}

void compute_visibility(PoseSequence& sequence, const SkeletonTopology& topology, const Vec3& camera_position,
                        const std::vector<Occluder>& occluders,
                        const std::vector<std::vector<Vec3>>& occluder_positions) {
  require(occluder_positions.size() == sequence.frames.size(), ErrorKind::Contract,
          "occluder animation and pose sequence lengths differ");
  require(sequence.bone_names == bone_names(topology), ErrorKind::Contract,
          "pose sequence bones do not follow the skeleton's edge order");
  const auto endpoints = joint_endpoints(topology);
  const int n = topology.joint_count();

  std::vector<Occluder> scene(occluders);
  std::vector<Capsule> others;
  std::vector<bool> visible(n);
  for (std::size_t f = 0; f < sequence.frames.size(); ++f) {
    auto& frame = sequence.frames[f];
    for (std::size_t i = 0; i < occluders.size(); ++i) scene[i].center = occluder_positions[f][i];
    const auto proxies = body_proxies(frame, topology);

    for (int j = 0; j < n; ++j) {
      others.clear();
      for (std::size_t b = 0; b < proxies.size(); ++b) {
        const auto& [head, tail] = topology.edges[b];
        if (head != j && tail != j) others.push_back(proxies[b]);
      }
      const auto& bone = frame.bones[endpoints[j].bone];
      const Vec3& target = endpoints[j].tail ? bone.tail : bone.head;
      visible[j] = ray_visible(camera_position, target, scene, others);
    }
    for (std::size_t b = 0; b < frame.bones.size(); ++b) {
      frame.bones[b].head_visible = visible[topology.edges[b].first];
      frame.bones[b].tail_visible = visible[topology.edges[b].second];
    }
  }
}

}  // namespace gaitlab
