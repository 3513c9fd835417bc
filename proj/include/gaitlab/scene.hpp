#ifndef GAITLAB_SCENE_HPP
#define GAITLAB_SCENE_HPP

#include "gaitlab/geometry.hpp"
#include "gaitlab/pose.hpp"

#include <cstdint>
#include <vector>

namespace gaitlab {

struct SceneConfig {
  double density_per_m2 = 0.03;
  double area_m2 = 225.0;
  double dog_speed_mps = 1.2;
  /// Candidate size ranges; candidates outside the volume bounds are dropped.
  double sphere_radius_min = 0.2;
  double sphere_radius_max = 1.6;
  double box_half_min = 0.15;
  double box_half_max = 1.5;
  double min_volume = 0.1;
  double max_volume = 10.0;
  double corridor_margin_m = 0.1;
};

/// Axis-aligned bounds of the dog over a whole sequence, grown by `margin`.
Box body_bounds(const PoseSequence& sequence, double margin);

/// Region the body sweeps, seen from the occluders' initial positions, when
/// the scene moves backwards at `speed` for `duration_s`.
Box swept_corridor(const Box& body, double speed, double duration_s);

/// Scatters round(density x area) candidate occluders over a square floor
/// centered on the corridor, then drops every candidate whose volume is not
/// strictly inside (min_volume, max_volume) or that touches the corridor.
/// Dropped candidates are not replaced.
std::vector<Occluder> populate_scene(double density, double area, const Box& corridor, std::uint64_t seed,
                                     const SceneConfig& config = {});

/// positions[f][i] = occluders[i].center - dog_velocity * f / fps. The dog
/// root and the camera never move.
std::vector<std::vector<Vec3>> animate_relative_motion(const std::vector<Occluder>& occluders,
                                                       const Vec3& dog_velocity, int frame_count, int fps);

/// Capsule radius (meters) for the bone ending at `tail_joint`.
double bone_radius(const std::string& tail_joint);

/// Capsules around every bone of a frame, index-aligned with the bones.
std::vector<Capsule> body_proxies(const PoseFrame& frame, const SkeletonTopology& topology);

/// Ray-casts every joint of every frame from the camera and writes the
/// head/tail visibility flags. A joint's own bones (the ones it ends or
/// starts) never hide it.
void compute_visibility(PoseSequence& sequence, const SkeletonTopology& topology, const Vec3& camera_position,
                        const std::vector<Occluder>& occluders,
                        const std::vector<std::vector<Vec3>>& occluder_positions);

}  // namespace gaitlab

#endif  // GAITLAB_SCENE_HPP
