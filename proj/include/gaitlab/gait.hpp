#ifndef GAITLAB_GAIT_HPP
#define GAITLAB_GAIT_HPP

#include "gaitlab/pose.hpp"

#include <array>
#include <cstdint>

namespace gaitlab {

/// Parametric walk. Every leg follows the same sinusoidal pattern, offset by
/// a fraction of the stride cycle; per-video variation (cadence, phase,
/// stride amplitude) is drawn from the seed independently of the class.
struct GaitConfig {
  double period_min_s = 0.55;
  double period_max_s = 0.75;
  double amplitude_jitter = 0.15;  // stride amplitude scale in [1 - j, 1 + j]
  /// Cycle offsets of rear-left, rear-right, front-left, front-right legs.
  std::array<double, 4> leg_phase = {0.0, 0.5, 0.25, 0.75};
  double hip_bob_m = 0.02;
  double swing_rad = 0.35;
  double flex_rad = 0.30;
  double foot_rad = 0.25;
  double paw_lift_m = 0.05;
  double spine_bob_m = 0.012;
  /// Lameness applied to affected joints and their descendants.
  double lame_amplitude_scale = 0.4;
  double lame_phase_shift = 0.15;
};

/// Frames are rounded from duration x fps. Requires the default quadruped
/// joint names. Visibility flags are left true; the scene fills them.
PoseSequence generate_gait(const SkeletonTopology& topology, GaitClass gait_class, double duration_s, int fps,
                           std::uint64_t seed, const GaitConfig& config = {});

/// Stride period the generator draws for `seed`.
double gait_period(std::uint64_t seed, const GaitConfig& config = {});

int frame_count(double duration_s, int fps);

/// Rest-pose joint positions (meters) for the default quadruped.
Eigen::MatrixX3d rest_pose(const SkeletonTopology& topology);

/// Joint positions (N x 3) of one frame, read through the joint endpoints.
Eigen::MatrixX3d joint_positions(const PoseFrame& frame, const std::vector<JointEndpoint>& endpoints);

}  // namespace gaitlab

#endif  // GAITLAB_GAIT_HPP
