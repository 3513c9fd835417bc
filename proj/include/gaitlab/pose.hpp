#ifndef GAITLAB_POSE_HPP
#define GAITLAB_POSE_HPP

#include "gaitlab/camera.hpp"
#include "gaitlab/geometry.hpp"
#include "gaitlab/skeleton.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gaitlab {

enum class GaitClass { Healthy = 0, Unhealthy = 1 };

std::string_view to_string(GaitClass c);
GaitClass parse_gait_class(std::string_view text);

struct BoneState {
  Vec3 head = Vec3::Zero();
  Vec3 tail = Vec3::Zero();
  bool head_visible = true;
  bool tail_visible = true;
};

struct PoseFrame {
  std::vector<BoneState> bones;
};

/// One simulated video at the pose level: per-frame global bone endpoints
/// with their visibility flags.
struct PoseSequence {
  std::vector<std::string> bone_names;
  std::vector<PoseFrame> frames;
  GaitClass label = GaitClass::Healthy;
  CameraPose camera;
  int fps = 25;
  std::uint64_t seed = 0;

  int frame_count() const { return static_cast<int>(frames.size()); }
};

/// Bone `i` of a topology is edge `i`, named "<head joint>.<tail joint>".
std::vector<std::string> bone_names(const SkeletonTopology& topology);

/// Where a joint's data lives in a bone list.
struct JointEndpoint {
  int bone = 0;
  bool tail = false;
};

/// A joint maps to the head of the first bone starting at it; leaf joints,
/// which start no bone, map to the tail of the bone ending at them.
std::vector<JointEndpoint> joint_endpoints(const SkeletonTopology& topology);

/// Resolves endpoints by bone name, so files with reordered bones still load.
std::vector<JointEndpoint> joint_endpoints(const SkeletonTopology& topology, const std::vector<std::string>& names);

/// Throws Validation errors when a sequence breaks its invariants.
void validate(const PoseSequence& sequence);

}  // namespace gaitlab

#endif  // GAITLAB_POSE_HPP
