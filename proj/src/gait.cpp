#include "gaitlab/gait.hpp"

#include "gaitlab/error.hpp"
#include "gaitlab/random.hpp"

#include <cmath>
#include <numbers>

namespace gaitlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct RestJoint {
  const char* name;
  double x, y, z;
};

// Left side; the right side mirrors y.
constexpr RestJoint kRest[] = {
    {"spine_rear", -0.30, 0.0, 0.55},       {"spine_front", 0.30, 0.0, 0.58},
    {"head_tip", 0.62, 0.0, 0.78},          {"hip_rear_left", -0.30, 0.13, 0.47},
    {"knee_rear_left", -0.20, 0.13, 0.31},  {"ankle_rear_left", -0.33, 0.13, 0.14},
    {"paw_rear_left", -0.30, 0.13, 0.02},   {"shoulder_front_left", 0.28, 0.12, 0.46},
    {"elbow_front_left", 0.24, 0.12, 0.30}, {"wrist_front_left", 0.27, 0.12, 0.11},
    {"paw_front_left", 0.30, 0.12, 0.02},
};

constexpr const char* kLegs[4][4] = {
    {"hip_rear_left", "knee_rear_left", "ankle_rear_left", "paw_rear_left"},
    {"hip_rear_right", "knee_rear_right", "ankle_rear_right", "paw_rear_right"},
    {"shoulder_front_left", "elbow_front_left", "wrist_front_left", "paw_front_left"},
    {"shoulder_front_right", "elbow_front_right", "wrist_front_right", "paw_front_right"},
};

int checked_index(const SkeletonTopology& topology, const std::string& name) {
  const int index = topology.index_of(name);
  require(index >= 0, ErrorKind::Parameter, "gait generator needs the default quadruped joint '" + name + "'");
  return index;
}

// Rotation about the lateral (y) axis applied to a sagittal offset.
Vec3 rotate_y(const Vec3& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x() + s * v.z(), v.y(), -s * v.x() + c * v.z()};
}

struct VideoDraw {
  double period;
  double phase;
  double amplitude;
};

VideoDraw draw_video(std::uint64_t seed, const GaitConfig& config) {
  Rng rng(derive_seed(seed, "gait"));
  VideoDraw d;
  d.period = rng.uniform(config.period_min_s, config.period_max_s);
  d.phase = rng.uniform();
  d.amplitude = rng.uniform(1.0 - config.amplitude_jitter, 1.0 + config.amplitude_jitter);
  return d;
}

}  // namespace

int frame_count(double duration_s, int fps) {
  require(duration_s > 0.0 && std::isfinite(duration_s), ErrorKind::Parameter, "duration must be positive");
  require(fps > 0, ErrorKind::Parameter, "fps must be positive");
  const auto frames = static_cast<int>(std::llround(duration_s * fps));
  require(frames > 0, ErrorKind::Parameter, "duration x fps rounds to zero frames");
  return frames;
}

double gait_period(std::uint64_t seed, const GaitConfig& config) { return draw_video(seed, config).period; }

Eigen::MatrixX3d rest_pose(const SkeletonTopology& topology) {
  Eigen::MatrixX3d rest(topology.joint_count(), 3);
  rest.setZero();
  for (const auto& joint : kRest) {
    const std::string name = joint.name;
    rest.row(checked_index(topology, name)) << joint.x, joint.y, joint.z;
    const auto left = name.find("left");
    if (left != std::string::npos) {
      const std::string mirrored = name.substr(0, left) + "right";
      rest.row(checked_index(topology, mirrored)) << joint.x, -joint.y, joint.z;
    }
  }
  return rest;
}

PoseSequence generate_gait(const SkeletonTopology& topology, GaitClass gait_class, double duration_s, int fps,
                           std::uint64_t seed, const GaitConfig& config) {
  const int frames = frame_count(duration_s, fps);
  require(config.period_min_s > 0.0 && config.period_min_s <= config.period_max_s, ErrorKind::Parameter,
          "gait period range must be positive and ordered");

  const Eigen::MatrixX3d rest = rest_pose(topology);
  const int spine_rear = checked_index(topology, "spine_rear");
  const int spine_front = checked_index(topology, "spine_front");
  const int head = checked_index(topology, "head_tip");

  // Joints below an affected joint move with the lame pattern.
  std::vector<bool> lame(topology.joint_count(), false);
  if (gait_class == GaitClass::Unhealthy)
    for (int a : topology.affected_joints)
      for (int j : topology.subtree(a)) lame[j] = true;

  const VideoDraw video = draw_video(seed, config);

  PoseSequence sequence;
  sequence.bone_names = bone_names(topology);
  sequence.label = gait_class;
  sequence.fps = fps;
  sequence.seed = seed;
  sequence.frames.resize(frames);

  Eigen::MatrixX3d pos(topology.joint_count(), 3);
  for (int f = 0; f < frames; ++f) {
    const double cycle = static_cast<double>(f) / fps / video.period + video.phase;

    const double body = config.spine_bob_m * video.amplitude;
    pos.row(spine_rear) = rest.row(spine_rear);
    pos(spine_rear, 2) += body * std::sin(kTwoPi * 2.0 * cycle);
    pos.row(spine_front) = rest.row(spine_front);
    pos(spine_front, 2) += body * std::sin(kTwoPi * 2.0 * cycle + 0.5 * std::numbers::pi);
    pos.row(head) = pos.row(spine_front) + (rest.row(head) - rest.row(spine_front));

    for (int leg = 0; leg < 4; ++leg) {
      int chain[4];
      for (int k = 0; k < 4; ++k) chain[k] = checked_index(topology, kLegs[leg][k]);
      // Per-joint drive: amplitude scale and cycle position.
      auto scale = [&](int j) { return video.amplitude * (lame[j] ? config.lame_amplitude_scale : 1.0); };
      auto phase = [&](int j) {
        return kTwoPi * (cycle + config.leg_phase[leg] + (lame[j] ? config.lame_phase_shift : 0.0));
      };

      // Leg roots ride on the spine joint they hang from, so the body bob
      // reaches every leg unscaled.
      const int root = chain[0];
      const int anchor = leg < 2 ? spine_rear : spine_front;
      pos.row(root) = rest.row(root) + (pos.row(anchor) - rest.row(anchor));
      pos(root, 2) += scale(root) * config.hip_bob_m * std::sin(phase(root));

      const double angles[3] = {
          scale(chain[0]) * config.swing_rad * std::sin(phase(chain[0])),
          scale(chain[1]) * config.flex_rad * std::sin(phase(chain[1]) - 0.5 * std::numbers::pi),
          scale(chain[2]) * config.foot_rad * std::sin(phase(chain[2]) + 0.5 * std::numbers::pi),
      };
      double total = 0.0;
      for (int k = 0; k < 3; ++k) {
        total += angles[k];
        const Vec3 offset = (rest.row(chain[k + 1]) - rest.row(chain[k])).transpose();
        pos.row(chain[k + 1]) = pos.row(chain[k]) + rotate_y(offset, total).transpose();
      }
      const int paw = chain[3];
      pos(paw, 2) += scale(paw) * config.paw_lift_m * 0.5 * (1.0 - std::cos(phase(paw)));
    }

    auto& bones = sequence.frames[f].bones;
    bones.resize(topology.edges.size());
    for (std::size_t b = 0; b < topology.edges.size(); ++b) {
      bones[b].head = pos.row(topology.edges[b].first).transpose();
      bones[b].tail = pos.row(topology.edges[b].second).transpose();
    }
  }
  return sequence;
}

Eigen::MatrixX3d joint_positions(const PoseFrame& frame, const std::vector<JointEndpoint>& endpoints) {
  Eigen::MatrixX3d out(static_cast<Eigen::Index>(endpoints.size()), 3);
  for (std::size_t j = 0; j < endpoints.size(); ++j) {
    const auto& bone = frame.bones.at(endpoints[j].bone);
    out.row(static_cast<Eigen::Index>(j)) = (endpoints[j].tail ? bone.tail : bone.head).transpose();
  }
  return out;
}

}  // namespace gaitlab
