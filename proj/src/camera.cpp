#include "gaitlab/camera.hpp"

#include "gaitlab/error.hpp"
#include "gaitlab/random.hpp"

#include <cmath>
#include <numbers>

namespace gaitlab {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
}

CameraPose sample_camera(double angle_lo, double angle_hi, std::uint64_t seed, const CameraConfig& config) {
  require(angle_lo >= 0.0 && angle_hi <= 360.0, ErrorKind::Parameter, "camera angle interval outside [0, 360]");
  require(angle_lo <= angle_hi, ErrorKind::Parameter, "camera angle interval has lo > hi");
  require(config.distance_min_m > 0.0 && config.distance_min_m <= config.distance_max_m, ErrorKind::Parameter,
          "camera distance range must be positive and ordered");
  require(config.elevation_min_deg <= config.elevation_max_deg, ErrorKind::Parameter,
          "camera elevation range must be ordered");
  require(config.focal_length > 0.0, ErrorKind::Parameter, "focal length must be positive");

  Rng rng(seed);
  CameraPose pose;
  pose.azimuth_deg = angle_lo == angle_hi ? angle_lo : rng.uniform(angle_lo, angle_hi);
  if (pose.azimuth_deg >= 360.0) pose.azimuth_deg -= 360.0;
  pose.elevation_deg = rng.uniform(config.elevation_min_deg, config.elevation_max_deg);
  pose.distance_m = rng.uniform(config.distance_min_m, config.distance_max_m);
  pose.focal_length = config.focal_length;
  pose.principal_point = config.principal_point;
  return pose;
}

CameraFrame::CameraFrame(const CameraPose& pose, const Vec3& look_at)
    : focal_(pose.focal_length), principal_(pose.principal_point) {
  const double az = pose.azimuth_deg * kDegToRad;
  const double el = pose.elevation_deg * kDegToRad;
  const Vec3 horizontal(-std::cos(az), std::sin(az), 0.0);
  position_ = look_at + pose.distance_m * (std::cos(el) * horizontal + Vec3(0.0, 0.0, std::sin(el)));

  const Vec3 forward = (look_at - position_).normalized();
  Vec3 right = forward.cross(Vec3::UnitZ());
  if (right.squaredNorm() < 1e-24) right = Vec3::UnitY();  // looking straight down
  right.normalize();
  const Vec3 down = forward.cross(right);
  rotation_.row(0) = right.transpose();
  rotation_.row(1) = down.transpose();
  rotation_.row(2) = forward.transpose();
}

std::optional<Eigen::Vector2d> CameraFrame::project(const Vec3& world) const {
  const Vec3 c = to_camera(world);
  if (c.z() <= 1e-9) return std::nullopt;
  return Eigen::Vector2d(principal_.x() + focal_ * c.x() / c.z(), principal_.y() + focal_ * c.y() / c.z());
}

}  // namespace gaitlab
