#ifndef GAITLAB_CAMERA_HPP
#define GAITLAB_CAMERA_HPP

#include "gaitlab/geometry.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>

namespace gaitlab {

/// Azimuth is measured around the vertical axis starting behind the dog
/// (-x) and turning toward its left flank (+y): 0 rear, 90 left, 180 front,
/// 270 right. Elevation is measured up from the horizontal at the look-at point.
struct CameraPose {
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
  double distance_m = 1.0;
  double focal_length = 1000.0;
  Eigen::Vector2d principal_point{640.0, 360.0};
};

/// Ranges for the camera parameters the angle group leaves open. The
/// defaults are guesses; nothing upstream pins them down.
struct CameraConfig {
  double elevation_min_deg = 5.0;
  double elevation_max_deg = 25.0;
  double distance_min_m = 3.0;
  double distance_max_m = 6.0;
  double focal_length = 1000.0;
  Eigen::Vector2d principal_point{640.0, 360.0};
  Vec3 look_at{0.0, 0.0, 0.45};
};

CameraPose sample_camera(double angle_lo, double angle_hi, std::uint64_t seed, const CameraConfig& config = {});

/// World-to-camera transform of a pose: x right, y down, z along the optical axis.
class CameraFrame {
 public:
  CameraFrame(const CameraPose& pose, const Vec3& look_at);

  const Vec3& position() const { return position_; }
  Vec3 to_camera(const Vec3& world) const { return rotation_ * (world - position_); }

  /// Pinhole image coordinates; empty for points on or behind the camera plane.
  std::optional<Eigen::Vector2d> project(const Vec3& world) const;

 private:
  Vec3 position_;
  Eigen::Matrix3d rotation_;
  double focal_;
  Eigen::Vector2d principal_;
};

}  // namespace gaitlab

#endif  // GAITLAB_CAMERA_HPP
