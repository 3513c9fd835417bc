#ifndef GAITLAB_POSE_IO_HPP
#define GAITLAB_POSE_IO_HPP

#include "gaitlab/pose.hpp"

#include <filesystem>
#include <string>

namespace gaitlab {

// Pose file: one JSON document per video.
//   { "label": "healthy"|"unhealthy", "fps": int, "seed": int,
//     "camera": {azimuth_deg, elevation_deg, distance_m, focal_length, principal_point: [u, v]},
//     "frames": [[{name, head: [x,y,z], tail: [x,y,z], head_visible, tail_visible}, ...], ...] }
// Coordinates are meters in the global frame, written with 17 significant digits.

std::string pose_to_json(const PoseSequence& sequence);
PoseSequence pose_from_json(const std::string& text);

void write_pose_file(const PoseSequence& sequence, const std::filesystem::path& path);
PoseSequence read_pose_file(const std::filesystem::path& path);

}  // namespace gaitlab

#endif  // GAITLAB_POSE_IO_HPP
