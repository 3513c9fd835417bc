#ifndef GAITLAB_SIMULATE_HPP
#define GAITLAB_SIMULATE_HPP

#include "gaitlab/camera.hpp"
#include "gaitlab/gait.hpp"
#include "gaitlab/pose.hpp"
#include "gaitlab/scene.hpp"
#include "gaitlab/skeleton.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gaitlab {

/// Camera azimuth interval [lo, hi) in degrees.
struct AngleGroup {
  double lo = 0.0;
  double hi = 90.0;

  std::string label() const;  // "45-90"
  double width() const { return hi - lo; }
  bool operator==(const AngleGroup&) const = default;
  auto operator<=>(const AngleGroup&) const = default;
};

AngleGroup parse_angle_group(const std::string& text);

struct SimulationConfig {
  double duration_s = 7.0;
  int fps = 25;
  GaitConfig gait;
  CameraConfig camera;
  SceneConfig scene;
};

/// One video: gait, camera drawn from the group, occluders that move past
/// the stationary dog, and ray-cast visibility. Each stage draws from its
/// own child seed of `seed`, so the class changes only the gait.
PoseSequence simulate_video(const SkeletonTopology& topology, const SimulationConfig& config, const AngleGroup& group,
                            GaitClass gait_class, std::uint64_t seed);

/// Seed of video `index` of a class within group `group_index`.
std::uint64_t video_seed(std::uint64_t master_seed, std::size_t group_index, GaitClass gait_class, std::size_t index);

/// Relative location of a pose file inside a pose directory:
/// "group_<lo>-<hi>/<label>_<index>.json".
std::filesystem::path pose_file_path(const AngleGroup& group, GaitClass gait_class, std::size_t index);

/// Video identifier used by the dataset and the fold splits.
std::string video_id(const AngleGroup& group, GaitClass gait_class, std::size_t index);

/// Writes every video of every group; returns the written paths (relative
/// to `out_dir`) in a fixed order.
std::vector<std::filesystem::path> simulate_dataset(const SkeletonTopology& topology, const SimulationConfig& config,
                                                    const std::vector<AngleGroup>& groups, int videos_per_class,
                                                    std::uint64_t master_seed, const std::filesystem::path& out_dir);

}  // namespace gaitlab

#endif  // GAITLAB_SIMULATE_HPP
