#include "gaitlab/simulate.hpp"

#include "gaitlab/error.hpp"
#include "gaitlab/pose_io.hpp"
#include "gaitlab/random.hpp"

#include <charconv>
#include <cstdio>

namespace gaitlab {

namespace {

std::string format_angle(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%g", value);
  return buffer;
}

double parse_number(const std::string& text, const std::string& context) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  require(ec == std::errc() && ptr == last, ErrorKind::Parse, "bad number '" + text + "' in " + context);
  return value;
}

}  // namespace

std::string AngleGroup::label() const { return format_angle(lo) + "-" + format_angle(hi); }

AngleGroup parse_angle_group(const std::string& text) {
  const auto dash = text.find('-', 1);
  require(dash != std::string::npos, ErrorKind::Parse, "angle group '" + text + "' is not of the form lo-hi");
  AngleGroup group{parse_number(text.substr(0, dash), "angle group"),
                   parse_number(text.substr(dash + 1), "angle group")};
  require(group.lo >= 0.0 && group.hi <= 360.0 && group.lo <= group.hi, ErrorKind::Parse,
          "angle group '" + text + "' must satisfy 0 <= lo <= hi <= 360");
  return group;
}

PoseSequence simulate_video(const SkeletonTopology& topology, const SimulationConfig& config, const AngleGroup& group,
                            GaitClass gait_class, std::uint64_t seed) {
  PoseSequence sequence = generate_gait(topology, gait_class, config.duration_s, config.fps, seed, config.gait);
  sequence.camera = sample_camera(group.lo, group.hi, derive_seed(seed, "camera"), config.camera);

  // The corridor is taken from the healthy gait so both classes of one seed
  // share the same scene.
  const PoseSequence reference =
      gait_class == GaitClass::Healthy
          ? sequence
          : generate_gait(topology, GaitClass::Healthy, config.duration_s, config.fps, seed, config.gait);
  const Box body = body_bounds(reference, config.scene.corridor_margin_m);
  const Box corridor = swept_corridor(body, config.scene.dog_speed_mps, config.duration_s);
  const auto occluders = populate_scene(config.scene.density_per_m2, config.scene.area_m2, corridor,
                                        derive_seed(seed, "scene"), config.scene);
  const auto positions = animate_relative_motion(occluders, Vec3(config.scene.dog_speed_mps, 0.0, 0.0),
                                                 sequence.frame_count(), sequence.fps);
  const CameraFrame camera(sequence.camera, config.camera.look_at);
  compute_visibility(sequence, topology, camera.position(), occluders, positions);
  return sequence;
}

std::uint64_t video_seed(std::uint64_t master_seed, std::size_t group_index, GaitClass gait_class, std::size_t index) {
  return derive_seed(master_seed, "video", {group_index, static_cast<std::uint64_t>(gait_class), index});
}

std::filesystem::path pose_file_path(const AngleGroup& group, GaitClass gait_class, std::size_t index) {
  char name[64];
  std::snprintf(name, sizeof name, "%s_%02zu.json", std::string(to_string(gait_class)).c_str(), index);
  return std::filesystem::path("group_" + group.label()) / name;
}

std::string video_id(const AngleGroup& group, GaitClass gait_class, std::size_t index) {
  return pose_file_path(group, gait_class, index).replace_extension().generic_string();
}

std::vector<std::filesystem::path> simulate_dataset(const SkeletonTopology& topology, const SimulationConfig& config,
                                                    const std::vector<AngleGroup>& groups, int videos_per_class,
                                                    std::uint64_t master_seed, const std::filesystem::path& out_dir) {
  require(videos_per_class > 0, ErrorKind::Parameter, "videos_per_class must be positive");
  std::vector<std::filesystem::path> written;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::filesystem::create_directories(out_dir / ("group_" + groups[g].label()));
    for (GaitClass c : {GaitClass::Healthy, GaitClass::Unhealthy}) {
      for (int i = 0; i < videos_per_class; ++i) {
        const auto index = static_cast<std::size_t>(i);
        const PoseSequence sequence = simulate_video(topology, config, groups[g], c, video_seed(master_seed, g, c, index));
        const auto relative = pose_file_path(groups[g], c, index);
        write_pose_file(sequence, out_dir / relative);
        written.push_back(relative);
      }
    }
  }
  return written;
}

}  // namespace gaitlab
