#include "gaitlab/camera.hpp"
#include "gaitlab/error.hpp"
#include "gaitlab/gait.hpp"
#include "gaitlab/geometry.hpp"
#include "gaitlab/pose_io.hpp"
#include "gaitlab/scene.hpp"
#include "gaitlab/simulate.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

using namespace gaitlab;

namespace {

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Contract;
}

Eigen::MatrixX3d positions(const PoseSequence& s, const SkeletonTopology& t, int frame) {
  return joint_positions(s.frames[frame], joint_endpoints(t));
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("gaitlab_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("gait frame count and errors") {
  const auto t = build_skeleton();
  CHECK(generate_gait(t, GaitClass::Healthy, 7.0, 25, 1).frame_count() == 175);
  CHECK(generate_gait(t, GaitClass::Healthy, 0.5, 3, 1).frame_count() == 2);  // round(1.5) = 2
  CHECK(frame_count(1.3, 10) == 13);
  CHECK(kind_of([&] { generate_gait(t, GaitClass::Healthy, 0.0, 25, 1); }) == ErrorKind::Parameter);
  CHECK(kind_of([&] { generate_gait(t, GaitClass::Healthy, 7.0, 0, 1); }) == ErrorKind::Parameter);
  CHECK(kind_of([&] { generate_gait(t, GaitClass::Healthy, -1.0, 25, 1); }) == ErrorKind::Parameter);
}

TEST_CASE("healthy gait is periodic") {
  const auto t = build_skeleton();
  GaitConfig c;
  c.period_min_s = c.period_max_s = 0.6;  // 15 frames at 25 fps
  const auto s = generate_gait(t, GaitClass::Healthy, 3.0, 25, 42, c);
  for (int f = 0; f + 15 < s.frame_count(); ++f)
    CHECK((positions(s, t, f) - positions(s, t, f + 15)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("lameness only touches the affected leg") {
  const auto t = build_skeleton();
  const auto healthy = generate_gait(t, GaitClass::Healthy, 7.0, 25, 9);
  const auto lame = generate_gait(t, GaitClass::Unhealthy, 7.0, 25, 9);
  const auto leg = t.subtree(t.affected_joints[0]);
  const std::set<int> affected(leg.begin(), leg.end());
  const int hip = t.index_of("hip_rear_left");
  double hip_dev = 0.0;
  for (int f = 0; f < healthy.frame_count(); ++f) {
    const auto a = positions(healthy, t, f), b = positions(lame, t, f);
    for (int j = 0; j < t.joint_count(); ++j) {
      const double d = (a.row(j) - b.row(j)).norm();
      if (!affected.contains(j)) CHECK(d == 0.0);
      if (j == hip) hip_dev = std::max(hip_dev, d);
    }
  }
  CHECK(hip_dev > 0.01);
}

TEST_CASE("affected hip moves less vertically when lame") {
  const auto t = build_skeleton();
  const int hip = t.index_of("hip_rear_left");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto amplitude = [&](GaitClass c) {
      const auto s = generate_gait(t, c, 7.0, 25, seed);
      double lo = 1e9, hi = -1e9;
      for (int f = 0; f < s.frame_count(); ++f) {
        const double z = positions(s, t, f)(hip, 2);
        lo = std::min(lo, z);
        hi = std::max(hi, z);
      }
      return (hi - lo) / 2.0;
    };
    CHECK(amplitude(GaitClass::Unhealthy) < amplitude(GaitClass::Healthy));
  }
}

TEST_CASE("gait is bit-identical for equal seeds") {
  const auto t = build_skeleton();
  CHECK(pose_to_json(generate_gait(t, GaitClass::Unhealthy, 2.0, 25, 5)) ==
        pose_to_json(generate_gait(t, GaitClass::Unhealthy, 2.0, 25, 5)));
}

TEST_CASE("camera sampling") {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto c = sample_camera(0.0, 90.0, seed);
    CHECK(c.azimuth_deg >= 0.0);
    CHECK(c.azimuth_deg < 90.0);
    CHECK(c.elevation_deg >= 5.0);
    CHECK(c.elevation_deg <= 25.0);
    CHECK(c.distance_m >= 3.0);
    CHECK(c.distance_m <= 6.0);
  }
  CHECK(sample_camera(45.0, 45.0, 3).azimuth_deg == 45.0);
  const auto a = sample_camera(10.0, 20.0, 77), b = sample_camera(10.0, 20.0, 77);
  CHECK(a.azimuth_deg == b.azimuth_deg);
  CHECK(a.elevation_deg == b.elevation_deg);
  CHECK(a.distance_m == b.distance_m);
  CHECK(kind_of([] { sample_camera(50.0, 40.0, 1); }) == ErrorKind::Parameter);
  CHECK(kind_of([] { sample_camera(-1.0, 40.0, 1); }) == ErrorKind::Parameter);
}

TEST_CASE("camera frame and pinhole projection") {
  const Vec3 look_at(0.0, 0.0, 0.45);
  CameraPose pose;
  pose.azimuth_deg = 90.0;  // on the +y side, looking back at the dog
  pose.elevation_deg = 0.0;
  pose.distance_m = 4.0;
  const CameraFrame cam(pose, look_at);
  CHECK((cam.position() - Vec3(0.0, 4.0, 0.45)).norm() < 1e-12);
  const auto centre = cam.project(look_at);
  REQUIRE(centre);
  CHECK((*centre - pose.principal_point).norm() < 1e-9);
  const Vec3 pc = cam.to_camera(look_at);
  CHECK(std::abs(pc.x()) < 1e-12);
  CHECK(std::abs(pc.z() - 4.0) < 1e-12);
  // World point with camera coordinates (x, 0, 4) projects to u = cx + f x / 4.
  Eigen::Matrix3d basis;
  for (int k = 0; k < 3; ++k) basis.col(k) = cam.to_camera(cam.position() + Vec3::Unit(k));
  for (double x : {-0.7, 0.2, 1.1}) {
    const Vec3 world = cam.position() + basis.inverse() * Vec3(x, 0.0, 4.0);
    const auto uv = cam.project(world);
    REQUIRE(uv);
    CHECK(std::abs(uv->x() - (pose.principal_point.x() + pose.focal_length * x / 4.0)) < 1e-9);
    CHECK(std::abs(uv->y() - pose.principal_point.y()) < 1e-9);
  }
  // Behind the camera: no projection.
  CHECK(!cam.project(cam.position() + (cam.position() - look_at)));
}

TEST_CASE("scene population") {
  Box corridor{Vec3(0.0, 0.0, 0.4), Vec3(5.0, 0.4, 0.5)};
  CHECK(populate_scene(0.0, 225.0, corridor, 1).empty());
  SceneConfig cfg;
  std::size_t total = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto occ = populate_scene(0.1, 225.0, corridor, seed, cfg);
    CHECK(occ.size() <= 23);
    total += occ.size();
    for (const auto& o : occ) {
      CHECK(o.volume() > 0.1);
      CHECK(o.volume() < 10.0);
      CHECK(!intersects(o, corridor));
    }
  }
  CHECK(total > 0);
}

TEST_CASE("occluders stay clear of the dog at every frame") {
  const auto t = build_skeleton();
  SimulationConfig cfg;
  cfg.scene.density_per_m2 = 0.2;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto seq = generate_gait(t, GaitClass::Unhealthy, cfg.duration_s, cfg.fps, seed);
    const auto healthy = generate_gait(t, GaitClass::Healthy, cfg.duration_s, cfg.fps, seed);
    const Box body = body_bounds(healthy, cfg.scene.corridor_margin_m);
    const auto occ = populate_scene(cfg.scene.density_per_m2, cfg.scene.area_m2,
                                    swept_corridor(body, cfg.scene.dog_speed_mps, cfg.duration_s), seed, cfg.scene);
    const auto moved = animate_relative_motion(occ, Vec3(cfg.scene.dog_speed_mps, 0, 0), seq.frame_count(), seq.fps);
    const auto endpoints = joint_endpoints(t);
    for (int f = 0; f < seq.frame_count(); ++f) {
      const auto joints = joint_positions(seq.frames[f], endpoints);
      for (std::size_t i = 0; i < occ.size(); ++i) {
        CHECK(!intersects(occ[i].at(moved[f][i]), body));
        for (Eigen::Index j = 0; j < joints.rows(); ++j)
          CHECK(!contains(occ[i].at(moved[f][i]), Vec3(joints.row(j).transpose())));
      }
    }
  }
}

TEST_CASE("relative motion") {
  std::vector<Occluder> occ(2);
  occ[0].center = Vec3(1, 2, 3);
  occ[1].center = Vec3(-4, 0, 1);
  const auto still = animate_relative_motion(occ, Vec3::Zero(), 10, 25);
  for (const auto& frame : still) {
    CHECK(frame[0] == occ[0].center);
    CHECK(frame[1] == occ[1].center);
  }
  const auto moving = animate_relative_motion(occ, Vec3(1, 0, 0), 30, 25);
  CHECK((moving[25][0] - (occ[0].center + Vec3(-1, 0, 0))).norm() < 1e-12);
  CHECK(kind_of([&] { animate_relative_motion(occ, Vec3::Zero(), 10, 0); }) == ErrorKind::Parameter);
}

TEST_CASE("dog root stays in place while the scene moves") {
  const auto t = build_skeleton();
  const auto seq = simulate_video(t, SimulationConfig{}, AngleGroup{0, 90}, GaitClass::Healthy, 3);
  const auto endpoints = joint_endpoints(t);
  const Eigen::Vector3d first = joint_positions(seq.frames[0], endpoints).row(0);
  for (const auto& frame : seq.frames) {
    const Eigen::Vector3d root = joint_positions(frame, endpoints).row(0);
    // The root only bobs vertically; it never translates along the ground.
    CHECK(root.x() == first.x());
    CHECK(root.y() == first.y());
  }
}

TEST_CASE("ray visibility") {
  const Vec3 o(0, 0, 0), target(10, 0, 0);
  CHECK(ray_visible(o, target, {}, {}));
  std::vector<Occluder> occ(1);
  occ[0].shape = Shape::Sphere;
  occ[0].center = Vec3(5, 0, 0);
  occ[0].size = Vec3(1, 0, 0);
  CHECK(!ray_visible(o, target, occ, {}));
  occ[0].center = Vec3(12, 0, 0);  // hit only beyond the target
  CHECK(ray_visible(o, target, occ, {}));
  occ[0].center = Vec3(5, 1.5, 0);
  CHECK(ray_visible(o, target, occ, {}));
  occ[0] = Occluder{Shape::Box, Vec3(5, 0, 0), Vec3(0.5, 0.5, 0.5), Vec3::Zero()};
  CHECK(!ray_visible(o, target, occ, {}));
  std::vector<Capsule> body{{Vec3(5, -1, 0), Vec3(5, 1, 0), 0.2}};
  CHECK(!ray_visible(o, target, {}, body));
  CHECK(kind_of([&] { ray_visible(o, o, {}, {}); }) == ErrorKind::Parameter);
}

TEST_CASE("ray visibility agrees with a marching oracle on random spheres") {
  Rng rng(2024);
  int disagreements = 0, decided = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec3 origin(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0, 3));
    const Vec3 target(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 1));
    Sphere s{origin + rng.uniform(0.0, 1.2) * (target - origin) +
                 Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)),
             rng.uniform(0.1, 1.5)};
    std::vector<Occluder> occ{{Shape::Sphere, s.center, Vec3(s.radius, 0, 0), Vec3::Zero()}};
    bool near = false;
    const bool expected = oracle::ray_march_visible(origin, target, {s}, 10000, 1e-4, near);
    if (near) continue;
    ++decided;
    if (ray_visible(origin, target, occ, {}) != expected) ++disagreements;
  }
  CHECK(decided > 900);
  CHECK(disagreements == 0);
}

TEST_CASE("visibility is filled for every bone end") {
  const auto t = build_skeleton();
  const auto seq = simulate_video(t, SimulationConfig{}, AngleGroup{225, 270}, GaitClass::Unhealthy, 11);
  validate(seq);
  CHECK(seq.frame_count() == 175);
  CHECK(seq.camera.azimuth_deg >= 225.0);
  CHECK(seq.camera.azimuth_deg < 270.0);
  int hidden = 0;
  for (const auto& f : seq.frames)
    for (const auto& b : f.bones) hidden += !b.head_visible + !b.tail_visible;
  CHECK(hidden > 0);  // the far side of the dog is behind its body
}

TEST_CASE("pose file round trip and errors") {
  const auto t = build_skeleton();
  const auto seq = simulate_video(t, SimulationConfig{}, AngleGroup{45, 90}, GaitClass::Unhealthy, 8);
  const auto dir = temp_dir("pose");
  write_pose_file(seq, dir / "a.json");
  const auto back = read_pose_file(dir / "a.json");
  CHECK(pose_to_json(back) == pose_to_json(seq));
  CHECK(back.bone_names == seq.bone_names);
  CHECK(back.label == seq.label);
  CHECK(back.seed == seq.seed);
  CHECK(back.camera.azimuth_deg == seq.camera.azimuth_deg);
  for (std::size_t f = 0; f < seq.frames.size(); ++f)
    for (std::size_t b = 0; b < seq.frames[f].bones.size(); ++b) {
      CHECK(back.frames[f].bones[b].head == seq.frames[f].bones[b].head);
      CHECK(back.frames[f].bones[b].tail_visible == seq.frames[f].bones[b].tail_visible);
    }

  std::ifstream in(dir / "a.json");
  const std::string text((std::istreambuf_iterator<char>(in)), {});
  for (const char* key : {"\"head\"", "\"tail\"", "\"head_visible\"", "\"tail_visible\"", "\"camera\"", "\"fps\""})
    CHECK(text.find(key) != std::string::npos);

  PoseSequence empty = seq;
  empty.frames.clear();
  CHECK(kind_of([&] { write_pose_file(empty, dir / "b.json"); }) == ErrorKind::Validation);
  CHECK(!std::filesystem::exists(dir / "b.json"));
  CHECK(kind_of([&] { write_pose_file(seq, dir / "missing_dir" / "c.json"); }) == ErrorKind::Io);
  CHECK(kind_of([&] { pose_from_json("{\"label\": 3}"); }) == ErrorKind::Parse);
}

TEST_CASE("simulated datasets are reproducible") {
  const auto t = build_skeleton();
  SimulationConfig cfg;
  cfg.duration_s = 1.0;
  const auto a = temp_dir("sim_a"), b = temp_dir("sim_b");
  const auto files = simulate_dataset(t, cfg, {{0, 90}, {90, 180}}, 2, 99, a);
  simulate_dataset(t, cfg, {{0, 90}, {90, 180}}, 2, 99, b);
  CHECK(files.size() == 8);
  for (const auto& f : files) {
    std::ifstream x(a / f), y(b / f);
    const std::string sx((std::istreambuf_iterator<char>(x)), {}), sy((std::istreambuf_iterator<char>(y)), {});
    CHECK(sx == sy);
  }
  CHECK(files[0].generic_string() == "group_0-90/healthy_00.json");
}
