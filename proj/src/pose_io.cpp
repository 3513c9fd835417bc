#include "gaitlab/pose_io.hpp"

#include "gaitlab/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gaitlab {

using nlohmann::json;

std::string_view to_string(GaitClass c) { return c == GaitClass::Healthy ? "healthy" : "unhealthy"; }

GaitClass parse_gait_class(std::string_view text) {
  if (text == "healthy") return GaitClass::Healthy;
  if (text == "unhealthy") return GaitClass::Unhealthy;
  fail(ErrorKind::Parse, "unknown gait label '" + std::string(text) + "'");
}

std::vector<std::string> bone_names(const SkeletonTopology& topology) {
  std::vector<std::string> names;
  names.reserve(topology.edges.size());
  for (const auto& [head, tail] : topology.edges) names.push_back(topology.joints[head] + "." + topology.joints[tail]);
  return names;
}

std::vector<JointEndpoint> joint_endpoints(const SkeletonTopology& topology) {
  const int n = topology.joint_count();
  std::vector<JointEndpoint> out(n, JointEndpoint{-1, false});
  for (std::size_t b = 0; b < topology.edges.size(); ++b) {
    const int head = topology.edges[b].first;
    if (out[head].bone < 0 || out[head].tail) out[head] = {static_cast<int>(b), false};
    const int tail = topology.edges[b].second;
    if (out[tail].bone < 0) out[tail] = {static_cast<int>(b), true};
  }
  return out;
}

std::vector<JointEndpoint> joint_endpoints(const SkeletonTopology& topology, const std::vector<std::string>& names) {
  const auto expected = bone_names(topology);
  auto endpoints = joint_endpoints(topology);
  for (auto& e : endpoints) {
    const auto& wanted = expected[e.bone];
    const auto it = std::find(names.begin(), names.end(), wanted);
    require(it != names.end(), ErrorKind::Validation, "pose data has no bone '" + wanted + "'");
    e.bone = static_cast<int>(it - names.begin());
  }
  return endpoints;
}

void validate(const PoseSequence& sequence) {
  require(!sequence.frames.empty(), ErrorKind::Validation, "pose sequence has no frames");
  require(sequence.fps > 0, ErrorKind::Validation, "pose sequence fps must be positive");
  const std::size_t bones = sequence.bone_names.size();
  require(bones > 0, ErrorKind::Validation, "pose sequence has no bones");
  for (std::size_t f = 0; f < sequence.frames.size(); ++f) {
    const auto& frame = sequence.frames[f];
    require(frame.bones.size() == bones, ErrorKind::Validation,
            "frame " + std::to_string(f) + " has " + std::to_string(frame.bones.size()) + " bones, expected " +
                std::to_string(bones));
    for (const auto& b : frame.bones)
      require(b.head.allFinite() && b.tail.allFinite(), ErrorKind::Validation,
              "non-finite coordinate in frame " + std::to_string(f));
  }
}

namespace {

void put_number(std::string& out, double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  out += buffer;
}

void put_vec(std::string& out, const Vec3& v) {
  out += '[';
  for (int i = 0; i < 3; ++i) {
    if (i) out += ',';
    put_number(out, v[i]);
  }
  out += ']';
}

Vec3 json_vec(const json& j) {
  if (!j.is_array() || j.size() != 3) fail(ErrorKind::Parse, "expected a 3-element coordinate array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

std::string pose_to_json(const PoseSequence& sequence) {
  validate(sequence);
  const auto& cam = sequence.camera;
  std::string out;
  out.reserve(sequence.frames.size() * sequence.bone_names.size() * 160 + 512);
  out += "{\"label\":\"";
  out += to_string(sequence.label);
  out += "\",\"fps\":" + std::to_string(sequence.fps);
  out += ",\"seed\":" + std::to_string(sequence.seed);
  out += ",\"camera\":{\"azimuth_deg\":";
  put_number(out, cam.azimuth_deg);
  out += ",\"elevation_deg\":";
  put_number(out, cam.elevation_deg);
  out += ",\"distance_m\":";
  put_number(out, cam.distance_m);
  out += ",\"focal_length\":";
  put_number(out, cam.focal_length);
  out += ",\"principal_point\":[";
  put_number(out, cam.principal_point.x());
  out += ',';
  put_number(out, cam.principal_point.y());
  out += "]},\"frames\":[";
  for (std::size_t f = 0; f < sequence.frames.size(); ++f) {
    if (f) out += ',';
    out += '[';
    const auto& bones = sequence.frames[f].bones;
    for (std::size_t b = 0; b < bones.size(); ++b) {
      if (b) out += ',';
      out += "{\"name\":" + json(sequence.bone_names[b]).dump() + ",\"head\":";
      put_vec(out, bones[b].head);
      out += ",\"tail\":";
      put_vec(out, bones[b].tail);
      out += bones[b].head_visible ? ",\"head_visible\":true" : ",\"head_visible\":false";
      out += bones[b].tail_visible ? ",\"tail_visible\":true}" : ",\"tail_visible\":false}";
    }
    out += ']';
  }
  out += "]}";
  return out;
}

PoseSequence pose_from_json(const std::string& text) {
  PoseSequence sequence;
  try {
    const json doc = json::parse(text);
    sequence.label = parse_gait_class(doc.at("label").get<std::string>());
    sequence.fps = doc.at("fps").get<int>();
    const auto& cam = doc.at("camera");
    sequence.camera.azimuth_deg = cam.at("azimuth_deg").get<double>();
    sequence.camera.elevation_deg = cam.at("elevation_deg").get<double>();
    sequence.camera.distance_m = cam.at("distance_m").get<double>();
    sequence.camera.focal_length = cam.at("focal_length").get<double>();
    const auto& pp = cam.at("principal_point");
    sequence.camera.principal_point = {pp.at(0).get<double>(), pp.at(1).get<double>()};
    sequence.seed = doc.at("seed").get<std::uint64_t>();
    const auto& frames = doc.at("frames");
    sequence.frames.reserve(frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
      PoseFrame frame;
      for (const auto& bone : frames[f]) {
        if (f == 0) sequence.bone_names.push_back(bone.at("name").get<std::string>());
        else if (frame.bones.size() >= sequence.bone_names.size() ||
                 bone.at("name").get<std::string>() != sequence.bone_names[frame.bones.size()])
          fail(ErrorKind::Parse, "bone order differs in frame " + std::to_string(f));
        BoneState state;
        state.head = json_vec(bone.at("head"));
        state.tail = json_vec(bone.at("tail"));
        state.head_visible = bone.at("head_visible").get<bool>();
        state.tail_visible = bone.at("tail_visible").get<bool>();
        frame.bones.push_back(state);
      }
      sequence.frames.push_back(std::move(frame));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("malformed pose file: ") + e.what());
  }
  validate(sequence);
  return sequence;
}

void write_pose_file(const PoseSequence& sequence, const std::filesystem::path& path) {
  const std::string text = pose_to_json(sequence);
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out << text << '\n';
  require(static_cast<bool>(out), ErrorKind::Io, "failed writing '" + path.string() + "'");
}

PoseSequence read_pose_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open pose file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return pose_from_json(buffer.str());
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace gaitlab
