#include "gaitlab/dataset.hpp"

#include "gaitlab/error.hpp"
#include "gaitlab/gait.hpp"
#include "gaitlab/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace gaitlab {

Eigen::MatrixXd normalized_adjacency(const Eigen::MatrixXd& edges) {
  require(edges.rows() == edges.cols(), ErrorKind::Contract, "edge matrix must be square");
  const Eigen::MatrixXd a = edges + Eigen::MatrixXd::Identity(edges.rows(), edges.cols());
  const Eigen::VectorXd inv_sqrt_degree = a.rowwise().sum().array().rsqrt();
  return inv_sqrt_degree.asDiagonal() * a * inv_sqrt_degree.asDiagonal();
}

Eigen::MatrixXd build_normalized_adjacency(const SkeletonTopology& topology) {
  validate(topology);
  return normalized_adjacency(topology.edge_matrix());
}

std::vector<Window> window_sequence(int length, int timestep) {
  require(timestep >= 1, ErrorKind::Parameter, "timestep must be at least 1");
  const int stride = timestep - window_overlap(timestep);
  std::vector<Window> windows;
  for (int start = 0; start + timestep <= length; start += stride) windows.push_back({start, start + timestep});
  return windows;
}

RawWindow extract_features(const PoseSequence& sequence, const Window& window, int dims,
                           const std::vector<JointEndpoint>& endpoints, const Vec3& look_at) {
  require(dims == 2 || dims == 3, ErrorKind::Parameter, "dimensionality must be 2 or 3");
  require(window.start >= 0 && window.start < window.end && window.end <= sequence.frame_count(),
          ErrorKind::Parameter,
          "window [" + std::to_string(window.start) + ", " + std::to_string(window.end) + ") outside a sequence of " +
              std::to_string(sequence.frame_count()) + " frames");
  const int length = window.end - window.start;
  const int nodes = static_cast<int>(endpoints.size());
  const CameraFrame camera(sequence.camera, look_at);

  RawWindow raw;
  raw.dims = dims;
  raw.values = Eigen::MatrixXd::Zero(length, nodes * dims);
  raw.visible = MaskArray::Constant(length, nodes, false);
  for (int t = 0; t < length; ++t) {
    const auto& frame = sequence.frames[window.start + t];
    for (int n = 0; n < nodes; ++n) {
      const auto& bone = frame.bones.at(endpoints[n].bone);
      const Vec3& p = endpoints[n].tail ? bone.tail : bone.head;
      bool visible = endpoints[n].tail ? bone.tail_visible : bone.head_visible;
      if (dims == 3) {
        raw.values.block(t, n * 3, 1, 3) = p.transpose();
      } else {
        const auto uv = camera.project(p);
        if (uv) raw.values.block(t, n * 2, 1, 2) = uv->transpose();
        visible = visible && uv.has_value();
      }
      raw.visible(t, n) = visible;
    }
  }
  return raw;
}

MaskArray channel_mask(const MaskArray& visible, int dims) {
  MaskArray mask(visible.rows(), visible.cols() * dims);
  for (Eigen::Index n = 0; n < visible.cols(); ++n)
    for (int d = 0; d < dims; ++d) mask.col(n * dims + d) = visible.col(n);
  return mask;
}

Eigen::MatrixXd mask_and_standardize(const Eigen::MatrixXd& raw, const MaskArray& mask) {
  require(raw.rows() == mask.rows() && raw.cols() == mask.cols(), ErrorKind::Contract,
          "features and mask differ in shape");
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(raw.rows(), raw.cols(), kMaskValue);
  for (Eigen::Index c = 0; c < raw.cols(); ++c) {
    const auto count = mask.col(c).count();
    if (count == 0) continue;
    double mean = 0.0;
    for (Eigen::Index t = 0; t < raw.rows(); ++t)
      if (mask(t, c)) mean += raw(t, c);
    mean /= static_cast<double>(count);
    double var = 0.0;
    for (Eigen::Index t = 0; t < raw.rows(); ++t)
      if (mask(t, c)) var += (raw(t, c) - mean) * (raw(t, c) - mean);
    const double sd = std::sqrt(var / static_cast<double>(count));
    const bool flat = count < 2 || sd < 1e-8;
    for (Eigen::Index t = 0; t < raw.rows(); ++t)
      if (mask(t, c)) out(t, c) = flat ? 0.0 : (raw(t, c) - mean) / sd;
  }
  return out;
}

std::vector<GraphSample> build_samples(const PoseSequence& sequence, const std::string& video_id, int timestep,
                                       int dims, const SkeletonTopology& topology,
                                       std::shared_ptr<const Eigen::MatrixXd> adjacency, const Vec3& look_at) {
  const auto endpoints = joint_endpoints(topology, sequence.bone_names);
  const int nodes = static_cast<int>(endpoints.size());
  require(adjacency && adjacency->rows() == nodes, ErrorKind::Contract, "adjacency does not match the skeleton");
  std::vector<GraphSample> samples;
  for (const auto& window : window_sequence(sequence.frame_count(), timestep)) {
    const RawWindow raw = extract_features(sequence, window, dims, endpoints, look_at);
    const Eigen::MatrixXd standardized = mask_and_standardize(raw.values, channel_mask(raw.visible, dims));
    GraphSample sample;
    sample.frames.reserve(timestep);
    for (int t = 0; t < timestep; ++t) {
      Eigen::MatrixXd frame(nodes, dims);
      for (int n = 0; n < nodes; ++n) frame.row(n) = standardized.block(t, n * dims, 1, dims);
      sample.frames.push_back(std::move(frame));
    }
    sample.mask = raw.visible.transpose();
    sample.adjacency = adjacency;
    sample.label = static_cast<int>(sequence.label);
    sample.source_video = video_id;
    sample.window_start = window.start;
    samples.push_back(std::move(sample));
  }
  return samples;
}

namespace {

std::map<int, std::vector<std::size_t>> by_class(const std::vector<int>& labels) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
  return groups;
}

}  // namespace

std::vector<FoldSplit> stratified_kfold(const std::vector<std::string>& videos, const std::vector<int>& labels, int k,
                                        std::uint64_t seed) {
  require(videos.size() == labels.size(), ErrorKind::Contract, "videos and labels differ in length");
  require(k >= 2, ErrorKind::Protocol, "k-fold needs k >= 2");
  require(std::set<std::string>(videos.begin(), videos.end()).size() == videos.size(), ErrorKind::Protocol,
          "duplicate video identifiers");
  auto groups = by_class(labels);
  for (const auto& [label, members] : groups)
    require(static_cast<int>(members.size()) >= k, ErrorKind::Protocol,
            "class " + std::to_string(label) + " has " + std::to_string(members.size()) + " videos, fewer than k = " +
                std::to_string(k));

  Rng rng(seed);
  std::vector<int> fold_of(videos.size());
  int next = 0;
  for (auto& [label, members] : groups) {
    rng.shuffle(members);
    for (auto index : members) {
      fold_of[index] = next;
      next = (next + 1) % k;
    }
  }

  std::vector<FoldSplit> folds(k);
  for (int f = 0; f < k; ++f) {
    folds[f].fold_index = f;
    folds[f].seed = seed;
    for (std::size_t i = 0; i < videos.size(); ++i)
      (fold_of[i] == f ? folds[f].test_videos : folds[f].train_videos).push_back(videos[i]);
  }
  return folds;
}

ValidationSplit split_validation(const std::vector<std::string>& train_videos, const std::vector<int>& labels,
                                 double fraction, std::uint64_t seed) {
  require(train_videos.size() == labels.size(), ErrorKind::Contract, "videos and labels differ in length");
  require(fraction > 0.0 && fraction < 1.0, ErrorKind::Protocol, "validation fraction must be in (0, 1)");
  const auto total = static_cast<long>(std::floor(fraction * static_cast<double>(train_videos.size()) + 0.5));
  require(total > 0, ErrorKind::Protocol, "validation split would be empty");

  auto groups = by_class(labels);
  struct Quota {
    int label;
    long count;
    double remainder;
  };
  std::vector<Quota> quotas;
  long assigned = 0;
  for (const auto& [label, members] : groups) {
    const double exact = fraction * static_cast<double>(members.size());
    const auto whole = static_cast<long>(std::floor(exact));
    quotas.push_back({label, whole, exact - static_cast<double>(whole)});
    assigned += whole;
  }
  std::vector<std::size_t> order(quotas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return quotas[a].remainder > quotas[b].remainder; });
  for (std::size_t i = 0; assigned < total; i = (i + 1) % order.size(), ++assigned) ++quotas[order[i]].count;

  Rng rng(seed);
  ValidationSplit split;
  std::vector<bool> held_out(train_videos.size(), false);
  for (const auto& quota : quotas) {
    auto members = groups[quota.label];
    require(quota.count < static_cast<long>(members.size()), ErrorKind::Protocol,
            "validation split would empty class " + std::to_string(quota.label) + " in training");
    rng.shuffle(members);
    for (long i = 0; i < quota.count; ++i) held_out[members[i]] = true;
  }
  for (std::size_t i = 0; i < train_videos.size(); ++i)
    (held_out[i] ? split.validation_videos : split.train_videos).push_back(train_videos[i]);
  return split;
}

void write_dataset_cache(const std::vector<GraphSample>& samples, const std::filesystem::path& path) {
  using nlohmann::json;
  json doc;
  doc["format_version"] = kDatasetFormatVersion;
  json items = json::array();
  std::shared_ptr<const Eigen::MatrixXd> adjacency;
  for (const auto& s : samples) {
    if (!adjacency) adjacency = s.adjacency;
    json frames = json::array();
    for (const auto& f : s.frames) frames.push_back(std::vector<double>(f.data(), f.data() + f.size()));
    json mask = json::array();
    for (Eigen::Index n = 0; n < s.mask.rows(); ++n) {
      std::string row;
      for (Eigen::Index t = 0; t < s.mask.cols(); ++t) row += s.mask(n, t) ? '1' : '0';
      mask.push_back(row);
    }
    items.push_back({{"source_video", s.source_video},
                     {"window_start", s.window_start},
                     {"label", s.label},
                     {"nodes", s.frames.empty() ? 0 : s.frames.front().rows()},
                     {"dims", s.dims()},
                     {"frames", std::move(frames)},
                     {"mask", std::move(mask)}});
  }
  if (adjacency) {
    doc["adjacency"] = {{"size", adjacency->rows()},
                        {"data", std::vector<double>(adjacency->data(), adjacency->data() + adjacency->size())}};
  }
  doc["samples"] = std::move(items);
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out << doc.dump() << '\n';
}

std::vector<GraphSample> read_dataset_cache(const std::filesystem::path& path) {
  using nlohmann::json;
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open dataset cache '" + path.string() + "'");
  std::vector<GraphSample> samples;
  try {
    const json doc = json::parse(in);
    const int version = doc.at("format_version").get<int>();
    require(version == kDatasetFormatVersion, ErrorKind::Parse,
            "unsupported dataset cache version " + std::to_string(version));
    std::shared_ptr<const Eigen::MatrixXd> adjacency;
    if (doc.contains("adjacency")) {
      const auto size = doc["adjacency"].at("size").get<Eigen::Index>();
      const auto data = doc["adjacency"].at("data").get<std::vector<double>>();
      require(static_cast<Eigen::Index>(data.size()) == size * size, ErrorKind::Parse, "adjacency size mismatch");
      adjacency = std::make_shared<const Eigen::MatrixXd>(Eigen::Map<const Eigen::MatrixXd>(data.data(), size, size));
    }
    for (const auto& item : doc.at("samples")) {
      GraphSample s;
      s.source_video = item.at("source_video").get<std::string>();
      s.window_start = item.at("window_start").get<int>();
      s.label = item.at("label").get<int>();
      const auto nodes = item.at("nodes").get<Eigen::Index>();
      const auto dims = item.at("dims").get<Eigen::Index>();
      for (const auto& f : item.at("frames")) {
        const auto data = f.get<std::vector<double>>();
        require(static_cast<Eigen::Index>(data.size()) == nodes * dims, ErrorKind::Parse, "frame size mismatch");
        s.frames.emplace_back(Eigen::Map<const Eigen::MatrixXd>(data.data(), nodes, dims));
      }
      const auto& mask = item.at("mask");
      s.mask = MaskArray::Constant(nodes, static_cast<Eigen::Index>(s.frames.size()), false);
      require(static_cast<Eigen::Index>(mask.size()) == nodes, ErrorKind::Parse, "mask row count mismatch");
      for (Eigen::Index n = 0; n < nodes; ++n) {
        const auto row = mask[n].get<std::string>();
        require(static_cast<Eigen::Index>(row.size()) == s.mask.cols(), ErrorKind::Parse, "mask length mismatch");
        for (Eigen::Index t = 0; t < s.mask.cols(); ++t) s.mask(n, t) = row[t] == '1';
      }
      s.adjacency = adjacency;
      samples.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, "malformed dataset cache '" + path.string() + "': " + e.what());
  }
  return samples;
}

}  // namespace gaitlab
