#ifndef GAITLAB_DATASET_HPP
#define GAITLAB_DATASET_HPP

#include "gaitlab/camera.hpp"
#include "gaitlab/pose.hpp"
#include "gaitlab/skeleton.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace gaitlab {

using MaskArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Feature value written wherever a joint is not visible.
inline constexpr double kMaskValue = -1.0;

/// D^-1/2 (A + I) D^-1/2, with D the degree matrix of A + I.
Eigen::MatrixXd normalized_adjacency(const Eigen::MatrixXd& edges);
Eigen::MatrixXd build_normalized_adjacency(const SkeletonTopology& topology);

struct Window {
  int start = 0;
  int end = 0;  // exclusive

  bool operator==(const Window&) const = default;
};

inline int window_overlap(int timestep) { return timestep / 2; }

/// Windows of `timestep` frames overlapping by floor(timestep / 2).
std::vector<Window> window_sequence(int length, int timestep);

/// Raw window features. Column n * D + d holds coordinate d of node n;
/// `visible` is T x N.
struct RawWindow {
  Eigen::MatrixXd values;
  MaskArray visible;
  int dims = 3;
};

/// 3D: global (x, y, z). 2D: pinhole image coordinates (u, v) seen from the
/// sequence's camera; joints on or behind the camera plane are masked.
RawWindow extract_features(const PoseSequence& sequence, const Window& window, int dims,
                           const std::vector<JointEndpoint>& endpoints, const Vec3& look_at = CameraConfig{}.look_at);

/// Per column: mean and population std over unmasked entries only; unmasked
/// entries become (x - mean) / std, or 0 when std < 1e-8 or fewer than two
/// entries are unmasked; masked entries become kMaskValue.
Eigen::MatrixXd mask_and_standardize(const Eigen::MatrixXd& raw, const MaskArray& mask);

/// Expands a T x N node mask to the T x (N * D) channel layout of RawWindow.
MaskArray channel_mask(const MaskArray& visible, int dims);

struct GraphSample {
  std::vector<Eigen::MatrixXd> frames;  // T frames of N x D standardized features
  MaskArray mask;                       // N x T
  std::shared_ptr<const Eigen::MatrixXd> adjacency;
  int label = 0;
  std::string source_video;
  int window_start = 0;

  int timestep() const { return static_cast<int>(frames.size()); }
  int dims() const { return frames.empty() ? 0 : static_cast<int>(frames.front().cols()); }
};

/// Every window of one sequence as a standardized graph sample.
std::vector<GraphSample> build_samples(const PoseSequence& sequence, const std::string& video_id, int timestep,
                                       int dims, const SkeletonTopology& topology,
                                       std::shared_ptr<const Eigen::MatrixXd> adjacency,
                                       const Vec3& look_at = CameraConfig{}.look_at);

struct FoldSplit {
  int fold_index = 0;
  std::vector<std::string> train_videos;
  std::vector<std::string> validation_videos;
  std::vector<std::string> test_videos;
  std::uint64_t seed = 0;
};

/// Per class: shuffle, then deal videos round-robin into k test folds, the
/// dealing position carried over between classes. Train = everything else.
std::vector<FoldSplit> stratified_kfold(const std::vector<std::string>& videos, const std::vector<int>& labels, int k,
                                        std::uint64_t seed);

struct ValidationSplit {
  std::vector<std::string> train_videos;
  std::vector<std::string> validation_videos;
};

/// Holds out round-half-up(fraction x n) videos, allocated to classes by
/// largest remainder of fraction x n_class (ties to the smaller label).
ValidationSplit split_validation(const std::vector<std::string>& train_videos, const std::vector<int>& labels,
                                 double fraction, std::uint64_t seed);

// Optional on-disk cache of built samples (JSON, versioned).
inline constexpr int kDatasetFormatVersion = 1;
void write_dataset_cache(const std::vector<GraphSample>& samples, const std::filesystem::path& path);
std::vector<GraphSample> read_dataset_cache(const std::filesystem::path& path);

}  // namespace gaitlab

#endif  // GAITLAB_DATASET_HPP
