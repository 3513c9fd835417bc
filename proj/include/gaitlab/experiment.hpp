#ifndef GAITLAB_EXPERIMENT_HPP
#define GAITLAB_EXPERIMENT_HPP

#include "gaitlab/simulate.hpp"
#include "gaitlab/skeleton.hpp"
#include "gaitlab/train.hpp"

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gaitlab {

struct ExperimentConfig {
  std::vector<AngleGroup> angle_groups;
  std::vector<int> timesteps{30, 15, 10, 5};
  std::vector<int> dimensionalities{2, 3};
  int k_folds = 5;
  double validation_fraction = 0.2;
  int videos_per_class = 15;
  double duration_s = 7.0;
  int fps = 25;
  std::uint64_t master_seed = 0;
  int hidden = 32;
  Vec3 look_at = CameraConfig{}.look_at;
  TrainConfig train;

  void validate() const;
};

/// One aggregated table cell.
struct CellKey {
  AngleGroup group;
  int timestep = 0;
  int dims = 0;

  int overlap() const { return timestep / 2; }
  auto operator<=>(const CellKey&) const = default;
};

struct FoldResult {
  CellKey cell;
  int fold = 0;
  std::optional<double> auroc;  // empty when the test fold holds one class
  int epochs_run = 0;
  int best_epoch = 0;
  TrainingLog log;
  std::vector<std::string> train_videos;
  std::vector<std::string> validation_videos;
  std::vector<std::string> test_videos;

  auto key() const { return std::tie(cell, fold); }
};

struct ExperimentOptions {
  int jobs = 1;
  std::filesystem::path log_dir;  // per-fold training logs; skipped when empty
  std::function<void(const FoldResult&, std::size_t done, std::size_t total)> progress;
};

// Seeds used by run_experiment. None depends on the group, timestep or
// dimensionality, so every cell shares one partition and one initial model.
std::uint64_t fold_split_seed(std::uint64_t master_seed);
std::uint64_t validation_split_seed(std::uint64_t master_seed, int fold);
std::uint64_t model_init_seed(std::uint64_t master_seed);
std::uint64_t train_shuffle_seed(std::uint64_t master_seed, int fold);

/// Every (group, timestep, dims, fold) cell: video-level stratified split,
/// validation hold-out, fresh model from one fixed init seed, AUROC of the
/// window logits on the test videos. Results are sorted by key.
std::vector<FoldResult> run_experiment(const ExperimentConfig& config, const SkeletonTopology& topology,
                                       const std::filesystem::path& pose_dir, const ExperimentOptions& options = {});

/// Throws a Protocol error if any test video also appears in the train or
/// validation split, or a train video in the validation split.
void check_no_leakage(const FoldResult& result);

}  // namespace gaitlab

#endif  // GAITLAB_EXPERIMENT_HPP
