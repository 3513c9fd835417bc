#include "gaitlab/experiment.hpp"

#include "gaitlab/dataset.hpp"
#include "gaitlab/error.hpp"
#include "gaitlab/metrics.hpp"
#include "gaitlab/model.hpp"
#include "gaitlab/pose_io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>
#include <unordered_set>

namespace gaitlab {

void ExperimentConfig::validate() const {
  require(!angle_groups.empty(), ErrorKind::Config, "angle_groups must not be empty");
  auto groups = angle_groups;
  std::sort(groups.begin(), groups.end());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    require(groups[i].lo >= 0.0 && groups[i].lo < groups[i].hi && groups[i].hi <= 360.0, ErrorKind::Config,
            "angle group " + groups[i].label() + " must satisfy 0 <= lo < hi <= 360");
    if (i > 0)
      require(groups[i - 1].hi <= groups[i].lo, ErrorKind::Config,
              "angle groups " + groups[i - 1].label() + " and " + groups[i].label() + " overlap");
  }
  require(!timesteps.empty(), ErrorKind::Config, "timesteps must not be empty");
  for (int t : timesteps) require(t >= 1, ErrorKind::Config, "timesteps must be positive");
  require(!dimensionalities.empty(), ErrorKind::Config, "dimensionalities must not be empty");
  for (int d : dimensionalities) require(d == 2 || d == 3, ErrorKind::Config, "dimensionalities must be 2 or 3");
  require(k_folds >= 2, ErrorKind::Config, "k_folds must be at least 2");
  require(validation_fraction > 0.0 && validation_fraction < 1.0, ErrorKind::Config,
          "validation_fraction must lie in (0, 1)");
  require(videos_per_class >= k_folds, ErrorKind::Config, "videos_per_class must be at least k_folds");
  require(duration_s > 0.0 && fps > 0, ErrorKind::Config, "duration_s and fps must be positive");
  require(hidden >= 1, ErrorKind::Config, "hidden must be positive");
  train.validate();
}

std::uint64_t fold_split_seed(std::uint64_t master_seed) { return derive_seed(master_seed, "folds"); }
std::uint64_t validation_split_seed(std::uint64_t master_seed, int fold) {
  return derive_seed(master_seed, "validation", {static_cast<std::uint64_t>(fold)});
}
std::uint64_t model_init_seed(std::uint64_t master_seed) { return derive_seed(master_seed, "model-init"); }
std::uint64_t train_shuffle_seed(std::uint64_t master_seed, int fold) {
  return derive_seed(master_seed, "train", {static_cast<std::uint64_t>(fold)});
}

void check_no_leakage(const FoldResult& result) {
  const std::unordered_set<std::string> test(result.test_videos.begin(), result.test_videos.end());
  const std::unordered_set<std::string> validation(result.validation_videos.begin(), result.validation_videos.end());
  for (const auto& v : result.train_videos)
    require(!test.contains(v) && !validation.contains(v), ErrorKind::Protocol, "video '" + v + "' leaks out of train");
  for (const auto& v : result.validation_videos)
    require(!test.contains(v), ErrorKind::Protocol, "video '" + v + "' is in both validation and test");
}

namespace {

struct Video {
  std::string id;
  int label = 0;
  PoseSequence sequence;
};

std::vector<Video> load_group(const ExperimentConfig& config, const AngleGroup& group,
                              const std::filesystem::path& pose_dir) {
  const auto dir = pose_dir / ("group_" + group.label());
  require(std::filesystem::is_directory(dir), ErrorKind::Io,
          "pose files for angle group " + group.label() + " are missing (no directory " + dir.string() + ")");
  const int expected_frames = static_cast<int>(std::llround(config.duration_s * config.fps));
  std::vector<Video> videos;
  for (GaitClass c : {GaitClass::Healthy, GaitClass::Unhealthy}) {
    for (int i = 0; i < config.videos_per_class; ++i) {
      const auto index = static_cast<std::size_t>(i);
      const auto path = pose_dir / pose_file_path(group, c, index);
      require(std::filesystem::exists(path), ErrorKind::Io,
              "pose file for angle group " + group.label() + " is missing: " + path.string());
      PoseSequence seq = read_pose_file(path);
      require(seq.fps == config.fps, ErrorKind::Validation,
              path.string() + " was recorded at " + std::to_string(seq.fps) + " fps, config expects " +
                  std::to_string(config.fps));
      require(seq.frame_count() == expected_frames, ErrorKind::Validation,
              path.string() + " has " + std::to_string(seq.frame_count()) + " frames, config expects " +
                  std::to_string(expected_frames));
      require(seq.label == c, ErrorKind::Validation, path.string() + " carries the wrong label");
      videos.push_back({video_id(group, c, index), static_cast<int>(c), std::move(seq)});
    }
  }
  return videos;
}

// Samples of one (group, timestep, dims) grouped by video.
using SampleIndex = std::map<std::string, std::vector<GraphSample>>;

std::vector<GraphSample> gather(const SampleIndex& index, const std::vector<std::string>& videos) {
  std::vector<GraphSample> out;
  for (const auto& v : videos) {
    const auto& s = index.at(v);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

struct Job {
  CellKey cell;
  int fold = 0;
  std::shared_ptr<const SampleIndex> samples;
  const std::vector<Video>* videos = nullptr;
};

std::string log_name(const CellKey& cell, int fold) {
  return "train_" + cell.group.label() + "_T" + std::to_string(cell.timestep) + "_" + std::to_string(cell.dims) +
         "d_fold" + std::to_string(fold) + ".csv";
}

}  // namespace

std::vector<FoldResult> run_experiment(const ExperimentConfig& config, const SkeletonTopology& topology,
                                       const std::filesystem::path& pose_dir, const ExperimentOptions& options) {
  config.validate();
  require(options.jobs >= 1, ErrorKind::Config, "jobs must be at least 1");
  const auto adjacency = std::make_shared<const Eigen::MatrixXd>(build_normalized_adjacency(topology));

  const std::uint64_t fold_seed = fold_split_seed(config.master_seed);
  const std::uint64_t init_seed = model_init_seed(config.master_seed);

  std::vector<std::vector<Video>> videos;
  for (const auto& group : config.angle_groups) videos.push_back(load_group(config, group, pose_dir));

  std::vector<Job> jobs;
  for (std::size_t g = 0; g < config.angle_groups.size(); ++g) {
    for (int t : config.timesteps) {
      for (int d : config.dimensionalities) {
        auto index = std::make_shared<SampleIndex>();
        for (const auto& v : videos[g])
          (*index)[v.id] = build_samples(v.sequence, v.id, t, d, topology, adjacency, config.look_at);
        for (int f = 0; f < config.k_folds; ++f) jobs.push_back({{config.angle_groups[g], t, d}, f, index, &videos[g]});
      }
    }
  }

  if (!options.log_dir.empty()) std::filesystem::create_directories(options.log_dir);

  auto run_job = [&](const Job& job) {
    std::vector<std::string> ids;
    std::vector<int> labels;
    std::unordered_map<std::string, int> label_of;
    for (const auto& v : *job.videos) {
      ids.push_back(v.id);
      labels.push_back(v.label);
      label_of[v.id] = v.label;
    }
    const FoldSplit split = stratified_kfold(ids, labels, config.k_folds, fold_seed)[job.fold];
    std::vector<int> train_labels;
    for (const auto& v : split.train_videos) train_labels.push_back(label_of.at(v));
    const ValidationSplit val = split_validation(
        split.train_videos, train_labels, config.validation_fraction,
        validation_split_seed(config.master_seed, job.fold));

    FoldResult result;
    result.cell = job.cell;
    result.fold = job.fold;
    result.train_videos = val.train_videos;
    result.validation_videos = val.validation_videos;
    result.test_videos = split.test_videos;
    check_no_leakage(result);

    const auto train = gather(*job.samples, result.train_videos);
    const auto validation = gather(*job.samples, result.validation_videos);
    const auto test = gather(*job.samples, result.test_videos);
    require(!train.empty() && !validation.empty() && !test.empty(), ErrorKind::Protocol,
            "timestep " + std::to_string(job.cell.timestep) + " leaves a split without samples");

    TrainConfig tc = config.train;
    tc.seed = train_shuffle_seed(config.master_seed, job.fold);
    const auto init = ModelParams<double>::initialized(job.cell.dims, config.hidden, init_seed);
    const TrainResult trained = train_model(train, validation, tc, init);
    result.log = trained.log;
    result.epochs_run = trained.log.epochs_run();
    result.best_epoch = trained.log.best_epoch;

    const auto scores = predict(trained.params, test);
    std::vector<int> test_labels;
    for (const auto& s : test) test_labels.push_back(s.label);
    const bool both = std::count(test_labels.begin(), test_labels.end(), 1) > 0 &&
                      std::count(test_labels.begin(), test_labels.end(), 0) > 0;
    if (both) result.auroc = auroc(scores, test_labels);

    if (!options.log_dir.empty()) write_training_log(result.log, options.log_dir / log_name(job.cell, job.fold));
    return result;
  };

  std::vector<std::optional<FoldResult>> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex mutex;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      {
        std::lock_guard lock(mutex);
        if (failure) return;
      }
      try {
        FoldResult r = run_job(jobs[i]);
        std::lock_guard lock(mutex);
        ++done;
        if (options.progress) options.progress(r, done, jobs.size());
        results[i] = std::move(r);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const int threads = std::min<int>(options.jobs, static_cast<int>(jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<FoldResult> out;
  out.reserve(results.size());
  for (auto& r : results) out.push_back(std::move(*r));
  std::sort(out.begin(), out.end(), [](const FoldResult& a, const FoldResult& b) { return a.key() < b.key(); });
  return out;
}

}  // namespace gaitlab
