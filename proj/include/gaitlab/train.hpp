#ifndef GAITLAB_TRAIN_HPP
#define GAITLAB_TRAIN_HPP

#include "gaitlab/dataset.hpp"
#include "gaitlab/model.hpp"
#include "gaitlab/optimizer.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace gaitlab {

struct TrainConfig {
  double learning_rate = 0.002;
  double weight_decay = 0.01;
  int batch_size = 8;
  int max_epochs = 30;
  int patience = 6;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// A validation loss counts as progress only when it beats the best so far by more than this.
  double min_improvement = 1e-6;
  std::uint64_t seed = 0;

  AdamWConfig optimizer() const { return {learning_rate, weight_decay, beta1, beta2, epsilon}; }
  void validate() const;
};

/// Patience counter over validation losses.
class EarlyStopping {
 public:
  EarlyStopping(int patience, double min_improvement) : patience_(patience), min_improvement_(min_improvement) {}

  /// Records an epoch's loss; true when it is a new best.
  bool update(int epoch, double loss);
  bool should_stop() const { return stale_ >= patience_; }
  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }

 private:
  int patience_;
  double min_improvement_;
  int stale_ = 0;
  int best_epoch_ = 0;
  double best_loss_ = 0.0;
  bool seen_ = false;
};

struct EpochLog {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double validation_loss = 0.0;
};

struct TrainingLog {
  std::vector<EpochLog> epochs;
  int best_epoch = 0;
  int epochs_run() const { return static_cast<int>(epochs.size()); }
};

struct EpochLosses {
  double train_loss = 0.0;
  double validation_loss = 0.0;
};

/// Epoch loop with early stopping. `run_epoch(epoch)` trains one epoch and
/// reports its losses; `on_best(epoch)` fires whenever the validation loss
/// is a new best so the caller can snapshot its state.
TrainingLog run_epochs(const TrainConfig& config, const std::function<EpochLosses(int)>& run_epoch,
                       const std::function<void(int)>& on_best);

struct TrainResult {
  ModelParams<double> params;  // lowest validation loss checkpoint
  TrainingLog log;
};

/// Mini-batch AdamW on mean BCE, train samples reshuffled every epoch.
TrainResult train_model(std::span<const GraphSample> train, std::span<const GraphSample> validation,
                        const TrainConfig& config, const ModelParams<double>& initial);

/// Logit per sample.
std::vector<double> predict(const ModelParams<double>& params, std::span<const GraphSample> samples);

/// Mean BCE over the samples.
double mean_loss(const ModelParams<double>& params, std::span<const GraphSample> samples);

/// Loss of one sample; adds its parameter gradients into `grads` when given.
double sample_loss(const ModelParams<double>& params, const GraphSample& sample, ModelParams<double>* grads);

void write_training_log(const TrainingLog& log, const std::filesystem::path& path);

}  // namespace gaitlab

#endif  // GAITLAB_TRAIN_HPP
