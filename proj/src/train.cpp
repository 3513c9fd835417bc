#include "gaitlab/train.hpp"

#include "gaitlab/error.hpp"
#include "gaitlab/random.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>

namespace gaitlab {

void TrainConfig::validate() const {
  require(learning_rate > 0.0 && weight_decay >= 0.0 && batch_size > 0 && max_epochs > 0 && patience > 0,
          ErrorKind::Config, "training parameters must be positive");
  require(patience < max_epochs, ErrorKind::Config, "patience must be smaller than max_epochs");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0, ErrorKind::Config,
          "AdamW betas must lie in [0, 1) and epsilon must be positive");
}

bool EarlyStopping::update(int epoch, double loss) {
  if (!seen_ || loss < best_loss_ - min_improvement_) {
    seen_ = true;
    best_loss_ = loss;
    best_epoch_ = epoch;
    stale_ = 0;
    return true;
  }
  ++stale_;
  return false;
}

TrainingLog run_epochs(const TrainConfig& config, const std::function<EpochLosses(int)>& run_epoch,
                       const std::function<void(int)>& on_best) {
  TrainingLog log;
  EarlyStopping stopper(config.patience, config.min_improvement);
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const EpochLosses losses = run_epoch(epoch);
    log.epochs.push_back({epoch, losses.train_loss, losses.validation_loss});
    if (stopper.update(epoch, losses.validation_loss)) on_best(epoch);
    if (stopper.should_stop()) break;
  }
  log.best_epoch = stopper.best_epoch();
  return log;
}

double sample_loss(const ModelParams<double>& params, const GraphSample& sample, ModelParams<double>* grads) {
  require(sample.adjacency != nullptr, ErrorKind::Contract, "sample has no adjacency");
  Tape<double> tape;
  const auto bound = bind(tape, params, grads != nullptr);
  const auto adjacency = tape.constant(*sample.adjacency);
  const auto logit = forward<double>(bound, adjacency, sample.frames);
  const auto loss = bce_with_logits(logit, static_cast<double>(sample.label));
  if (grads) {
    tape.backward(loss);
    accumulate_gradients(bound, *grads);
  }
  return loss.value()(0, 0);
}

std::vector<double> predict(const ModelParams<double>& params, std::span<const GraphSample> samples) {
  std::vector<double> logits;
  logits.reserve(samples.size());
  Tape<double> tape;
  for (const auto& sample : samples) {
    tape.clear();
    const auto bound = bind(tape, params, false);
    const auto logit = forward<double>(bound, tape.constant(*sample.adjacency), sample.frames);
    logits.push_back(logit.value()(0, 0));
  }
  return logits;
}

double mean_loss(const ModelParams<double>& params, std::span<const GraphSample> samples) {
  require(!samples.empty(), ErrorKind::Protocol, "loss over an empty sample set");
  double total = 0.0;
  for (const auto& sample : samples) total += sample_loss(params, sample, nullptr);
  return total / static_cast<double>(samples.size());
}

TrainResult train_model(std::span<const GraphSample> train, std::span<const GraphSample> validation,
                        const TrainConfig& config, const ModelParams<double>& initial) {
  config.validate();
  require(!train.empty(), ErrorKind::Protocol, "training split is empty");
  require(!validation.empty(), ErrorKind::Protocol, "validation split is empty");
  initial.check_shapes();

  ModelParams<double> params = initial;
  TrainResult result{initial, {}};
  AdamW optimizer(config.optimizer());
  std::vector<std::size_t> order(train.size());

  auto run_epoch = [&](int epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(config.seed, "shuffle", {static_cast<std::uint64_t>(epoch)}));
    rng.shuffle(order);

    double train_total = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(config.batch_size));
      auto grads = ModelParams<double>::zeros(params.input_dim, params.hidden);
      for (std::size_t i = begin; i < end; ++i) train_total += sample_loss(params, train[order[i]], &grads);
      const double inv = 1.0 / static_cast<double>(end - begin);
      grads.visit([&](const std::string&, Eigen::MatrixXd& g) { g *= inv; });
      optimizer.step(params, grads);
      require(params.all_finite(), ErrorKind::Numerical, "parameters became non-finite during training");
    }
    return EpochLosses{train_total / static_cast<double>(train.size()), mean_loss(params, validation)};
  };

  result.log = run_epochs(config, run_epoch, [&](int) { result.params = params; });
  return result;
}

void write_training_log(const TrainingLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out << "epoch,train_loss,validation_loss\n";
  char line[128];
  for (const auto& e : log.epochs) {
    std::snprintf(line, sizeof line, "%d,%.9f,%.9f\n", e.epoch, e.train_loss, e.validation_loss);
    out << line;
  }
}

}  // namespace gaitlab
