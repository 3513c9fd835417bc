#ifndef GAITLAB_OPTIMIZER_HPP
#define GAITLAB_OPTIMIZER_HPP

#include "gaitlab/model.hpp"

#include <Eigen/Dense>

#include <vector>

namespace gaitlab {

struct AdamWConfig {
  double learning_rate = 0.002;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First and second moments for one tensor.
struct Moments {
  Eigen::MatrixXd first;
  Eigen::MatrixXd second;
};

/// One decoupled-weight-decay Adam update of a single tensor at step
/// `step` (1-based):
///   m = b1 m + (1 - b1) g,  v = b2 v + (1 - b2) g^2,
///   theta -= lr * (m / (1 - b1^t) / (sqrt(v / (1 - b2^t)) + eps) + wd * theta).
void adamw_update(Eigen::MatrixXd& theta, const Eigen::MatrixXd& grad, Moments& state, long step,
                  const AdamWConfig& config);

/// AdamW over every tensor of a model.
class AdamW {
 public:
  explicit AdamW(const AdamWConfig& config) : config_(config) {}

  void step(ModelParams<double>& params, const ModelParams<double>& grads);
  long steps_taken() const { return step_; }

 private:
  AdamWConfig config_;
  std::vector<Moments> moments_;
  long step_ = 0;
};

}  // namespace gaitlab

#endif  // GAITLAB_OPTIMIZER_HPP
