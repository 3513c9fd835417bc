#include "gaitlab/optimizer.hpp"

#include "gaitlab/error.hpp"

#include <cmath>

namespace gaitlab {

void adamw_update(Eigen::MatrixXd& theta, const Eigen::MatrixXd& grad, Moments& state, long step,
                  const AdamWConfig& config) {
  require(step >= 1, ErrorKind::Contract, "AdamW steps are counted from 1");
  require(grad.rows() == theta.rows() && grad.cols() == theta.cols(), ErrorKind::Contract,
          "AdamW gradient shape differs from the parameter");
  if (state.first.size() == 0) state.first = Eigen::MatrixXd::Zero(theta.rows(), theta.cols());
  if (state.second.size() == 0) state.second = Eigen::MatrixXd::Zero(theta.rows(), theta.cols());
  require(state.first.rows() == theta.rows() && state.first.cols() == theta.cols() &&
              state.second.rows() == theta.rows() && state.second.cols() == theta.cols(),
          ErrorKind::Contract, "AdamW state shape differs from the parameter");

  state.first = config.beta1 * state.first + (1.0 - config.beta1) * grad;
  state.second = config.beta2 * state.second + (1.0 - config.beta2) * grad.cwiseProduct(grad);
  const double first_correction = 1.0 - std::pow(config.beta1, static_cast<double>(step));
  const double second_correction = 1.0 - std::pow(config.beta2, static_cast<double>(step));
  const auto m_hat = state.first.array() / first_correction;
  const auto v_hat = state.second.array() / second_correction;
  theta.array() -= config.learning_rate * (m_hat / (v_hat.sqrt() + config.epsilon) + config.weight_decay * theta.array());
}

void AdamW::step(ModelParams<double>& params, const ModelParams<double>& grads) {
  std::vector<const Eigen::MatrixXd*> g;
  grads.visit([&](const std::string&, const Eigen::MatrixXd& m) { g.push_back(&m); });
  ++step_;
  std::size_t k = 0;
  params.visit([&](const std::string& name, Eigen::MatrixXd& theta) {
    require(k < g.size(), ErrorKind::Contract, "gradient is missing tensor '" + name + "'");
    if (moments_.size() <= k) moments_.emplace_back();
    adamw_update(theta, *g[k], moments_[k], step_, config_);
    ++k;
  });
}

}  // namespace gaitlab
