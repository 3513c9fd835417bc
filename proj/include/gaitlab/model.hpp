#ifndef GAITLAB_MODEL_HPP
#define GAITLAB_MODEL_HPP

#include "gaitlab/autodiff.hpp"
#include "gaitlab/error.hpp"
#include "gaitlab/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gaitlab {

/// Weights of the spatiotemporal classifier: one graph convolution feeding a
/// GRU cell per frame, attention pooling over time, mean pooling over nodes
/// and a linear head producing one logit. Biases and the attention
/// projection are stored as rows/columns so every tensor is a matrix.
template <typename Scalar>
struct ModelParams {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  int input_dim = 3;
  int hidden = 32;

  Matrix gcn_weight;        // D x H
  Matrix gcn_bias;          // 1 x H
  Matrix update_weight;     // 2H x H
  Matrix update_bias;       // 1 x H
  Matrix reset_weight;      // 2H x H
  Matrix reset_bias;        // 1 x H
  Matrix candidate_weight;  // 2H x H
  Matrix candidate_bias;    // 1 x H
  Matrix attention;         // H x 1
  Matrix head_weight;       // H x 1
  Matrix head_bias;         // 1 x 1

  static ModelParams zeros(int input_dim, int hidden) {
    require(input_dim >= 1 && hidden >= 1, ErrorKind::Contract, "model dimensions must be positive");
    ModelParams p;
    p.input_dim = input_dim;
    p.hidden = hidden;
    p.gcn_weight = Matrix::Zero(input_dim, hidden);
    p.gcn_bias = Matrix::Zero(1, hidden);
    p.update_weight = Matrix::Zero(2 * hidden, hidden);
    p.update_bias = Matrix::Zero(1, hidden);
    p.reset_weight = Matrix::Zero(2 * hidden, hidden);
    p.reset_bias = Matrix::Zero(1, hidden);
    p.candidate_weight = Matrix::Zero(2 * hidden, hidden);
    p.candidate_bias = Matrix::Zero(1, hidden);
    p.attention = Matrix::Zero(hidden, 1);
    p.head_weight = Matrix::Zero(hidden, 1);
    p.head_bias = Matrix::Zero(1, 1);
    return p;
  }

  /// Weight matrices uniform in +-1/sqrt(fan_in), biases zero. Every tensor
  /// draws from its own child seed, so tensors whose shape does not depend
  /// on the input width start identical for 2D and 3D models.
  static ModelParams initialized(int input_dim, int hidden, std::uint64_t seed) {
    ModelParams p = zeros(input_dim, hidden);
    std::uint64_t k = 0;
    p.visit([&](const std::string& name, Matrix& m) {
      const std::uint64_t slot = k++;
      if (name.ends_with("bias")) return;
      Rng rng(derive_seed(seed, "init", {slot}));
      const double bound = 1.0 / std::sqrt(static_cast<double>(m.rows()));
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<Scalar>(rng.uniform(-bound, bound));
    });
    return p;
  }

  template <typename F>
  void visit(F&& f) {
    f("gcn_weight", gcn_weight);
    f("gcn_bias", gcn_bias);
    f("update_weight", update_weight);
    f("update_bias", update_bias);
    f("reset_weight", reset_weight);
    f("reset_bias", reset_bias);
    f("candidate_weight", candidate_weight);
    f("candidate_bias", candidate_bias);
    f("attention", attention);
    f("head_weight", head_weight);
    f("head_bias", head_bias);
  }

  template <typename F>
  void visit(F&& f) const {
    const_cast<ModelParams*>(this)->visit([&](const std::string& name, Matrix& m) { f(name, std::as_const(m)); });
  }

  bool all_finite() const {
    bool ok = true;
    visit([&](const std::string&, const Matrix& m) { ok = ok && m.allFinite(); });
    return ok;
  }

  /// Throws Contract errors when shapes disagree with input_dim and hidden.
  void check_shapes() const {
    const ModelParams expected = zeros(input_dim, hidden);
    std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes;
    expected.visit([&](const std::string&, const Matrix& m) { shapes.emplace_back(m.rows(), m.cols()); });
    std::size_t k = 0;
    visit([&](const std::string& name, const Matrix& m) {
      const auto [r, c] = shapes[k++];
      require(m.rows() == r && m.cols() == c, ErrorKind::Contract, "parameter '" + name + "' has the wrong shape");
    });
  }
};

/// Model parameters recorded on a tape.
template <typename Scalar>
struct BoundParams {
  Var<Scalar> gcn_weight, gcn_bias;
  Var<Scalar> update_weight, update_bias, reset_weight, reset_bias, candidate_weight, candidate_bias;
  Var<Scalar> attention, head_weight, head_bias;
  int input_dim = 0;
  int hidden = 0;
};

/// Records the parameters as variables (`trainable`) or constants.
template <typename Scalar>
BoundParams<Scalar> bind(Tape<Scalar>& tape, const ModelParams<Scalar>& params, bool trainable) {
  auto leaf = [&](const auto& m) { return trainable ? tape.variable(m) : tape.constant(m); };
  BoundParams<Scalar> b;
  b.gcn_weight = leaf(params.gcn_weight);
  b.gcn_bias = leaf(params.gcn_bias);
  b.update_weight = leaf(params.update_weight);
  b.update_bias = leaf(params.update_bias);
  b.reset_weight = leaf(params.reset_weight);
  b.reset_bias = leaf(params.reset_bias);
  b.candidate_weight = leaf(params.candidate_weight);
  b.candidate_bias = leaf(params.candidate_bias);
  b.attention = leaf(params.attention);
  b.head_weight = leaf(params.head_weight);
  b.head_bias = leaf(params.head_bias);
  b.input_dim = params.input_dim;
  b.hidden = params.hidden;
  return b;
}

/// Adds the gradients of bound parameters into `into` (same layout as the model).
template <typename Scalar>
void accumulate_gradients(const BoundParams<Scalar>& bound, ModelParams<Scalar>& into) {
  into.gcn_weight += bound.gcn_weight.grad();
  into.gcn_bias += bound.gcn_bias.grad();
  into.update_weight += bound.update_weight.grad();
  into.update_bias += bound.update_bias.grad();
  into.reset_weight += bound.reset_weight.grad();
  into.reset_bias += bound.reset_bias.grad();
  into.candidate_weight += bound.candidate_weight.grad();
  into.candidate_bias += bound.candidate_bias.grad();
  into.attention += bound.attention.grad();
  into.head_weight += bound.head_weight.grad();
  into.head_bias += bound.head_bias.grad();
}

/// relu(A X W + b) for node features X (N x D) and normalized adjacency A.
template <typename Scalar>
Var<Scalar> gcn_forward(Var<Scalar> features, Var<Scalar> adjacency, Var<Scalar> weight, Var<Scalar> bias) {
  return relu(add_row(matmul(matmul(adjacency, features), weight), bias));
}

template <typename Scalar>
struct GruWeights {
  Var<Scalar> update_weight, update_bias, reset_weight, reset_bias, candidate_weight, candidate_bias;
};

template <typename Scalar>
GruWeights<Scalar> gru_weights(const BoundParams<Scalar>& p) {
  return {p.update_weight, p.update_bias, p.reset_weight, p.reset_bias, p.candidate_weight, p.candidate_bias};
}

/// z = sigmoid([x, h] Wz + bz), r = sigmoid([x, h] Wr + br),
/// c = tanh([x, r * h] Wc + bc), h' = z * h + (1 - z) * c.
template <typename Scalar>
Var<Scalar> gru_step(Var<Scalar> hidden, Var<Scalar> input, const GruWeights<Scalar>& w) {
  return hidden.tape().gru_cell(hidden, input, w.update_weight, w.update_bias, w.reset_weight, w.reset_bias,
                                w.candidate_weight, w.candidate_bias);
}

template <typename Scalar>
struct AttentionResult {
  Var<Scalar> context;  // N x H
  Var<Scalar> weights;  // 1 x T
};

/// Softmax over time of the projected node-mean hidden state, then the
/// weighted sum of the hidden states.
template <typename Scalar>
AttentionResult<Scalar> temporal_attention(std::span<const Var<Scalar>> states, Var<Scalar> projection) {
  require(!states.empty(), ErrorKind::Contract, "temporal attention needs at least one time step");
  auto& tape = projection.tape();
  std::vector<Var<Scalar>> scores;
  scores.reserve(states.size());
  for (const auto& h : states) scores.push_back(matmul(mean_rows(h), projection));
  const auto weights = softmax(tape.concat(scores));
  return {tape.weighted_sum(weights, states), weights};
}

/// Mean over nodes, then the linear head: one 1x1 logit.
template <typename Scalar>
Var<Scalar> classification_head(Var<Scalar> context, Var<Scalar> weight, Var<Scalar> bias) {
  return matmul(mean_rows(context), weight) + bias;
}

/// Full forward pass over a window given as one N x D matrix per frame.
template <typename Scalar>
Var<Scalar> forward(const BoundParams<Scalar>& p, Var<Scalar> adjacency,
                    std::span<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> frames) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  require(!frames.empty(), ErrorKind::Contract, "forward needs at least one frame");
  auto& tape = adjacency.tape();
  const auto nodes = adjacency.rows();
  const auto gru = gru_weights(p);
  auto h = tape.constant(Matrix::Zero(nodes, p.hidden));
  std::vector<Var<Scalar>> states;
  states.reserve(frames.size());
  for (const auto& frame : frames) {
    require(frame.cols() == p.input_dim, ErrorKind::Contract,
            "sample has " + std::to_string(frame.cols()) + " coordinates per node, model expects " +
                std::to_string(p.input_dim));
    require(frame.rows() == nodes, ErrorKind::Contract, "frame node count differs from the adjacency");
    const auto x = gcn_forward(tape.constant(frame), adjacency, p.gcn_weight, p.gcn_bias);
    h = gru_step(h, x, gru);
    states.push_back(h);
  }
  const auto attended = temporal_attention<Scalar>(states, p.attention);
  return classification_head(attended.context, p.head_weight, p.head_bias);
}

}  // namespace gaitlab

#endif  // GAITLAB_MODEL_HPP
