#ifndef GAITLAB_AUTODIFF_HPP
#define GAITLAB_AUTODIFF_HPP

#include "gaitlab/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace gaitlab {

template <typename Scalar>
class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; only valid while the
/// tape it came from is alive and not cleared.
template <typename Scalar>
class Var {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Var() = default;
  Tape<Scalar>& tape() const { return *tape_; }
  std::size_t index() const { return index_; }
  const Matrix& value() const { return tape_->value(*this); }
  const Matrix& grad() const { return tape_->grad(*this); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }

 private:
  friend class Tape<Scalar>;
  Var(Tape<Scalar>* tape, std::size_t index) : tape_(tape), index_(index) {}
  Tape<Scalar>* tape_ = nullptr;
  std::size_t index_ = 0;
};

/// Records a computation over dense matrices and replays it in reverse to
/// accumulate exact gradients of a 1x1 result. Gradients only flow into
/// nodes that depend on a `variable`.
template <typename Scalar>
class Tape {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using V = Var<Scalar>;

  enum class Op {
    Leaf,
    MatMul,
    Add,
    AddRow,
    Sub,
    Mul,
    OneMinus,
    Scale,
    Sigmoid,
    Tanh,
    Relu,
    HCat,
    GruCell,
    MeanRows,
    Sum,
    Concat,
    Softmax,
    WeightedSum,
    Bce,
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  V constant(Matrix value) { return push(Op::Leaf, std::move(value), false, {}, {}); }
  V variable(Matrix value) { return push(Op::Leaf, std::move(value), true, {}, {}); }

  const Matrix& value(V v) const { return nodes_[v.index_].value; }

  /// Accumulated gradient; zeros when nothing flowed into the node.
  const Matrix& grad(V v) {
    auto& node = nodes_[v.index_];
    if (node.grad.size() == 0) node.grad = Matrix::Zero(node.value.rows(), node.value.cols());
    return node.grad;
  }

  std::size_t size() const { return nodes_.size(); }
  bool differentiated() const { return differentiated_; }

  void clear() {
    nodes_.clear();
    differentiated_ = false;
  }

  V matmul(V a, V b) {
    check_shape(value(a).cols() == value(b).rows(), "matmul", a, b);
    return push(Op::MatMul, value(a) * value(b), any_grad(a, b), {a, b});
  }
  V add(V a, V b) {
    check_same(a, b, "add");
    return push(Op::Add, value(a) + value(b), any_grad(a, b), {a, b});
  }
  V sub(V a, V b) {
    check_same(a, b, "sub");
    return push(Op::Sub, value(a) - value(b), any_grad(a, b), {a, b});
  }
  V mul(V a, V b) {
    check_same(a, b, "mul");
    return push(Op::Mul, value(a).cwiseProduct(value(b)), any_grad(a, b), {a, b});
  }
  /// a + 1 * row, broadcasting a 1xC row over every row of a.
  V add_row(V a, V row) {
    check_shape(value(row).rows() == 1 && value(row).cols() == value(a).cols(), "add_row", a, row);
    Matrix out = value(a);
    out.rowwise() += value(row).row(0);
    return push(Op::AddRow, std::move(out), any_grad(a, row), {a, row});
  }
  V one_minus(V a) { return push(Op::OneMinus, (Scalar(1) - value(a).array()).matrix(), needs(a), {a}); }
  V scale(V a, Scalar c) { return push(Op::Scale, c * value(a), needs(a), {a}, {}, c); }
  V sigmoid(V a) {
    // 1 / (1 + e^-x) saturates cleanly to 0 or 1 in IEEE arithmetic.
    Matrix out = (Scalar(1) + (-value(a).array()).exp()).inverse().matrix();
    return push(Op::Sigmoid, std::move(out), needs(a), {a});
  }
  V tanh(V a) { return push(Op::Tanh, tanh_of(value(a)), needs(a), {a}); }
  V relu(V a) { return push(Op::Relu, value(a).cwiseMax(Scalar(0)), needs(a), {a}); }
  /// One GRU step as a single node (saves the per-gate intermediates):
  ///   j = [x, h], z = sigmoid(j Wz + bz), r = sigmoid(j Wr + br),
  ///   c = tanh([x, r * h] Wc + bc), h' = z * h + (1 - z) * c.
  /// Weights are 2H x H over the concatenated input, biases 1 x H rows.
  V gru_cell(V h, V x, V wz, V bz, V wr, V br, V wc, V bc) {
    const Matrix& hv = value(h);
    const Matrix& xv = value(x);
    const Eigen::Index width = xv.cols() + hv.cols();
    check_shape(xv.rows() == hv.rows(), "gru_cell", x, h);
    for (V w : {wz, wr, wc})
      check_shape(value(w).rows() == width && value(w).cols() == hv.cols(), "gru_cell weight", w, h);
    for (V b : {bz, br, bc})
      check_shape(value(b).rows() == 1 && value(b).cols() == hv.cols(), "gru_cell bias", b, h);

    Matrix joined(hv.rows(), width);
    joined << xv, hv;
    auto gate = [&](V w, V b) {
      Matrix a(hv.rows(), hv.cols());
      a.noalias() = joined * value(w);
      a.rowwise() += value(b).row(0);
      return Matrix((Scalar(1) + (-a.array()).exp()).inverse().matrix());
    };
    Matrix z = gate(wz, bz);
    Matrix r = gate(wr, br);
    Matrix gated(hv.rows(), width);
    gated << xv, r.cwiseProduct(hv);
    Matrix c(hv.rows(), hv.cols());
    c.noalias() = gated * value(wc);
    c.rowwise() += value(bc).row(0);
    c = tanh_of(c);
    Matrix out = z.cwiseProduct(hv) + (Scalar(1) - z.array()).matrix().cwiseProduct(c);

    bool grad_flag = any_grad(h, x);
    for (V p : {wz, bz, wr, br, wc, bc}) grad_flag = grad_flag || needs(p);
    const auto v = push(Op::GruCell, std::move(out), grad_flag, {h, x},
                        {wz.index_, bz.index_, wr.index_, br.index_, wc.index_, bc.index_});
    nodes_.back().saved = {std::move(joined), std::move(gated), std::move(z), std::move(r), std::move(c)};
    return v;
  }
  V hcat(V a, V b) {
    check_shape(value(a).rows() == value(b).rows(), "hcat", a, b);
    Matrix out(value(a).rows(), value(a).cols() + value(b).cols());
    out << value(a), value(b);
    return push(Op::HCat, std::move(out), any_grad(a, b), {a, b});
  }
  /// Column means, 1xC.
  V mean_rows(V a) { return push(Op::MeanRows, value(a).colwise().mean(), needs(a), {a}); }
  /// Sum of all entries, 1x1.
  V sum(V a) {
    Matrix out(1, 1);
    out(0, 0) = value(a).sum();
    return push(Op::Sum, std::move(out), needs(a), {a});
  }
  /// Joins 1x1 nodes into a 1xT row.
  V concat(std::span<const V> scalars) {
    require(!scalars.empty(), ErrorKind::Contract, "concat of zero scalars");
    Matrix out(1, static_cast<Eigen::Index>(scalars.size()));
    bool grad_flag = false;
    std::vector<std::size_t> inputs;
    for (std::size_t i = 0; i < scalars.size(); ++i) {
      require(value(scalars[i]).size() == 1, ErrorKind::Contract, "concat expects 1x1 inputs");
      out(0, static_cast<Eigen::Index>(i)) = value(scalars[i])(0, 0);
      grad_flag = grad_flag || needs(scalars[i]);
      inputs.push_back(scalars[i].index_);
    }
    return push(Op::Concat, std::move(out), grad_flag, {}, std::move(inputs));
  }
  /// Softmax across a 1xT row.
  V softmax(V a) {
    require(value(a).rows() == 1 && value(a).cols() >= 1, ErrorKind::Contract, "softmax expects a non-empty row");
    const Scalar peak = value(a).maxCoeff();
    Matrix out = (value(a).array() - peak).exp().matrix();
    out /= out.sum();
    return push(Op::Softmax, std::move(out), needs(a), {a});
  }
  /// sum_t weights(0, t) * terms[t].
  V weighted_sum(V weights, std::span<const V> terms) {
    require(value(weights).rows() == 1 && value(weights).cols() == static_cast<Eigen::Index>(terms.size()),
            ErrorKind::Contract, "weighted_sum needs one weight per term");
    require(!terms.empty(), ErrorKind::Contract, "weighted_sum of zero terms");
    Matrix out = Matrix::Zero(value(terms[0]).rows(), value(terms[0]).cols());
    bool grad_flag = needs(weights);
    std::vector<std::size_t> inputs;
    for (std::size_t t = 0; t < terms.size(); ++t) {
      check_same(terms[0], terms[t], "weighted_sum");
      out += value(weights)(0, static_cast<Eigen::Index>(t)) * value(terms[t]);
      grad_flag = grad_flag || needs(terms[t]);
      inputs.push_back(terms[t].index_);
    }
    return push(Op::WeightedSum, std::move(out), grad_flag, {weights}, std::move(inputs));
  }
  /// Binary cross-entropy on a 1x1 logit:
  ///   max(l, 0) - l * y + log(1 + exp(-|l|)).
  V bce_with_logits(V logit, Scalar label) {
    require(value(logit).size() == 1, ErrorKind::Contract, "bce_with_logits expects a 1x1 logit");
    require(label == Scalar(0) || label == Scalar(1), ErrorKind::Contract, "label must be 0 or 1");
    const Scalar l = value(logit)(0, 0);
    Matrix out(1, 1);
    out(0, 0) = std::max(l, Scalar(0)) - l * label + std::log1p(std::exp(-std::abs(l)));
    return push(Op::Bce, std::move(out), needs(logit), {logit}, {}, label);
  }

  /// Reverse sweep from a 1x1 node. One sweep per recording.
  void backward(V loss) {
    require(!differentiated_, ErrorKind::Contract, "backward called twice on one recording");
    require(value(loss).size() == 1, ErrorKind::Contract, "backward needs a scalar (1x1) loss");
    // A NaN or infinite entry makes the sum non-finite; so does a sum past
    // the largest double, which is just as unusable. Much cheaper than allFinite.
    for (const auto& node : nodes_)
      require(std::isfinite(node.value.sum()), ErrorKind::Numerical, "non-finite value in forward pass");
    differentiated_ = true;
    nodes_[loss.index_].grad = Matrix::Ones(1, 1);
    for (std::size_t i = loss.index_ + 1; i-- > 0;) {
      Node& node = nodes_[i];
      if (!node.needs_grad || node.grad.size() == 0) continue;
      propagate(i);
    }
    for (const auto& node : nodes_)
      if (node.op == Op::Leaf && node.needs_grad && node.grad.size() != 0)
        require(node.grad.allFinite(), ErrorKind::Numerical, "non-finite gradient");
  }

  /// tanh through the vectorized exponential, 1 - 2 / (e^2x + 1). The
  /// library tanh is scalar only and several times slower; this form is off
  /// by at most a few ulps of 1 in absolute terms and saturates to +-1.
  static Matrix tanh_of(const Matrix& x) {
    return (Scalar(1) - Scalar(2) / ((Scalar(2) * x.array()).exp() + Scalar(1))).matrix();
  }

  static Scalar stable_sigmoid(Scalar x) {
    if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
    const Scalar e = std::exp(x);
    return e / (Scalar(1) + e);
  }

 private:
  struct Node {
    Op op;
    Matrix value;
    Matrix grad;
    bool needs_grad;
    std::size_t in[2];
    std::vector<std::size_t> extra;
    Scalar aux;
    std::vector<Matrix> saved;
  };

  V push(Op op, Matrix value, bool needs_grad, std::initializer_list<V> in, std::vector<std::size_t> extra = {},
         Scalar aux = Scalar(0)) {
    Node node{op, std::move(value), Matrix(), needs_grad, {0, 0}, std::move(extra), aux, {}};
    std::size_t k = 0;
    for (const auto& v : in) {
      require(v.tape_ == this, ErrorKind::Contract, "variable belongs to another tape");
      node.in[k++] = v.index_;
    }
    nodes_.push_back(std::move(node));
    return V(this, nodes_.size() - 1);
  }

  bool needs(V v) const { return nodes_[v.index_].needs_grad; }
  bool any_grad(V a, V b) const { return needs(a) || needs(b); }

  void check_same(V a, V b, const char* op) const {
    check_shape(value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols(), op, a, b);
  }
  void check_shape(bool ok, const char* op, V a, V b) const {
    if (ok) return;
    fail(ErrorKind::Contract, std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b));
  }
  std::string shape(V v) const {
    return std::to_string(value(v).rows()) + "x" + std::to_string(value(v).cols());
  }

  template <typename Expr>
  void accumulate(std::size_t target, const Expr& delta) {
    Node& node = nodes_[target];
    if (!node.needs_grad) return;
    if (node.grad.size() == 0) node.grad = delta;
    else node.grad += delta;
  }

  // Products go straight into the gradient buffer; no temporary.
  template <typename L, typename R>
  void accumulate_product(std::size_t target, const L& lhs, const R& rhs) {
    Node& node = nodes_[target];
    if (node.grad.size() == 0) node.grad.noalias() = lhs * rhs;
    else node.grad.noalias() += lhs * rhs;
  }

  void propagate(std::size_t i) {
    // References into nodes_ stay valid: the sweep never grows the tape.
    const Node& node = nodes_[i];
    const Matrix& g = node.grad;
    const std::size_t a = node.in[0], b = node.in[1];
    switch (node.op) {
      case Op::Leaf:
        break;
      case Op::MatMul:
        if (nodes_[a].needs_grad) accumulate_product(a, g, nodes_[b].value.transpose());
        if (nodes_[b].needs_grad) accumulate_product(b, nodes_[a].value.transpose(), g);
        break;
      case Op::Add:
        accumulate(a, g);
        accumulate(b, g);
        break;
      case Op::Sub:
        accumulate(a, g);
        accumulate(b, -g);
        break;
      case Op::Mul:
        if (nodes_[a].needs_grad) accumulate(a, g.cwiseProduct(nodes_[b].value));
        if (nodes_[b].needs_grad) accumulate(b, g.cwiseProduct(nodes_[a].value));
        break;
      case Op::AddRow:
        accumulate(a, g);
        if (nodes_[b].needs_grad) accumulate(b, g.colwise().sum());
        break;
      case Op::OneMinus:
        accumulate(a, -g);
        break;
      case Op::Scale:
        accumulate(a, node.aux * g);
        break;
      case Op::Sigmoid:
        accumulate(a, (g.array() * node.value.array() * (Scalar(1) - node.value.array())).matrix());
        break;
      case Op::Tanh:
        accumulate(a, (g.array() * (Scalar(1) - node.value.array().square())).matrix());
        break;
      case Op::Relu:
        accumulate(a, (g.array() * (nodes_[a].value.array() > Scalar(0)).template cast<Scalar>()).matrix());
        break;
      case Op::GruCell:
        propagate_gru(node);
        break;
      case Op::HCat: {
        const Eigen::Index left = nodes_[a].value.cols();
        if (nodes_[a].needs_grad) accumulate(a, g.leftCols(left));
        if (nodes_[b].needs_grad) accumulate(b, g.rightCols(g.cols() - left));
        break;
      }
      case Op::MeanRows: {
        const Eigen::Index rows = nodes_[a].value.rows();
        accumulate(a, Matrix::Ones(rows, 1) * (g / Scalar(rows)));
        break;
      }
      case Op::Sum:
        accumulate(a, Matrix::Constant(nodes_[a].value.rows(), nodes_[a].value.cols(), g(0, 0)));
        break;
      case Op::Concat:
        for (std::size_t t = 0; t < node.extra.size(); ++t)
          accumulate(node.extra[t], Matrix::Constant(1, 1, g(0, static_cast<Eigen::Index>(t))));
        break;
      case Op::Softmax: {
        const Scalar dot = g.cwiseProduct(node.value).sum();
        accumulate(a, (node.value.array() * (g.array() - dot)).matrix());
        break;
      }
      case Op::WeightedSum: {
        const Matrix& w = nodes_[a].value;
        if (nodes_[a].needs_grad) {
          Matrix gw(1, w.cols());
          for (std::size_t t = 0; t < node.extra.size(); ++t)
            gw(0, static_cast<Eigen::Index>(t)) = g.cwiseProduct(nodes_[node.extra[t]].value).sum();
          accumulate(a, gw);
        }
        for (std::size_t t = 0; t < node.extra.size(); ++t)
          if (nodes_[node.extra[t]].needs_grad) accumulate(node.extra[t], w(0, static_cast<Eigen::Index>(t)) * g);
        break;
      }
      case Op::Bce: {
        const Scalar l = nodes_[a].value(0, 0);
        accumulate(a, Matrix::Constant(1, 1, g(0, 0) * (stable_sigmoid(l) - node.aux)));
        break;
      }
    }
  }

  void propagate_gru(const Node& node) {
    const Matrix& g = node.grad;
    const std::size_t h = node.in[0], x = node.in[1];
    const std::size_t wz = node.extra[0], bz = node.extra[1], wr = node.extra[2], br = node.extra[3],
                      wc = node.extra[4], bc = node.extra[5];
    const Matrix& joined = node.saved[0];
    const Matrix& gated = node.saved[1];
    const Matrix& z = node.saved[2];
    const Matrix& r = node.saved[3];
    const Matrix& c = node.saved[4];
    const Matrix& hv = nodes_[h].value;
    const Eigen::Index xw = nodes_[x].value.cols();

    const Matrix dc = (g.array() * (Scalar(1) - z.array()) * (Scalar(1) - c.array().square())).matrix();
    const Matrix dz = (g.array() * (hv - c).array() * z.array() * (Scalar(1) - z.array())).matrix();
    if (nodes_[wc].needs_grad) accumulate_product(wc, gated.transpose(), dc);
    if (nodes_[bc].needs_grad) accumulate(bc, dc.colwise().sum());
    Matrix dgated(gated.rows(), gated.cols());
    dgated.noalias() = dc * nodes_[wc].value.transpose();
    const auto drh = dgated.rightCols(hv.cols());
    const Matrix dr = (drh.array() * hv.array() * r.array() * (Scalar(1) - r.array())).matrix();

    if (nodes_[wz].needs_grad) accumulate_product(wz, joined.transpose(), dz);
    if (nodes_[bz].needs_grad) accumulate(bz, dz.colwise().sum());
    if (nodes_[wr].needs_grad) accumulate_product(wr, joined.transpose(), dr);
    if (nodes_[br].needs_grad) accumulate(br, dr.colwise().sum());
    if (!nodes_[h].needs_grad && !nodes_[x].needs_grad) return;
    Matrix djoined(joined.rows(), joined.cols());
    djoined.noalias() = dz * nodes_[wz].value.transpose();
    djoined.noalias() += dr * nodes_[wr].value.transpose();
    if (nodes_[x].needs_grad) accumulate(x, djoined.leftCols(xw) + dgated.leftCols(xw));
    if (nodes_[h].needs_grad)
      accumulate(h, djoined.rightCols(hv.cols()) + (g.array() * z.array() + drh.array() * r.array()).matrix());
  }

  std::vector<Node> nodes_;
  bool differentiated_ = false;
};

// Expression-style wrappers.

template <typename S> Var<S> matmul(Var<S> a, Var<S> b) { return a.tape().matmul(a, b); }
template <typename S> Var<S> operator+(Var<S> a, Var<S> b) { return a.tape().add(a, b); }
template <typename S> Var<S> operator-(Var<S> a, Var<S> b) { return a.tape().sub(a, b); }
template <typename S> Var<S> cwise_product(Var<S> a, Var<S> b) { return a.tape().mul(a, b); }
template <typename S> Var<S> add_row(Var<S> a, Var<S> row) { return a.tape().add_row(a, row); }
template <typename S> Var<S> one_minus(Var<S> a) { return a.tape().one_minus(a); }
template <typename S> Var<S> scale(Var<S> a, S c) { return a.tape().scale(a, c); }
template <typename S> Var<S> sigmoid(Var<S> a) { return a.tape().sigmoid(a); }
template <typename S> Var<S> tanh(Var<S> a) { return a.tape().tanh(a); }
template <typename S> Var<S> relu(Var<S> a) { return a.tape().relu(a); }
template <typename S> Var<S> hcat(Var<S> a, Var<S> b) { return a.tape().hcat(a, b); }
template <typename S> Var<S> mean_rows(Var<S> a) { return a.tape().mean_rows(a); }
template <typename S> Var<S> sum(Var<S> a) { return a.tape().sum(a); }
template <typename S> Var<S> softmax(Var<S> a) { return a.tape().softmax(a); }
template <typename S> Var<S> bce_with_logits(Var<S> logit, S label) { return logit.tape().bce_with_logits(logit, label); }

}  // namespace gaitlab

#endif  // GAITLAB_AUTODIFF_HPP
