#include "gaitlab/checkpoint.hpp"
#include "gaitlab/error.hpp"
#include "gaitlab/model.hpp"
#include "gaitlab/train.hpp"

#include "gradcheck.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>

using namespace gaitlab;
using Matrix = Eigen::MatrixXd;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Contract;
}

Matrix random_matrix(Rng& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (auto& x : m.reshaped()) x = rng.uniform(-1.0, 1.0);
  return m;
}

double logit_of(const ModelParams<double>& p, const Matrix& adjacency, const std::vector<Matrix>& frames) {
  Tape<double> tape;
  return forward<double>(bind(tape, p, false), tape.constant(adjacency), frames).value()(0, 0);
}

GraphSample random_sample(Rng& rng, int n, int steps, int dims, int label) {
  GraphSample s;
  Matrix edges = Matrix::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) edges(i, i + 1) = edges(i + 1, i) = 1.0;
  s.adjacency = std::make_shared<const Matrix>(normalized_adjacency(edges));
  for (int k = 0; k < steps; ++k) s.frames.push_back(random_matrix(rng, n, dims));
  s.mask = MaskArray::Constant(n, steps, true);
  s.label = label;
  s.source_video = "v";
  return s;
}

}  // namespace

TEST_CASE("backward basics") {
  Rng rng(1);
  const Matrix w = random_matrix(rng, 3, 4);
  {
    Tape<double> tape;
    const auto v = tape.variable(w);
    tape.backward(sum(v));
    CHECK(v.grad() == Matrix::Ones(3, 4));
  }
  {
    Tape<double> tape;
    const auto v = tape.variable(w);
    const auto loss = sum(cwise_product(v, v));
    tape.backward(loss);
    CHECK(v.grad().isApprox(2.0 * w, 1e-15));
    CHECK(kind_of([&] { tape.backward(loss); }) == ErrorKind::Contract);
  }
  {
    Tape<double> tape;
    const auto v = tape.variable(w);
    CHECK(kind_of([&] { tape.backward(v); }) == ErrorKind::Contract);
  }
  {
    Tape<double> tape;
    Matrix bad = w;
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    const auto v = tape.variable(bad);
    CHECK(kind_of([&] { tape.backward(sum(v)); }) == ErrorKind::Numerical);
  }
  {
    // +inf and -inf in one node cancel to NaN in a sum; still rejected.
    Tape<double> tape;
    Matrix bad = w;
    bad(0, 0) = std::numeric_limits<double>::infinity();
    bad(1, 0) = -std::numeric_limits<double>::infinity();
    const auto v = tape.variable(w);
    const auto loss = sum(cwise_product(v, tape.constant(Matrix::Zero(3, 4)) + tape.constant(bad)));
    CHECK(kind_of([&] { tape.backward(loss); }) == ErrorKind::Numerical);
  }
  {
    Tape<double> tape;
    CHECK(kind_of([&] { matmul(tape.variable(w), tape.variable(w)); }) == ErrorKind::Contract);
  }
}

TEST_CASE("tanh node matches the library tanh") {
  const Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(40001, -40.0, 40.0);
  Tape<double> tape;
  const Matrix out = tanh(tape.constant(x.matrix())).value();
  CHECK((out.array() - x.tanh()).abs().maxCoeff() < 1e-15);
  CHECK(out.minCoeff() == -1.0);
  CHECK(out.maxCoeff() == 1.0);
}

TEST_CASE("graph convolution examples") {
  Tape<double> tape;
  Matrix x(2, 1);
  x << 2, 0;
  const auto out = gcn_forward(tape.constant(x), tape.constant(Matrix::Constant(2, 2, 0.5)),
                               tape.constant(Matrix::Ones(1, 1)), tape.constant(Matrix::Zero(1, 1)));
  CHECK(out.value() == Matrix::Ones(2, 1));

  Rng rng(2);
  const Matrix nonneg = random_matrix(rng, 4, 3).cwiseAbs();
  const auto identity = gcn_forward(tape.constant(nonneg), tape.constant(Matrix::Identity(4, 4)),
                                    tape.constant(Matrix::Identity(3, 3)), tape.constant(Matrix::Zero(1, 3)));
  CHECK(identity.value() == nonneg);
  const auto zero = gcn_forward(tape.constant(random_matrix(rng, 4, 3)), tape.constant(Matrix::Identity(4, 4)),
                                tape.constant(Matrix::Zero(3, 5)), tape.constant(Matrix::Zero(1, 5)));
  CHECK(zero.value().isZero(0.0));
}

TEST_CASE("recurrent step examples") {
  Tape<double> tape;
  const int h = 3;
  const auto zero_w = [&] { return tape.constant(Matrix::Zero(2 * h, h)); };
  const auto zero_b = [&] { return tape.constant(Matrix::Zero(1, h)); };
  const GruWeights<double> zeros{zero_w(), zero_b(), zero_w(), zero_b(), zero_w(), zero_b()};
  const auto x = tape.constant(Matrix::Constant(2, h, 0.7));
  CHECK(gru_step(tape.constant(Matrix::Zero(2, h)), x, zeros).value().isZero(0.0));
  Rng rng(3);
  const Matrix v = random_matrix(rng, 2, h);
  CHECK(gru_step(tape.constant(v), x, zeros).value() == 0.5 * v);

  // H = 1, N = 1 by hand.
  const double xs = 0.4, hs = -0.3;
  Matrix wz(2, 1), wr(2, 1), wc(2, 1);
  wz << 0.5, -1.2;
  wr << 0.8, 0.3;
  wc << -0.7, 1.1;
  const double bz = 0.1, br = -0.2, bc = 0.05;
  const double z = 1.0 / (1.0 + std::exp(-(0.5 * xs - 1.2 * hs + bz)));
  const double r = 1.0 / (1.0 + std::exp(-(0.8 * xs + 0.3 * hs + br)));
  const double c = std::tanh(-0.7 * xs + 1.1 * r * hs + bc);
  const double expected = z * hs + (1.0 - z) * c;
  const auto s = [&](double value) { return tape.constant(Matrix::Constant(1, 1, value)); };
  const GruWeights<double> w{tape.constant(wz), s(bz), tape.constant(wr), s(br), tape.constant(wc), s(bc)};
  CHECK(std::abs(gru_step(s(hs), s(xs), w).value()(0, 0) - expected) < 1e-12);
}

TEST_CASE("temporal attention examples") {
  Tape<double> tape;
  const auto proj = tape.constant(Matrix::Ones(1, 1));
  std::vector<Var<double>> states{tape.constant(Matrix::Zero(1, 1)),
                                  tape.constant(Matrix::Constant(1, 1, std::log(3.0)))};
  const auto a = temporal_attention<double>(states, proj);
  CHECK(std::abs(a.weights.value()(0, 0) - 0.25) < 1e-12);
  CHECK(std::abs(a.weights.value()(0, 1) - 0.75) < 1e-12);

  Rng rng(4);
  const Matrix hstate = random_matrix(rng, 3, 2);
  std::vector<Var<double>> same(4, tape.constant(hstate));
  const auto u = temporal_attention<double>(same, tape.constant(random_matrix(rng, 2, 1)));
  for (int t = 0; t < 4; ++t) CHECK(std::abs(u.weights.value()(0, t) - 0.25) < 1e-15);
  CHECK(u.context.value().isApprox(hstate, 1e-14));

  std::vector<Var<double>> one{tape.constant(hstate)};
  const auto single = temporal_attention<double>(one, tape.constant(random_matrix(rng, 2, 1)));
  CHECK(single.weights.value()(0, 0) == 1.0);
  CHECK(single.context.value() == hstate);
  CHECK(kind_of([&] { temporal_attention<double>({}, proj); }) == ErrorKind::Contract);

  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Var<double>> st;
    const int steps = 1 + static_cast<int>(rng.below(8));
    for (int t = 0; t < steps; ++t) st.push_back(tape.constant(5.0 * random_matrix(rng, 3, 2)));
    const auto w = temporal_attention<double>(st, tape.constant(3.0 * random_matrix(rng, 2, 1))).weights.value();
    CHECK(std::abs(w.sum() - 1.0) < 1e-12);
    CHECK(w.minCoeff() > 0.0);
  }
}

TEST_CASE("loss examples") {
  const auto bce = [](double logit, double label) {
    Tape<double> tape;
    return bce_with_logits(tape.constant(Matrix::Constant(1, 1, logit)), label).value()(0, 0);
  };
  CHECK(bce(0.0, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(bce(0.0, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(bce(100.0, 1.0) < 1e-40);
  CHECK(std::abs(bce(2.0, 0.0) - (2.0 + std::log1p(std::exp(-2.0)))) < 1e-15);
  CHECK(std::abs(bce(2.0, 0.0) - 2.126928) < 1e-6);
  CHECK(kind_of([&] { bce(0.0, 0.5); }) == ErrorKind::Contract);
}

TEST_CASE("whole model") {
  Rng rng(5);
  const auto sample = random_sample(rng, 6, 5, 3, 1);
  const auto zero = ModelParams<double>::zeros(3, 8);
  CHECK(logit_of(zero, *sample.adjacency, sample.frames) == 0.0);
  CHECK(std::abs(sample_loss(zero, sample, nullptr) - std::log(2.0)) < 1e-15);

  const auto p = ModelParams<double>::initialized(3, 8, 11);
  CHECK(logit_of(p, *sample.adjacency, sample.frames) == logit_of(p, *sample.adjacency, sample.frames));
  CHECK(kind_of([&] { sample_loss(ModelParams<double>::zeros(2, 8), sample, nullptr); }) == ErrorKind::Contract);

  for (int trial = 0; trial < 50; ++trial) {
    auto q = ModelParams<double>::initialized(3, 2, rng.next());
    q.visit([&](const std::string&, Matrix& m) { m = random_matrix(rng, m.rows(), m.cols()); });
    const auto s = random_sample(rng, 3, 2, 3, 0);
    CHECK(std::abs(logit_of(q, *s.adjacency, s.frames) - oracle::model_logit(q, *s.adjacency, s.frames)) < 1e-12);
  }
}

TEST_CASE("initialization is shared across input widths") {
  const auto a = ModelParams<double>::initialized(2, 8, 99);
  const auto b = ModelParams<double>::initialized(3, 8, 99);
  CHECK(a.update_weight == b.update_weight);
  CHECK(a.head_weight == b.head_weight);
  CHECK(a.attention == b.attention);
  CHECK(a.gcn_bias.isZero(0.0));
  const double bound = 1.0 / std::sqrt(2.0);
  CHECK(a.gcn_weight.cwiseAbs().maxCoeff() <= bound);
}

TEST_CASE("finite-difference gradients") {
  for (const auto& e : gradcheck::run(25, 2024)) {
    INFO(e.layer);
    CHECK(e.max_relative_error < 1e-4);
  }
}

TEST_CASE("checkpoint round trip") {
  const auto p = ModelParams<double>::initialized(3, 5, 7);
  const auto path = std::filesystem::temp_directory_path() / "gaitlab_checkpoint_test.json";
  save_checkpoint(p, path);
  const auto q = load_checkpoint(path);
  CHECK(q.input_dim == 3);
  CHECK(q.hidden == 5);
  std::vector<Matrix> a, b;
  p.visit([&](const std::string&, const Matrix& m) { a.push_back(m); });
  q.visit([&](const std::string&, const Matrix& m) { b.push_back(m); });
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  CHECK(kind_of([] { checkpoint_from_json("{\"format_version\": 99}"); }) != ErrorKind::Contract);
}
