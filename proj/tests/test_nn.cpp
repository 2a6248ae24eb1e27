#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "qreadout/errors.hpp"
#include "qreadout/nn/adam.hpp"
#include "qreadout/nn/loss.hpp"
#include "qreadout/nn/network.hpp"
#include "qreadout/nn/train.hpp"
#include "qreadout/rng.hpp"

using namespace qreadout;
using namespace qreadout::nn;

namespace {

// A random network of 1-3 layers, widths 1-3, with activations drawn from
// sigmoid/tanh/linear and optionally a softmax head.
DenseNetwork random_net(Rng& rng, bool softmax_head) {
  const std::size_t depth = 1 + rng.below(3);
  std::vector<LayerSpec> layers;
  std::size_t in = 1 + rng.below(3);
  const Activation hidden[] = {Activation::sigmoid, Activation::tanh, Activation::linear};
  for (std::size_t l = 0; l < depth; ++l) {
    const bool last = l + 1 == depth;
    std::size_t out = 1 + rng.below(3);
    Activation a = hidden[rng.below(3)];
    if (last && softmax_head) {
      out = 2 + rng.below(2);
      a = Activation::softmax;
    }
    layers.push_back({in, out, a});
    in = out;
  }
  DenseNetwork net = DenseNetwork::glorot(layers, rng);
  for (std::size_t l = 0; l < net.depth(); ++l) {
    for (Eigen::Index i = 0; i < net.biases(l).size(); ++i) net.biases(l)(i) = rng.uniform(-0.5, 0.5);
  }
  return net;
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("forward examples") {
  DenseNetwork zero({{3, 4, Activation::tanh}, {4, 2, Activation::tanh}});
  const Eigen::VectorXd out = zero.predict(Eigen::VectorXd::Constant(3, 0.7));
  CHECK(out.isZero(0.0));

  DenseNetwork soft({{2, 3, Activation::softmax}});
  const Eigen::VectorXd p = soft.predict(Eigen::VectorXd::Ones(2));
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(p(i) == doctest::Approx(1.0 / 3).epsilon(1e-15));

  DenseNetwork ident({{2, 2, Activation::linear}});
  ident.weights(0) = Eigen::Matrix2d::Identity();
  const Eigen::VectorXd y = ident.predict(Eigen::Vector2d(3, 4));
  CHECK(y(0) == 3.0);
  CHECK(y(1) == 4.0);

  CHECK_THROWS_AS(ident.predict(Eigen::Vector3d(1, 2, 3)), UsageError);
  CHECK_THROWS_AS(DenseNetwork({{2, 3, Activation::tanh}, {4, 2, Activation::tanh}}), UsageError);
  CHECK_THROWS_AS(DenseNetwork({{2, 3, Activation::softmax}, {3, 2, Activation::tanh}}), UsageError);
}

TEST_CASE("softmax stays a probability vector for extreme logits") {
  DenseNetwork soft({{3, 3, Activation::softmax}});
  soft.weights(0) = Eigen::Matrix3d::Identity();
  const Eigen::VectorXd p = soft.predict(Eigen::Vector3d(800, -800, 799));
  CHECK(std::abs(p.sum() - 1.0) < 1e-12);
  CHECK(p(0) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
  CHECK(p.allFinite());
}

TEST_CASE("loss values") {
  const std::vector<double> zeros{0, 0}, ones{1, 1};
  CHECK(mse_loss(zeros, zeros) == 0.0);
  CHECK(mse_loss(zeros, ones) == doctest::Approx(1.0));
  CHECK(mse_loss(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 0}) == doctest::Approx(3.0));
  CHECK_THROWS_AS(mse_loss(zeros, std::vector<double>{1}), UsageError);

  CHECK(cross_entropy_loss(std::vector<double>{0, 1}, std::vector<double>{0, 1}) <= 1e-11);
  CHECK(cross_entropy_loss(std::vector<double>{1, 0}, std::vector<double>{0.5, 0.5}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));
  const double third = 1.0 / 3;
  CHECK(cross_entropy_loss(std::vector<double>{0, 1, 0}, std::vector<double>{third, third, third}) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-14));
  CHECK_THROWS_AS(cross_entropy_loss(std::vector<double>{1, 0}, std::vector<double>{0.6, 0.6}), UsageError);
  CHECK_THROWS_AS(cross_entropy_loss(std::vector<double>{0.5, 0.5}, std::vector<double>{0.5, 0.5}), UsageError);
}

TEST_CASE("batch loss agrees with the scalar loss functions") {
  Rng rng(31);
  DenseNetwork net = DenseNetwork::glorot({{3, 4, Activation::tanh}, {4, 3, Activation::softmax}}, rng);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 5);
  Eigen::MatrixXd y = one_hot({0, 2, 1, 1, 0}, 3);
  double expect = 0;
  for (Eigen::Index c = 0; c < 5; ++c) {
    const Eigen::VectorXd p = net.predict(x.col(c));
    const Eigen::VectorXd t = y.col(c);
    expect += cross_entropy_loss(std::span<const double>(t.data(), 3), std::span<const double>(p.data(), 3));
  }
  CHECK(batch_loss(net, x, y, LossKind::cross_entropy) == doctest::Approx(expect / 5).epsilon(1e-13));
}

TEST_CASE("zero-residual batch has zero gradient") {
  DenseNetwork net({{2, 2, Activation::linear}});
  net.weights(0) << 1, 2, 3, 4;
  net.biases(0) << 0.5, -0.5;
  Eigen::MatrixXd x(2, 3);
  x << 1, 2, 3, 4, 5, 6;
  const Eigen::MatrixXd y = net.predict_batch(x);
  const BatchGradient g = backprop(net, x, y, LossKind::mse);
  CHECK(g.loss == 0.0);
  CHECK(g.grads.max_abs() == 0.0);
}

TEST_CASE("scalar linear layer gradient matches hand differentiation") {
  DenseNetwork net({{1, 1, Activation::linear}});
  const double w = 0.7, b = -0.2, x = 1.5, y = 2.0;
  net.weights(0)(0, 0) = w;
  net.biases(0)(0) = b;
  const BatchGradient g = backprop(net, Eigen::MatrixXd::Constant(1, 1, x), Eigen::MatrixXd::Constant(1, 1, y),
                                   LossKind::mse);
  CHECK(g.grads.weights[0](0, 0) == doctest::Approx(2 * x * (w * x + b - y)).epsilon(1e-14));
  CHECK(g.grads.biases[0](0) == doctest::Approx(2 * (w * x + b - y)).epsilon(1e-14));
  CHECK(grad_check(net, Eigen::VectorXd::Constant(1, x), Eigen::VectorXd::Constant(1, y), LossKind::mse) < 1e-10);
}

TEST_CASE("backprop matches central differences on 100 random networks") {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(derive_seed({0xbac, seed}));
    const bool ce = seed % 2 == 1;
    DenseNetwork net = random_net(rng, ce);
    const auto n = static_cast<Eigen::Index>(1 + rng.below(4));
    Eigen::MatrixXd x(net.input_dim(), n);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1, 1);
    Eigen::MatrixXd y;
    if (ce) {
      std::vector<int> cls;
      for (Eigen::Index c = 0; c < n; ++c) cls.push_back(static_cast<int>(rng.below(net.output_dim())));
      y = one_hot(cls, net.output_dim());
    } else {
      y.resize(net.output_dim(), n);
      for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.uniform(-1, 1);
    }
    const double err = grad_check_batch(net, x, y, ce ? LossKind::cross_entropy : LossKind::mse);
    worst = std::max(worst, err);
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("flat parameters round-trip in W-then-b row-major order") {
  DenseNetwork net({{2, 2, Activation::tanh}, {2, 1, Activation::sigmoid}});
  net.weights(0) << 1, 2, 3, 4;
  net.biases(0) << 5, 6;
  net.weights(1) << 7, 8;
  net.biases(1) << 9;
  CHECK(net.flat_parameters() == std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9});
  DenseNetwork copy({{2, 2, Activation::tanh}, {2, 1, Activation::sigmoid}});
  copy.set_flat_parameters(net.flat_parameters());
  CHECK(copy == net);
  CHECK(net.parameter_count() == 9);
  CHECK(DenseNetwork::concat(net.slice(0, 1), net.slice(1, 2)) == net);
}

TEST_CASE("Adam: zero gradients are a fixed point") {
  AdamState adam(3);
  std::vector<double> p{1, -2, 3};
  const std::vector<double> g(3, 0.0);
  adam.step(p, g);
  adam.step(p, g);
  CHECK(p == std::vector<double>{1, -2, 3});
  CHECK(adam.first_moment() == g);
  CHECK(adam.second_moment() == g);
}

TEST_CASE("Adam: one and two steps against the closed form") {
  const AdamConfig c;
  // Independent evaluation of the update rule for a constant gradient g = 1.
  double p = 0, m = 0, v = 0;
  std::vector<double> expected;
  for (int t = 1; t <= 2; ++t) {
    m = c.beta1 * m + (1 - c.beta1);
    v = c.beta2 * v + (1 - c.beta2);
    const double mh = m / (1 - std::pow(c.beta1, t));
    const double vh = v / (1 - std::pow(c.beta2, t));
    p -= c.lr * mh / (std::sqrt(vh) + c.epsilon);
    expected.push_back(p);
  }
  AdamState adam(1);
  std::vector<double> param{0.0};
  const std::vector<double> grad{1.0};
  adam.step(param, grad);
  CHECK(std::abs(param[0] - expected[0]) < 1e-12);
  CHECK(std::abs(param[0] - (-9.99999990e-4)) < 1e-12);
  adam.step(param, grad);
  CHECK(std::abs(param[0] - expected[1]) < 1e-12);
  CHECK(std::abs(param[0] - (-2e-3 / (1 + 1e-8))) < 1e-12);
  CHECK(adam.step_count() == 2);
}

TEST_CASE("early stopping rule") {
  using D = EarlyStopping::Direction;
  {
    EarlyStopping es(2, D::minimize);
    CHECK_FALSE(es.update(1.0));
    CHECK_FALSE(es.update(2.0));
    CHECK(es.update(2.0));
    CHECK(es.epoch() == 3);
    CHECK(es.best_epoch() == 1);
  }
  {
    // Ties are not improvements.
    EarlyStopping es(2, D::maximize);
    CHECK_FALSE(es.update(0.5));
    CHECK_FALSE(es.update(0.6));
    CHECK_FALSE(es.update(0.6));
    CHECK(es.update(0.6));
    CHECK(es.epoch() == 4);
    CHECK(es.best_epoch() == 2);
  }
  {
    // One stale epoch followed by an improvement resets the count.
    EarlyStopping es(2, D::minimize);
    for (double v : {5.0, 4.0, 4.5, 3.0, 3.5}) CHECK_FALSE(es.update(v));
    CHECK(es.update(3.2));
    CHECK(es.best_epoch() == 4);
    CHECK(es.best_value() == 3.0);
  }
}

TEST_CASE("training memorises a single sample and restores the best epoch") {
  Rng rng(5);
  DenseNetwork net = DenseNetwork::glorot({{4, 6, Activation::tanh}, {6, 4, Activation::sigmoid}}, rng);
  Dataset data;
  data.inputs = Eigen::Vector4d(0.1, 0.9, 0.4, 0.6);
  data.targets = Eigen::Vector4d(0.2, 0.8, 0.3, 0.7);
  TrainOptions opt;
  opt.patience = 50;
  opt.max_epochs = 20000;
  opt.adam.lr = 1e-2;
  opt.seed = 1;
  const TrainLog log = train(net, data, data, LossKind::mse, Monitor::loss, opt);
  CHECK(batch_loss(net, data.inputs, data.targets, LossKind::mse) < 1e-4);
  CHECK(log.best_epoch >= 1);
  CHECK(log.stop_epoch >= log.best_epoch);
  CHECK(log.epoch_loss.size() == log.stop_epoch);
  CHECK(batch_loss(net, data.inputs, data.targets, LossKind::mse) == doctest::Approx(log.monitor[log.best_epoch - 1]));
}

TEST_CASE("training is deterministic") {
  Rng r(8);
  Dataset data;
  data.inputs = Eigen::MatrixXd::Random(3, 64);
  std::vector<int> cls;
  for (Eigen::Index c = 0; c < 64; ++c) cls.push_back(data.inputs(0, c) > 0 ? 1 : 0);
  data.targets = one_hot(cls, 2);
  auto run = [&] {
    Rng rng(9);
    DenseNetwork net = DenseNetwork::glorot({{3, 6, Activation::tanh}, {6, 2, Activation::softmax}}, rng);
    TrainOptions opt;
    opt.seed = 3;
    opt.max_epochs = 30;
    const TrainLog log = train(net, data, data, LossKind::cross_entropy, Monitor::accuracy, opt);
    return std::make_pair(net, log.epoch_loss);
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("non-finite loss raises a numeric error") {
  DenseNetwork net({{1, 1, Activation::linear}});
  net.weights(0)(0, 0) = 1e300;
  Dataset data;
  data.inputs = Eigen::MatrixXd::Constant(1, 2, 1e300);
  data.targets = Eigen::MatrixXd::Zero(1, 2);
  CHECK_THROWS_AS(train(net, data, data, LossKind::mse, Monitor::loss, TrainOptions{}), NumericError);
}

TEST_CASE("argmax ties go to the lowest index") {
  CHECK(argmax(Eigen::Vector3d(0.2, 0.4, 0.4)) == 1);
  CHECK(argmax(Eigen::Vector3d(0.5, 0.5, 0.0)) == 0);
}

}
