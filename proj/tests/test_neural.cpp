#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "srcnum/errors.hpp"
#include "srcnum/neural.hpp"

using namespace srcnum;

namespace {

Network hand_set_net() {
  const int sizes[] = {2, 2, 1};
  const Activation acts[] = {Activation::Relu, Activation::Linear};
  Network net = make_network(sizes, acts);
  net.layers[0].weights = {1.0, -1.0, 0.5, 2.0};
  net.layers[0].bias = {0.0, -1.0};
  net.layers[1].weights = {2.0, -1.0};
  net.layers[1].bias = {0.5};
  return net;
}

Network random_net(std::vector<int> sizes, Activation head, std::uint64_t seed) {
  std::vector<Activation> acts(sizes.size() - 1, Activation::Relu);
  acts.back() = head;
  Network net = make_network(sizes, acts);
  Rng rng(seed);
  initialize_parameters(net, rng);
  // Non-zero biases exercise their gradient path too.
  std::normal_distribution<double> n(0.0, 0.1);
  for (auto& layer : net.layers) {
    for (auto& b : layer.bias) b = n(rng);
  }
  return net;
}

double sample_loss(const Network& net, std::span<const double> x, std::span<const double> y, LossKind loss) {
  const auto pred = forward(net, x);
  return loss == LossKind::L2 ? loss_l2(pred, y) : loss_cce(pred, y);
}

// Central differences against the analytic gradient, parameter by parameter.
double max_relative_gradient_error(Network net, std::span<const double> x, std::span<const double> y,
                                   LossKind loss) {
  const double h = 1e-6;
  const Gradients g = backward(net, x, y, loss);
  double worst = 0.0;
  auto check = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double up = sample_loss(net, x, y, loss);
    param = saved - h;
    const double down = sample_loss(net, x, y, loss);
    param = saved;
    const double numeric = (up - down) / (2 * h);
    const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-4});
    worst = std::max(worst, std::abs(numeric - analytic) / denom);
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    for (std::size_t i = 0; i < net.layers[l].weights.size(); ++i) check(net.layers[l].weights[i], g.weights[l][i]);
    for (std::size_t i = 0; i < net.layers[l].bias.size(); ++i) check(net.layers[l].bias[i], g.bias[l][i]);
  }
  return worst;
}

}  // namespace

TEST(Activations, Relu) {
  const std::vector<double> z = {-2.0, 0.0, 3.5};
  EXPECT_EQ(relu(z), (std::vector<double>{0.0, 0.0, 3.5}));
}

TEST(Activations, SoftmaxKnownValues) {
  const std::vector<double> z = {1.0, 2.0, 3.0};
  const auto p = softmax(z);
  EXPECT_NEAR(p[0], 0.09003057317038046, 1e-15);
  EXPECT_NEAR(p[1], 0.24472847105479767, 1e-15);
  EXPECT_NEAR(p[2], 0.6652409557748219, 1e-15);
}

TEST(Activations, SoftmaxNormalizedAndShiftStable) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> z(10);
    for (auto& v : z) v = u(rng);
    const auto p = softmax(z);
    double sum = 0.0;
    for (double v : p) {
      EXPECT_GE(v, 0.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  const std::vector<double> huge = {1000.0, 1000.0};
  const auto p = softmax(huge);
  EXPECT_DOUBLE_EQ(p[0], 0.5);
}

TEST(Loss, CrossEntropyValues) {
  const std::vector<double> pred = {0.2, 0.7, 0.1};
  const std::vector<double> label = {0.0, 1.0, 0.0};
  EXPECT_NEAR(loss_cce(pred, label), 0.35667494393873245, 1e-15);
  const std::vector<double> uniform(10, 0.1);
  std::vector<double> hot(10, 0.0);
  hot[4] = 1.0;
  EXPECT_NEAR(loss_cce(uniform, hot), 2.302585092994046, 1e-14);
}

TEST(Loss, CrossEntropyFloorKeepsZeroProbabilityFinite) {
  const std::vector<double> pred = {1.0, 0.0};
  const std::vector<double> label = {0.0, 1.0};
  EXPECT_NEAR(loss_cce(pred, label), -std::log(1e-12), 1e-9);
}

TEST(Loss, SquaredError) {
  const std::vector<double> pred = {1.5};
  const std::vector<double> label = {2.0};
  EXPECT_EQ(loss_l2(pred, label), 0.25);
  const std::vector<std::vector<double>> preds = {{1.0}, {3.0}};
  const std::vector<std::vector<double>> labels = {{0.0}, {1.0}};
  EXPECT_EQ(loss_l2(preds, labels), 2.5);
  EXPECT_THROW(loss_l2(std::vector<double>{1.0, 2.0}, label), DimensionError);
}

TEST(Forward, HandSetNetwork) {
  const Network net = hand_set_net();
  const std::vector<double> x = {1.0, 2.0};
  const auto y = forward(net, x);
  ASSERT_EQ(y.size(), 1u);
  EXPECT_EQ(y[0], -3.0);
  EXPECT_THROW(forward(net, std::vector<double>{1.0}), DimensionError);
}

TEST(Forward, LogitsSkipSoftmax) {
  const Network net = random_net({4, 3, 5}, Activation::Softmax, 8);
  const std::vector<double> x = {0.1, -0.3, 2.0, 1.0};
  const auto logits = forward_logits(net, x);
  const auto probs = forward(net, x);
  const auto expected = softmax(logits);
  for (std::size_t i = 0; i < probs.size(); ++i) EXPECT_NEAR(probs[i], expected[i], 1e-15);
}

TEST(Network, ValidationAndParameterCount) {
  const Network net = random_net({10, 8, 8, 10}, Activation::Softmax, 1);
  EXPECT_EQ(net.parameter_count(), 10u * 8 + 8 + 8 * 8 + 8 + 8 * 10 + 10);
  EXPECT_NO_THROW(net.validate());
  const int sizes[] = {2, 3, 1};
  const Activation softmax_hidden[] = {Activation::Softmax, Activation::Linear};
  EXPECT_THROW(make_network(sizes, softmax_hidden), ConfigError);
  const Activation relu_head[] = {Activation::Relu, Activation::Relu};
  EXPECT_THROW(make_network(sizes, relu_head), ConfigError);
  Network broken = net;
  broken.layers[1].inputs = 7;
  EXPECT_THROW(broken.validate(), ConfigError);
}

TEST(Backward, MatchesFiniteDifferencesL2) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> n(0.0, 1.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Network net = random_net({10, 8, 8, 1}, Activation::Linear, seed);
    std::vector<double> x(10);
    for (auto& v : x) v = n(rng);
    const std::vector<double> y = {n(rng)};
    EXPECT_LT(max_relative_gradient_error(net, x, y, LossKind::L2), 1e-5) << "seed " << seed;
  }
}

TEST(Backward, MatchesFiniteDifferencesCrossEntropy) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Network net = random_net({10, 8, 8, 10}, Activation::Softmax, 100 + seed);
    std::vector<double> x(10);
    for (auto& v : x) v = n(rng);
    std::vector<double> y(10, 0.0);
    y[seed % 10] = 1.0;
    EXPECT_LT(max_relative_gradient_error(net, x, y, LossKind::CategoricalCrossEntropy), 1e-5) << "seed " << seed;
  }
}

TEST(Backward, DeadReluPassesNoGradient) {
  Network net = hand_set_net();
  const std::vector<double> x = {1.0, 2.0};  // first hidden unit has z = -1
  const std::vector<double> y = {0.0};
  const Gradients g = backward(net, x, y, LossKind::L2);
  EXPECT_EQ(g.weights[0][0], 0.0);
  EXPECT_EQ(g.weights[0][1], 0.0);
  EXPECT_EQ(g.bias[0][0], 0.0);
  EXPECT_NE(g.weights[0][2], 0.0);
}

TEST(Backward, ZeroAtPerfectPrediction) {
  Network net = hand_set_net();
  const std::vector<double> x = {1.0, 2.0};
  const std::vector<double> y = {-3.0};
  const Gradients g = backward(net, x, y, LossKind::L2);
  for (const auto& layer : g.weights) {
    for (double v : layer) EXPECT_EQ(v, 0.0);
  }
}

TEST(Backward, RejectsMismatchedHead) {
  const Network linear = random_net({3, 2, 2}, Activation::Linear, 1);
  const std::vector<double> x = {1.0, 2.0, 3.0};
  const std::vector<double> y = {1.0, 0.0};
  EXPECT_THROW(backward(linear, x, y, LossKind::CategoricalCrossEntropy), ConfigError);
  const Network soft = random_net({3, 2, 2}, Activation::Softmax, 1);
  EXPECT_THROW(backward(soft, x, y, LossKind::L2), ConfigError);
}

TEST(Adam, QuadraticFirstSteps) {
  const int sizes[] = {1, 1};
  const Activation acts[] = {Activation::Linear};
  Network net = make_network(sizes, acts);
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  AdamState state = AdamState::for_network(net);
  const double expected[] = {0.09999999983333335, 0.19989729258521102, 0.29961847654925267};
  for (double e : expected) {
    Gradients g = Gradients::zeros_like(net);
    g.weights[0][0] = 2.0 * (net.layers[0].weights[0] - 3.0);
    adam_step(state, net, g, cfg);
    EXPECT_NEAR(net.layers[0].weights[0], e, 1e-15);
  }
  EXPECT_EQ(net.layers[0].bias[0], 0.0);
}

TEST(Adam, ZeroGradientIsFixedPoint) {
  Network net = random_net({10, 8, 8, 10}, Activation::Softmax, 4);
  const Network before = net;
  AdamState state = AdamState::for_network(net);
  const TrainConfig cfg;
  for (int i = 0; i < 10; ++i) adam_step(state, net, Gradients::zeros_like(net), cfg);
  EXPECT_EQ(net, before);
}

TEST(Init, TruncatedNormalVarianceAndBound) {
  Rng rng(12);
  const int fan_in = 8;
  const auto w = init_truncated_normal(200000, fan_in, rng);
  const double sigma = 1.0 / std::sqrt(static_cast<double>(fan_in));
  double sum = 0.0;
  double sq = 0.0;
  for (double v : w) {
    EXPECT_LE(std::abs(v), 2.0 * sigma);
    sum += v;
    sq += v * v;
  }
  const double mean = sum / w.size();
  const double var = sq / w.size() - mean * mean;
  // Variance of a standard normal truncated to [-2, 2].
  const double truncated = 0.7737413035499232 / fan_in;
  EXPECT_NEAR(var, truncated, 0.02 * truncated);
  EXPECT_NEAR(mean, 0.0, 0.005);
}

TEST(Init, DeterministicAndZeroBias) {
  const Network a = random_net({10, 8, 8, 1}, Activation::Linear, 77);
  const Network b = random_net({10, 8, 8, 1}, Activation::Linear, 77);
  EXPECT_EQ(a, b);
  const int sizes[] = {10, 8, 1};
  const Activation acts[] = {Activation::Relu, Activation::Linear};
  Network net = make_network(sizes, acts);
  Rng rng(1);
  initialize_parameters(net, rng);
  for (const auto& layer : net.layers) {
    for (double v : layer.bias) EXPECT_EQ(v, 0.0);
  }
  EXPECT_THROW(init_truncated_normal(3, 0, rng), ConfigError);
}

TEST(Train, ZeroLearningRateLeavesParameters) {
  const Network net = random_net({2, 4, 1}, Activation::Linear, 3);
  TrainingData data{{{1.0, 0.0}, {0.0, 1.0}}, {{1.0}, {-1.0}}};
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.epochs = 5;
  cfg.batch_size = 1;
  const TrainResult r = train(net, data, cfg);
  EXPECT_EQ(r.network, net);
  EXPECT_EQ(r.initial_loss, r.final_loss);
  EXPECT_EQ(r.loss_history.size(), 5u);
}

TEST(Train, SeparableToyProblemImproves) {
  TrainingData data;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 0.3);
  for (int i = 0; i < 200; ++i) {
    const int cls = i % 2;
    data.inputs.push_back({(cls ? 2.0 : -2.0) + n(rng), n(rng)});
    data.targets.push_back(cls ? std::vector<double>{0.0, 1.0} : std::vector<double>{1.0, 0.0});
  }
  TrainConfig cfg;
  cfg.loss = LossKind::CategoricalCrossEntropy;
  cfg.learning_rate = 1e-2;
  cfg.batch_size = 16;
  cfg.epochs = 50;
  cfg.seed = 9;
  const TrainResult r = train(random_net({2, 8, 2}, Activation::Softmax, 6), data, cfg);
  EXPECT_LT(r.final_loss, 0.5 * r.initial_loss);
  EXPECT_LT(r.final_loss, 0.1);
  EXPECT_EQ(r.final_loss, mean_loss(r.network, data, LossKind::CategoricalCrossEntropy));
}

TEST(Train, MemorizesSingleSample) {
  TrainingData data{{{0.5, -1.0, 2.0}}, {{3.0}}};
  TrainConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.batch_size = 1;
  cfg.epochs = 2000;
  const TrainResult r = train(random_net({3, 8, 8, 1}, Activation::Linear, 2), data, cfg);
  EXPECT_LT(r.final_loss, 1e-4);
}

TEST(Train, DeterministicAndRejectsEmptyData) {
  TrainingData data{{{1.0, 2.0}, {2.0, 1.0}, {0.0, 0.0}}, {{1.0}, {2.0}, {0.0}}};
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 2;
  cfg.seed = 3;
  const Network net = random_net({2, 4, 1}, Activation::Linear, 1);
  const TrainResult a = train(net, data, cfg);
  const TrainResult b = train(net, data, cfg);
  EXPECT_EQ(a.network, b.network);
  EXPECT_EQ(a.loss_history, b.loss_history);
  EXPECT_THROW(train(net, TrainingData{}, cfg), ConfigError);
}
