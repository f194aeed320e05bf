#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "srcnum/op_count.hpp"
#include "srcnum/rng.hpp"

namespace srcnum {

enum class Activation { Relu, Linear, Softmax };
enum class LossKind { L2, CategoricalCrossEntropy };

std::string_view to_string(Activation activation);
std::string_view to_string(LossKind loss);
Activation parse_activation(std::string_view text);
LossKind parse_loss(std::string_view text);

/// Fully-connected layer computing activation(W x + b).
struct DenseLayer {
  int inputs = 0;
  int outputs = 0;
  std::vector<double> weights;  // outputs x inputs, row-major
  std::vector<double> bias;     // outputs
  Activation activation = Activation::Linear;

  DenseLayer() = default;
  DenseLayer(int inputs, int outputs, Activation activation);

  double& weight(int out, int in) { return weights[static_cast<std::size_t>(out) * inputs + in]; }
  double weight(int out, int in) const { return weights[static_cast<std::size_t>(out) * inputs + in]; }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct Network {
  std::vector<DenseLayer> layers;

  /// Throws ConfigError unless layer sizes chain, parameter arrays match
  /// their declared sizes, Softmax appears only last and Relu only on
  /// hidden layers.
  void validate() const;

  int input_dim() const { return layers.empty() ? 0 : layers.front().inputs; }
  int output_dim() const { return layers.empty() ? 0 : layers.back().outputs; }
  std::size_t parameter_count() const;

  friend bool operator==(const Network&, const Network&) = default;
};

/// Layer sizes {in, h1, ..., out} with one activation per layer; weights
/// zero. Throws ConfigError on an invalid architecture.
Network make_network(std::span<const int> sizes, std::span<const Activation> activations);

std::vector<double> relu(std::span<const double> z);
/// Max-shifted softmax.
std::vector<double> softmax(std::span<const double> z);

/// Throws DimensionError if x does not match the first layer.
std::vector<double> forward(const Network& net, std::span<const double> x);

/// Pre-softmax output (the softmax is monotone, so argmax decisions can skip
/// it). Same as forward() for a linear head.
std::vector<double> forward_logits(const Network& net, std::span<const double> x);

/// forward_logits on Counted<double>; the tally of one inference pass.
OperationCounts count_forward_ops(const Network& net);

/// ||pred - label||^2 for one sample.
double loss_l2(std::span<const double> pred, std::span<const double> label);
/// Batch mean of the per-sample squared distance.
double loss_l2(std::span<const std::vector<double>> preds, std::span<const std::vector<double>> labels);

/// -sum_p label_p ln(max(pred_p, 1e-12)) for one sample.
double loss_cce(std::span<const double> pred, std::span<const double> label);
double loss_cce(std::span<const std::vector<double>> preds, std::span<const std::vector<double>> labels);

/// Parameter-shaped container used for gradients and optimizer moments.
struct ParameterSet {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;

  static ParameterSet zeros_like(const Network& net);
  ParameterSet& operator+=(const ParameterSet& other);
  ParameterSet& operator*=(double scale);
};

using Gradients = ParameterSet;

/// Analytic gradient of the single-sample loss. Cross-entropy requires a
/// Softmax head and is fused with it (output delta = pred - label); L2
/// requires a Linear head.
Gradients backward(const Network& net, std::span<const double> x, std::span<const double> label,
                   LossKind loss);

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 128;
  int epochs = 400;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::L2;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct AdamState {
  ParameterSet first_moment;
  ParameterSet second_moment;
  std::int64_t step = 0;

  static AdamState for_network(const Network& net);
};

/// One bias-corrected ADAM update of every parameter.
void adam_step(AdamState& state, Network& net, const Gradients& grads, const TrainConfig& config);

/// `count` draws from N(0, 1/fan_in), redrawing anything beyond two
/// standard deviations.
std::vector<double> init_truncated_normal(std::size_t count, int fan_in, Rng& rng);

/// Truncated-normal weights (fan-in variance) and zero biases, layer by
/// layer in order.
void initialize_parameters(Network& net, Rng& rng);

struct TrainingData {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> targets;

  std::size_t size() const noexcept { return inputs.size(); }
};

/// Mean loss of the network over a whole dataset.
double mean_loss(const Network& net, const TrainingData& data, LossKind loss);

struct TrainResult {
  Network network;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  /// Sample-weighted mean of the mini-batch losses seen during each epoch.
  std::vector<double> loss_history;
};

/// Mini-batch ADAM. Each epoch reshuffles with an Rng seeded from
/// config.seed; the last short batch is kept. Deterministic for a given
/// (net, data, config). Throws ConfigError on empty data and NumericalError
/// if the loss becomes NaN.
TrainResult train(Network net, const TrainingData& data, const TrainConfig& config);

/// Text model file: architecture, parameters at 17 significant digits, the
/// training configuration and free-form metadata.
struct ModelFile {
  Network network;
  TrainConfig config;
  std::map<std::string, std::string> metadata;

  friend bool operator==(const ModelFile&, const ModelFile&) = default;
};

std::string serialize_model(const ModelFile& model);
/// Throws FormatError on malformed input.
ModelFile parse_model(std::string_view text);
void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace srcnum
