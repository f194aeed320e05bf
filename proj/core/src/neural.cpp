#include "srcnum/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "srcnum/errors.hpp"

namespace srcnum {

namespace {

constexpr double kProbabilityFloor = 1e-12;

void require_length(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(want) +
                         ", got " + std::to_string(got));
  }
}

template <class T>
std::vector<T> affine(const DenseLayer& layer, const std::vector<T>& x) {
  std::vector<T> z(static_cast<std::size_t>(layer.outputs));
  for (int o = 0; o < layer.outputs; ++o) {
    T acc = T(layer.weight(o, 0)) * x[0];
    for (int i = 1; i < layer.inputs; ++i) acc = acc + T(layer.weight(o, i)) * x[i];
    z[o] = acc + T(layer.bias[o]);
  }
  return z;
}

template <class T>
std::vector<T> logits_impl(const Network& net, std::vector<T> x) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    x = affine(layer, x);
    if (layer.activation == Activation::Relu) {
      for (auto& v : x) v = v > T(0.0) ? v : T(0.0);
    }
  }
  return x;
}

// Per-sample forward/backward scratch, reused across a training run.
struct Workspace {
  std::vector<std::vector<double>> activations;  // activations[0] = input
  std::vector<std::vector<double>> deltas;

  explicit Workspace(const Network& net) {
    activations.resize(net.layers.size() + 1);
    deltas.resize(net.layers.size());
    activations[0].resize(static_cast<std::size_t>(net.input_dim()));
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      activations[l + 1].resize(static_cast<std::size_t>(net.layers[l].outputs));
      deltas[l].resize(static_cast<std::size_t>(net.layers[l].outputs));
    }
  }
};

void apply_activation(Activation activation, std::vector<double>& z) {
  switch (activation) {
    case Activation::Relu:
      for (auto& v : z) v = std::max(v, 0.0);
      break;
    case Activation::Linear:
      break;
    case Activation::Softmax:
      z = softmax(z);
      break;
  }
}

void forward_into(const Network& net, std::span<const double> x, Workspace& ws) {
  std::copy(x.begin(), x.end(), ws.activations[0].begin());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    const auto& in = ws.activations[l];
    auto& out = ws.activations[l + 1];
    for (int o = 0; o < layer.outputs; ++o) {
      const double* w = layer.weights.data() + static_cast<std::size_t>(o) * layer.inputs;
      double acc = layer.bias[o];
      for (int i = 0; i < layer.inputs; ++i) acc += w[i] * in[i];
      out[o] = acc;
    }
    apply_activation(layer.activation, out);
  }
}

double sample_loss(std::span<const double> pred, std::span<const double> label, LossKind loss) {
  return loss == LossKind::L2 ? loss_l2(pred, label) : loss_cce(pred, label);
}

void check_loss_head(const Network& net, LossKind loss) {
  const Activation head = net.layers.back().activation;
  if (loss == LossKind::CategoricalCrossEntropy && head != Activation::Softmax) {
    throw ConfigError("cross-entropy loss requires a softmax output layer");
  }
  if (loss == LossKind::L2 && head != Activation::Linear) {
    throw ConfigError("L2 loss requires a linear output layer");
  }
}

// Accumulates the gradient of one sample into `grads`, using the forward
// state already stored in `ws`.
void backward_into(const Network& net, std::span<const double> label, LossKind loss,
                   Workspace& ws, ParameterSet& grads) {
  const std::size_t last = net.layers.size() - 1;
  const auto& pred = ws.activations[last + 1];
  auto& out_delta = ws.deltas[last];
  for (std::size_t p = 0; p < pred.size(); ++p) {
    const double diff = pred[p] - label[p];
    out_delta[p] = loss == LossKind::L2 ? 2.0 * diff : diff;
  }

  for (std::size_t l = last + 1; l-- > 0;) {
    const auto& layer = net.layers[l];
    const auto& in = ws.activations[l];
    const auto& delta = ws.deltas[l];
    auto& gw = grads.weights[l];
    auto& gb = grads.bias[l];
    for (int o = 0; o < layer.outputs; ++o) {
      const double d = delta[o];
      gb[o] += d;
      if (d == 0.0) continue;
      double* row = gw.data() + static_cast<std::size_t>(o) * layer.inputs;
      for (int i = 0; i < layer.inputs; ++i) row[i] += d * in[i];
    }
    if (l == 0) break;

    const auto& below = net.layers[l - 1];
    auto& prev_delta = ws.deltas[l - 1];
    std::fill(prev_delta.begin(), prev_delta.end(), 0.0);
    for (int o = 0; o < layer.outputs; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* w = layer.weights.data() + static_cast<std::size_t>(o) * layer.inputs;
      for (int i = 0; i < layer.inputs; ++i) prev_delta[i] += w[i] * d;
    }
    if (below.activation == Activation::Relu) {
      // Subgradient 0 at the kink: in == relu output, zero iff z <= 0.
      for (int i = 0; i < layer.inputs; ++i) {
        if (in[i] <= 0.0) prev_delta[i] = 0.0;
      }
    }
  }
}

}  // namespace

std::string_view to_string(Activation activation) {
  switch (activation) {
    case Activation::Relu: return "relu";
    case Activation::Linear: return "linear";
    case Activation::Softmax: return "softmax";
  }
  return "unknown";
}

std::string_view to_string(LossKind loss) {
  return loss == LossKind::L2 ? "l2" : "cce";
}

Activation parse_activation(std::string_view text) {
  if (text == "relu") return Activation::Relu;
  if (text == "linear") return Activation::Linear;
  if (text == "softmax") return Activation::Softmax;
  throw FormatError("unknown activation '" + std::string(text) + "'");
}

LossKind parse_loss(std::string_view text) {
  if (text == "l2") return LossKind::L2;
  if (text == "cce") return LossKind::CategoricalCrossEntropy;
  throw FormatError("unknown loss '" + std::string(text) + "'");
}

DenseLayer::DenseLayer(int in, int out, Activation act)
    : inputs(in),
      outputs(out),
      weights(static_cast<std::size_t>(std::max(in, 0)) * static_cast<std::size_t>(std::max(out, 0))),
      bias(static_cast<std::size_t>(std::max(out, 0))),
      activation(act) {}

void Network::validate() const {
  if (layers.empty()) throw ConfigError("network has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    const bool is_last = l + 1 == layers.size();
    if (layer.inputs < 1 || layer.outputs < 1) throw ConfigError("layer sizes must be positive");
    if (layer.weights.size() != static_cast<std::size_t>(layer.inputs) * layer.outputs ||
        layer.bias.size() != static_cast<std::size_t>(layer.outputs)) {
      throw ConfigError("layer " + std::to_string(l) + ": parameter arrays do not match its size");
    }
    if (l > 0 && layer.inputs != layers[l - 1].outputs) {
      throw ConfigError("layer " + std::to_string(l) + ": input size " +
                        std::to_string(layer.inputs) + " does not chain from " +
                        std::to_string(layers[l - 1].outputs));
    }
    if (layer.activation == Activation::Softmax && !is_last) {
      throw ConfigError("softmax is only allowed on the output layer");
    }
    if (layer.activation == Activation::Relu && is_last) {
      throw ConfigError("relu is only allowed on hidden layers");
    }
  }
}

std::size_t Network::parameter_count() const {
  std::size_t total = 0;
  for (const auto& layer : layers) total += layer.weights.size() + layer.bias.size();
  return total;
}

Network make_network(std::span<const int> sizes, std::span<const Activation> activations) {
  if (sizes.size() < 2 || activations.size() + 1 != sizes.size()) {
    throw ConfigError("make_network: need one activation per layer and at least one layer");
  }
  Network net;
  for (std::size_t l = 0; l < activations.size(); ++l) {
    net.layers.emplace_back(sizes[l], sizes[l + 1], activations[l]);
  }
  net.validate();
  return net;
}

std::vector<double> relu(std::span<const double> z) {
  std::vector<double> out(z.begin(), z.end());
  for (auto& v : out) v = std::max(v, 0.0);
  return out;
}

std::vector<double> softmax(std::span<const double> z) {
  if (z.empty()) return {};
  const double shift = *std::max_element(z.begin(), z.end());
  std::vector<double> out(z.size());
  double total = 0.0;
  for (std::size_t p = 0; p < z.size(); ++p) {
    out[p] = std::exp(z[p] - shift);
    total += out[p];
  }
  for (auto& v : out) v /= total;
  return out;
}

std::vector<double> forward(const Network& net, std::span<const double> x) {
  auto out = forward_logits(net, x);
  if (!net.layers.empty() && net.layers.back().activation == Activation::Softmax) {
    out = softmax(out);
  }
  return out;
}

std::vector<double> forward_logits(const Network& net, std::span<const double> x) {
  if (net.layers.empty()) throw ConfigError("forward: network has no layers");
  require_length(x.size(), static_cast<std::size_t>(net.input_dim()), "forward");
  return logits_impl<double>(net, std::vector<double>(x.begin(), x.end()));
}

OperationCounts count_forward_ops(const Network& net) {
  net.validate();
  std::vector<Counted<double>> x(static_cast<std::size_t>(net.input_dim()), Counted<double>(1.0));
  OperationCountScope scope;
  logits_impl<Counted<double>>(net, std::move(x));
  return scope.counts();
}

double loss_l2(std::span<const double> pred, std::span<const double> label) {
  require_length(pred.size(), label.size(), "loss_l2");
  double sum = 0.0;
  for (std::size_t p = 0; p < pred.size(); ++p) {
    const double d = pred[p] - label[p];
    sum += d * d;
  }
  return sum;
}

double loss_l2(std::span<const std::vector<double>> preds,
               std::span<const std::vector<double>> labels) {
  require_length(preds.size(), labels.size(), "loss_l2 batch");
  if (preds.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t v = 0; v < preds.size(); ++v) sum += loss_l2(preds[v], labels[v]);
  return sum / static_cast<double>(preds.size());
}

double loss_cce(std::span<const double> pred, std::span<const double> label) {
  require_length(pred.size(), label.size(), "loss_cce");
  double sum = 0.0;
  for (std::size_t p = 0; p < pred.size(); ++p) {
    if (label[p] != 0.0) sum -= label[p] * std::log(std::max(pred[p], kProbabilityFloor));
  }
  return sum;
}

double loss_cce(std::span<const std::vector<double>> preds,
                std::span<const std::vector<double>> labels) {
  require_length(preds.size(), labels.size(), "loss_cce batch");
  if (preds.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t v = 0; v < preds.size(); ++v) sum += loss_cce(preds[v], labels[v]);
  return sum / static_cast<double>(preds.size());
}

ParameterSet ParameterSet::zeros_like(const Network& net) {
  ParameterSet out;
  for (const auto& layer : net.layers) {
    out.weights.emplace_back(layer.weights.size(), 0.0);
    out.bias.emplace_back(layer.bias.size(), 0.0);
  }
  return out;
}

ParameterSet& ParameterSet::operator+=(const ParameterSet& other) {
  require_length(other.weights.size(), weights.size(), "ParameterSet +=");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    require_length(other.weights[l].size(), weights[l].size(), "ParameterSet +=");
    require_length(other.bias[l].size(), bias[l].size(), "ParameterSet +=");
    for (std::size_t i = 0; i < weights[l].size(); ++i) weights[l][i] += other.weights[l][i];
    for (std::size_t i = 0; i < bias[l].size(); ++i) bias[l][i] += other.bias[l][i];
  }
  return *this;
}

ParameterSet& ParameterSet::operator*=(double scale) {
  for (auto& w : weights) for (auto& v : w) v *= scale;
  for (auto& b : bias) for (auto& v : b) v *= scale;
  return *this;
}

Gradients backward(const Network& net, std::span<const double> x, std::span<const double> label,
                   LossKind loss) {
  net.validate();
  check_loss_head(net, loss);
  require_length(x.size(), static_cast<std::size_t>(net.input_dim()), "backward input");
  require_length(label.size(), static_cast<std::size_t>(net.output_dim()), "backward label");
  Workspace ws(net);
  forward_into(net, x, ws);
  Gradients grads = ParameterSet::zeros_like(net);
  backward_into(net, label, loss, ws, grads);
  return grads;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be non-negative");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ConfigError("ADAM betas must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be positive");
}

AdamState AdamState::for_network(const Network& net) {
  return AdamState{ParameterSet::zeros_like(net), ParameterSet::zeros_like(net), 0};
}

void adam_step(AdamState& state, Network& net, const Gradients& grads, const TrainConfig& config) {
  require_length(grads.weights.size(), net.layers.size(), "adam_step");
  require_length(state.first_moment.weights.size(), net.layers.size(), "adam_step state");
  ++state.step;
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state.step));

  auto update = [&](std::vector<double>& param, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v) {
    require_length(g.size(), param.size(), "adam_step gradient");
    require_length(m.size(), param.size(), "adam_step moment");
    for (std::size_t i = 0; i < param.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      param[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
    }
  };

  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    update(net.layers[l].weights, grads.weights[l], state.first_moment.weights[l],
           state.second_moment.weights[l]);
    update(net.layers[l].bias, grads.bias[l], state.first_moment.bias[l],
           state.second_moment.bias[l]);
  }
}

std::vector<double> init_truncated_normal(std::size_t count, int fan_in, Rng& rng) {
  if (fan_in < 1) throw ConfigError("init_truncated_normal: fan_in must be >= 1");
  const double std_dev = 1.0 / std::sqrt(static_cast<double>(fan_in));
  const double bound = 2.0 * std_dev;
  std::normal_distribution<double> normal(0.0, std_dev);
  std::vector<double> out(count);
  for (auto& w : out) {
    do {
      w = normal(rng);
    } while (std::abs(w) > bound);
  }
  return out;
}

void initialize_parameters(Network& net, Rng& rng) {
  net.validate();
  for (auto& layer : net.layers) {
    layer.weights = init_truncated_normal(layer.weights.size(), layer.inputs, rng);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }
}

double mean_loss(const Network& net, const TrainingData& data, LossKind loss) {
  net.validate();
  check_loss_head(net, loss);
  if (data.size() == 0) return 0.0;
  Workspace ws(net);
  double sum = 0.0;
  for (std::size_t s = 0; s < data.size(); ++s) {
    forward_into(net, data.inputs[s], ws);
    sum += sample_loss(ws.activations.back(), data.targets[s], loss);
  }
  return sum / static_cast<double>(data.size());
}

TrainResult train(Network net, const TrainingData& data, const TrainConfig& config) {
  net.validate();
  config.validate();
  check_loss_head(net, config.loss);
  if (data.size() == 0) throw ConfigError("train: empty dataset");
  if (data.targets.size() != data.inputs.size()) {
    throw DimensionError("train: inputs and targets differ in count");
  }
  for (std::size_t s = 0; s < data.size(); ++s) {
    require_length(data.inputs[s].size(), static_cast<std::size_t>(net.input_dim()), "train input");
    require_length(data.targets[s].size(), static_cast<std::size_t>(net.output_dim()), "train target");
  }

  TrainResult result;
  result.initial_loss = mean_loss(net, data, config.loss);
  result.loss_history.reserve(static_cast<std::size_t>(config.epochs));

  Rng rng(config.seed);
  AdamState adam = AdamState::for_network(net);
  Workspace ws(net);
  Gradients grads = ParameterSet::zeros_like(net);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  const auto batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(start + batch, order.size());
      grads *= 0.0;
      double batch_loss = 0.0;
      for (std::size_t i = start; i < stop; ++i) {
        const std::size_t s = order[i];
        forward_into(net, data.inputs[s], ws);
        batch_loss += sample_loss(ws.activations.back(), data.targets[s], config.loss);
        backward_into(net, data.targets[s], config.loss, ws, grads);
      }
      if (std::isnan(batch_loss)) {
        std::ostringstream msg;
        msg << "train: loss became NaN at epoch " << epoch << ", batch starting at " << start;
        throw NumericalError(msg.str());
      }
      epoch_loss += batch_loss;
      grads *= 1.0 / static_cast<double>(stop - start);
      adam_step(adam, net, grads, config);
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(order.size()));
  }

  result.final_loss = mean_loss(net, data, config.loss);
  result.network = std::move(net);
  return result;
}

}  // namespace srcnum
