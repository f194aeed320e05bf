#include "srcnum/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "srcnum/classical.hpp"
#include "srcnum/errors.hpp"

namespace srcnum {

std::string_view to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::ERNet: return "ernet";
    case DetectorKind::ECNet: return "ecnet";
    case DetectorKind::CovNet: return "covnet";
    case DetectorKind::Aic: return "aic";
    case DetectorKind::Mdl: return "mdl";
  }
  return "unknown";
}

DetectorKind parse_detector_kind(std::string_view text) {
  for (auto kind : {DetectorKind::ERNet, DetectorKind::ECNet, DetectorKind::CovNet,
                    DetectorKind::Aic, DetectorKind::Mdl}) {
    if (text == to_string(kind)) return kind;
  }
  throw ConfigError("unknown detector '" + std::string(text) + "'");
}

bool is_network(DetectorKind kind) noexcept {
  return kind == DetectorKind::ERNet || kind == DetectorKind::ECNet || kind == DetectorKind::CovNet;
}

int DetectorSpec::input_dim() const {
  if (kind == DetectorKind::CovNet) return 2 * num_antennas * num_antennas;
  return subarray_size.value_or(num_antennas);
}

int DetectorSpec::output_dim() const {
  switch (kind) {
    case DetectorKind::ERNet: return 1;
    case DetectorKind::ECNet:
    case DetectorKind::CovNet: return num_antennas;
    case DetectorKind::Aic:
    case DetectorKind::Mdl: return 0;
  }
  return 0;
}

std::string DetectorSpec::label() const {
  std::string name(to_string(kind));
  if (subarray_size && kind != DetectorKind::CovNet) name = "fbss-" + name;
  return name;
}

void DetectorSpec::validate() const {
  if (num_antennas < 2) throw ConfigError("detector: num_antennas must be >= 2");
  if (hidden1 < 1 || hidden2 < 1) throw ConfigError("detector: hidden sizes must be positive");
  if (subarray_size) {
    const int m0 = *subarray_size;
    if (m0 < 1 || m0 > num_antennas) throw ConfigError("detector: sub-array size out of range");
    if (!is_network(kind) && m0 < 2) {
      throw ConfigError("detector: classical criteria need a sub-array of at least 2");
    }
  }
}

std::vector<double> make_feature_eigen(const ComplexMatrix& covariance) {
  return hermitian_eigenvalues(covariance);
}

std::vector<double> make_feature_fbss(const ComplexMatrix& covariance, int subarray_size) {
  return hermitian_eigenvalues(fbss_covariance(covariance, subarray_size));
}

std::vector<double> make_feature_cov(const ComplexMatrix& covariance) {
  const auto entries = covariance.entries();
  std::vector<double> out(2 * entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out[i] = entries[i].real();
    out[entries.size() + i] = entries[i].imag();
  }
  return out;
}

std::vector<double> one_hot(int count, int num_classes) {
  if (count < 0 || count >= num_classes) {
    throw DomainError("one_hot: count " + std::to_string(count) + " outside [0, " +
                      std::to_string(num_classes) + ")");
  }
  std::vector<double> out(static_cast<std::size_t>(num_classes), 0.0);
  out[static_cast<std::size_t>(count)] = 1.0;
  return out;
}

std::vector<double> make_features(const DetectorSpec& spec, const ComplexMatrix& covariance) {
  if (spec.kind == DetectorKind::CovNet) {
    if (static_cast<int>(covariance.rows()) != spec.num_antennas) {
      throw DimensionError("make_features: covariance size does not match the detector");
    }
    return make_feature_cov(covariance);
  }
  auto features = spec.subarray_size ? make_feature_fbss(covariance, *spec.subarray_size)
                                     : make_feature_eigen(covariance);
  if (spec.normalize_features) {
    const double total = std::accumulate(features.begin(), features.end(), 0.0);
    if (total > 0.0) {
      for (auto& f : features) f /= total;
    }
  }
  return features;
}

std::vector<double> make_target(const DetectorSpec& spec, int true_count) {
  if (spec.kind == DetectorKind::ERNet) return {static_cast<double>(true_count)};
  return one_hot(true_count, spec.num_antennas);
}

int round_count(double raw_output, int num_antennas) {
  if (std::isnan(raw_output)) return 0;
  const double rounded = std::floor(raw_output + 0.5);
  return static_cast<int>(std::clamp(rounded, 0.0, static_cast<double>(num_antennas - 1)));
}

int argmax_first(std::span<const double> values) {
  int best = 0;
  for (int p = 1; p < static_cast<int>(values.size()); ++p) {
    if (values[p] > values[best]) best = p;
  }
  return best;
}

int ernet_decide(const Network& net, std::span<const double> features, int num_antennas) {
  const auto out = forward_logits(net, features);
  if (out.size() != 1) throw DimensionError("ernet_decide: network must have a scalar output");
  return round_count(out[0], num_antennas);
}

int ecnet_decide(const Network& net, std::span<const double> features) {
  return argmax_first(forward(net, features));
}

LossKind loss_for(DetectorKind kind) {
  return kind == DetectorKind::ERNet ? LossKind::L2 : LossKind::CategoricalCrossEntropy;
}

Network build_detector(const DetectorSpec& spec, Rng& rng) {
  spec.validate();
  if (!is_network(spec.kind)) throw ConfigError("build_detector: not a network detector");
  const int sizes[] = {spec.input_dim(), spec.hidden1, spec.hidden2, spec.output_dim()};
  const Activation head =
      spec.kind == DetectorKind::ERNet ? Activation::Linear : Activation::Softmax;
  const Activation activations[] = {Activation::Relu, Activation::Relu, head};
  Network net = make_network(sizes, activations);
  initialize_parameters(net, rng);
  return net;
}

Detector::Detector(DetectorSpec spec, std::optional<Network> net)
    : spec_(std::move(spec)), net_(std::move(net)) {}

Detector Detector::classical(DetectorSpec spec) {
  spec.validate();
  if (is_network(spec.kind)) throw ConfigError("Detector::classical: network kind given");
  return Detector(std::move(spec), std::nullopt);
}

Detector Detector::neural(DetectorSpec spec, Network net) {
  spec.validate();
  if (!is_network(spec.kind)) throw ConfigError("Detector::neural: classical kind given");
  net.validate();
  if (net.input_dim() != spec.input_dim() || net.output_dim() != spec.output_dim()) {
    throw DimensionError("Detector::neural: network shape does not match the detector spec");
  }
  return Detector(std::move(spec), std::move(net));
}

int Detector::estimate(const ComplexMatrix& covariance, int num_snapshots) const {
  return estimate_from_features(make_features(spec_, covariance), num_snapshots);
}

int Detector::estimate_from_features(std::span<const double> features, int num_snapshots) const {
  switch (spec_.kind) {
    case DetectorKind::ERNet:
      return ernet_decide(*net_, features, spec_.num_antennas);
    case DetectorKind::ECNet:
    case DetectorKind::CovNet:
      return argmax_first(forward_logits(*net_, features));
    case DetectorKind::Aic:
    case DetectorKind::Mdl: {
      const EigenSpectrum spectrum(std::vector<double>(features.begin(), features.end()),
                                   num_snapshots);
      return spec_.kind == DetectorKind::Aic ? aic(spectrum).estimate : mdl(spectrum).estimate;
    }
  }
  return 0;
}

}  // namespace srcnum
