#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "srcnum/linalg.hpp"
#include "srcnum/neural.hpp"
#include "srcnum/rng.hpp"
#include "srcnum/signal_model.hpp"

namespace srcnum {

/// ERNet: eigenvalues -> scalar regression. ECNet: eigenvalues -> softmax
/// over M classes. CovNet: raw covariance entries -> softmax (ablation).
/// Aic/Mdl: the classical information criteria on the same eigenvalues.
enum class DetectorKind { ERNet, ECNet, CovNet, Aic, Mdl };

std::string_view to_string(DetectorKind kind);
/// Accepts "ernet", "ecnet", "covnet", "aic", "mdl".
DetectorKind parse_detector_kind(std::string_view text);
bool is_network(DetectorKind kind) noexcept;

struct DetectorSpec {
  DetectorKind kind = DetectorKind::ECNet;
  int num_antennas = 10;
  /// Sub-array size M0 when eigenvalue features come from the
  /// forward-backward smoothed covariance.
  std::optional<int> subarray_size;
  int hidden1 = 8;
  int hidden2 = 8;
  /// Divide eigenvalue features by their sum. Off by default.
  bool normalize_features = false;

  int input_dim() const;
  int output_dim() const;
  /// "ernet", "fbss-ecnet", ...
  std::string label() const;
  void validate() const;

  friend bool operator==(const DetectorSpec&, const DetectorSpec&) = default;
};

/// Eigenvalues of the covariance, descending, unnormalized.
std::vector<double> make_feature_eigen(const ComplexMatrix& covariance);

/// Eigenvalues of fbss_covariance(covariance, subarray_size), descending.
std::vector<double> make_feature_fbss(const ComplexMatrix& covariance, int subarray_size);

/// Real parts of all entries (row-major) followed by all imaginary parts.
std::vector<double> make_feature_cov(const ComplexMatrix& covariance);

/// Length-M vector with a 1 at zero-based index K.
std::vector<double> one_hot(int count, int num_classes);

/// Features the detector consumes for a given sample covariance.
std::vector<double> make_features(const DetectorSpec& spec, const ComplexMatrix& covariance);

/// Training target for a true source count.
std::vector<double> make_target(const DetectorSpec& spec, int true_count);

/// Half-up rounding of a raw regression output, clamped to [0, M-1].
int round_count(double raw_output, int num_antennas);

/// First index of the largest component.
int argmax_first(std::span<const double> values);

int ernet_decide(const Network& net, std::span<const double> features, int num_antennas);
int ecnet_decide(const Network& net, std::span<const double> features);

/// input -> h1 (ReLU) -> h2 (ReLU) -> output (Linear for ERNet, Softmax
/// otherwise), truncated-normal initialized.
Network build_detector(const DetectorSpec& spec, Rng& rng);

LossKind loss_for(DetectorKind kind);

/// A ready-to-use estimator: a classical criterion, or a trained network
/// together with the spec that produced it.
class Detector {
 public:
  static Detector classical(DetectorSpec spec);
  static Detector neural(DetectorSpec spec, Network net);

  const DetectorSpec& spec() const noexcept { return spec_; }
  const std::optional<Network>& network() const noexcept { return net_; }

  /// Estimated source count from a sample covariance built from
  /// `num_snapshots` snapshots.
  int estimate(const ComplexMatrix& covariance, int num_snapshots) const;

  /// Same, from features already produced by make_features(spec(), ...).
  int estimate_from_features(std::span<const double> features, int num_snapshots) const;

 private:
  Detector(DetectorSpec spec, std::optional<Network> net);

  DetectorSpec spec_;
  std::optional<Network> net_;
};

}  // namespace srcnum
