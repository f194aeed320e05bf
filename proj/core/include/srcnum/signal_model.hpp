#pragma once

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "srcnum/linalg.hpp"
#include "srcnum/rng.hpp"

namespace srcnum {

struct NonCoherent {
  friend bool operator==(const NonCoherent&, const NonCoherent&) = default;
};

/// Sources listed in `copy_map` as (coherent index, independent index) emit
/// an exact copy of the independent source's waveform.
struct Coherent {
  std::vector<std::pair<int, int>> copy_map;

  int num_coherent() const noexcept { return static_cast<int>(copy_map.size()); }
  friend bool operator==(const Coherent&, const Coherent&) = default;
};

using Coherence = std::variant<NonCoherent, Coherent>;

/// One simulation draw. The source count is doas.size(); snr_db may be
/// +infinity for a noise-free draw.
struct Scenario {
  int num_antennas = 10;
  int num_snapshots = 20;
  std::vector<double> doas;
  double snr_db = 0.0;
  Coherence coherence = NonCoherent{};
  std::uint64_t seed = 0;

  int num_sources() const noexcept { return static_cast<int>(doas.size()); }
  /// Noise variance per antenna, 10^(-snr_db/10) under unit source power.
  double noise_variance() const noexcept;
  /// Throws ConfigError when an invariant does not hold.
  void validate() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct SnapshotBatch {
  ComplexMatrix data;  // M x N
  Scenario scenario;
};

/// Half-wavelength ULA response: element m is exp(i*pi*m*sin(theta)).
std::vector<Complex> steering_vector(double theta, int num_antennas);

/// M x K matrix whose columns are steering vectors.
ComplexMatrix steering_matrix(const std::vector<double>& doas, int num_antennas);

/// K x N unit-power circular complex Gaussian waveforms; coherent rows copy
/// their copy_map target.
ComplexMatrix generate_sources(const Scenario& scenario, Rng& rng);

/// r(n) = A(theta) s(n) + w(n) for n = 1..N.
SnapshotBatch generate_snapshots(const Scenario& scenario, Rng& rng);
/// Uses an Rng seeded from scenario.seed.
SnapshotBatch generate_snapshots(const Scenario& scenario);

/// (1/N) sum_n r(n) r(n)^H.
ComplexMatrix sample_covariance(const ComplexMatrix& snapshots);
ComplexMatrix sample_covariance(const SnapshotBatch& batch);

/// Forward-backward spatially smoothed covariance over T = M - M0 + 1
/// contiguous sub-arrays of size M0.
ComplexMatrix fbss_covariance(const ComplexMatrix& covariance, int subarray_size);

}  // namespace srcnum
