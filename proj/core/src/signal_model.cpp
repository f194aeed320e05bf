#include "srcnum/signal_model.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "srcnum/errors.hpp"

namespace srcnum {

namespace {

Complex circular_gaussian(Rng& rng, std::normal_distribution<double>& normal, double std_dev) {
  const double re = normal(rng);
  const double im = normal(rng);
  return {re * std_dev, im * std_dev};
}

}  // namespace

double Scenario::noise_variance() const noexcept {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  return std::pow(10.0, -snr_db / 10.0);
}

void Scenario::validate() const {
  if (num_antennas < 1) throw ConfigError("scenario: num_antennas must be >= 1");
  if (num_snapshots < 1) throw ConfigError("scenario: num_snapshots must be >= 1");
  const int k = num_sources();
  if (k >= num_antennas) {
    throw ConfigError("scenario: need fewer sources than antennas, got K=" + std::to_string(k) +
                      " M=" + std::to_string(num_antennas));
  }
  if (std::isnan(snr_db)) throw ConfigError("scenario: snr_db is NaN");
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      if (doas[i] == doas[j]) throw ConfigError("scenario: DOAs must be pairwise distinct");
    }
  }
  if (const auto* coherent = std::get_if<Coherent>(&coherence)) {
    std::set<int> copies;
    for (const auto& [copy, target] : coherent->copy_map) {
      if (copy < 0 || copy >= k || target < 0 || target >= k) {
        throw ConfigError("scenario: copy_map index out of range");
      }
      if (!copies.insert(copy).second) throw ConfigError("scenario: source copied twice");
    }
    for (const auto& [copy, target] : coherent->copy_map) {
      if (copies.contains(target)) {
        throw ConfigError("scenario: copy_map target " + std::to_string(target) +
                          " is itself a coherent source");
      }
    }
  }
}

std::vector<Complex> steering_vector(double theta, int num_antennas) {
  std::vector<Complex> a(static_cast<std::size_t>(std::max(num_antennas, 0)));
  const double phase_step = std::numbers::pi * std::sin(theta);
  for (std::size_t m = 0; m < a.size(); ++m) {
    a[m] = std::polar(1.0, phase_step * static_cast<double>(m));
  }
  return a;
}

ComplexMatrix steering_matrix(const std::vector<double>& doas, int num_antennas) {
  ComplexMatrix a(static_cast<std::size_t>(num_antennas), doas.size());
  for (std::size_t k = 0; k < doas.size(); ++k) {
    const auto column = steering_vector(doas[k], num_antennas);
    for (std::size_t m = 0; m < column.size(); ++m) a(m, k) = column[m];
  }
  return a;
}

ComplexMatrix generate_sources(const Scenario& scenario, Rng& rng) {
  scenario.validate();
  const auto k = static_cast<std::size_t>(scenario.num_sources());
  const auto n = static_cast<std::size_t>(scenario.num_snapshots);
  ComplexMatrix sources(k, n);

  std::vector<int> copy_of(k, -1);
  if (const auto* coherent = std::get_if<Coherent>(&scenario.coherence)) {
    for (const auto& [copy, target] : coherent->copy_map) copy_of[copy] = target;
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  const double std_dev = std::sqrt(0.5);
  for (std::size_t row = 0; row < k; ++row) {
    if (copy_of[row] >= 0) continue;
    for (std::size_t col = 0; col < n; ++col) {
      sources(row, col) = circular_gaussian(rng, normal, std_dev);
    }
  }
  for (std::size_t row = 0; row < k; ++row) {
    if (copy_of[row] < 0) continue;
    const auto src = sources.row(static_cast<std::size_t>(copy_of[row]));
    std::copy(src.begin(), src.end(), sources.row(row).begin());
  }
  return sources;
}

SnapshotBatch generate_snapshots(const Scenario& scenario, Rng& rng) {
  const ComplexMatrix sources = generate_sources(scenario, rng);
  const ComplexMatrix steering = steering_matrix(scenario.doas, scenario.num_antennas);
  ComplexMatrix data = matmul(steering, sources);

  const double variance = scenario.noise_variance();
  if (variance > 0.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const double std_dev = std::sqrt(variance / 2.0);
    for (auto& v : data.entries()) v += circular_gaussian(rng, normal, std_dev);
  }
  return SnapshotBatch{std::move(data), scenario};
}

SnapshotBatch generate_snapshots(const Scenario& scenario) {
  Rng rng(scenario.seed);
  return generate_snapshots(scenario, rng);
}

ComplexMatrix sample_covariance(const ComplexMatrix& snapshots) {
  const std::size_t m = snapshots.rows();
  const std::size_t n = snapshots.cols();
  if (n == 0) throw DomainError("sample_covariance: need at least one snapshot");

  ComplexMatrix cov(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      Complex sum = 0.0;
      for (std::size_t t = 0; t < n; ++t) sum += snapshots(i, t) * std::conj(snapshots(j, t));
      sum /= static_cast<double>(n);
      if (i == j) {
        cov(i, i) = sum.real();
      } else {
        cov(i, j) = sum;
        cov(j, i) = std::conj(sum);
      }
    }
  }
  return cov;
}

ComplexMatrix sample_covariance(const SnapshotBatch& batch) {
  return sample_covariance(batch.data);
}

ComplexMatrix fbss_covariance(const ComplexMatrix& covariance, int subarray_size) {
  if (!covariance.is_square()) throw DimensionError("fbss_covariance: matrix must be square");
  const int m = static_cast<int>(covariance.rows());
  if (subarray_size < 1 || subarray_size > m) {
    throw DomainError("fbss_covariance: sub-array size " + std::to_string(subarray_size) +
                      " outside [1, " + std::to_string(m) + "]");
  }
  const auto m0 = static_cast<std::size_t>(subarray_size);
  const int num_subarrays = m - subarray_size + 1;

  ComplexMatrix forward_sum(m0, m0);
  for (int t = 0; t < num_subarrays; ++t) {
    for (std::size_t i = 0; i < m0; ++i) {
      for (std::size_t j = 0; j < m0; ++j) forward_sum(i, j) += covariance(t + i, t + j);
    }
  }
  // Backward terms are J conj(F_t) J; the map is linear, so apply it once to
  // the forward sum.
  ComplexMatrix average = forward_sum + exchange_conjugate(forward_sum);
  average *= 1.0 / (2.0 * num_subarrays);
  return average;
}

}  // namespace srcnum
