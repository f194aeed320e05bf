#include <benchmark/benchmark.h>

#include "srcnum/experiments.hpp"

using namespace srcnum;

namespace {

std::vector<ComplexMatrix> covariance_pool() {
  ExperimentConfig c;
  const auto draws = generate_draws(c, 20, 10.0, Phase::Test, 0xbe, 64);
  std::vector<ComplexMatrix> out;
  for (const auto& d : draws) out.push_back(d.covariance);
  return out;
}

std::vector<std::vector<double>> spectrum_pool() {
  std::vector<std::vector<double>> out;
  for (const auto& r : covariance_pool()) out.push_back(hermitian_eigenvalues(r));
  return out;
}

void decide(benchmark::State& state, DetectorKind kind) {
  const ExperimentConfig c;
  const DetectorSpec spec = detector_spec(c, kind);
  Rng rng(1);
  const Detector d = is_network(kind) ? Detector::neural(spec, build_detector(spec, rng)) : Detector::classical(spec);
  const auto pool = spectrum_pool();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(d.estimate_from_features(pool[i++ % pool.size()], 20));
  }
}

void BM_Eigenvalues(benchmark::State& state) {
  const auto pool = covariance_pool();
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(hermitian_eigenvalues(pool[i++ % pool.size()]));
}

void BM_Fbss(benchmark::State& state) {
  const auto pool = covariance_pool();
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(make_feature_fbss(pool[i++ % pool.size()], 5));
}

void BM_SampleCovariance(benchmark::State& state) {
  Scenario s;
  s.doas = {0.2, 1.1, -0.6};
  s.num_snapshots = static_cast<int>(state.range(0));
  s.snr_db = 5.0;
  const SnapshotBatch batch = generate_snapshots(s);
  for (auto _ : state) benchmark::DoNotOptimize(sample_covariance(batch));
}

}  // namespace

BENCHMARK_CAPTURE(decide, ernet, DetectorKind::ERNet);
BENCHMARK_CAPTURE(decide, ecnet, DetectorKind::ECNet);
BENCHMARK_CAPTURE(decide, aic, DetectorKind::Aic);
BENCHMARK_CAPTURE(decide, mdl, DetectorKind::Mdl);
BENCHMARK(BM_Eigenvalues);
BENCHMARK(BM_Fbss);
BENCHMARK(BM_SampleCovariance)->Arg(20)->Arg(100)->Arg(10000);

BENCHMARK_MAIN();
