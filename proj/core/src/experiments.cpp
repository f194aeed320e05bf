#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "srcnum/errors.hpp"
#include "srcnum/experiments.hpp"

namespace srcnum {

namespace {

constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kShuffleStream = 0x5f1e;

std::uint64_t training_seed(std::uint64_t master, DetectorKind kind, int num_snapshots,
                            CoherenceMode mode) {
  const auto tag = (static_cast<std::uint64_t>(kind) + 1) * 0x100 +
                   (mode == CoherenceMode::Coherent ? 1 : 0);
  return derive_seed(master, tag, static_cast<std::uint64_t>(num_snapshots));
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

void log(const SweepOptions& options, const std::string& message) {
  if (options.log) options.log(message);
}

// Features shared by several detectors (the eigenvalue ones) are computed
// once per draw.
struct FeatureCache {
  struct Entry {
    DetectorKind family;
    std::optional<int> subarray;
    bool normalize;
    std::vector<double> features;
  };
  std::vector<Entry> entries;

  const std::vector<double>& get(const DetectorSpec& spec, const ComplexMatrix& cov) {
    const DetectorKind family =
        spec.kind == DetectorKind::CovNet ? DetectorKind::CovNet : DetectorKind::ECNet;
    for (const auto& e : entries) {
      if (e.family == family && e.subarray == spec.subarray_size &&
          e.normalize == spec.normalize_features) {
        return e.features;
      }
    }
    entries.push_back({family, spec.subarray_size, spec.normalize_features, make_features(spec, cov)});
    return entries.back().features;
  }
};

std::vector<Detector> prepare_detectors(const ExperimentConfig& config, int num_snapshots,
                                        const SweepOptions& options) {
  std::vector<Detector> detectors;
  std::optional<std::vector<Draw>> train_draws;
  for (DetectorKind kind : config.detectors) {
    const DetectorSpec spec = detector_spec(config, kind);
    if (!is_network(kind)) {
      detectors.push_back(Detector::classical(spec));
      continue;
    }
    if (!train_draws) {
      log(options, "generating " + std::to_string(config.num_train) + " training samples at N=" +
                       std::to_string(num_snapshots));
      train_draws = generate_draws(config, num_snapshots, std::nullopt, Phase::Train,
                                   static_cast<std::uint64_t>(num_snapshots),
                                   static_cast<std::size_t>(config.num_train));
    }
    const std::uint64_t seed = training_seed(config.seed, kind, num_snapshots, config.coherence);
    const Dataset dataset = make_dataset(config, spec, *train_draws, config.seed);
    log(options, "training " + spec.label() + " (N=" + std::to_string(num_snapshots) + ")");
    TrainedDetector trained = train_detector(config, spec, dataset, seed);
    log(options, "  loss " + std::to_string(trained.result.initial_loss) + " -> " +
                     std::to_string(trained.result.final_loss));
    if (options.model_dir) {
      std::filesystem::create_directories(*options.model_dir);
      save_model(*options.model_dir / (spec.label() + "_N" + std::to_string(num_snapshots) + ".model"),
                 trained.model);
    }
    detectors.push_back(std::move(trained.detector));
  }
  return detectors;
}

std::vector<double> evaluate_point(const ExperimentConfig& config,
                                   const std::vector<Detector>& detectors, int num_snapshots,
                                   double snr_db, std::vector<std::int64_t>& trials) {
  const auto draws = generate_draws(config, num_snapshots, snr_db, Phase::Test,
                                    test_stream_salt(num_snapshots, snr_db),
                                    static_cast<std::size_t>(config.num_test_per_point));
  const auto correct = count_correct(detectors, draws, num_snapshots, config.threads);
  std::vector<double> accuracy;
  trials.assign(detectors.size(), static_cast<std::int64_t>(draws.size()));
  for (auto c : correct) accuracy.push_back(static_cast<double>(c) / static_cast<double>(draws.size()));
  return accuracy;
}

std::vector<std::string> labels(const std::vector<Detector>& detectors) {
  std::vector<std::string> out;
  for (const auto& d : detectors) out.push_back(d.spec().label());
  return out;
}

SweepResult sweep_snr(const ExperimentConfig& config, const SweepOptions& options) {
  config.validate();
  const int n = config.num_snapshots;
  const auto detectors = prepare_detectors(config, n, options);

  SweepResult result;
  result.seed = config.seed;
  result.detectors = labels(detectors);
  for (double snr : config.snr_axis) {
    log(options, "evaluating SNR=" + std::to_string(snr) + " dB");
    std::vector<std::int64_t> trials;
    result.axis.push_back(snr);
    result.accuracy.push_back(evaluate_point(config, detectors, n, snr, trials));
    result.trials.push_back(std::move(trials));
  }
  return result;
}

}  // namespace

TrainedDetector train_detector(const ExperimentConfig& config, const DetectorSpec& spec,
                               const Dataset& dataset, std::uint64_t seed) {
  spec.validate();
  Rng init_rng(derive_seed(seed, kInitStream, 0));
  Network net = build_detector(spec, init_rng);
  const TrainConfig tc = train_config(config, spec.kind, derive_seed(seed, kShuffleStream, 0));
  TrainResult result = train(std::move(net), to_training_data(spec, dataset), tc);

  ModelFile model;
  model.network = result.network;
  model.config = tc;
  model.metadata["detector"] = std::string(to_string(spec.kind));
  model.metadata["num_antennas"] = std::to_string(spec.num_antennas);
  model.metadata["subarray_size"] = spec.subarray_size ? std::to_string(*spec.subarray_size) : "none";
  model.metadata["normalize_features"] = spec.normalize_features ? "true" : "false";
  model.metadata["num_snapshots"] = std::to_string(dataset.num_snapshots);
  model.metadata["coherence"] = std::string(to_string(dataset.coherence));

  Detector detector = Detector::neural(spec, result.network);
  return TrainedDetector{std::move(detector), std::move(result), std::move(model)};
}

Detector detector_from_model(const ModelFile& model) {
  auto field = [&](const std::string& key) -> const std::string& {
    const auto it = model.metadata.find(key);
    if (it == model.metadata.end()) throw FormatError("model: missing metadata '" + key + "'");
    return it->second;
  };
  auto to_int = [](const std::string& s) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw FormatError("model: bad integer '" + s + "'");
    return v;
  };
  DetectorSpec spec;
  spec.kind = parse_detector_kind(field("detector"));
  spec.num_antennas = to_int(field("num_antennas"));
  if (const auto& m0 = field("subarray_size"); m0 != "none") spec.subarray_size = to_int(m0);
  spec.normalize_features = field("normalize_features") == "true";
  if (model.network.layers.size() == 3) {
    spec.hidden1 = model.network.layers[0].outputs;
    spec.hidden2 = model.network.layers[1].outputs;
  }
  return Detector::neural(spec, model.network);
}

double dataset_accuracy(const Detector& detector, const Dataset& dataset) {
  if (dataset.samples.empty()) return 0.0;
  std::int64_t correct = 0;
  for (const auto& sample : dataset.samples) {
    if (detector.estimate_from_features(sample.features, dataset.num_snapshots) == sample.true_count) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.samples.size());
}

std::vector<std::int64_t> count_correct(const std::vector<Detector>& detectors,
                                        const std::vector<Draw>& draws, int num_snapshots,
                                        int threads) {
  const int workers = std::min<int>(resolve_threads(threads),
                                    std::max<int>(1, static_cast<int>(draws.size())));
  std::vector<std::vector<std::int64_t>> partial(static_cast<std::size_t>(workers),
                                                 std::vector<std::int64_t>(detectors.size(), 0));
  auto work = [&](int w) {
    auto& counts = partial[static_cast<std::size_t>(w)];
    for (std::size_t i = static_cast<std::size_t>(w); i < draws.size(); i += static_cast<std::size_t>(workers)) {
      FeatureCache cache;
      for (std::size_t d = 0; d < detectors.size(); ++d) {
        const auto& features = cache.get(detectors[d].spec(), draws[i].covariance);
        if (detectors[d].estimate_from_features(features, num_snapshots) == draws[i].true_count) {
          ++counts[d];
        }
      }
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }

  std::vector<std::int64_t> total(detectors.size(), 0);
  for (const auto& counts : partial) {
    for (std::size_t d = 0; d < counts.size(); ++d) total[d] += counts[d];
  }
  return total;
}

double SweepResult::at(double axis_value, std::string_view detector) const {
  const auto a = std::find(axis.begin(), axis.end(), axis_value);
  const auto d = std::find(detectors.begin(), detectors.end(), detector);
  if (a == axis.end() || d == detectors.end()) {
    throw std::out_of_range("SweepResult::at: no cell for '" + std::string(detector) + "'");
  }
  return accuracy[static_cast<std::size_t>(a - axis.begin())][static_cast<std::size_t>(d - detectors.begin())];
}

SweepResult sweep_snapshots(const ExperimentConfig& config, const SweepOptions& options) {
  config.validate();
  SweepResult result;
  result.seed = config.seed;
  for (int n : config.snapshot_axis) {
    const auto detectors = prepare_detectors(config, n, options);
    if (result.detectors.empty()) result.detectors = labels(detectors);
    log(options, "evaluating N=" + std::to_string(n) + " at " + std::to_string(config.test_snr_db) + " dB");
    std::vector<std::int64_t> trials;
    result.axis.push_back(static_cast<double>(n));
    result.accuracy.push_back(evaluate_point(config, detectors, n, config.test_snr_db, trials));
    result.trials.push_back(std::move(trials));
  }
  return result;
}

SweepResult sweep_snr_noncoherent(const ExperimentConfig& config, const SweepOptions& options) {
  ExperimentConfig cfg = config;
  cfg.coherence = CoherenceMode::NonCoherent;
  cfg.fbss = false;
  return sweep_snr(cfg, options);
}

SweepResult sweep_snr_coherent(const ExperimentConfig& config, const SweepOptions& options) {
  ExperimentConfig cfg = config;
  cfg.coherence = CoherenceMode::Coherent;
  cfg.fbss = true;
  std::erase(cfg.detectors, DetectorKind::CovNet);
  if (cfg.detectors.empty()) throw ConfigError("sweep_snr_coherent: no FBSS-capable detectors selected");
  return sweep_snr(cfg, options);
}

}  // namespace srcnum
