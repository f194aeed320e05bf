#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "srcnum/detectors.hpp"
#include "srcnum/neural.hpp"
#include "srcnum/op_count.hpp"
#include "srcnum/signal_model.hpp"

namespace srcnum {

inline constexpr std::string_view kVersion = "0.1.0";

enum class CoherenceMode { NonCoherent, Coherent };

std::string_view to_string(CoherenceMode mode);
CoherenceMode parse_coherence_mode(std::string_view text);

/// Simulation and training protocol. Defaults:
/// 10-antenna ULA, 20 snapshots, K in [0, 5], 8000 mixed-SNR training
/// samples drawn over [0, 40] dB, 400 epochs of batch-128 ADAM at 1e-3.
struct ExperimentConfig {
  int num_antennas = 10;
  int num_snapshots = 20;
  int max_sources = 5;
  double train_snr_low_db = 0.0;
  double train_snr_high_db = 40.0;
  int num_train = 8000;
  int num_test_per_point = 2000;
  std::vector<DetectorKind> detectors = {DetectorKind::ERNet, DetectorKind::ECNet,
                                         DetectorKind::Aic, DetectorKind::Mdl,
                                         DetectorKind::CovNet};
  CoherenceMode coherence = CoherenceMode::NonCoherent;
  /// Use forward-backward smoothed eigenvalues as features.
  bool fbss = false;
  int subarray_size = 5;
  std::uint64_t seed = 2019;
  int epochs = 400;
  int batch_size = 128;
  double learning_rate = 1e-3;
  /// Test SNR for gen-data/eval and the snapshot sweep.
  double test_snr_db = 5.0;
  std::vector<int> snapshot_axis = {5, 10, 20, 50, 100, 200};
  std::vector<double> snr_axis = {0, 5, 10, 15, 20, 25, 30, 35, 40};
  bool normalize_features = false;
  /// Worker threads for Monte-Carlo evaluation; 0 = hardware concurrency.
  int threads = 0;

  /// Throws ConfigError.
  void validate() const;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Flat `key = value` text, one field per line, `#` comments. Lists are
/// comma separated.
std::string to_text(const ExperimentConfig& config);
/// Starts from defaults and overrides the keys present. Throws ConfigError
/// on unknown keys or bad values.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// FNV-1a 64 of to_text(config).
std::uint64_t config_hash(const ExperimentConfig& config);

DetectorSpec detector_spec(const ExperimentConfig& config, DetectorKind kind);
TrainConfig train_config(const ExperimentConfig& config, DetectorKind kind, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Datasets

enum class Phase { Train, Test };

/// Seed of sample `index` in the stream identified by (phase, salt). Train
/// and test streams never share a seed sequence.
std::uint64_t sample_seed(std::uint64_t master, Phase phase, std::uint64_t salt,
                          std::uint64_t index);

/// Salt of the test stream for a (snapshot count, SNR) operating point.
/// Training streams use the snapshot count as salt.
std::uint64_t test_stream_salt(int num_snapshots, double snr_db);

/// Draws K uniform on {0..max_sources}, distinct DOAs uniform on [0, 2pi)
/// and, in coherent mode, a coherent-source count uniform on {0..K-1} whose
/// sources each copy a randomly chosen independent source. Snapshot
/// generation reuses `seed`. Throws ConfigError if 100 redraws fail to give
/// distinct DOAs.
Scenario draw_scenario(const ExperimentConfig& config, int num_snapshots, double snr_db,
                       std::uint64_t seed);

/// Sample covariance of the scenario's snapshot batch.
ComplexMatrix simulate_covariance(const Scenario& scenario);

/// One simulated observation before feature extraction.
struct Draw {
  Scenario scenario;
  ComplexMatrix covariance;
  int true_count = 0;
};

/// `count` draws from the (phase, salt) stream. A missing `snr_db` means
/// uniform over the training SNR range.
std::vector<Draw> generate_draws(const ExperimentConfig& config, int num_snapshots,
                                 std::optional<double> snr_db, Phase phase, std::uint64_t salt,
                                 std::size_t count);

struct LabeledSample {
  std::vector<double> features;
  int true_count = 0;
  Scenario meta;
};

struct Dataset {
  int num_antennas = 0;
  int num_snapshots = 0;
  int feature_dim = 0;
  CoherenceMode coherence = CoherenceMode::NonCoherent;
  std::uint64_t seed = 0;
  std::vector<LabeledSample> samples;
};

Dataset make_dataset(const ExperimentConfig& config, const DetectorSpec& spec,
                     const std::vector<Draw>& draws, std::uint64_t seed);

/// Training set (phase Train, mixed SNR, num_train samples) or test set
/// (phase Test, config.test_snr_db, num_test_per_point samples) at
/// config.num_snapshots.
Dataset generate_dataset(const ExperimentConfig& config, const DetectorSpec& spec, Phase phase);

/// Header line then one `f1,...,fd,label` line per sample.
void write_dataset(std::ostream& out, const Dataset& dataset);
void write_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_dataset(std::istream& in);
Dataset read_dataset(const std::filesystem::path& path);

TrainingData to_training_data(const DetectorSpec& spec, const Dataset& dataset);

// ---------------------------------------------------------------------------
// Training and evaluation

struct TrainedDetector {
  Detector detector;
  TrainResult result;
  ModelFile model;
};

/// Builds, initializes and trains one network detector on `dataset`.
TrainedDetector train_detector(const ExperimentConfig& config, const DetectorSpec& spec,
                               const Dataset& dataset, std::uint64_t seed);

/// Restores a detector from a model written by train_detector.
Detector detector_from_model(const ModelFile& model);

/// Fraction of correct decisions per detector over the dataset (features
/// must match each detector's spec).
double dataset_accuracy(const Detector& detector, const Dataset& dataset);

/// Correct-decision counts per detector over the draws, fanned out over
/// `threads` workers. Order-independent.
std::vector<std::int64_t> count_correct(const std::vector<Detector>& detectors,
                                        const std::vector<Draw>& draws, int num_snapshots,
                                        int threads);

// ---------------------------------------------------------------------------
// Sweeps

/// accuracy[a][d] and trials[a][d] for axis value a and detector d.
struct SweepResult {
  std::vector<double> axis;
  std::vector<std::string> detectors;
  std::vector<std::vector<double>> accuracy;
  std::vector<std::vector<std::int64_t>> trials;
  std::uint64_t seed = 0;

  /// Accuracy of the named detector at the given axis value; throws
  /// std::out_of_range if absent.
  double at(double axis_value, std::string_view detector) const;

  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

struct SweepOptions {
  std::function<void(const std::string&)> log;
  /// Trained models are written here when set.
  std::optional<std::filesystem::path> model_dir;
};

/// Accuracy versus snapshot count at config.test_snr_db; networks are
/// retrained for each snapshot count.
SweepResult sweep_snapshots(const ExperimentConfig& config, const SweepOptions& options = {});

/// Accuracy versus test SNR for non-coherent sources; one mixed-SNR model
/// per network detector.
SweepResult sweep_snr_noncoherent(const ExperimentConfig& config, const SweepOptions& options = {});

/// Accuracy versus test SNR for coherent sources with forward-backward
/// smoothed features; CovNet is skipped.
SweepResult sweep_snr_coherent(const ExperimentConfig& config, const SweepOptions& options = {});

/// CSV with header `axis,detector,accuracy,n_trials,seed`, LF endings.
std::string to_csv(const SweepResult& result);
SweepResult parse_csv(std::string_view text);
void emit_csv(const SweepResult& result, const std::filesystem::path& path);

/// JSON manifest: tool version, run name, full config, config hash, seed.
void write_manifest(const std::filesystem::path& path, const ExperimentConfig& config,
                    std::string_view run_name);

// ---------------------------------------------------------------------------
// Complexity

struct ComplexityRow {
  std::string method;
  OperationCounts closed_form;
  OperationCounts measured;
  /// Wall-clock per decision, eigendecomposition excluded.
  double nanoseconds = 0.0;
};

struct ComplexityReport {
  int num_antennas = 0;
  int hidden1 = 0;
  int hidden2 = 0;
  std::vector<ComplexityRow> rows;  // ERNet, ECNet, AIC, MDL
  /// Shared eigendecomposition cost, reported separately.
  double eig_nanoseconds = 0.0;

  const ComplexityRow& row(std::string_view method) const;
};

/// Closed-form ERNet/ECNet operation counts (classical ones come from
/// count_ops_classical).
OperationCounts ernet_closed_form(int m, int n1, int n2);
OperationCounts ecnet_closed_form(int m, int n1, int n2);

/// `timing_reps` = 0 skips the wall-clock measurement.
ComplexityReport bench_complexity(const ExperimentConfig& config, int timing_reps = 20000);
std::string format_report(const ComplexityReport& report);

}  // namespace srcnum
