#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>

#include "srcnum/errors.hpp"
#include "srcnum/experiments.hpp"

using namespace srcnum;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.num_train = 300;
  c.num_test_per_point = 60;
  c.epochs = 3;
  c.snr_axis = {0.0, 10.0};
  c.snapshot_axis = {10, 20};
  c.detectors = {DetectorKind::ERNet, DetectorKind::ECNet, DetectorKind::Aic};
  c.threads = 1;
  return c;
}

}  // namespace

TEST(Config, DefaultsRoundTripThroughText) {
  const ExperimentConfig c;
  EXPECT_EQ(parse_config(to_text(c)), c);
  EXPECT_EQ(c.num_antennas, 10);
  EXPECT_EQ(c.num_snapshots, 20);
  EXPECT_EQ(c.max_sources, 5);
}

TEST(Config, OverridesCommentsAndLists) {
  const ExperimentConfig c = parse_config(
      "# comment\n"
      "num_snapshots = 100   # trailing\n"
      "detectors = ernet, mdl\n"
      "snr_axis = 0, 2.5\n"
      "coherence = coherent\n"
      "fbss = true\n");
  EXPECT_EQ(c.num_snapshots, 100);
  EXPECT_EQ(c.detectors, (std::vector<DetectorKind>{DetectorKind::ERNet, DetectorKind::Mdl}));
  EXPECT_EQ(c.snr_axis, (std::vector<double>{0.0, 2.5}));
  EXPECT_EQ(c.coherence, CoherenceMode::Coherent);
  EXPECT_TRUE(c.fbss);
  EXPECT_EQ(parse_config(to_text(c)), c);
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config("colour = blue\n"), ConfigError);
  EXPECT_THROW(parse_config("num_snapshots = many\n"), ConfigError);
  EXPECT_THROW(parse_config("num_snapshots 20\n"), ConfigError);
  EXPECT_THROW(parse_config("max_sources = 10\n"), ConfigError);
  EXPECT_THROW(parse_config("detectors = music\n"), ConfigError);
  EXPECT_THROW(parse_config("fbss = maybe\n"), ConfigError);
}

TEST(Config, HashTracksContent) {
  ExperimentConfig a;
  ExperimentConfig b;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 7;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, DetectorSpecAndTrainConfig) {
  ExperimentConfig c;
  c.fbss = true;
  c.subarray_size = 6;
  const DetectorSpec s = detector_spec(c, DetectorKind::ECNet);
  EXPECT_EQ(s.subarray_size, 6);
  EXPECT_FALSE(detector_spec(c, DetectorKind::CovNet).subarray_size.has_value());
  const TrainConfig t = train_config(c, DetectorKind::ERNet, 5);
  EXPECT_EQ(t.loss, LossKind::L2);
  EXPECT_EQ(t.batch_size, 128);
  EXPECT_EQ(t.epochs, 400);
  EXPECT_EQ(t.learning_rate, 1e-3);
  EXPECT_EQ(t.seed, 5u);
  EXPECT_EQ(train_config(c, DetectorKind::ECNet, 5).loss, LossKind::CategoricalCrossEntropy);
}

TEST(Draws, SourceCountIsUniform) {
  const ExperimentConfig c;
  std::array<int, 6> hist{};
  const int total = 60000;
  for (int i = 0; i < total; ++i) {
    const Scenario s = draw_scenario(c, 20, 5.0, sample_seed(c.seed, Phase::Train, 20, static_cast<std::uint64_t>(i)));
    ASSERT_GE(s.num_sources(), 0);
    ASSERT_LE(s.num_sources(), 5);
    ++hist[static_cast<std::size_t>(s.num_sources())];
  }
  for (int h : hist) EXPECT_NEAR(static_cast<double>(h) / total, 1.0 / 6.0, 0.01);
}

TEST(Draws, DoasInRangeAndDistinct) {
  const ExperimentConfig c;
  for (std::uint64_t i = 0; i < 2000; ++i) {
    const Scenario s = draw_scenario(c, 20, 5.0, i);
    std::set<double> seen(s.doas.begin(), s.doas.end());
    EXPECT_EQ(seen.size(), s.doas.size());
    for (double t : s.doas) {
      EXPECT_GE(t, 0.0);
      EXPECT_LT(t, 2.0 * std::acos(-1.0));
    }
    EXPECT_NO_THROW(s.validate());
  }
}

TEST(Draws, CoherentCountCoversZeroThroughKMinusOne) {
  ExperimentConfig c;
  c.coherence = CoherenceMode::Coherent;
  std::set<std::pair<int, int>> seen;  // (K, coherent count)
  for (std::uint64_t i = 0; i < 5000; ++i) {
    const Scenario s = draw_scenario(c, 20, 0.0, i);
    const auto& coh = std::get<Coherent>(s.coherence);
    const int k = s.num_sources();
    EXPECT_LE(coh.num_coherent(), std::max(0, k - 1));
    for (const auto& [copy, target] : coh.copy_map) {
      EXPECT_GE(copy, k - coh.num_coherent());
      EXPECT_LT(target, k - coh.num_coherent());
    }
    EXPECT_NO_THROW(s.validate());
    seen.emplace(k, coh.num_coherent());
  }
  for (int k = 1; k <= 5; ++k) {
    EXPECT_TRUE(seen.count({k, 0})) << "K=" << k;
    EXPECT_TRUE(seen.count({k, k - 1})) << "K=" << k;
  }
}

TEST(Draws, NoSourceDrawHasNoiseOnlyCovariance) {
  const ExperimentConfig c;
  const auto draws = generate_draws(c, 20, 5.0, Phase::Test, 1, 300);
  bool found = false;
  for (const auto& d : draws) {
    if (d.true_count != 0) continue;
    found = true;
    EXPECT_TRUE(d.scenario.doas.empty());
    EXPECT_EQ(d.covariance.rows(), 10u);
    // Noise variance 10^-0.5 per antenna.
    EXPECT_NEAR(d.covariance.trace().real() / 10.0, std::pow(10.0, -0.5), 0.15);
  }
  EXPECT_TRUE(found);
}

TEST(Draws, TrainAndTestStreamsAreDisjoint) {
  const ExperimentConfig c;
  std::set<std::uint64_t> train;
  for (std::uint64_t i = 0; i < 5000; ++i) train.insert(sample_seed(c.seed, Phase::Train, 20, i));
  EXPECT_EQ(train.size(), 5000u);
  for (double snr : c.snr_axis) {
    for (std::uint64_t i = 0; i < 2000; ++i) {
      EXPECT_FALSE(train.count(sample_seed(c.seed, Phase::Test, test_stream_salt(20, snr), i)));
    }
  }
  EXPECT_NE(test_stream_salt(20, 5.0), test_stream_salt(20, 10.0));
  EXPECT_NE(test_stream_salt(20, 5.0), test_stream_salt(100, 5.0));
}

TEST(Draws, DeterministicAndMixedSnrInRange) {
  const ExperimentConfig c;
  const auto a = generate_draws(c, 20, std::nullopt, Phase::Train, 20, 50);
  const auto b = generate_draws(c, 20, std::nullopt, Phase::Train, 20, 50);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].covariance, b[i].covariance);
    EXPECT_GE(a[i].scenario.snr_db, 0.0);
    EXPECT_LE(a[i].scenario.snr_db, 40.0);
  }
}

TEST(Dataset, TextRoundTripIsExact) {
  ExperimentConfig c = small_config();
  c.num_test_per_point = 40;
  const DetectorSpec spec = detector_spec(c, DetectorKind::ECNet);
  const Dataset ds = generate_dataset(c, spec, Phase::Test);
  ASSERT_EQ(ds.samples.size(), 40u);
  std::stringstream io;
  write_dataset(io, ds);
  const Dataset back = read_dataset(io);
  EXPECT_EQ(back.num_antennas, 10);
  EXPECT_EQ(back.num_snapshots, 20);
  EXPECT_EQ(back.feature_dim, 10);
  EXPECT_EQ(back.seed, c.seed);
  ASSERT_EQ(back.samples.size(), ds.samples.size());
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    EXPECT_EQ(back.samples[i].features, ds.samples[i].features);
    EXPECT_EQ(back.samples[i].true_count, ds.samples[i].true_count);
  }
}

TEST(Dataset, RejectsMalformedFiles) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_dataset(in);
  };
  const std::string header = "srcnum-dataset M=3 N=20 feature_dim=2 coherence=noncoherent seed=1\n";
  EXPECT_NO_THROW(parse(header + "1.5,0.5,2\n"));
  EXPECT_THROW(parse(""), FormatError);
  EXPECT_THROW(parse("garbage\n"), FormatError);
  EXPECT_THROW(parse("srcnum-dataset M=3 N=20\n"), FormatError);
  EXPECT_THROW(parse(header + "1.5,2\n"), FormatError);
  EXPECT_THROW(parse(header + "1.5,0.5,3\n"), FormatError);
  EXPECT_THROW(parse(header + "1.5,x,1\n"), FormatError);
}

TEST(Dataset, TrainingDataTargets) {
  ExperimentConfig c = small_config();
  c.num_train = 20;
  const DetectorSpec er = detector_spec(c, DetectorKind::ERNet);
  const Dataset ds = generate_dataset(c, er, Phase::Train);
  const TrainingData td = to_training_data(er, ds);
  for (std::size_t i = 0; i < td.size(); ++i) {
    EXPECT_EQ(td.targets[i], (std::vector<double>{static_cast<double>(ds.samples[i].true_count)}));
  }
  EXPECT_THROW(to_training_data(detector_spec(c, DetectorKind::CovNet), ds), DimensionError);
}

TEST(Training, ErnetLossDropsTenfold) {
  ExperimentConfig c = small_config();
  c.num_train = 2000;
  c.epochs = 100;
  const DetectorSpec spec = detector_spec(c, DetectorKind::ERNet);
  const Dataset ds = generate_dataset(c, spec, Phase::Train);
  const TrainedDetector t = train_detector(c, spec, ds, 1);
  EXPECT_LE(t.result.final_loss, t.result.initial_loss / 10.0);
}

TEST(Training, EcnetBeatsUniformGuess) {
  ExperimentConfig c = small_config();
  c.num_train = 2000;
  c.epochs = 100;
  const DetectorSpec spec = detector_spec(c, DetectorKind::ECNet);
  const Dataset ds = generate_dataset(c, spec, Phase::Train);
  const TrainedDetector t = train_detector(c, spec, ds, 1);
  EXPECT_LT(t.result.final_loss, std::log(10.0));
  EXPECT_LT(t.result.final_loss, t.result.initial_loss);
}

TEST(Training, ZeroEpochsKeepsInitialization) {
  ExperimentConfig c = small_config();
  c.epochs = 0;
  c.num_train = 50;
  const DetectorSpec spec = detector_spec(c, DetectorKind::ECNet);
  const Dataset ds = generate_dataset(c, spec, Phase::Train);
  const TrainedDetector a = train_detector(c, spec, ds, 3);
  const TrainedDetector b = train_detector(c, spec, ds, 3);
  EXPECT_EQ(a.result.network, b.result.network);
  EXPECT_EQ(a.result.initial_loss, a.result.final_loss);
  EXPECT_TRUE(a.result.loss_history.empty());
}

TEST(Training, ModelRestoresSameDetector) {
  ExperimentConfig c = small_config();
  c.fbss = true;
  c.coherence = CoherenceMode::Coherent;
  const DetectorSpec spec = detector_spec(c, DetectorKind::ERNet);
  const Dataset ds = generate_dataset(c, spec, Phase::Train);
  const TrainedDetector t = train_detector(c, spec, ds, 4);
  const ModelFile back = parse_model(serialize_model(t.model));
  const Detector d = detector_from_model(back);
  EXPECT_EQ(d.spec(), spec);
  EXPECT_EQ(back.metadata.at("coherence"), "coherent");
  const Dataset test = generate_dataset(c, spec, Phase::Test);
  EXPECT_EQ(dataset_accuracy(d, test), dataset_accuracy(t.detector, test));
}

TEST(Evaluation, CountCorrectIsThreadCountIndependent) {
  const ExperimentConfig c = small_config();
  const auto draws = generate_draws(c, 20, 5.0, Phase::Test, 9, 120);
  const std::vector<Detector> dets = {Detector::classical(detector_spec(c, DetectorKind::Aic)),
                                      Detector::classical(detector_spec(c, DetectorKind::Mdl))};
  const auto one = count_correct(dets, draws, 20, 1);
  EXPECT_EQ(count_correct(dets, draws, 20, 3), one);
  EXPECT_EQ(count_correct(dets, draws, 20, 7), one);
  EXPECT_EQ(count_correct(dets, {}, 20, 2), (std::vector<std::int64_t>{0, 0}));
}

TEST(Sweep, CsvShapeAndRoundTrip) {
  SweepResult empty;
  empty.seed = 3;
  EXPECT_EQ(to_csv(empty), "axis,detector,accuracy,n_trials,seed\n");

  SweepResult r;
  r.seed = 2019;
  r.detectors = {"ernet", "ecnet", "aic", "mdl"};
  for (int a = 0; a < 9; ++a) {
    r.axis.push_back(5.0 * a);
    r.accuracy.emplace_back();
    r.trials.emplace_back();
    for (int d = 0; d < 4; ++d) {
      r.accuracy.back().push_back((a * 4 + d) / 37.0);
      r.trials.back().push_back(2000);
    }
  }
  const std::string csv = to_csv(r);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 37);
  EXPECT_EQ(parse_csv(csv), r);
  EXPECT_DOUBLE_EQ(r.at(40.0, "mdl"), 35.0 / 37.0);
  EXPECT_THROW(r.at(41.0, "mdl"), std::out_of_range);
  EXPECT_THROW(parse_csv("axis,detector\n"), FormatError);
  EXPECT_THROW(parse_csv(csv.substr(0, csv.rfind('\n', csv.size() - 2) + 1)), FormatError);
}

TEST(Sweep, SmallSnrSweepIsReproducible) {
  const ExperimentConfig c = small_config();
  const SweepResult a = sweep_snr_noncoherent(c);
  ExperimentConfig threaded = c;
  threaded.threads = 3;
  const SweepResult b = sweep_snr_noncoherent(threaded);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.axis, c.snr_axis);
  EXPECT_EQ(a.detectors, (std::vector<std::string>{"ernet", "ecnet", "aic"}));
  for (const auto& row : a.trials) {
    for (auto t : row) EXPECT_EQ(t, 60);
  }
}

TEST(Sweep, CoherentSweepUsesSmoothedDetectorsOnly) {
  ExperimentConfig c = small_config();
  c.detectors = {DetectorKind::Mdl, DetectorKind::CovNet};
  const SweepResult r = sweep_snr_coherent(c);
  EXPECT_EQ(r.detectors, (std::vector<std::string>{"fbss-mdl"}));
  c.detectors = {DetectorKind::CovNet};
  EXPECT_THROW(sweep_snr_coherent(c), ConfigError);
}

TEST(Sweep, SnapshotAxis) {
  ExperimentConfig c = small_config();
  c.detectors = {DetectorKind::Aic, DetectorKind::Mdl};
  const SweepResult r = sweep_snapshots(c);
  EXPECT_EQ(r.axis, (std::vector<double>{10.0, 20.0}));
  EXPECT_EQ(r.detectors.size(), 2u);
}

TEST(Complexity, ClosedForms) {
  const OperationCounts er = ernet_closed_form(10, 8, 8);
  EXPECT_EQ(er.mul_div, 88u);
  EXPECT_EQ(er.add_sub, 17u);
  EXPECT_EQ(er.logarithms, 0u);
  const OperationCounts ec = ecnet_closed_form(10, 8, 8);
  EXPECT_EQ(ec.mul_div, 160u);
  EXPECT_EQ(ec.add_sub, 26u);
  EXPECT_EQ(ec.comparisons, 10u);
}

TEST(Complexity, ReportRows) {
  const ComplexityReport r = bench_complexity(ExperimentConfig{}, 0);
  ASSERT_EQ(r.rows.size(), 4u);
  EXPECT_EQ(r.row("ERNet").closed_form.mul_div, 88u);
  EXPECT_EQ(r.row("ECNet").closed_form.mul_div, 160u);
  EXPECT_EQ(r.row("AIC").closed_form.mul_div, 170u);
  EXPECT_EQ(r.row("MDL").closed_form.logarithms, 10u);
  EXPECT_GT(r.row("ECNet").measured.comparisons, 0u);
  EXPECT_THROW(r.row("MUSIC"), std::out_of_range);
  EXPECT_NE(format_report(r).find("ERNet"), std::string::npos);
}
