#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "srcnum/errors.hpp"
#include "srcnum/experiments.hpp"

namespace srcnum {

namespace {

constexpr std::uint64_t kTrainStream = 0x7472'6169'6e00'0000ULL;  // "train"
constexpr std::uint64_t kTestStream = 0x7465'7374'0000'0000ULL;   // "test"
constexpr std::uint64_t kScenarioDrawTag = 0x5ce7'a110'0000'0001ULL;
constexpr int kMaxDoaRedraws = 100;
constexpr std::string_view kDatasetMagic = "srcnum-dataset";

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool all_distinct(const std::vector<double>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      if (v[i] == v[j]) return false;
    }
  }
  return true;
}

template <class T>
T parse_field(std::string_view text, std::string_view what) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError("dataset: bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::uint64_t test_stream_salt(int num_snapshots, double snr_db) {
  return static_cast<std::uint64_t>(num_snapshots) * 1'000'003ULL +
         static_cast<std::uint64_t>(std::llround((snr_db + 1000.0) * 1000.0));
}

std::uint64_t sample_seed(std::uint64_t master, Phase phase, std::uint64_t salt,
                          std::uint64_t index) {
  const std::uint64_t stream = (phase == Phase::Train ? kTrainStream : kTestStream) ^ mix_seed(salt);
  return derive_seed(master, stream, index);
}

Scenario draw_scenario(const ExperimentConfig& config, int num_snapshots, double snr_db,
                       std::uint64_t seed) {
  Rng rng(mix_seed(seed ^ kScenarioDrawTag));
  std::uniform_int_distribution<int> count_dist(0, config.max_sources);
  std::uniform_real_distribution<double> angle_dist(0.0, 2.0 * std::numbers::pi);

  Scenario scenario;
  scenario.num_antennas = config.num_antennas;
  scenario.num_snapshots = num_snapshots;
  scenario.snr_db = snr_db;
  scenario.seed = seed;

  const int k = count_dist(rng);
  scenario.doas.resize(static_cast<std::size_t>(k));
  for (int attempt = 0;; ++attempt) {
    if (attempt == kMaxDoaRedraws) {
      throw ConfigError("draw_scenario: could not draw distinct DOAs");
    }
    for (auto& theta : scenario.doas) theta = angle_dist(rng);
    if (all_distinct(scenario.doas)) break;
  }

  if (config.coherence == CoherenceMode::Coherent) {
    Coherent coherent;
    if (k > 0) {
      const int num_coherent = std::uniform_int_distribution<int>(0, k - 1)(rng);
      const int num_independent = k - num_coherent;
      std::uniform_int_distribution<int> target_dist(0, num_independent - 1);
      for (int copy = num_independent; copy < k; ++copy) {
        coherent.copy_map.emplace_back(copy, target_dist(rng));
      }
    }
    scenario.coherence = std::move(coherent);
  }
  return scenario;
}

ComplexMatrix simulate_covariance(const Scenario& scenario) {
  return sample_covariance(generate_snapshots(scenario));
}

std::vector<Draw> generate_draws(const ExperimentConfig& config, int num_snapshots,
                                 std::optional<double> snr_db, Phase phase, std::uint64_t salt,
                                 std::size_t count) {
  std::vector<Draw> draws;
  draws.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t seed = sample_seed(config.seed, phase, salt, i);
    double snr = 0.0;
    if (snr_db) {
      snr = *snr_db;
    } else {
      Rng snr_rng(mix_seed(seed));
      snr = std::uniform_real_distribution<double>(config.train_snr_low_db,
                                                   config.train_snr_high_db)(snr_rng);
    }
    Scenario scenario = draw_scenario(config, num_snapshots, snr, seed);
    ComplexMatrix cov = simulate_covariance(scenario);
    const int k = scenario.num_sources();
    draws.push_back(Draw{std::move(scenario), std::move(cov), k});
  }
  return draws;
}

Dataset make_dataset(const ExperimentConfig& config, const DetectorSpec& spec,
                     const std::vector<Draw>& draws, std::uint64_t seed) {
  Dataset ds;
  ds.num_antennas = config.num_antennas;
  ds.num_snapshots = draws.empty() ? config.num_snapshots : draws.front().scenario.num_snapshots;
  ds.feature_dim = spec.input_dim();
  ds.coherence = config.coherence;
  ds.seed = seed;
  ds.samples.reserve(draws.size());
  for (const auto& draw : draws) {
    ds.samples.push_back(LabeledSample{make_features(spec, draw.covariance), draw.true_count,
                                       draw.scenario});
  }
  return ds;
}

Dataset generate_dataset(const ExperimentConfig& config, const DetectorSpec& spec, Phase phase) {
  config.validate();
  spec.validate();
  const int n = config.num_snapshots;
  if (phase == Phase::Train) {
    const auto draws = generate_draws(config, n, std::nullopt, Phase::Train,
                                      static_cast<std::uint64_t>(n),
                                      static_cast<std::size_t>(config.num_train));
    return make_dataset(config, spec, draws, config.seed);
  }
  const auto draws = generate_draws(config, n, config.test_snr_db, Phase::Test,
                                    test_stream_salt(n, config.test_snr_db),
                                    static_cast<std::size_t>(config.num_test_per_point));
  return make_dataset(config, spec, draws, config.seed);
}

void write_dataset(std::ostream& out, const Dataset& ds) {
  out << kDatasetMagic << " M=" << ds.num_antennas << " N=" << ds.num_snapshots
      << " feature_dim=" << ds.feature_dim << " coherence=" << to_string(ds.coherence)
      << " seed=" << ds.seed << '\n';
  for (const auto& sample : ds.samples) {
    if (static_cast<int>(sample.features.size()) != ds.feature_dim) {
      throw DimensionError("write_dataset: feature length does not match feature_dim");
    }
    for (double f : sample.features) out << format_double(f) << ',';
    out << sample.true_count << '\n';
  }
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open dataset file for writing: " + path.string());
  write_dataset(out, ds);
  if (!out) throw std::runtime_error("failed writing dataset file: " + path.string());
}

Dataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("dataset: empty file");
  std::istringstream header(line);
  std::string magic;
  header >> magic;
  if (magic != kDatasetMagic) throw FormatError("dataset: missing 'srcnum-dataset' header");

  Dataset ds;
  bool seen[5] = {};
  for (std::string field; header >> field;) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw FormatError("dataset: bad header field '" + field + "'");
    const std::string key = field.substr(0, eq);
    const std::string_view value = std::string_view(field).substr(eq + 1);
    if (key == "M") { ds.num_antennas = parse_field<int>(value, "M"); seen[0] = true; }
    else if (key == "N") { ds.num_snapshots = parse_field<int>(value, "N"); seen[1] = true; }
    else if (key == "feature_dim") { ds.feature_dim = parse_field<int>(value, "feature_dim"); seen[2] = true; }
    else if (key == "coherence") { ds.coherence = parse_coherence_mode(value); seen[3] = true; }
    else if (key == "seed") { ds.seed = parse_field<std::uint64_t>(value, "seed"); seen[4] = true; }
    else throw FormatError("dataset: unknown header field '" + key + "'");
  }
  for (bool s : seen) {
    if (!s) throw FormatError("dataset: header must carry M, N, feature_dim, coherence and seed");
  }

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    LabeledSample sample;
    std::string_view rest(line);
    for (int i = 0; i < ds.feature_dim; ++i) {
      const auto comma = rest.find(',');
      if (comma == std::string_view::npos) {
        throw FormatError("dataset line " + std::to_string(line_no) + ": too few fields");
      }
      sample.features.push_back(parse_field<double>(rest.substr(0, comma), "feature"));
      rest.remove_prefix(comma + 1);
    }
    sample.true_count = parse_field<int>(rest, "label");
    if (sample.true_count < 0 || sample.true_count >= ds.num_antennas) {
      throw FormatError("dataset line " + std::to_string(line_no) + ": label out of range");
    }
    sample.meta.num_antennas = ds.num_antennas;
    sample.meta.num_snapshots = ds.num_snapshots;
    ds.samples.push_back(std::move(sample));
  }
  return ds;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path.string());
  return read_dataset(in);
}

TrainingData to_training_data(const DetectorSpec& spec, const Dataset& ds) {
  if (ds.feature_dim != spec.input_dim()) {
    throw DimensionError("to_training_data: dataset feature_dim " + std::to_string(ds.feature_dim) +
                         " does not match detector input " + std::to_string(spec.input_dim()));
  }
  TrainingData data;
  data.inputs.reserve(ds.samples.size());
  data.targets.reserve(ds.samples.size());
  for (const auto& sample : ds.samples) {
    data.inputs.push_back(sample.features);
    data.targets.push_back(make_target(spec, sample.true_count));
  }
  return data;
}

}  // namespace srcnum
