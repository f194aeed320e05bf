#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "srcnum/errors.hpp"
#include "srcnum/experiments.hpp"

namespace srcnum {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError("config: bad value for '" + std::string(key) + "': '" + std::string(text) + "'");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("config: bad boolean for '" + std::string(key) + "'");
}

template <class T, class F>
std::string join(const std::vector<T>& values, F format) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format(values[i]);
  }
  return out;
}

}  // namespace

std::string_view to_string(CoherenceMode mode) {
  return mode == CoherenceMode::Coherent ? "coherent" : "noncoherent";
}

CoherenceMode parse_coherence_mode(std::string_view text) {
  if (text == "noncoherent") return CoherenceMode::NonCoherent;
  if (text == "coherent") return CoherenceMode::Coherent;
  throw ConfigError("unknown coherence mode '" + std::string(text) + "'");
}

void ExperimentConfig::validate() const {
  if (num_antennas < 2) throw ConfigError("config: num_antennas must be >= 2");
  if (num_snapshots < 1) throw ConfigError("config: num_snapshots must be >= 1");
  if (max_sources < 0 || max_sources >= num_antennas) {
    throw ConfigError("config: max_sources must lie in [0, num_antennas)");
  }
  if (!(train_snr_low_db <= train_snr_high_db)) throw ConfigError("config: empty training SNR range");
  if (num_train < 1) throw ConfigError("config: num_train must be >= 1");
  if (num_test_per_point < 1) throw ConfigError("config: num_test_per_point must be >= 1");
  if (detectors.empty()) throw ConfigError("config: no detectors selected");
  if (subarray_size < 2 || subarray_size > num_antennas) {
    throw ConfigError("config: subarray_size must lie in [2, num_antennas]");
  }
  if (epochs < 0) throw ConfigError("config: epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("config: batch_size must be >= 1");
  if (!(learning_rate >= 0.0)) throw ConfigError("config: learning_rate must be >= 0");
  for (int n : snapshot_axis) {
    if (n < 1) throw ConfigError("config: snapshot_axis entries must be >= 1");
  }
  if (threads < 0) throw ConfigError("config: threads must be >= 0");
}

std::string to_text(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "num_antennas = " << c.num_antennas << '\n'
      << "num_snapshots = " << c.num_snapshots << '\n'
      << "max_sources = " << c.max_sources << '\n'
      << "train_snr_low_db = " << format_double(c.train_snr_low_db) << '\n'
      << "train_snr_high_db = " << format_double(c.train_snr_high_db) << '\n'
      << "num_train = " << c.num_train << '\n'
      << "num_test_per_point = " << c.num_test_per_point << '\n'
      << "detectors = "
      << join(c.detectors, [](DetectorKind k) { return std::string(to_string(k)); }) << '\n'
      << "coherence = " << to_string(c.coherence) << '\n'
      << "fbss = " << (c.fbss ? "true" : "false") << '\n'
      << "subarray_size = " << c.subarray_size << '\n'
      << "seed = " << c.seed << '\n'
      << "epochs = " << c.epochs << '\n'
      << "batch_size = " << c.batch_size << '\n'
      << "learning_rate = " << format_double(c.learning_rate) << '\n'
      << "test_snr_db = " << format_double(c.test_snr_db) << '\n'
      << "snapshot_axis = " << join(c.snapshot_axis, [](int n) { return std::to_string(n); }) << '\n'
      << "snr_axis = " << join(c.snr_axis, format_double) << '\n'
      << "normalize_features = " << (c.normalize_features ? "true" : "false") << '\n'
      << "threads = " << c.threads << '\n';
  return out.str();
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  std::size_t start = 0;
  int line_no = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? text.size() - start : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));

    if (key == "num_antennas") c.num_antennas = parse_number<int>(key, value);
    else if (key == "num_snapshots") c.num_snapshots = parse_number<int>(key, value);
    else if (key == "max_sources") c.max_sources = parse_number<int>(key, value);
    else if (key == "train_snr_low_db") c.train_snr_low_db = parse_number<double>(key, value);
    else if (key == "train_snr_high_db") c.train_snr_high_db = parse_number<double>(key, value);
    else if (key == "num_train") c.num_train = parse_number<int>(key, value);
    else if (key == "num_test_per_point") c.num_test_per_point = parse_number<int>(key, value);
    else if (key == "detectors") {
      c.detectors.clear();
      for (auto item : split(value, ',')) c.detectors.push_back(parse_detector_kind(item));
    } else if (key == "coherence") c.coherence = parse_coherence_mode(value);
    else if (key == "fbss") c.fbss = parse_bool(key, value);
    else if (key == "subarray_size") c.subarray_size = parse_number<int>(key, value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "epochs") c.epochs = parse_number<int>(key, value);
    else if (key == "batch_size") c.batch_size = parse_number<int>(key, value);
    else if (key == "learning_rate") c.learning_rate = parse_number<double>(key, value);
    else if (key == "test_snr_db") c.test_snr_db = parse_number<double>(key, value);
    else if (key == "snapshot_axis") {
      c.snapshot_axis.clear();
      for (auto item : split(value, ',')) c.snapshot_axis.push_back(parse_number<int>(key, item));
    } else if (key == "snr_axis") {
      c.snr_axis.clear();
      for (auto item : split(value, ',')) c.snr_axis.push_back(parse_number<double>(key, item));
    } else if (key == "normalize_features") c.normalize_features = parse_bool(key, value);
    else if (key == "threads") c.threads = parse_number<int>(key, value);
    else throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_text(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

DetectorSpec detector_spec(const ExperimentConfig& config, DetectorKind kind) {
  DetectorSpec spec;
  spec.kind = kind;
  spec.num_antennas = config.num_antennas;
  if (config.fbss && kind != DetectorKind::CovNet) spec.subarray_size = config.subarray_size;
  spec.normalize_features = config.normalize_features;
  return spec;
}

TrainConfig train_config(const ExperimentConfig& config, DetectorKind kind, std::uint64_t seed) {
  TrainConfig tc;
  tc.learning_rate = config.learning_rate;
  tc.batch_size = config.batch_size;
  tc.epochs = config.epochs;
  tc.seed = seed;
  tc.loss = loss_for(kind);
  return tc;
}

}  // namespace srcnum
