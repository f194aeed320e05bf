#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "srcnum/errors.hpp"
#include "srcnum/experiments.hpp"

namespace srcnum {

namespace {

constexpr std::string_view kCsvHeader = "axis,detector,accuracy,n_trials,seed";

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
T parse_cell(std::string_view text, int line_no) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError("csv line " + std::to_string(line_no) + ": bad value '" + std::string(text) + "'");
  }
  return v;
}

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string to_csv(const SweepResult& result) {
  std::string out(kCsvHeader);
  out += '\n';
  for (std::size_t a = 0; a < result.axis.size(); ++a) {
    for (std::size_t d = 0; d < result.detectors.size(); ++d) {
      out += format_double(result.axis[a]);
      out += ',';
      out += result.detectors[d];
      out += ',';
      out += format_double(result.accuracy[a][d]);
      out += ',';
      out += std::to_string(result.trials[a][d]);
      out += ',';
      out += std::to_string(result.seed);
      out += '\n';
    }
  }
  return out;
}

SweepResult parse_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw FormatError("csv: expected header '" + std::string(kCsvHeader) + "'");
  }

  struct Row {
    double axis;
    std::string detector;
    double accuracy;
    std::int64_t trials;
  };
  std::vector<Row> rows;
  SweepResult result;
  int line_no = 1;
  bool have_seed = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos;) {
      cells.push_back(rest.substr(0, pos));
      rest.remove_prefix(pos + 1);
    }
    cells.push_back(rest);
    if (cells.size() != 5) throw FormatError("csv line " + std::to_string(line_no) + ": expected 5 cells");

    Row row{parse_cell<double>(cells[0], line_no), std::string(cells[1]),
            parse_cell<double>(cells[2], line_no), parse_cell<std::int64_t>(cells[3], line_no)};
    const auto seed = parse_cell<std::uint64_t>(cells[4], line_no);
    if (have_seed && seed != result.seed) throw FormatError("csv: rows disagree on the seed");
    result.seed = seed;
    have_seed = true;

    if (std::find(result.axis.begin(), result.axis.end(), row.axis) == result.axis.end()) {
      result.axis.push_back(row.axis);
    }
    if (std::find(result.detectors.begin(), result.detectors.end(), row.detector) == result.detectors.end()) {
      result.detectors.push_back(row.detector);
    }
    rows.push_back(std::move(row));
  }

  result.accuracy.assign(result.axis.size(), std::vector<double>(result.detectors.size(), 0.0));
  result.trials.assign(result.axis.size(), std::vector<std::int64_t>(result.detectors.size(), 0));
  std::vector<std::vector<bool>> filled(result.axis.size(), std::vector<bool>(result.detectors.size(), false));
  for (const auto& row : rows) {
    const auto a = static_cast<std::size_t>(std::find(result.axis.begin(), result.axis.end(), row.axis) - result.axis.begin());
    const auto d = static_cast<std::size_t>(
        std::find(result.detectors.begin(), result.detectors.end(), row.detector) - result.detectors.begin());
    if (filled[a][d]) throw FormatError("csv: duplicate cell for " + row.detector);
    filled[a][d] = true;
    result.accuracy[a][d] = row.accuracy;
    result.trials[a][d] = row.trials;
  }
  for (const auto& r : filled) {
    if (std::find(r.begin(), r.end(), false) != r.end()) throw FormatError("csv: incomplete sweep grid");
  }
  return result;
}

void emit_csv(const SweepResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open CSV for writing: " + path.string());
  out << to_csv(result);
  if (!out) throw std::runtime_error("failed writing CSV: " + path.string());
}

void write_manifest(const std::filesystem::path& path, const ExperimentConfig& config,
                    std::string_view run_name) {
  nlohmann::ordered_json manifest;
  manifest["tool"] = "srcnum";
  manifest["version"] = std::string(kVersion);
  manifest["run"] = std::string(run_name);
  manifest["seed"] = config.seed;
  manifest["config_hash"] = hex(config_hash(config));
  manifest["compiler"] = __VERSION__;
  manifest["cplusplus"] = __cplusplus;

  nlohmann::ordered_json fields = nlohmann::ordered_json::object();
  std::istringstream lines(to_text(config));
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) fields[line.substr(0, eq)] = line.substr(eq + 3);
  }
  manifest["config"] = std::move(fields);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open manifest for writing: " + path.string());
  out << manifest.dump(2) << '\n';
}

}  // namespace srcnum
