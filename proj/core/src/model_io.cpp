#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "srcnum/errors.hpp"
#include "srcnum/neural.hpp"

namespace srcnum {

namespace {

constexpr std::string_view kMagic = "srcnum-model 1";

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view token) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw FormatError("model: bad number '" + std::string(token) + "'");
  }
  return v;
}

template <class Int>
Int parse_int(std::string_view token) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw FormatError("model: bad integer '" + std::string(token) + "'");
  }
  return v;
}

void write_values(std::ostream& out, std::string_view tag, const std::vector<double>& values) {
  out << tag;
  for (double v : values) out << ' ' << format_double(v);
  out << '\n';
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(std::move(t));
  return out;
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : in_(std::string(text)) {}

  std::string next(const char* expecting) {
    std::string line;
    while (std::getline(in_, line)) {
      ++number_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return line;
    }
    throw FormatError(std::string("model: unexpected end of file, expecting ") + expecting);
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError("model line " + std::to_string(number_) + ": " + what);
  }

 private:
  std::istringstream in_;
  int number_ = 0;
};

std::vector<double> read_values(LineReader& reader, std::string_view tag, std::size_t count) {
  const auto parts = tokens(reader.next(std::string(tag).c_str()));
  if (parts.empty() || parts[0] != tag) reader.fail("expected '" + std::string(tag) + "'");
  if (parts.size() != count + 1) {
    reader.fail(std::string(tag) + ": expected " + std::to_string(count) + " values, got " +
                std::to_string(parts.size() - 1));
  }
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 1; i < parts.size(); ++i) out.push_back(parse_double(parts[i]));
  return out;
}

}  // namespace

std::string serialize_model(const ModelFile& model) {
  model.network.validate();
  std::ostringstream out;
  out << kMagic << '\n';
  for (const auto& [key, value] : model.metadata) {
    if (key.empty() || key.find_first_of(" \t\n") != std::string::npos ||
        value.find('\n') != std::string::npos) {
      throw FormatError("model: metadata key/value not representable: '" + key + "'");
    }
    out << "meta " << key << ' ' << value << '\n';
  }
  const auto& c = model.config;
  out << "train learning_rate " << format_double(c.learning_rate) << '\n'
      << "train batch_size " << c.batch_size << '\n'
      << "train epochs " << c.epochs << '\n'
      << "train adam_beta1 " << format_double(c.adam_beta1) << '\n'
      << "train adam_beta2 " << format_double(c.adam_beta2) << '\n'
      << "train adam_epsilon " << format_double(c.adam_epsilon) << '\n'
      << "train seed " << c.seed << '\n'
      << "train loss " << to_string(c.loss) << '\n';
  out << "layers " << model.network.layers.size() << '\n';
  for (const auto& layer : model.network.layers) {
    out << "layer " << layer.inputs << ' ' << layer.outputs << ' ' << to_string(layer.activation)
        << '\n';
    write_values(out, "weights", layer.weights);
    write_values(out, "bias", layer.bias);
  }
  out << "end\n";
  return out.str();
}

ModelFile parse_model(std::string_view text) {
  LineReader reader(text);
  if (reader.next("header") != kMagic) reader.fail("missing 'srcnum-model 1' header");

  ModelFile model;
  std::string line = reader.next("layers");
  while (true) {
    if (line.rfind("meta ", 0) == 0) {
      const auto space = line.find(' ', 5);
      if (space == std::string::npos) {
        model.metadata[line.substr(5)] = "";
      } else {
        model.metadata[line.substr(5, space - 5)] = line.substr(space + 1);
      }
    } else if (line.rfind("train ", 0) == 0) {
      const auto parts = tokens(line);
      if (parts.size() != 3) reader.fail("train entries take exactly one value");
      const auto& key = parts[1];
      const auto& value = parts[2];
      auto& c = model.config;
      if (key == "learning_rate") c.learning_rate = parse_double(value);
      else if (key == "batch_size") c.batch_size = parse_int<int>(value);
      else if (key == "epochs") c.epochs = parse_int<int>(value);
      else if (key == "adam_beta1") c.adam_beta1 = parse_double(value);
      else if (key == "adam_beta2") c.adam_beta2 = parse_double(value);
      else if (key == "adam_epsilon") c.adam_epsilon = parse_double(value);
      else if (key == "seed") c.seed = parse_int<std::uint64_t>(value);
      else if (key == "loss") c.loss = parse_loss(value);
      else reader.fail("unknown train key '" + key + "'");
    } else {
      break;
    }
    line = reader.next("layers");
  }

  auto parts = tokens(line);
  if (parts.size() != 2 || parts[0] != "layers") reader.fail("expected 'layers <count>'");
  const auto count = parse_int<std::size_t>(parts[1]);
  for (std::size_t l = 0; l < count; ++l) {
    parts = tokens(reader.next("layer"));
    if (parts.size() != 4 || parts[0] != "layer") {
      reader.fail("expected 'layer <inputs> <outputs> <activation>'");
    }
    DenseLayer layer(parse_int<int>(parts[1]), parse_int<int>(parts[2]), parse_activation(parts[3]));
    layer.weights = read_values(reader, "weights", layer.weights.size());
    layer.bias = read_values(reader, "bias", layer.bias.size());
    model.network.layers.push_back(std::move(layer));
  }
  if (reader.next("end") != "end") reader.fail("expected 'end'");
  try {
    model.network.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("model: invalid network: ") + e.what());
  }
  return model;
}

void save_model(const std::filesystem::path& path, const ModelFile& model) {
  const std::string text = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open model file for writing: " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing model file: " + path.string());
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

}  // namespace srcnum
