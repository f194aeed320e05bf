#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "srcnum/errors.hpp"
#include "srcnum/neural.hpp"

using namespace srcnum;

namespace {

ModelFile sample_model() {
  const int sizes[] = {10, 8, 8, 10};
  const Activation acts[] = {Activation::Relu, Activation::Relu, Activation::Softmax};
  ModelFile m;
  m.network = make_network(sizes, acts);
  Rng rng(99);
  initialize_parameters(m.network, rng);
  m.network.layers[2].bias[3] = 0.1 + 0.2;  // not exactly representable in short form
  m.network.layers[0].weights[0] = std::numeric_limits<double>::denorm_min();
  m.network.layers[1].weights[5] = -1.0 / 3.0;
  m.config.learning_rate = 1e-3;
  m.config.seed = 0xfedcba9876543210ull;
  m.config.loss = LossKind::CategoricalCrossEntropy;
  m.metadata["detector"] = "ecnet";
  m.metadata["note"] = "free text with spaces";
  return m;
}

std::string replace_line(std::string text, const std::string& prefix, const std::string& replacement) {
  const auto pos = text.find(prefix);
  const auto end = text.find('\n', pos);
  return text.replace(pos, end - pos, replacement);
}

}  // namespace

TEST(ModelIo, TextRoundTripIsBitExact) {
  const ModelFile m = sample_model();
  const ModelFile back = parse_model(serialize_model(m));
  EXPECT_EQ(back, m);
  EXPECT_EQ(serialize_model(back), serialize_model(m));
}

TEST(ModelIo, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "srcnum_model_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "m.model";
  const ModelFile m = sample_model();
  save_model(path, m);
  EXPECT_EQ(load_model(path), m);
  std::filesystem::remove_all(dir);
}

TEST(ModelIo, PredictionsSurviveRoundTrip) {
  const ModelFile m = sample_model();
  const ModelFile back = parse_model(serialize_model(m));
  const std::vector<double> x = {9.1, 4.0, 2.2, 1.1, 1.0, 0.9, 0.8, 0.7, 0.6, 0.5};
  EXPECT_EQ(forward(back.network, x), forward(m.network, x));
}

TEST(ModelIo, RejectsMalformedInput) {
  const std::string good = serialize_model(sample_model());
  EXPECT_THROW(parse_model(""), FormatError);
  EXPECT_THROW(parse_model("not a model\n"), FormatError);
  EXPECT_THROW(parse_model(good.substr(0, good.size() / 2)), FormatError);
  EXPECT_THROW(parse_model(replace_line(good, "layers ", "layers two")), FormatError);
  EXPECT_THROW(parse_model(replace_line(good, "bias ", "bias 1 2")), FormatError);
  EXPECT_THROW(parse_model(replace_line(good, "layer 10", "layer 10 8 tanh")), FormatError);
  EXPECT_THROW(parse_model(replace_line(good, "layer 8 8", "layer 8 8 softmax")), FormatError);
  EXPECT_THROW(parse_model(replace_line(good, "train epochs", "train epochs many")), FormatError);
  EXPECT_THROW(parse_model(replace_line(good, "train seed", "train colour blue")), FormatError);
  EXPECT_THROW(parse_model(replace_line(good, "end", "trailing")), FormatError);
}

TEST(ModelIo, RejectsUnrepresentableMetadata) {
  ModelFile m = sample_model();
  m.metadata["bad key"] = "x";
  EXPECT_THROW(serialize_model(m), FormatError);
}

TEST(ModelIo, MissingFileThrows) {
  EXPECT_THROW(load_model("/nonexistent/dir/none.model"), std::runtime_error);
}
