// srcnum: dataset generation, training, evaluation, accuracy sweeps and the
// complexity bench for source-number detection on a uniform linear array.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "srcnum/experiments.hpp"

namespace fs = std::filesystem;
using namespace srcnum;

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::optional<std::string> detector;
  std::optional<int> fbss;
  std::optional<int> snapshots;
  std::optional<double> snr;
  std::optional<int> epochs;
  std::optional<int> num_train;
  std::optional<int> num_test;
  std::optional<int> threads;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "Experiment config file (key = value)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--out", o.out_dir, "Output directory");
  cmd->add_option("--detector", o.detector, "ernet|ecnet|aic|mdl|covnet")
      ->check(CLI::IsMember({"ernet", "ecnet", "aic", "mdl", "covnet"}));
  cmd->add_option("--fbss", o.fbss, "Use forward-backward smoothing with sub-array size M0");
  cmd->add_option("--snapshots", o.snapshots, "Snapshot count N");
  cmd->add_option("--snr", o.snr, "Test SNR in dB");
  cmd->add_option("--epochs", o.epochs, "Training epochs");
  cmd->add_option("--num-train", o.num_train, "Training samples");
  cmd->add_option("--num-test", o.num_test, "Test trials per operating point");
  cmd->add_option("--threads", o.threads, "Evaluation worker threads (0 = all cores)");
  cmd->add_flag("-q,--quiet", o.quiet, "Suppress progress messages");
}

ExperimentConfig resolve_config(const CommonOptions& o) {
  ExperimentConfig c = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
  if (o.seed) c.seed = *o.seed;
  if (o.fbss) {
    c.fbss = true;
    c.subarray_size = *o.fbss;
  }
  if (o.snapshots) c.num_snapshots = *o.snapshots;
  if (o.snr) c.test_snr_db = *o.snr;
  if (o.epochs) c.epochs = *o.epochs;
  if (o.num_train) c.num_train = *o.num_train;
  if (o.num_test) c.num_test_per_point = *o.num_test;
  if (o.threads) c.threads = *o.threads;
  c.validate();
  return c;
}

DetectorKind require_detector(const CommonOptions& o) {
  if (!o.detector) throw CLI::ValidationError("--detector", "this subcommand needs --detector");
  return parse_detector_kind(*o.detector);
}

fs::path ensure_out(const CommonOptions& o) {
  fs::path out(o.out_dir);
  fs::create_directories(out);
  return out;
}

SweepOptions sweep_options(const CommonOptions& o, const fs::path& out) {
  SweepOptions opts;
  if (!o.quiet) opts.log = [](const std::string& msg) { std::cerr << msg << '\n'; };
  opts.model_dir = out / "models";
  return opts;
}

int run_gen_data(const CommonOptions& o, const std::string& phase_name) {
  const ExperimentConfig config = resolve_config(o);
  const DetectorSpec spec = detector_spec(config, require_detector(o));
  const Phase phase = phase_name == "test" ? Phase::Test : Phase::Train;
  const fs::path out = ensure_out(o);
  const Dataset ds = generate_dataset(config, spec, phase);
  const fs::path file = out / (spec.label() + "_" + phase_name + "_N" + std::to_string(config.num_snapshots) + ".dat");
  write_dataset(file, ds);
  write_manifest(out / "manifest.json", config, "gen-data");
  std::cout << "wrote " << ds.samples.size() << " samples to " << file.string() << '\n';
  return 0;
}

int run_train(const CommonOptions& o, const std::string& data_path) {
  const ExperimentConfig config = resolve_config(o);
  const DetectorKind kind = require_detector(o);
  if (!is_network(kind)) throw CLI::ValidationError("--detector", "only network detectors are trained");
  const DetectorSpec spec = detector_spec(config, kind);
  const fs::path out = ensure_out(o);

  const Dataset ds = data_path.empty() ? generate_dataset(config, spec, Phase::Train) : read_dataset(data_path);
  if (!o.quiet) std::cerr << "training " << spec.label() << " on " << ds.samples.size() << " samples\n";
  const TrainedDetector trained = train_detector(config, spec, ds, derive_seed(config.seed, 0x7a, 0));

  const fs::path model_file = out / (spec.label() + ".model");
  save_model(model_file, trained.model);
  std::ofstream curve(out / (spec.label() + "_loss.csv"), std::ios::binary);
  curve << "epoch,loss\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "0,%.17g\n", trained.result.initial_loss);
  curve << buf;
  for (std::size_t e = 0; e < trained.result.loss_history.size(); ++e) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", e + 1, trained.result.loss_history[e]);
    curve << buf;
  }
  write_manifest(out / "manifest.json", config, "train");
  std::cout << "initial loss " << trained.result.initial_loss << ", final loss "
            << trained.result.final_loss << "; model written to " << model_file.string() << '\n';
  return 0;
}

int run_eval(const CommonOptions& o, const std::string& model_path, const std::string& data_path) {
  const ExperimentConfig config = resolve_config(o);
  std::optional<Detector> detector;
  if (!model_path.empty()) {
    detector = detector_from_model(load_model(model_path));
  } else {
    const DetectorKind kind = require_detector(o);
    if (is_network(kind)) throw CLI::ValidationError("--model", "network detectors need --model");
    detector = Detector::classical(detector_spec(config, kind));
  }
  const Dataset ds = data_path.empty() ? generate_dataset(config, detector->spec(), Phase::Test)
                                       : read_dataset(data_path);
  const double acc = dataset_accuracy(*detector, ds);
  std::printf("detector,accuracy,n_trials\n%s,%.17g,%zu\n", detector->spec().label().c_str(), acc,
              ds.samples.size());
  return 0;
}

int run_sweep(const CommonOptions& o, const std::string& name) {
  const ExperimentConfig config = resolve_config(o);
  const fs::path out = ensure_out(o);
  const SweepOptions opts = sweep_options(o, out);
  SweepResult result;
  if (name == "sweep-snapshots") result = sweep_snapshots(config, opts);
  else if (name == "sweep-snr") result = sweep_snr_noncoherent(config, opts);
  else result = sweep_snr_coherent(config, opts);

  const fs::path csv = out / (name + ".csv");
  emit_csv(result, csv);
  write_manifest(out / (name + ".manifest.json"), config, name);
  std::cout << to_csv(result);
  if (!o.quiet) std::cerr << "wrote " << csv.string() << '\n';
  return 0;
}

int run_bench(const CommonOptions& o, int reps) {
  const ExperimentConfig config = resolve_config(o);
  const ComplexityReport report = bench_complexity(config, reps);
  std::cout << format_report(report);
  const fs::path out = ensure_out(o);
  std::ofstream csv(out / "complexity.csv", std::ios::binary);
  csv << "method,source,mul_div,add_sub,log,compare,ns_per_decision\n";
  for (const auto& row : report.rows) {
    const auto& c = row.closed_form;
    const auto& m = row.measured;
    csv << row.method << ",closed," << c.mul_div << ',' << c.add_sub << ',' << c.logarithms << ','
        << c.comparisons << ",\n";
    csv << row.method << ",measured," << m.mul_div << ',' << m.add_sub << ',' << m.logarithms << ','
        << m.comparisons << ',' << row.nanoseconds << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Source-number detection: eigenvalue networks, AIC/MDL and FBSS experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  CommonOptions opts;
  std::string phase = "train";
  std::string data_path;
  std::string model_path;
  int reps = 20000;

  auto* gen = app.add_subcommand("gen-data", "Generate a labeled dataset file");
  add_common(gen, opts);
  gen->add_option("--phase", phase, "train (mixed SNR) or test (fixed --snr)")
      ->check(CLI::IsMember({"train", "test"}));

  auto* train_cmd = app.add_subcommand("train", "Train a network detector and write its model file");
  add_common(train_cmd, opts);
  train_cmd->add_option("--data", data_path, "Training dataset (generated when omitted)")
      ->check(CLI::ExistingFile);

  auto* eval = app.add_subcommand("eval", "Measure detection accuracy on a test set");
  add_common(eval, opts);
  eval->add_option("--model", model_path, "Trained model file")->check(CLI::ExistingFile);
  eval->add_option("--data", data_path, "Test dataset (generated when omitted)")->check(CLI::ExistingFile);

  auto* sweep_n = app.add_subcommand("sweep-snapshots", "Accuracy versus snapshot count");
  auto* sweep_snr = app.add_subcommand("sweep-snr", "Accuracy versus SNR, non-coherent sources");
  auto* sweep_coh = app.add_subcommand("sweep-snr-coherent", "Accuracy versus SNR, coherent sources with FBSS");
  for (auto* cmd : {sweep_n, sweep_snr, sweep_coh}) add_common(cmd, opts);

  auto* bench = app.add_subcommand("bench-complexity", "Per-decision operation counts and timings");
  add_common(bench, opts);
  bench->add_option("--reps", reps, "Timing repetitions per detector");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return run_gen_data(opts, phase);
    if (*train_cmd) return run_train(opts, data_path);
    if (*eval) return run_eval(opts, model_path, data_path);
    if (*sweep_n) return run_sweep(opts, "sweep-snapshots");
    if (*sweep_snr) return run_sweep(opts, "sweep-snr");
    if (*sweep_coh) return run_sweep(opts, "sweep-snr-coherent");
    if (*bench) return run_bench(opts, reps);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
