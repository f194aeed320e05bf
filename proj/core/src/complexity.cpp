#include <chrono>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "srcnum/classical.hpp"
#include "srcnum/experiments.hpp"

namespace srcnum {

namespace {

OperationCounts counted_argmax_comparisons(int m) {
  std::vector<Counted<double>> values(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) values[i] = static_cast<double>(i % 3);
  OperationCountScope scope;
  std::size_t best = 0;
  for (std::size_t p = 1; p < values.size(); ++p) {
    if (values[p] > values[best]) best = p;
  }
  return scope.counts();
}

OperationCounts operator+(OperationCounts a, const OperationCounts& b) {
  a.mul_div += b.mul_div;
  a.add_sub += b.add_sub;
  a.logarithms += b.logarithms;
  a.comparisons += b.comparisons;
  return a;
}

// Keeps the optimizer from discarding the timed work.
volatile int g_sink = 0;

template <class F>
double time_per_call(int reps, F&& f) {
  if (reps <= 0) return 0.0;
  int acc = 0;
  const auto start = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) acc += f(r);
  const auto stop = std::chrono::steady_clock::now();
  g_sink = g_sink + acc;
  return std::chrono::duration<double, std::nano>(stop - start).count() / reps;
}

}  // namespace

OperationCounts ernet_closed_form(int m, int n1, int n2) {
  const auto M = static_cast<std::uint64_t>(m);
  const auto a = static_cast<std::uint64_t>(n1);
  const auto b = static_cast<std::uint64_t>(n2);
  return {M * a + b, a + b + 1, 0, 0};
}

OperationCounts ecnet_closed_form(int m, int n1, int n2) {
  const auto M = static_cast<std::uint64_t>(m);
  const auto a = static_cast<std::uint64_t>(n1);
  const auto b = static_cast<std::uint64_t>(n2);
  return {M * (a + b), a + b + M, 0, M};
}

const ComplexityRow& ComplexityReport::row(std::string_view method) const {
  for (const auto& r : rows) {
    if (r.method == method) return r;
  }
  throw std::out_of_range("ComplexityReport: no row '" + std::string(method) + "'");
}

ComplexityReport bench_complexity(const ExperimentConfig& config, int timing_reps) {
  ExperimentConfig cfg = config;
  cfg.fbss = false;
  const int m = cfg.num_antennas;

  ComplexityReport report;
  report.num_antennas = m;

  Rng rng(derive_seed(cfg.seed, 0xC0, 0));
  const DetectorSpec ernet_spec = detector_spec(cfg, DetectorKind::ERNet);
  const DetectorSpec ecnet_spec = detector_spec(cfg, DetectorKind::ECNet);
  report.hidden1 = ernet_spec.hidden1;
  report.hidden2 = ernet_spec.hidden2;
  const Network ernet = build_detector(ernet_spec, rng);
  const Network ecnet = build_detector(ecnet_spec, rng);
  const ClassicalOpCounts classical = count_ops_classical(m);

  // A fixed pool of realistic spectra for timing.
  Scenario scenario;
  scenario.num_antennas = m;
  scenario.num_snapshots = cfg.num_snapshots;
  scenario.snr_db = 10.0;
  std::vector<ComplexMatrix> covariances;
  std::vector<std::vector<double>> spectra;
  for (int i = 0; i < 64; ++i) {
    scenario.doas.clear();
    for (int k = 0; k < i % std::min(m, cfg.max_sources + 1); ++k) scenario.doas.push_back(0.3 * k + 0.01 * i);
    scenario.seed = derive_seed(cfg.seed, 0xC1, static_cast<std::uint64_t>(i));
    covariances.push_back(simulate_covariance(scenario));
    spectra.push_back(make_feature_eigen(covariances.back()));
  }
  const auto pool = spectra.size();
  const int n = cfg.num_snapshots;

  const Detector ernet_det = Detector::neural(ernet_spec, ernet);
  const Detector ecnet_det = Detector::neural(ecnet_spec, ecnet);
  const Detector aic_det = Detector::classical(detector_spec(cfg, DetectorKind::Aic));
  const Detector mdl_det = Detector::classical(detector_spec(cfg, DetectorKind::Mdl));

  auto timed = [&](const Detector& d) {
    return time_per_call(timing_reps, [&](int r) {
      return d.estimate_from_features(spectra[static_cast<std::size_t>(r) % pool], n);
    });
  };

  report.rows.push_back({"ERNet", ernet_closed_form(m, report.hidden1, report.hidden2),
                         count_forward_ops(ernet), timed(ernet_det)});
  report.rows.push_back({"ECNet", ecnet_closed_form(m, report.hidden1, report.hidden2),
                         count_forward_ops(ecnet) + counted_argmax_comparisons(m), timed(ecnet_det)});
  report.rows.push_back({"AIC", classical.aic_closed_form, classical.aic_measured, timed(aic_det)});
  report.rows.push_back({"MDL", classical.mdl_closed_form, classical.mdl_measured, timed(mdl_det)});

  report.eig_nanoseconds = time_per_call(timing_reps / 10, [&](int r) {
    return static_cast<int>(hermitian_eigenvalues(covariances[static_cast<std::size_t>(r) % pool]).size());
  });
  return report;
}

std::string format_report(const ComplexityReport& report) {
  std::ostringstream out;
  char buf[256];
  out << "Per-decision operation counts, M=" << report.num_antennas << ", n1=" << report.hidden1
      << ", n2=" << report.hidden2 << " (eigendecomposition excluded)\n";
  std::snprintf(buf, sizeof buf, "%-6s %-9s %10s %10s %10s %10s %12s\n", "method", "source",
                "mul/div", "add/sub", "log", "compare", "ns/decision");
  out << buf;
  for (const auto& row : report.rows) {
    const auto line = [&](const char* source, const OperationCounts& c, const std::string& ns) {
      std::snprintf(buf, sizeof buf, "%-6s %-9s %10llu %10llu %10llu %10llu %12s\n", row.method.c_str(),
                    source, static_cast<unsigned long long>(c.mul_div),
                    static_cast<unsigned long long>(c.add_sub),
                    static_cast<unsigned long long>(c.logarithms),
                    static_cast<unsigned long long>(c.comparisons), ns.c_str());
      out << buf;
    };
    char ns[32];
    std::snprintf(ns, sizeof ns, "%.1f", row.nanoseconds);
    line("closed", row.closed_form, "");
    line("measured", row.measured, ns);
  }
  std::snprintf(buf, sizeof buf, "shared eigendecomposition: %.1f ns\n", report.eig_nanoseconds);
  out << buf;
  return out.str();
}

}  // namespace srcnum
