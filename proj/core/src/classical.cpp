#include "srcnum/classical.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "srcnum/errors.hpp"

namespace srcnum {

namespace {

constexpr double kEigenvalueFloor = 1e-300;

enum class Criterion { Aic, Mdl };

using std::log;

template <class T>
std::vector<T> criterion_values(std::span<const double> eigenvalues, int num_snapshots,
                                Criterion criterion) {
  const int m = static_cast<int>(eigenvalues.size());
  std::vector<T> lambda(eigenvalues.size());
  std::vector<T> log_lambda(eigenvalues.size());
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
    lambda[i] = T(std::max(eigenvalues[i], kEigenvalueFloor));
    log_lambda[i] = log(lambda[i]);
  }

  const T n = T(static_cast<double>(num_snapshots));
  const T log_n = criterion == Criterion::Mdl ? log(n) : T(0.0);

  std::vector<T> values;
  values.reserve(eigenvalues.size());
  for (int k = 0; k < m; ++k) {
    T sum = T(0.0);
    T sum_log = T(0.0);
    for (int i = k; i < m; ++i) {
      sum = sum + lambda[i];
      sum_log = sum_log + log_lambda[i];
    }
    const T tail = T(static_cast<double>(m - k));
    // ln(g_k / a_k) = mean(ln lambda) - ln(mean(lambda))
    const T log_ratio = sum_log / tail - log(sum / tail);
    const T free_params = T(static_cast<double>(k * (2 * m - k)));
    if (criterion == Criterion::Aic) {
      values.push_back(T(-2.0) * n * tail * log_ratio + T(2.0) * free_params);
    } else {
      values.push_back(T(-1.0) * n * tail * log_ratio + T(0.5) * free_params * log_n);
    }
  }
  return values;
}

template <class T>
int argmin_first(const std::vector<T>& values) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(values.size()); ++k) {
    if (values[k] < values[best]) best = k;
  }
  return best;
}

CriterionTrace run(const EigenSpectrum& spectrum, Criterion criterion) {
  CriterionTrace trace;
  trace.values = criterion_values<double>(spectrum.values(), spectrum.num_snapshots(), criterion);
  trace.estimate = argmin_first(trace.values);
  return trace;
}

OperationCounts measure(int m, Criterion criterion) {
  // Any valid spectrum has the same operation count; the loops do not
  // branch on values.
  std::vector<double> values(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) values[i] = static_cast<double>(m - i);
  OperationCountScope scope;
  const auto trace = criterion_values<Counted<double>>(values, 100, criterion);
  argmin_first(trace);
  return scope.counts();
}

}  // namespace

EigenSpectrum::EigenSpectrum(std::vector<double> values, int num_snapshots)
    : values_(std::move(values)), num_snapshots_(num_snapshots) {
  if (values_.size() < 2) {
    throw DomainError("EigenSpectrum: need at least 2 eigenvalues, got " +
                      std::to_string(values_.size()));
  }
  if (num_snapshots_ < 1) throw DomainError("EigenSpectrum: num_snapshots must be >= 1");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= 0.0)) throw DomainError("EigenSpectrum: negative or NaN eigenvalue");
    if (i > 0 && values_[i] > values_[i - 1]) {
      throw DomainError("EigenSpectrum: eigenvalues must be sorted descending");
    }
  }
  if (values_.front() == 0.0) throw DomainError("EigenSpectrum: all-zero spectrum is degenerate");
}

CriterionTrace aic(const EigenSpectrum& spectrum) { return run(spectrum, Criterion::Aic); }

CriterionTrace mdl(const EigenSpectrum& spectrum) { return run(spectrum, Criterion::Mdl); }

ClassicalOpCounts count_ops_classical(int m) {
  if (m < 2) throw DomainError("count_ops_classical: m must be >= 2");
  const auto um = static_cast<std::uint64_t>(m);

  ClassicalOpCounts out;
  out.m = m;
  out.aic_closed_form = {um * um + 7 * um, (um * um + um) / 2, 2 * um, um};
  out.mdl_closed_form = {um * um + 7 * um, (um * um + um) / 2, um, um};
  out.aic_measured = measure(m, Criterion::Aic);
  out.mdl_measured = measure(m, Criterion::Mdl);
  return out;
}

}  // namespace srcnum
