#pragma once

#include <span>
#include <vector>

#include "srcnum/op_count.hpp"

namespace srcnum {

/// Eigenvalues sorted descending, all non-negative, at least two of them,
/// together with the snapshot count they were estimated from.
class EigenSpectrum {
 public:
  /// Throws DomainError when the invariants do not hold.
  EigenSpectrum(std::vector<double> values, int num_snapshots);

  std::span<const double> values() const noexcept { return values_; }
  int size() const noexcept { return static_cast<int>(values_.size()); }
  int num_snapshots() const noexcept { return num_snapshots_; }

 private:
  std::vector<double> values_;
  int num_snapshots_;
};

/// Criterion value for each candidate order k = 0..m-1 and its argmin
/// (smallest k on ties).
struct CriterionTrace {
  std::vector<double> values;
  int estimate = 0;
};

/// AIC(k) = -2N(m-k) ln(g_k/a_k) + 2k(2m-k), where g_k and a_k are the
/// geometric and arithmetic means of the m-k smallest eigenvalues.
CriterionTrace aic(const EigenSpectrum& spectrum);

/// MDL(k) = -N(m-k) ln(g_k/a_k) + 0.5 k(2m-k) ln N.
CriterionTrace mdl(const EigenSpectrum& spectrum);

struct ClassicalOpCounts {
  int m = 0;
  OperationCounts aic_closed_form;
  OperationCounts mdl_closed_form;
  OperationCounts aic_measured;
  OperationCounts mdl_measured;
};

/// Closed-form per-decision operation counts for AIC and MDL on an
/// m-eigenvalue spectrum, next to counts measured by running both criteria
/// on Counted<double>. Eigendecomposition cost is excluded.
ClassicalOpCounts count_ops_classical(int m);

}  // namespace srcnum
