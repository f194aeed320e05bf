#pragma once

#include <stdexcept>
#include <string>

namespace srcnum {

/// Shape or size mismatch between operands.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input outside the mathematical domain of an operation (non-Hermitian
/// matrix, all-zero spectrum, out-of-range count).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Iterative routine failed to converge, or a NaN appeared.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid scenario, experiment or training configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed model, dataset, config or CSV file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace srcnum
