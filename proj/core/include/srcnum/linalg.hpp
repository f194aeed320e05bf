#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace srcnum {

using Complex = std::complex<double>;

/// Dense complex matrix, row-major storage.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);

  /// Builds a matrix from nested row lists; all rows must have equal length.
  static ComplexMatrix from_rows(std::initializer_list<std::initializer_list<Complex>> rows);
  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix diagonal(std::span<const double> values);
  /// Column vector (n×1).
  static ComplexMatrix column(std::span<const Complex> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return entries_.empty(); }

  Complex& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

  std::span<Complex> entries() noexcept { return entries_; }
  std::span<const Complex> entries() const noexcept { return entries_; }
  std::span<Complex> row(std::size_t r) { return {entries_.data() + r * cols_, cols_}; }
  std::span<const Complex> row(std::size_t r) const { return {entries_.data() + r * cols_, cols_}; }

  /// Largest entry modulus; 0 for an empty matrix.
  double max_abs() const noexcept;
  double frobenius_norm() const noexcept;
  /// Requires a square matrix.
  Complex trace() const;

  /// |A(i,j) - conj(A(j,i))| <= rel_tol * max(1, max_abs()) for all i, j.
  bool is_hermitian(double rel_tol = 1e-10) const noexcept;

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(Complex scale) noexcept;

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> entries_;
};

ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs);
ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs);
ComplexMatrix operator*(ComplexMatrix lhs, Complex scale);

/// Eigenvalues sorted descending with unit-norm eigenvectors as matching
/// columns, so that A = U diag(eigenvalues) U^H.
struct EigenDecomposition {
  std::vector<double> eigenvalues;
  ComplexMatrix eigenvectors;
  int sweeps = 0;
};

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix conj_transpose(const ComplexMatrix& a);

/// J * conj(A) * J with J the anti-identity. Requires a square matrix.
ComplexMatrix exchange_conjugate(const ComplexMatrix& a);

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// Sweeps until the off-diagonal Frobenius norm drops below 1e-12 * ||A||_F,
/// at most 100 sweeps. Eigenvalues come back sorted descending; values in
/// [-1e-9 * ||A||_F, 0) are round-off on a semidefinite input and are clamped
/// to zero. Genuinely negative eigenvalues of indefinite inputs are kept.
///
/// Throws DimensionError for non-square input, DomainError if the input fails
/// the Hermitian check, NumericalError if the sweep cap is reached.
EigenDecomposition hermitian_eig(const ComplexMatrix& a);

/// Same spectrum as hermitian_eig without accumulating eigenvectors.
std::vector<double> hermitian_eigenvalues(const ComplexMatrix& a);

}  // namespace srcnum
