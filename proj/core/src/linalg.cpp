#include "srcnum/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "srcnum/errors.hpp"

namespace srcnum {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOffDiagonalTolerance = 1e-12;
constexpr double kClampTolerance = 1e-9;

std::string shape(const ComplexMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b));
  }
}

double off_diagonal_norm(const ComplexMatrix& a) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (i != j) sum += std::norm(a(i, j));
    }
  }
  return std::sqrt(sum);
}

// Runs the cyclic Jacobi iteration in place. `work` ends (numerically)
// diagonal; `vectors`, when non-null, accumulates the product of rotations.
int jacobi_diagonalize(ComplexMatrix& work, ComplexMatrix* vectors) {
  const std::size_t n = work.rows();
  const double threshold = kOffDiagonalTolerance * work.frobenius_norm();

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm(work) <= threshold) return sweep;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex apq = work(p, q);
        const double magnitude = std::abs(apq);
        if (magnitude == 0.0) continue;

        // Phase D = diag(1, e^{-i phi}) makes the pivot real, then a real
        // rotation zeroes it. V = D * P.
        const Complex phase = std::conj(apq) / magnitude;
        const double app = work(p, p).real();
        const double aqq = work(q, q).real();
        const double theta = (aqq - app) / (2.0 * magnitude);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        const Complex v_pp = c;
        const Complex v_pq = s;
        const Complex v_qp = -s * phase;
        const Complex v_qq = c * phase;

        // A <- A V
        for (std::size_t k = 0; k < n; ++k) {
          const Complex akp = work(k, p);
          const Complex akq = work(k, q);
          work(k, p) = akp * v_pp + akq * v_qp;
          work(k, q) = akp * v_pq + akq * v_qq;
        }
        // A <- V^H A
        for (std::size_t k = 0; k < n; ++k) {
          const Complex apk = work(p, k);
          const Complex aqk = work(q, k);
          work(p, k) = std::conj(v_pp) * apk + std::conj(v_qp) * aqk;
          work(q, k) = std::conj(v_pq) * apk + std::conj(v_qq) * aqk;
        }
        work(p, q) = 0.0;
        work(q, p) = 0.0;
        work(p, p) = work(p, p).real();
        work(q, q) = work(q, q).real();

        if (vectors != nullptr) {
          ComplexMatrix& u = *vectors;
          for (std::size_t k = 0; k < n; ++k) {
            const Complex ukp = u(k, p);
            const Complex ukq = u(k, q);
            u(k, p) = ukp * v_pp + ukq * v_qp;
            u(k, q) = ukp * v_pq + ukq * v_qq;
          }
        }
      }
    }
  }

  const double residual = off_diagonal_norm(work);
  if (residual <= threshold) return kMaxSweeps;
  std::ostringstream msg;
  msg << "hermitian_eig: no convergence after " << kMaxSweeps
      << " sweeps, off-diagonal residual " << residual << " (threshold " << threshold << ")";
  throw NumericalError(msg.str());
}

ComplexMatrix validated_hermitian_copy(const ComplexMatrix& a) {
  if (!a.is_square()) {
    throw DimensionError("hermitian_eig: matrix must be square, got " + shape(a));
  }
  if (!a.is_hermitian()) {
    throw DomainError("hermitian_eig: matrix is not Hermitian within tolerance");
  }
  // Symmetrize so round-off asymmetry does not leak into the rotations.
  ComplexMatrix work(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    work(i, i) = a(i, i).real();
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      const Complex v = 0.5 * (a(i, j) + std::conj(a(j, i)));
      work(i, j) = v;
      work(j, i) = std::conj(v);
    }
  }
  return work;
}

double clamp_round_off(double value, double scale) {
  return (value < 0.0 && value >= -kClampTolerance * scale) ? 0.0 : value;
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) {
    throw DimensionError("ComplexMatrix: " + std::to_string(entries_.size()) +
                         " entries for a " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                         " matrix");
  }
}

ComplexMatrix ComplexMatrix::from_rows(std::initializer_list<std::initializer_list<Complex>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<Complex> entries;
  entries.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ComplexMatrix::from_rows: ragged rows");
    entries.insert(entries.end(), row.begin(), row.end());
  }
  return ComplexMatrix(r, c, std::move(entries));
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> values) {
  ComplexMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

ComplexMatrix ComplexMatrix::column(std::span<const Complex> values) {
  return ComplexMatrix(values.size(), 1, std::vector<Complex>(values.begin(), values.end()));
}

double ComplexMatrix::max_abs() const noexcept {
  double best = 0.0;
  for (const auto& v : entries_) best = std::max(best, std::abs(v));
  return best;
}

double ComplexMatrix::frobenius_norm() const noexcept {
  double sum = 0.0;
  for (const auto& v : entries_) sum += std::norm(v);
  return std::sqrt(sum);
}

Complex ComplexMatrix::trace() const {
  if (!is_square()) throw DimensionError("trace: matrix must be square, got " + shape(*this));
  Complex sum = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) sum += (*this)(i, i);
  return sum;
}

bool ComplexMatrix::is_hermitian(double rel_tol) const noexcept {
  if (!is_square()) return false;
  const double tol = rel_tol * std::max(1.0, max_abs());
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = i; j < cols_; ++j) {
      if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol) return false;
    }
  }
  return true;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
  require_same_shape(*this, other, "operator+");
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += other.entries_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
  require_same_shape(*this, other, "operator-");
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] -= other.entries_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex scale) noexcept {
  for (auto& v : entries_) v *= scale;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs += rhs; }
ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs -= rhs; }
ComplexMatrix operator*(ComplexMatrix lhs, Complex scale) { return lhs *= scale; }

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ, " + shape(a) + " * " + shape(b));
  }
  ComplexMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{}) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

ComplexMatrix conj_transpose(const ComplexMatrix& a) {
  ComplexMatrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = std::conj(a(i, j));
  }
  return out;
}

ComplexMatrix exchange_conjugate(const ComplexMatrix& a) {
  if (!a.is_square()) {
    throw DimensionError("exchange_conjugate: matrix must be square, got " + shape(a));
  }
  const std::size_t n = a.rows();
  ComplexMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out(i, j) = std::conj(a(n - 1 - i, n - 1 - j));
  }
  return out;
}

EigenDecomposition hermitian_eig(const ComplexMatrix& a) {
  ComplexMatrix work = validated_hermitian_copy(a);
  const std::size_t n = work.rows();
  const double scale = work.frobenius_norm();
  ComplexMatrix vectors = ComplexMatrix::identity(n);
  const int sweeps = jacobi_diagonalize(work, &vectors);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return work(x, x).real() > work(y, y).real();
  });

  EigenDecomposition result;
  result.sweeps = sweeps;
  result.eigenvalues.reserve(n);
  result.eigenvectors = ComplexMatrix(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    const std::size_t src = order[col];
    result.eigenvalues.push_back(clamp_round_off(work(src, src).real(), scale));
    for (std::size_t r = 0; r < n; ++r) result.eigenvectors(r, col) = vectors(r, src);
  }
  return result;
}

std::vector<double> hermitian_eigenvalues(const ComplexMatrix& a) {
  ComplexMatrix work = validated_hermitian_copy(a);
  const double scale = work.frobenius_norm();
  jacobi_diagonalize(work, nullptr);
  std::vector<double> values(work.rows());
  for (std::size_t i = 0; i < work.rows(); ++i) values[i] = work(i, i).real();
  std::sort(values.begin(), values.end(), std::greater<>());
  for (auto& v : values) v = clamp_round_off(v, scale);
  return values;
}

}  // namespace srcnum
