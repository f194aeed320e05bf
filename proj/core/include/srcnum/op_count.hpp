#pragma once

#include <cmath>
#include <cstdint>

namespace srcnum {

/// Arithmetic operation tallies, in the categories of the complexity table.
struct OperationCounts {
  std::uint64_t mul_div = 0;
  std::uint64_t add_sub = 0;
  std::uint64_t logarithms = 0;
  std::uint64_t comparisons = 0;

  friend bool operator==(const OperationCounts&, const OperationCounts&) = default;
};

namespace detail {
inline OperationCounts& op_counter() {
  thread_local OperationCounts counts;
  return counts;
}
}  // namespace detail

/// Scalar wrapper that tallies every arithmetic operation into a
/// thread-local counter. Instantiate a numeric template with Counted<double>
/// to measure the operations a routine actually performs.
template <class T>
class Counted {
 public:
  Counted() = default;
  Counted(T v) : v_(v) {}  // NOLINT(google-explicit-constructor)

  T value() const { return v_; }

  friend Counted operator+(Counted a, Counted b) { ++detail::op_counter().add_sub; return a.v_ + b.v_; }
  friend Counted operator-(Counted a, Counted b) { ++detail::op_counter().add_sub; return a.v_ - b.v_; }
  friend Counted operator*(Counted a, Counted b) { ++detail::op_counter().mul_div; return a.v_ * b.v_; }
  friend Counted operator/(Counted a, Counted b) { ++detail::op_counter().mul_div; return a.v_ / b.v_; }
  friend Counted operator-(Counted a) { return -a.v_; }
  Counted& operator+=(Counted b) { return *this = *this + b; }
  Counted& operator-=(Counted b) { return *this = *this - b; }
  Counted& operator*=(Counted b) { return *this = *this * b; }
  Counted& operator/=(Counted b) { return *this = *this / b; }

  friend bool operator<(Counted a, Counted b) { ++detail::op_counter().comparisons; return a.v_ < b.v_; }
  friend bool operator>(Counted a, Counted b) { ++detail::op_counter().comparisons; return a.v_ > b.v_; }
  friend bool operator<=(Counted a, Counted b) { ++detail::op_counter().comparisons; return a.v_ <= b.v_; }
  friend bool operator>=(Counted a, Counted b) { ++detail::op_counter().comparisons; return a.v_ >= b.v_; }

  friend Counted log(Counted a) { ++detail::op_counter().logarithms; return std::log(a.v_); }

 private:
  T v_{};
};

/// Resets the calling thread's counter on construction; `counts()` reports
/// everything tallied since.
class OperationCountScope {
 public:
  OperationCountScope() { detail::op_counter() = {}; }
  OperationCounts counts() const { return detail::op_counter(); }
};

}  // namespace srcnum
