#pragma once

#include <cmath>
#include <span>

namespace jtphase {

// Neumaier (improved Kahan) summation. Terms are consumed in the order they
// are added, so results are reproducible for a fixed call sequence.
class CompensatedSum {
 public:
  void add(double term) noexcept {
    const double t = sum_ + term;
    if (std::abs(sum_) >= std::abs(term)) {
      carry_ += (sum_ - t) + term;
    } else {
      carry_ += (term - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum& operator+=(double term) noexcept {
    add(term);
    return *this;
  }

  [[nodiscard]] double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

inline double compensated_sum(std::span<const double> terms) noexcept {
  CompensatedSum acc;
  for (double t : terms) acc.add(t);
  return acc.value();
}

}  // namespace jtphase
