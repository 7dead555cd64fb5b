#pragma once

#include <cmath>

namespace jtphase {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kSqrtPi = 1.772453850905516027298167483341145183;

/// Error function to full double precision.
///
/// Backed by the C library erf (correctly rounded to within an ulp on glibc);
/// odd symmetry is enforced by evaluating on |x| and restoring the sign.
inline double erf_stable(double x) noexcept {
  if (x == 0.0) return x;  // keeps the sign of zero
  const double r = std::erf(std::abs(x));
  return std::copysign(r, x);
}

}  // namespace jtphase
