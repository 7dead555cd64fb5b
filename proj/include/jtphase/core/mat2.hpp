#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

#include "jtphase/core/error.hpp"

namespace jtphase {

using cplx = std::complex<double>;

// Row-major 2x2 complex matrix.
struct Mat2c {
  std::array<cplx, 4> a{};

  constexpr Mat2c() = default;
  constexpr Mat2c(cplx m00, cplx m01, cplx m10, cplx m11) : a{m00, m01, m10, m11} {}

  [[nodiscard]] constexpr cplx operator()(int r, int c) const { return a[static_cast<std::size_t>(2 * r + c)]; }
  constexpr cplx& operator()(int r, int c) { return a[static_cast<std::size_t>(2 * r + c)]; }

  [[nodiscard]] Mat2c adjoint() const {
    return {std::conj(a[0]), std::conj(a[2]), std::conj(a[1]), std::conj(a[3])};
  }
  [[nodiscard]] cplx trace() const { return a[0] + a[3]; }
  [[nodiscard]] cplx determinant() const { return a[0] * a[3] - a[1] * a[2]; }

  [[nodiscard]] double max_abs() const {
    double m = 0.0;
    for (const auto& z : a) m = std::max(m, std::abs(z));
    return m;
  }

  [[nodiscard]] bool all_finite() const {
    return std::all_of(a.begin(), a.end(), [](cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
  }

  friend bool operator==(const Mat2c&, const Mat2c&) = default;
};

inline Mat2c operator+(const Mat2c& x, const Mat2c& y) {
  return {x.a[0] + y.a[0], x.a[1] + y.a[1], x.a[2] + y.a[2], x.a[3] + y.a[3]};
}
inline Mat2c operator-(const Mat2c& x, const Mat2c& y) {
  return {x.a[0] - y.a[0], x.a[1] - y.a[1], x.a[2] - y.a[2], x.a[3] - y.a[3]};
}
inline Mat2c operator*(cplx s, const Mat2c& x) { return {s * x.a[0], s * x.a[1], s * x.a[2], s * x.a[3]}; }
inline Mat2c operator*(double s, const Mat2c& x) { return cplx(s, 0.0) * x; }
inline Mat2c operator*(const Mat2c& x, const Mat2c& y) {
  return {x.a[0] * y.a[0] + x.a[1] * y.a[2], x.a[0] * y.a[1] + x.a[1] * y.a[3],
          x.a[2] * y.a[0] + x.a[3] * y.a[2], x.a[2] * y.a[1] + x.a[3] * y.a[3]};
}

inline constexpr Mat2c IDENTITY{1.0, 0.0, 0.0, 1.0};
inline constexpr Mat2c SIGMA_X{0.0, 1.0, 1.0, 0.0};
inline constexpr Mat2c SIGMA_Y{0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0};
inline constexpr Mat2c SIGMA_Z{1.0, 0.0, 0.0, -1.0};

inline bool is_hermitian(const Mat2c& m, double tol = 1e-12) {
  const double scale = std::max(1.0, m.max_abs());
  const double dev = std::max({std::abs(m.a[1] - std::conj(m.a[2])), std::abs(m.a[0].imag()),
                               std::abs(m.a[3].imag())});
  return dev <= tol * scale;
}

// exp(M) for Hermitian M via M = c I + v.sigma:
//   exp(M) = e^c [cosh|v| I + sinh|v| (v.sigma)/|v|].
inline Mat2c mat2_exp_hermitian(const Mat2c& m) {
  if (!m.all_finite()) throw InvalidArgument("mat2_exp_hermitian: non-finite entry");
  if (!is_hermitian(m)) throw InvalidArgument("mat2_exp_hermitian: matrix is not Hermitian within 1e-12");
  const double c = 0.5 * (m.a[0].real() + m.a[3].real());
  const double vz = 0.5 * (m.a[0].real() - m.a[3].real());
  // Average the two off-diagonal entries so tiny asymmetry does not leak.
  const cplx off = 0.5 * (m.a[1] + std::conj(m.a[2]));
  const double vx = off.real();
  const double vy = -off.imag();
  const double len = std::hypot(vx, vy, vz);
  const double ec = std::exp(c);
  if (len == 0.0) return ec * IDENTITY;
  const double ch = std::cosh(len);
  const double shl = std::sinh(len) / len;
  const Mat2c vs{cplx(vz, 0.0), cplx(vx, -vy), cplx(vx, vy), cplx(-vz, 0.0)};
  return ec * (ch * IDENTITY + shl * vs);
}

}  // namespace jtphase
