#pragma once

// Independent reference computations used only by the tests. None of these
// call into the library's numerical routines.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "jtphase/core/mat2.hpp"

namespace oracle {

using jtphase::cplx;
using jtphase::Mat2c;

inline constexpr long double kPiL = 3.141592653589793238462643383279502884L;

// exp(M) by a 30-term Taylor series after scaling by 2^-s, then squaring.
inline Mat2c taylor_expm(const Mat2c& m) {
  int s = 0;
  double norm = m.max_abs();
  while (norm > 0.25) {
    norm *= 0.5;
    ++s;
  }
  const double scale = std::ldexp(1.0, -s);
  const Mat2c a = scale * m;
  Mat2c term = jtphase::IDENTITY;
  Mat2c sum = jtphase::IDENTITY;
  for (int n = 1; n <= 30; ++n) {
    term = (1.0 / n) * (term * a);
    sum = sum + term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

// erf(x) = 2/sqrt(pi) e^{-x^2} sum_n 2^n x^{2n+1} / (1 3 5 ... (2n+1)),
// a series of positive terms, summed in long double.
inline double erf_series(double xd) {
  const long double x = std::abs(static_cast<long double>(xd));
  if (x == 0.0L) return xd;
  long double term = x;
  long double sum = x;
  for (int n = 1; n < 2000; ++n) {
    term *= 2.0L * x * x / (2.0L * n + 1.0L);
    sum += term;
    if (term < 1e-22L * sum) break;
  }
  const long double v = 2.0L / std::sqrt(kPiL) * std::exp(-x * x) * sum;
  return static_cast<double>(xd < 0 ? -v : v);
}

// Composite Simpson on [a, b] with n (even) intervals.
template <class F>
double simpson(F&& f, double a, double b, std::size_t n) {
  if (n % 2) ++n;
  const long double h = (static_cast<long double>(b) - a) / n;
  long double acc = f(a) + f(b);
  for (std::size_t i = 1; i < n; ++i) acc += (i % 2 ? 4.0L : 2.0L) * f(static_cast<double>(a + i * h));
  return static_cast<double>(acc * h / 3.0L);
}

// 2 pi N/D with the unshifted integrands; usable while e^{k^2} is finite.
inline double phase_brute_force(double k, std::size_t n = 400000) {
  const double qmax = k + 12.0;
  const double num = simpson([k](double q) { return q * std::exp(-q * q) * std::sinh(k * q) * std::sinh(k * q); },
                             0.0, qmax, n);
  const double den = simpson([k](double q) { return q * std::exp(-q * q) * std::cosh(2.0 * k * q); }, 0.0, qmax, n);
  return 2.0 * static_cast<double>(kPiL) * num / den;
}

// D(k) = int_0^inf q e^{-q^2} cosh(2kq) dq = 1/2 + (sqrt(pi) k / 2) e^{k^2} erf(k)
inline double d_closed(double k) {
  return 0.5 + 0.5 * std::sqrt(static_cast<double>(kPiL)) * k * std::exp(k * k) * erf_series(k);
}

inline double gaussian_entropy() { return 0.5 * (1.0 + std::log(static_cast<double>(kPiL))); }

// Oscillator eigenfunction from the explicit physicists' Hermite polynomial:
// phi_n = H_n(x) e^{-x^2/2} / sqrt(2^n n! sqrt(pi)). Fine for small n.
inline double hermite_function(int n, double x) {
  long double h0 = 1.0L;
  long double h1 = 2.0L * x;
  long double hn = n == 0 ? h0 : h1;
  for (int j = 1; j < n; ++j) {
    const long double h2 = 2.0L * x * h1 - 2.0L * j * h0;
    h0 = h1;
    h1 = h2;
    hn = h2;
  }
  long double norm = std::sqrt(std::sqrt(kPiL));
  for (int j = 1; j <= n; ++j) norm *= std::sqrt(2.0L * j);
  return static_cast<double>(hn * std::exp(-0.5L * x * x) / norm);
}

// Dense H = (w/2){a+a + b+b - (k/sqrt2)[(a+ + a) sz - (b+ + b) sx]} built by
// Kronecker products in the order (mode a) x (mode b) x (electronic).
inline Eigen::MatrixXd dense_jt_hamiltonian(double k, double omega, int cutoff) {
  const int d = cutoff + 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  const Eigen::MatrixXd x = a + a.transpose();
  const Eigen::MatrixXd num = a.transpose() * a;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  Eigen::Matrix2d sz;
  sz << 1, 0, 0, -1;
  Eigen::Matrix2d sx;
  sx << 0, 1, 1, 0;
  const Eigen::Matrix2d i2 = Eigen::Matrix2d::Identity();
  auto kron = [](const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
    Eigen::MatrixXd r(p.rows() * q.rows(), p.cols() * q.cols());
    for (Eigen::Index i = 0; i < p.rows(); ++i)
      for (Eigen::Index j = 0; j < p.cols(); ++j) r.block(i * q.rows(), j * q.cols(), q.rows(), q.cols()) = p(i, j) * q;
    return r;
  };
  const Eigen::MatrixXd h = kron(num, kron(id, i2)) + kron(id, kron(num, i2)) -
                            (k / std::sqrt(2.0)) * (kron(x, kron(id, sz)) - kron(id, kron(x, sx)));
  return 0.5 * omega * h;
}

}  // namespace oracle
