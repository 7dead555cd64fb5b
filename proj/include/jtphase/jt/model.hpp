#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <exception>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "jtphase/core/error.hpp"
#include "jtphase/core/grid.hpp"
#include "jtphase/core/mat2.hpp"
#include "jtphase/core/quadrature.hpp"
#include "jtphase/core/special.hpp"
#include "jtphase/phase/field.hpp"
#include "jtphase/phase/functionals.hpp"

// Linear E x e Jahn-Teller ground doublet in the guessed (displaced Gaussian)
// form, with the angle pinned to phi = Omega t by the environment.

namespace jtphase::jt {

struct JTParams {
  double k = 0.0;      // dimensionless coupling
  double omega = 1.0;  // vibrational frequency
  double drive = 1.0;  // angular drive rate Omega
  MassParam m{};

  void validate() const {
    require(std::isfinite(k) && k >= 0.0, "coupling k must be finite and >= 0");
    require(std::isfinite(omega) && omega > 0.0, "omega must be finite and > 0");
    require(std::isfinite(drive) && drive > 0.0, "drive rate must be finite and > 0");
  }
};

// Radial grid sizing: q_max = k + margin.
struct GridPolicy {
  RadialRule rule = RadialRule::gauss_legendre_mapped;
  std::size_t nodes = 400;
  double margin = 8.0;

  [[nodiscard]] RadialGrid make(double k) const { return RadialGrid::make(rule, k + margin, nodes); }
};

inline constexpr double kMinSafeMargin = 6.0;

// -1/2 [(q_a - k sz)^2 + (q_b + k sx)^2], built from the matrix products.
inline Mat2c guessed_exponent(double q, double phi, double k) {
  const Mat2c qa = (q * std::cos(phi)) * IDENTITY - k * SIGMA_Z;
  const Mat2c qb = (q * std::sin(phi)) * IDENTITY + k * SIGMA_X;
  return -0.5 * (qa * qa + qb * qb);
}

namespace detail {

// e^{-k^2 - q^2/2} cosh(kq) and e^{-k^2 - q^2/2} sinh(kq) without forming
// e^{k^2} or cosh(kq); exact for every k >= 0, q >= 0.
struct RadialProfiles {
  double c;   // cosh profile
  double s;   // sinh profile
  double dc;  // d/dq of c
  double ds;  // d/dq of s
};

inline RadialProfiles radial_profiles(double q, double k) {
  const double g = 0.5 * std::exp(-0.5 * (q - k) * (q - k) - 0.5 * k * k);
  const double em = std::expm1(-2.0 * k * q);
  RadialProfiles p{};
  p.c = g * (2.0 + em);
  p.s = -g * em;
  p.dc = -q * p.c + k * p.s;
  p.ds = -q * p.s + k * p.c;
  return p;
}

inline Mat2c closed_form_operator(double q, double phi, double k, int sign) {
  const RadialProfiles p = radial_profiles(q, k);
  const Mat2c n = std::cos(phi) * SIGMA_Z - std::sin(phi) * SIGMA_X;
  return p.c * IDENTITY + (sign * p.s) * n;
}

}  // namespace detail

// Sign s of the sinh term in the closed form, fixed once by comparing both
// candidates against the exact exponential of the operator exponent.
inline int guessed_operator_sign() {
  static const int sign = [] {
    constexpr double q = 1.0;
    constexpr double phi = 0.7;
    constexpr double k = 0.8;
    const Mat2c exact = mat2_exp_hermitian(guessed_exponent(q, phi, k));
    for (int s : {+1, -1}) {
      const Mat2c diff = exact - detail::closed_form_operator(q, phi, k, s);
      if (diff.max_abs() <= 1e-12 * std::max(1.0, exact.max_abs())) return s;
    }
    throw NumericalError("guessed operator self-test: no sign matches the matrix exponential");
  }();
  return sign;
}

// e^{-k^2 - q^2/2} [cosh(kq) I + s sinh(kq) (sz cos phi - sx sin phi)]
inline Mat2c guessed_operator(double q, double phi, double k) {
  require(q >= 0.0, "guessed_operator: q must be >= 0");
  require(k >= 0.0, "guessed_operator: k must be >= 0");
  return detail::closed_form_operator(q, phi, k, guessed_operator_sign());
}

struct Doublet {
  SpinorRadialField minus;
  SpinorRadialField plus;
};

// Psi_-/+ = psi_hat (1, -/+ i)/sqrt(2) at angle phi, with analytic radial
// derivatives. The state is left unnormalized.
inline Doublet build_doublet(const JTParams& params, RadialGridPtr grid, double phi) {
  params.validate();
  require(grid != nullptr, "build_doublet: missing grid");
  const std::size_t n = grid->size();
  const int sign = guessed_operator_sign();
  const double cphi = std::cos(phi);
  const double sphi = std::sin(phi);
  const double r = 1.0 / std::sqrt(2.0);
  const cplx mi(0.0, -1.0);
  SpinorRadialField minus;
  minus.grid = grid;
  minus.phi = phi;
  minus.branch = DoubletBranch::minus;
  minus.up.resize(n);
  minus.down.resize(n);
  minus.d_up.resize(n);
  minus.d_down.resize(n);
  // N = sz cos phi - sx sin phi = [[c, -s], [-s, -c]]
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = detail::radial_profiles(grid->node(i), params.k);
    auto apply = [&](double cc, double ss) {
      const double o00 = cc + sign * ss * cphi;
      const double o01 = -sign * ss * sphi;
      const double o11 = cc - sign * ss * cphi;
      return std::pair<cplx, cplx>{r * (o00 + mi * o01), r * (o01 + mi * o11)};
    };
    std::tie(minus.up[i], minus.down[i]) = apply(p.c, p.s);
    std::tie(minus.d_up[i], minus.d_down[i]) = apply(p.dc, p.ds);
  }
  minus.validate();
  bool any = false;
  for (std::size_t i = 0; i < n && !any; ++i) any = minus.density(i) > 0.0;
  if (!any) throw NumericalError("build_doublet: doublet underflows to zero on this grid (k too large)");
  Doublet d{minus, conjugate(minus)};
  d.plus.branch = DoubletBranch::plus;
  return d;
}

inline const SpinorRadialField& pick(const Doublet& d, DoubletBranch b) {
  return b == DoubletBranch::minus ? d.minus : d.plus;
}

// 2 pi N(k)/D(k) with N = int q e^{-q^2} sinh^2(kq), D = int q e^{-q^2} cosh(2kq),
// both divided by e^{k^2} and written in shifted-Gaussian form:
//   N e^{-k^2} = 1/4 int q e^{-(q-k)^2} expm1(-2kq)^2
//   D e^{-k^2} = 1/2 int q [e^{-(q-k)^2} + e^{-(q+k)^2}]
inline double mean_phase_quadrature(const JTParams& params, const RadialGrid& grid,
                                    DoubletBranch branch = DoubletBranch::minus) {
  params.validate();
  const double k = params.k;
  if (grid.q_max() < k + kMinSafeMargin) throw InvalidArgument("radial truncation unsafe: q_max < k + 6");
  const double num = integrate_radial(
      [k](double q) {
        const double em = std::expm1(-2.0 * k * q);
        return 0.25 * q * std::exp(-(q - k) * (q - k)) * em * em;
      },
      grid);
  const double den = integrate_radial(
      [k](double q) { return 0.5 * q * (std::exp(-(q - k) * (q - k)) + std::exp(-(q + k) * (q + k))); }, grid);
  const double phase = 2.0 * kPi * num / den;
  return branch == DoubletBranch::minus ? phase : -phase;
}

// pi * s / (e^{-k^2} + s) with s = sqrt(pi) k erf(k); equals
// pi [1 - 1/(1 + sqrt(pi) k e^{k^2} erf k)] without overflow.
inline double mean_phase_closed_form(double k) {
  require(std::isfinite(k) && k >= 0.0, "mean_phase_closed_form: k must be finite and >= 0");
  const double s = kSqrtPi * k * erf_stable(k);
  return kPi * s / (std::exp(-k * k) + s);
}

inline SpinorGradientSplit jt_gradient_split(const JTParams& params, RadialGridPtr grid, double phi,
                                             DoubletBranch branch) {
  const Doublet d = build_doublet(params, std::move(grid), phi);
  return spinor_gradient_split(pick(d, branch), params.m);
}

// Radial-only delta K of one doublet member; zero up to rounding.
inline double delta_k_jt(const JTParams& params, RadialGridPtr grid, double phi, DoubletBranch branch) {
  return jt_gradient_split(params, std::move(grid), phi, branch).phase_gradient;
}

struct SweepRow {
  double k;
  double phase_quadrature;
  double phase_closed_form;
  double abs_diff;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

// Uniformly spaced k rows; each row sizes its own grid with `policy`. Rows
// are independent and written by index, so the order never depends on the
// thread count.
inline SweepResult sweep_phase(double k_min, double k_max, std::size_t steps, const GridPolicy& policy = {},
                               unsigned threads = 1) {
  require(std::isfinite(k_min) && std::isfinite(k_max), "sweep_phase: k bounds must be finite");
  require(k_min >= 0.0, "sweep_phase: k_min must be >= 0");
  require(k_max > k_min, "sweep_phase: k_max must be > k_min");
  require(steps >= 2, "sweep_phase: steps must be >= 2");
  require(policy.margin >= kMinSafeMargin, "sweep_phase: grid margin must be >= 6");
  SweepResult out;
  out.rows.resize(steps);
  const double dk = (k_max - k_min) / static_cast<double>(steps - 1);
  auto row = [&](std::size_t i) {
    const double k = (i + 1 == steps) ? k_max : k_min + static_cast<double>(i) * dk;
    JTParams p;
    p.k = k;
    const RadialGrid g = policy.make(k);
    const double quad = mean_phase_quadrature(p, g);
    const double closed = mean_phase_closed_form(k);
    out.rows[i] = {k, quad, closed, std::abs(quad - closed)};
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(steps)));
  if (threads == 1) {
    for (std::size_t i = 0; i < steps; ++i) row(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < steps; i += threads) row(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

// Snapshots Psi_branch(q, Omega t_i), t_i = i (2 pi / Omega) / n_time, i = 0..n_time.
inline Trajectory<SpinorRadialField> cycle_trajectory(const JTParams& params, RadialGridPtr grid, std::size_t n_time,
                                                      DoubletBranch branch) {
  params.validate();
  require(n_time >= 8, "cycle_trajectory: n_time must be >= 8");
  const double period = 2.0 * kPi / params.drive;
  const double dt = period / static_cast<double>(n_time);
  std::vector<SpinorRadialField> snaps;
  snaps.reserve(n_time + 1);
  for (std::size_t i = 0; i <= n_time; ++i) {
    const double t = static_cast<double>(i) * dt;
    Doublet d = build_doublet(params, grid, params.drive * t);
    SpinorRadialField s = branch == DoubletBranch::minus ? std::move(d.minus) : std::move(d.plus);
    s.time = t;
    snaps.push_back(std::move(s));
  }
  return Trajectory<SpinorRadialField>(std::move(snaps), dt);
}

// integrated_phase over one driven cycle. The doublet density does not depend
// on phi, so the norm is checked for constancy against the t = 0 value.
inline PhaseBreakdown cycle_phase(const JTParams& params, RadialGridPtr grid, std::size_t n_time,
                                  DoubletBranch branch) {
  const auto traj = cycle_trajectory(params, std::move(grid), n_time, branch);
  const double n0 = norm_squared(traj.front());
  for (const auto& s : traj) {
    if (std::abs(norm_squared(s) - n0) > 1e-12 * n0)
      throw NumericalError("cycle_phase: doublet norm changes along the cycle");
  }
  return integrated_phase(traj, params.m, true);
}

}  // namespace jtphase::jt
