#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "jtphase/core/error.hpp"
#include "jtphase/core/grid.hpp"
#include "jtphase/core/summation.hpp"
#include "jtphase/phase/field.hpp"

namespace jtphase::tdse {

enum class Scheme { implicit_trapezoidal };
enum class Boundary { dirichlet_zero };

inline constexpr double kMaxTotalNormDrift = 1e-8;
inline constexpr double kMaxBoundaryDensityRatio = 1e-12;

struct PropagatorConfig {
  Grid1D grid;
  double dt = 0.0;
  std::size_t steps = 0;
  Scheme scheme = Scheme::implicit_trapezoidal;
  Boundary boundary = Boundary::dirichlet_zero;
  MassParam m{};

  void validate() const {
    require(std::isfinite(dt) && dt > 0.0, "propagator: dt must be > 0");
    require(steps >= 1, "propagator: steps must be >= 1");
  }
};

struct PropagationDiagnostics {
  double max_step_norm_drift = 0.0;
  double total_norm_drift = 0.0;
  double max_boundary_ratio = 0.0;  // density next to the walls over max density
  double energy_initial = 0.0;
  double energy_final = 0.0;
  std::size_t steps = 0;
};

struct Propagation {
  Trajectory<ComplexField1D> trajectory;
  PropagationDiagnostics diagnostics;
};

// Discrete energy for the 3-point Laplacian with zero walls:
//   sum |psi_{i+1} - psi_i|^2 / (2 m h) + sum w_i V_i |psi_i|^2
inline double discrete_energy(const ComplexField1D& f, const PotentialFn& V, MassParam m = {}) {
  const double h = f.grid.spacing();
  CompensatedSum kin;
  CompensatedSum pot;
  for (std::size_t i = 0; i + 1 < f.size(); ++i) kin.add(std::norm(f.values[i + 1] - f.values[i]));
  for (std::size_t i = 0; i < f.size(); ++i) pot.add(f.grid.weight(i) * V(f.grid.node(i), f.time) * std::norm(f.values[i]));
  return kin.value() / (2.0 * m.value() * h) + pot.value();
}

namespace detail {

inline double boundary_ratio(const std::vector<cplx>& v) {
  double peak = 0.0;
  for (const auto& z : v) peak = std::max(peak, std::norm(z));
  if (!(peak > 0.0)) return 0.0;
  const std::size_t n = v.size();
  const double edge = std::max({std::norm(v[0]), std::norm(v[1]), std::norm(v[n - 2]), std::norm(v[n - 1])});
  return edge / peak;
}

// Thomas algorithm for a complex tridiagonal system with constant off
// diagonal `off` and diagonal `diag`; rhs is overwritten with the solution.
inline void solve_tridiagonal(std::vector<cplx>& diag, cplx off, std::vector<cplx>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(diag[i - 1]) == 0.0) throw NumericalError("propagator: singular tridiagonal pivot");
    const cplx w = off / diag[i - 1];
    diag[i] -= w * off;
    rhs[i] -= w * rhs[i - 1];
  }
  if (std::abs(diag[n - 1]) == 0.0) throw NumericalError("propagator: singular tridiagonal pivot");
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - off * rhs[i + 1]) / diag[i];
}

}  // namespace detail

// Crank-Nicolson (Cayley) steps
//   (1 + i dt H/2) psi^{n+1} = (1 - i dt H/2) psi^n,  H = -lap/2m + V(x, t + dt/2)
// with psi = 0 on the two end nodes. Every step is stored.
inline Propagation propagate_with_diagnostics(const ComplexField1D& initial, const PotentialFn& V,
                                              const PropagatorConfig& config) {
  config.validate();
  require(initial.grid == config.grid, "propagate: initial state grid differs from config grid");
  require(static_cast<bool>(V), "propagate: missing potential");
  const Grid1D& g = config.grid;
  const std::size_t n = g.size();
  const double h = g.spacing();
  const double m = config.m.value();
  const double norm0 = norm_squared(initial);
  if (std::abs(norm0 - 1.0) > 1e-8)
    throw InvalidArgument("propagate: initial state must be normalized (norm^2 = " + std::to_string(norm0) + ")");

  PropagationDiagnostics diag;
  diag.max_boundary_ratio = detail::boundary_ratio(initial.values);
  if (diag.max_boundary_ratio > kMaxBoundaryDensityRatio)
    throw NumericalError("propagate: grid too narrow, boundary density " + std::to_string(diag.max_boundary_ratio) +
                         " of max at t = " + std::to_string(initial.time));

  std::vector<ComplexField1D> snaps;
  snaps.reserve(config.steps + 1);
  std::vector<cplx> psi = initial.values;
  psi.front() = 0.0;
  psi.back() = 0.0;
  snaps.emplace_back(g, psi, initial.time);
  diag.energy_initial = discrete_energy(snaps.back(), V, config.m);

  const std::size_t ni = n - 2;  // interior unknowns
  const cplx half_idt(0.0, 0.5 * config.dt);
  const double kin_diag = 1.0 / (m * h * h);
  const double kin_off = -0.5 / (m * h * h);
  const cplx off = half_idt * kin_off;
  std::vector<cplx> d(ni);
  std::vector<cplx> rhs(ni);
  double prev_norm = norm0;
  for (std::size_t s = 0; s < config.steps; ++s) {
    const double t0 = initial.time + static_cast<double>(s) * config.dt;
    const double tm = t0 + 0.5 * config.dt;
    for (std::size_t j = 0; j < ni; ++j) {
      const std::size_t i = j + 1;
      const double v = V(g.node(i), tm);
      if (!std::isfinite(v)) throw InvalidArgument("propagate: potential not finite at x = " + std::to_string(g.node(i)));
      const cplx hd = kin_diag + v;
      d[j] = 1.0 + half_idt * hd;
      const cplx hpsi = hd * psi[i] + kin_off * (psi[i - 1] + psi[i + 1]);
      rhs[j] = psi[i] - half_idt * hpsi;
    }
    detail::solve_tridiagonal(d, off, rhs);
    for (std::size_t j = 0; j < ni; ++j) psi[j + 1] = rhs[j];
    const double t1 = initial.time + static_cast<double>(s + 1) * config.dt;
    snaps.emplace_back(g, psi, t1);

    const double norm = norm_squared(snaps.back());
    diag.max_step_norm_drift = std::max(diag.max_step_norm_drift, std::abs(norm - prev_norm));
    prev_norm = norm;
    diag.total_norm_drift = std::abs(norm - norm0);
    if (diag.total_norm_drift > kMaxTotalNormDrift)
      throw NumericalError("propagate: norm drift " + std::to_string(diag.total_norm_drift) + " exceeds 1e-8 at step " +
                           std::to_string(s + 1));
    const double br = detail::boundary_ratio(psi);
    diag.max_boundary_ratio = std::max(diag.max_boundary_ratio, br);
    if (br > kMaxBoundaryDensityRatio)
      throw NumericalError("propagate: boundary density " + std::to_string(br) + " of max at step " +
                           std::to_string(s + 1) + "; widen the grid");
  }
  diag.steps = config.steps;
  diag.energy_final = discrete_energy(snaps.back(), V, config.m);
  return {Trajectory<ComplexField1D>(std::move(snaps), config.dt), diag};
}

inline Trajectory<ComplexField1D> propagate(const ComplexField1D& initial, const PotentialFn& V,
                                            const PropagatorConfig& config) {
  return propagate_with_diagnostics(initial, V, config).trajectory;
}

// --- observables -----------------------------------------------------------

inline double position_mean(const ComplexField1D& f) {
  CompensatedSum num;
  CompensatedSum den;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double w = f.grid.weight(i) * std::norm(f.values[i]);
    num.add(w * f.grid.node(i));
    den.add(w);
  }
  return num.value() / den.value();
}

inline double position_variance(const ComplexField1D& f) {
  const double mu = position_mean(f);
  CompensatedSum num;
  CompensatedSum den;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double w = f.grid.weight(i) * std::norm(f.values[i]);
    const double dx = f.grid.node(i) - mu;
    num.add(w * dx * dx);
    den.add(w);
  }
  return num.value() / den.value();
}

// |<a|b>|^2 / (<a|a><b|b>)
inline double fidelity(const ComplexField1D& a, const ComplexField1D& b) {
  return std::norm(inner_product(a, b)) / (norm_squared(a) * norm_squared(b));
}

}  // namespace jtphase::tdse
