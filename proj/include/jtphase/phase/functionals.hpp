#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "jtphase/core/error.hpp"
#include "jtphase/core/summation.hpp"
#include "jtphase/phase/field.hpp"
#include "jtphase/phase/polar.hpp"

// Mean-phase functionals of a sampled wavefunction.
//
// Pointwise derivatives use second-order central differences. Integrals of
// squared gradients (kinetic energy, delta K, the flux in the continuity
// equation) use differences across each grid interval, which are centred at
// the interval midpoints and sum by parts exactly against the three-point
// Laplacian used by the propagator.

namespace jtphase {

inline constexpr double kMaxInteriorMaskedFraction = 0.20;

struct PhaseBreakdown {
  double dynamic_term = 0.0;  // Im int dt <psi|d_t psi>
  double delta_k_term = 0.0;  // int dt delta K
  double total = 0.0;
  bool normalization_applied = false;
};

namespace detail {

inline void require_same_grid(const ComplexField1D& a, const ComplexField1D& b, const char* who) {
  if (!(a.grid == b.grid)) throw InvalidArgument(std::string(who) + ": field and time derivative grids differ");
}

// 2(|z| - Re z) with z = conj(psi_i) psi_{i+1}, computed without cancellation.
inline double interval_phase_gradient(cplx left, cplx right) {
  const cplx z = std::conj(left) * right;
  const double s = std::sin(0.5 * std::arg(z));
  return 4.0 * std::abs(z) * s * s;
}

inline void require_normalized(double norm, const char* who) {
  if (std::abs(norm - 1.0) > 1e-8) {
    std::ostringstream msg;
    msg.precision(17);
    msg << who << ": field is not normalized (measured norm " << norm << ")";
    throw InvalidArgument(msg.str());
  }
}

inline void check_masked_fraction(const PolarForm& pf) {
  const double frac = pf.interior_masked_fraction();
  if (frac > kMaxInteriorMaskedFraction) {
    std::ostringstream msg;
    msg << "phase rate ill-defined near nodes (" << frac * 100.0 << "% of the support is masked)";
    throw NumericalError(msg.str());
  }
}

inline double weighted_im_overlap(const ComplexField1D& f, const ComplexField1D& dt, const PolarForm* mask) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (mask && mask->masked(i)) continue;
    acc.add(f.grid.weight(i) * (std::conj(f.values[i]) * dt.values[i]).imag());
  }
  return acc.value();
}

inline double expectation_potential(const ComplexField1D& f, const PotentialFn& V) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < f.size(); ++i) acc.add(f.grid.weight(i) * V(f.grid.node(i), f.time) * std::norm(f.values[i]));
  return acc.value();
}

// int |grad psi|^2 with interval differences.
inline double gradient_energy(const ComplexField1D& f) {
  const double h = f.grid.spacing();
  CompensatedSum acc;
  for (std::size_t i = 0; i + 1 < f.size(); ++i) acc.add(std::norm(f.values[i + 1] - f.values[i]) / h);
  return acc.value();
}

// Radial derivative by finite differences on a uniform (composite Simpson) grid.
inline std::pair<std::vector<cplx>, std::vector<cplx>> radial_derivative_fd(const SpinorRadialField& f) {
  const RadialGrid& g = *f.grid;
  if (g.rule() != RadialRule::composite_simpson)
    throw InvalidArgument("spinor gradient: no derivative samples and the radial grid is not uniform");
  const double h = g.uniform_spacing();
  auto diff = [&](const std::vector<cplx>& v) {
    const std::size_t n = v.size();
    std::vector<cplx> d(n);
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    return d;
  };
  return {diff(f.up), diff(f.down)};
}

}  // namespace detail

// -S_e = int |psi|^2 ln |psi|^2 over the grid measure (negated).
inline double entropy_se(const ComplexField1D& field) {
  const double norm = norm_squared(field);
  detail::require_normalized(norm, "entropy_se");
  CompensatedSum acc;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double rho = std::norm(field.values[i]);
    if (rho < 1e-300) continue;
    acc.add(-field.grid.weight(i) * rho * std::log(rho));
  }
  return acc.value();
}

inline double entropy_se(const SpinorRadialField& field) {
  field.validate();
  const double norm = norm_squared(field);
  detail::require_normalized(norm, "entropy_se");
  const RadialGrid& g = *field.grid;
  CompensatedSum acc;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double rho = field.density(i);
    if (rho < 1e-300) continue;
    acc.add(-g.weight(i) * g.node(i) * rho * std::log(rho));
  }
  return acc.value();
}

// delta K = (1/m) int [|grad psi|^2 - (grad |psi|)^2] >= 0.
// For a scalar field the interval form is non-negative term by term and
// vanishes exactly for a real positive field.
inline double delta_k(const ComplexField1D& field, MassParam m = {}) {
  const double h = field.grid.spacing();
  CompensatedSum acc;
  for (std::size_t i = 0; i + 1 < field.size(); ++i)
    acc.add(detail::interval_phase_gradient(field.values[i], field.values[i + 1]) / h);
  return acc.value() / m.value();
}

// Split of the spinor gradient functional. With rho = Psi^+ Psi:
//   |dPsi|^2 - (d sqrt(rho))^2 = (Im Psi^+ dPsi)^2 / rho + |psi1 dpsi2 - psi2 dpsi1|^2 / rho
// The first piece is rho (dS)^2 for the density-weighted mean phase gradient
// dS = Im(Psi^+ dPsi)/rho and is what enters the mean-phase result. The second
// (spinor texture) piece is identically zero for one-component fields.
struct SpinorGradientSplit {
  double phase_gradient = 0.0;  // (1/m) int q dq (Im Psi^+ dPsi)^2 / rho
  double spinor_texture = 0.0;  // (1/m) int q dq |psi1 dpsi2 - psi2 dpsi1|^2 / rho
  double gradient_scale = 0.0;  // int q dq |dPsi|^2

  // |dPsi|^2 - (d|Psi|)^2 with |Psi| = sqrt(Psi^+ Psi), integrated.
  [[nodiscard]] double spinor_norm_convention() const noexcept { return phase_gradient + spinor_texture; }
};

inline SpinorGradientSplit spinor_gradient_split(const SpinorRadialField& field, MassParam m = {}) {
  field.validate();
  std::vector<cplx> fd_up;
  std::vector<cplx> fd_down;
  const std::vector<cplx>* du = &field.d_up;
  const std::vector<cplx>* dd = &field.d_down;
  if (!field.has_radial_derivative()) {
    std::tie(fd_up, fd_down) = detail::radial_derivative_fd(field);
    du = &fd_up;
    dd = &fd_down;
  }
  const RadialGrid& g = *field.grid;
  CompensatedSum phase;
  CompensatedSum texture;
  CompensatedSum scale;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = g.weight(i) * g.node(i);
    const cplx a = field.up[i];
    const cplx b = field.down[i];
    const cplx da = (*du)[i];
    const cplx db = (*dd)[i];
    scale.add(w * (std::norm(da) + std::norm(db)));
    const double rho = std::norm(a) + std::norm(b);
    if (rho < 1e-300) continue;
    const double im = (std::conj(a) * da + std::conj(b) * db).imag();
    phase.add(w * im * im / rho);
    texture.add(w * std::norm(a * db - b * da) / rho);
  }
  return {phase.value() / m.value(), texture.value() / m.value(), scale.value()};
}

// delta K of a spinor: the mean-phase-gradient piece of the split above.
inline double delta_k(const SpinorRadialField& field, MassParam m = {}) {
  return spinor_gradient_split(field, m).phase_gradient;
}

// d<S>/dt = int [A^2 dS/dt + (1/m) A^2 (grad S)^2], evaluated on unmasked nodes.
inline double phase_rate_form_a(const ComplexField1D& field, const ComplexField1D& dpsi_dt, MassParam m = {},
                                double node_epsilon = kDefaultNodeEpsilon) {
  detail::require_same_grid(field, dpsi_dt, "phase_rate_form_a");
  const PolarForm pf = polar_decompose(field, node_epsilon);
  detail::check_masked_fraction(pf);
  const double first = detail::weighted_im_overlap(field, dpsi_dt, &pf);
  const double h = field.grid.spacing();
  CompensatedSum second;
  for (std::size_t i = 0; i + 1 < field.size(); ++i) {
    if (pf.masked(i) || pf.masked(i + 1)) continue;
    second.add(detail::interval_phase_gradient(field.values[i], field.values[i + 1]) / h);
  }
  return first + second.value() / m.value();
}

// d<S>/dt = -int A^2 dS/dt - 2<V> - (1/m) int (grad A)^2.
inline double phase_rate_form_b(const ComplexField1D& field, const ComplexField1D& dpsi_dt, const PotentialFn& V,
                                MassParam m = {}, double node_epsilon = kDefaultNodeEpsilon) {
  detail::require_same_grid(field, dpsi_dt, "phase_rate_form_b");
  const PolarForm pf = polar_decompose(field, node_epsilon);
  detail::check_masked_fraction(pf);
  const double first = detail::weighted_im_overlap(field, dpsi_dt, &pf);
  const double pot = detail::expectation_potential(field, V);
  const double h = field.grid.spacing();
  CompensatedSum grad_a;
  for (std::size_t i = 0; i + 1 < field.size(); ++i) {
    const double d = pf.modulus[i + 1] - pf.modulus[i];
    grad_a.add(d * d / h);
  }
  return -first - 2.0 * pot - grad_a.value() / m.value();
}

// Im int psi^+ d_t psi + int |grad psi|^2 / 2m + int |psi|^2 V; zero for
// solutions of the Schroedinger equation.
inline double roi_identity_residual(const ComplexField1D& field, const ComplexField1D& dpsi_dt, const PotentialFn& V,
                                    MassParam m = {}) {
  detail::require_same_grid(field, dpsi_dt, "roi_identity_residual");
  return detail::weighted_im_overlap(field, dpsi_dt, nullptr) +
         detail::gradient_energy(field) / (2.0 * m.value()) + detail::expectation_potential(field, V);
}

// Density-weighted RMS of the Hamilton-Jacobi residual
//   (1/2m)(grad S)^2 + dS/dt + V - (1/2m) A^{-1} lap A
// over unmasked interior nodes. The A^2 weight keeps the quantum-potential
// term, which is ill-conditioned in the far tails, from dominating.
inline double hj_residual(const ComplexField1D& field, const ComplexField1D& dpsi_dt, const PotentialFn& V,
                          MassParam m = {}, double node_epsilon = kDefaultNodeEpsilon) {
  detail::require_same_grid(field, dpsi_dt, "hj_residual");
  const PolarForm pf = polar_decompose(field, node_epsilon);
  const double h = field.grid.spacing();
  const double inv2m = 0.5 / m.value();
  CompensatedSum num;
  CompensatedSum den;
  for (std::size_t i = 1; i + 1 < field.size(); ++i) {
    if (pf.masked(i)) continue;
    const cplx psi = field.values[i];
    const double rho = std::norm(psi);
    const double grad_s = (std::conj(psi) * (field.values[i + 1] - field.values[i - 1])).imag() / (2.0 * h * rho);
    const double ds_dt = (std::conj(psi) * dpsi_dt.values[i]).imag() / rho;
    const double a = pf.modulus[i];
    const double quantum = (pf.modulus[i + 1] - 2.0 * a + pf.modulus[i - 1]) / (h * h * a);
    const double r = inv2m * grad_s * grad_s + ds_dt + V(field.grid.node(i), field.time) - inv2m * quantum;
    const double w = field.grid.weight(i) * rho;
    num.add(w * r * r);
    den.add(w);
  }
  if (!(den.value() > 0.0)) return 0.0;
  return std::sqrt(num.value() / den.value());
}

// L2 norm (dx measure) of d_t A^2 + (1/m) div(A^2 grad S) at snapshot t_index,
// over unmasked interior nodes. The flux A^2 grad S is taken at interval
// midpoints as Im(conj(psi_i) psi_{i+1}) / h.
inline double continuity_residual(const Trajectory<ComplexField1D>& traj, MassParam m, std::size_t t_index,
                                  double node_epsilon = kDefaultNodeEpsilon) {
  if (traj.size() < 3 || t_index == 0 || t_index + 1 >= traj.size())
    throw InvalidArgument("continuity_residual: t_index out of range (must be interior)");
  const ComplexField1D& f = traj[t_index];
  const ComplexField1D dt = time_derivative(traj, t_index);
  const PolarForm pf = polar_decompose(f, node_epsilon);
  const double h = f.grid.spacing();
  CompensatedSum acc;
  for (std::size_t i = 1; i + 1 < f.size(); ++i) {
    if (pf.masked(i)) continue;
    const double drho = 2.0 * (std::conj(f.values[i]) * dt.values[i]).real();
    const double j_right = (std::conj(f.values[i]) * f.values[i + 1]).imag() / h;
    const double j_left = (std::conj(f.values[i - 1]) * f.values[i]).imag() / h;
    const double r = drho + (j_right - j_left) / (h * m.value());
    acc.add(h * r * r);
  }
  return std::sqrt(acc.value());
}

// Mean phase change over a trajectory:
//   Im int dt <psi|d_t psi>  +  int dt delta K
// with each time slice optionally divided by <psi|psi>. Time derivatives come
// from time_derivative(); the time integral is the trapezoid rule.
template <class Field>
PhaseBreakdown integrated_phase(const Trajectory<Field>& traj, MassParam m = {}, bool normalize_each_step = false) {
  PhaseBreakdown out;
  out.normalization_applied = normalize_each_step;
  if (traj.size() == 1) return out;
  require(traj.size() >= 3, "integrated_phase: needs at least 3 snapshots");
  CompensatedSum dyn;
  CompensatedSum dk;
  const std::size_t n = traj.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Field d = time_derivative(traj, i);
    double rate = inner_product(traj[i], d).imag();
    double k = delta_k(traj[i], m);
    if (normalize_each_step) {
      const double norm = norm_squared(traj[i]);
      if (!(norm > 0.0)) throw NumericalError("integrated_phase: snapshot with zero norm");
      rate /= norm;
      k /= norm;
    }
    const double w = (i == 0 || i + 1 == n) ? 0.5 * traj.dt() : traj.dt();
    dyn.add(w * rate);
    dk.add(w * k);
  }
  out.dynamic_term = dyn.value();
  out.delta_k_term = dk.value();
  out.total = out.dynamic_term + out.delta_k_term;
  return out;
}

}  // namespace jtphase
