#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jtphase/core/error.hpp"
#include "jtphase/core/grid.hpp"
#include "jtphase/core/mat2.hpp"
#include "jtphase/core/summation.hpp"

namespace jtphase {

using PotentialFn = std::function<double(double x, double t)>;

inline bool is_finite(cplx z) noexcept { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// psi(x, t) sampled on a uniform grid at one instant.
struct ComplexField1D {
  Grid1D grid;
  std::vector<cplx> values;
  double time = 0.0;

  ComplexField1D(Grid1D g, std::vector<cplx> v, double t = 0.0)
      : grid(std::move(g)), values(std::move(v)), time(t) {
    require(values.size() == grid.size(), "ComplexField1D: value count does not match grid");
    require(std::isfinite(time), "ComplexField1D: time must be finite");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!is_finite(values[i])) throw InvalidArgument("ComplexField1D: non-finite value at node " + std::to_string(i));
    }
  }

  template <class F>
  static ComplexField1D sample(const Grid1D& g, F&& f, double t = 0.0) {
    std::vector<cplx> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g.node(i));
    return ComplexField1D(g, std::move(v), t);
  }

  [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

enum class DoubletBranch { minus, plus };

inline const char* to_string(DoubletBranch b) noexcept { return b == DoubletBranch::minus ? "minus" : "plus"; }

// Two-component field on a radial grid at a fixed angle parameter phi.
// d_up / d_down hold the radial derivative samples when available; they are
// required by the gradient functionals because Gauss-Legendre nodes are not
// equally spaced.
struct SpinorRadialField {
  RadialGridPtr grid;
  double phi = 0.0;
  double time = 0.0;
  std::vector<cplx> up;
  std::vector<cplx> down;
  std::vector<cplx> d_up;
  std::vector<cplx> d_down;
  std::optional<DoubletBranch> branch;

  [[nodiscard]] std::size_t size() const noexcept { return up.size(); }
  [[nodiscard]] bool has_radial_derivative() const noexcept { return d_up.size() == up.size() && !up.empty(); }

  void validate() const {
    require(grid != nullptr, "SpinorRadialField: missing grid");
    require(up.size() == grid->size() && down.size() == grid->size(),
            "SpinorRadialField: component size does not match grid");
    require(d_up.size() == d_down.size() && (d_up.empty() || d_up.size() == up.size()),
            "SpinorRadialField: derivative samples inconsistent");
    for (std::size_t i = 0; i < up.size(); ++i) {
      if (!is_finite(up[i]) || !is_finite(down[i]))
        throw InvalidArgument("SpinorRadialField: non-finite value at node " + std::to_string(i));
    }
  }

  [[nodiscard]] double density(std::size_t i) const noexcept { return std::norm(up[i]) + std::norm(down[i]); }
};

// --- measure-aware inner products -----------------------------------------

// Trapezoid on the uniform grid.
inline cplx inner_product(const ComplexField1D& a, const ComplexField1D& b) {
  require(a.grid == b.grid, "inner_product: grid mismatch");
  CompensatedSum re;
  CompensatedSum im;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const cplx z = std::conj(a.values[i]) * b.values[i];
    const double w = a.grid.weight(i);
    re.add(w * z.real());
    im.add(w * z.imag());
  }
  return {re.value(), im.value()};
}

// Radial measure q dq; phi is a parameter, not integrated over.
inline cplx inner_product(const SpinorRadialField& a, const SpinorRadialField& b) {
  require(a.grid && b.grid && a.grid->size() == b.grid->size(), "inner_product: spinor grid mismatch");
  CompensatedSum re;
  CompensatedSum im;
  const RadialGrid& g = *a.grid;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const cplx z = std::conj(a.up[i]) * b.up[i] + std::conj(a.down[i]) * b.down[i];
    const double w = g.weight(i) * g.node(i);
    re.add(w * z.real());
    im.add(w * z.imag());
  }
  return {re.value(), im.value()};
}

template <class Field>
double norm_squared(const Field& f) {
  return inner_product(f, f).real();
}

inline ComplexField1D conjugate(const ComplexField1D& f) {
  ComplexField1D out = f;
  for (auto& z : out.values) z = std::conj(z);
  return out;
}

inline SpinorRadialField conjugate(const SpinorRadialField& f) {
  SpinorRadialField out = f;
  for (auto* vec : {&out.up, &out.down, &out.d_up, &out.d_down})
    for (auto& z : *vec) z = std::conj(z);
  if (out.branch) out.branch = (*out.branch == DoubletBranch::minus) ? DoubletBranch::plus : DoubletBranch::minus;
  return out;
}

// sum_j c_j f_j, stamped with `time`. All fields must share a grid.
inline ComplexField1D linear_combination(std::span<const double> c, std::span<const ComplexField1D* const> f,
                                         double time) {
  require(!f.empty() && c.size() == f.size(), "linear_combination: size mismatch");
  std::vector<cplx> v(f[0]->size(), cplx{});
  for (std::size_t j = 0; j < f.size(); ++j) {
    if (c[j] == 0.0) continue;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += c[j] * f[j]->values[i];
  }
  return ComplexField1D(f[0]->grid, std::move(v), time);
}

inline SpinorRadialField linear_combination(std::span<const double> c, std::span<const SpinorRadialField* const> f,
                                            double time) {
  require(!f.empty() && c.size() == f.size(), "linear_combination: size mismatch");
  SpinorRadialField out;
  out.grid = f[0]->grid;
  out.phi = f[0]->phi;
  out.time = time;
  const std::size_t n = f[0]->size();
  out.up.assign(n, cplx{});
  out.down.assign(n, cplx{});
  const bool with_d = std::all_of(f.begin(), f.end(), [](const SpinorRadialField* s) { return s->has_radial_derivative(); });
  if (with_d) {
    out.d_up.assign(n, cplx{});
    out.d_down.assign(n, cplx{});
  }
  for (std::size_t j = 0; j < f.size(); ++j) {
    if (c[j] == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      out.up[i] += c[j] * f[j]->up[i];
      out.down[i] += c[j] * f[j]->down[i];
      if (with_d) {
        out.d_up[i] += c[j] * f[j]->d_up[i];
        out.d_down[i] += c[j] * f[j]->d_down[i];
      }
    }
  }
  return out;
}

// Ordered snapshots with a uniform time step.
template <class Field>
class Trajectory {
 public:
  Trajectory(std::vector<Field> snapshots, double dt) : snapshots_(std::move(snapshots)), dt_(dt) {
    require(!snapshots_.empty(), "Trajectory: needs at least one snapshot");
    if (snapshots_.size() == 1) {
      dt_ = 0.0;
      return;
    }
    require(std::isfinite(dt) && dt > 0.0, "Trajectory: dt must be > 0");
    const double t0 = snapshots_.front().time;
    for (std::size_t i = 0; i < snapshots_.size(); ++i) {
      const double expected = t0 + static_cast<double>(i) * dt_;
      const double tol = 1e-9 * std::max({1.0, std::abs(expected), dt_});
      require(std::abs(snapshots_[i].time - expected) <= tol, "Trajectory: snapshot times are not uniform");
      if (i > 0) require(same_grid(snapshots_[i], snapshots_[0]), "Trajectory: snapshots do not share one grid");
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return snapshots_.size(); }
  [[nodiscard]] double dt() const noexcept { return dt_; }
  [[nodiscard]] const Field& operator[](std::size_t i) const { return snapshots_[i]; }
  [[nodiscard]] const Field& front() const { return snapshots_.front(); }
  [[nodiscard]] const Field& back() const { return snapshots_.back(); }
  [[nodiscard]] double duration() const noexcept { return snapshots_.back().time - snapshots_.front().time; }
  [[nodiscard]] auto begin() const noexcept { return snapshots_.begin(); }
  [[nodiscard]] auto end() const noexcept { return snapshots_.end(); }

 private:
  static bool same_grid(const ComplexField1D& a, const ComplexField1D& b) { return a.grid == b.grid; }
  static bool same_grid(const SpinorRadialField& a, const SpinorRadialField& b) {
    return a.grid == b.grid || (a.grid && b.grid && a.grid->nodes() == b.grid->nodes());
  }

  std::vector<Field> snapshots_;
  double dt_;
};

template <class Field>
Trajectory<Field> conjugate(const Trajectory<Field>& traj) {
  std::vector<Field> out;
  out.reserve(traj.size());
  for (const auto& s : traj) out.push_back(conjugate(s));
  return Trajectory<Field>(std::move(out), traj.dt());
}

namespace detail {

struct Stencil {
  int offset;  // index of first point relative to i
  std::array<double, 5> c;
  int width;
  double denom;
};

// Fourth-order central stencil in the interior, fourth-order one-sided
// stencils for the two points at each end. Falls back to second order when
// fewer than five snapshots exist.
inline Stencil time_stencil(std::size_t i, std::size_t n) {
  if (n >= 5) {
    if (i >= 2 && i + 2 < n) return {-2, {1, -8, 0, 8, -1}, 5, 12.0};
    if (i == 0) return {0, {-25, 48, -36, 16, -3}, 5, 12.0};
    if (i == 1) return {-1, {-3, -10, 18, -6, 1}, 5, 12.0};
    if (i + 1 == n) return {-4, {3, -16, 36, -48, 25}, 5, 12.0};
    return {-3, {-1, 6, -18, 10, 3}, 5, 12.0};  // i == n - 2
  }
  if (n >= 3) {
    if (i == 0) return {0, {-3, 4, -1, 0, 0}, 3, 2.0};
    if (i + 1 == n) return {-2, {1, -4, 3, 0, 0}, 3, 2.0};
    return {-1, {-1, 0, 1, 0, 0}, 3, 2.0};
  }
  return {static_cast<int>(i == 0 ? 0 : -1), {-1, 1, 0, 0, 0}, 2, 1.0};
}

}  // namespace detail

// d/dt of snapshot i from finite differences over neighbouring snapshots.
template <class Field>
Field time_derivative(const Trajectory<Field>& traj, std::size_t i) {
  require(i < traj.size(), "time_derivative: index out of range");
  const Field& here = traj[i];
  if (traj.size() == 1) {
    const double zero = 0.0;
    const Field* f = &here;
    return linear_combination(std::span<const double>(&zero, 1), std::span<const Field* const>(&f, 1), here.time);
  }
  const auto st = detail::time_stencil(i, traj.size());
  std::vector<double> coeffs;
  std::vector<const Field*> fields;
  for (int j = 0; j < st.width; ++j) {
    coeffs.push_back(st.c[static_cast<std::size_t>(j)] / (st.denom * traj.dt()));
    fields.push_back(&traj[static_cast<std::size_t>(static_cast<int>(i) + st.offset + j)]);
  }
  return linear_combination(coeffs, fields, here.time);
}

}  // namespace jtphase
