#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "jtphase/core/error.hpp"
#include "jtphase/core/special.hpp"

namespace jtphase {

// Mass common to all coordinates (coordinates are mass-scaled).
class MassParam {
 public:
  constexpr MassParam() = default;
  explicit MassParam(double m) : m_(m) {
    require(std::isfinite(m) && m > 0.0, "mass must be finite and > 0");
  }
  [[nodiscard]] constexpr double value() const noexcept { return m_; }

 private:
  double m_ = 1.0;
};

// Uniform grid on [x_min, x_max] including both end points.
class Grid1D {
 public:
  Grid1D(double x_min, double x_max, std::size_t n) : x_min_(x_min), x_max_(x_max), n_(n) {
    require(std::isfinite(x_min) && std::isfinite(x_max), "grid bounds must be finite");
    require(x_max > x_min, "grid requires x_max > x_min");
    require(n >= 3, "grid requires at least 3 nodes");
    spacing_ = (x_max - x_min) / static_cast<double>(n - 1);
  }

  [[nodiscard]] double x_min() const noexcept { return x_min_; }
  [[nodiscard]] double x_max() const noexcept { return x_max_; }
  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  [[nodiscard]] double spacing() const noexcept { return spacing_; }

  // Nodes are computed from the left end so that spacing is uniform to
  // rounding; the last node is pinned to x_max.
  [[nodiscard]] double node(std::size_t i) const noexcept {
    if (i + 1 == n_) return x_max_;
    return x_min_ + static_cast<double>(i) * spacing_;
  }

  // Trapezoid weight of node i.
  [[nodiscard]] double weight(std::size_t i) const noexcept {
    return (i == 0 || i + 1 == n_) ? 0.5 * spacing_ : spacing_;
  }

  [[nodiscard]] std::vector<double> nodes() const {
    std::vector<double> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = node(i);
    return out;
  }

  friend bool operator==(const Grid1D&, const Grid1D&) = default;

 private:
  double x_min_;
  double x_max_;
  std::size_t n_;
  double spacing_ = 0.0;
};

enum class RadialRule { gauss_legendre_mapped, composite_simpson };

inline const char* to_string(RadialRule rule) noexcept {
  return rule == RadialRule::gauss_legendre_mapped ? "gauss_legendre_mapped" : "composite_simpson";
}

namespace detail {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
inline void gauss_legendre(std::size_t n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double z = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = z;
      for (std::size_t j = 2; j <= n; ++j) {
        const double jd = static_cast<double>(j);
        const double p2 = ((2.0 * jd - 1.0) * z * p1 - (jd - 1.0) * p0) / jd;
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) <= 1e-16) break;
    }
    // refresh derivative at the converged root
    double p0 = 1.0;
    double p1 = z;
    for (std::size_t j = 2; j <= n; ++j) {
      const double jd = static_cast<double>(j);
      const double p2 = ((2.0 * jd - 1.0) * z * p1 - (jd - 1.0) * p0) / jd;
      p0 = p1;
      p1 = p2;
    }
    dp = static_cast<double>(n) * (z * p1 - p0) / (z * z - 1.0);
    x[i] = -z;
    x[n - 1 - i] = z;
    const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
    w[i] = wi;
    w[n - 1 - i] = wi;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
}

}  // namespace detail

// Quadrature rule on [0, q_max] for the radial coordinate. The weights do not
// include the q Jacobian; callers multiply by q explicitly.
class RadialGrid {
 public:
  static RadialGrid gauss_legendre(double q_max, std::size_t n) {
    require(std::isfinite(q_max) && q_max > 0.0, "radial grid requires finite q_max > 0");
    require(n >= 2, "Gauss-Legendre radial grid requires n >= 2");
    std::vector<double> x;
    std::vector<double> w;
    detail::gauss_legendre(n, x, w);
    RadialGrid g(q_max, RadialRule::gauss_legendre_mapped);
    g.nodes_.resize(n);
    g.weights_.resize(n);
    const double half = 0.5 * q_max;
    for (std::size_t i = 0; i < n; ++i) {
      g.nodes_[i] = half * (x[i] + 1.0);
      g.weights_[i] = half * w[i];
    }
    return g;
  }

  // Composite Simpson on a uniform grid, Richardson-extrapolated with the
  // Simpson sums on every 2nd and 4th node as far as the node count allows:
  // (n - 1) % 8 == 0 gives an O(h^8) rule, % 4 == 0 O(h^6), else plain O(h^4).
  // All weights stay positive.
  static RadialGrid composite_simpson(double q_max, std::size_t n) {
    require(std::isfinite(q_max) && q_max > 0.0, "radial grid requires finite q_max > 0");
    require(n >= 3 && n % 2 == 1, "composite Simpson grid requires an odd node count >= 3");
    RadialGrid g(q_max, RadialRule::composite_simpson);
    g.nodes_.resize(n);
    const double h = q_max / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) g.nodes_[i] = (i + 1 == n) ? q_max : static_cast<double>(i) * h;
    const auto s1 = simpson_weights(n, 1, h);
    if ((n - 1) % 4 != 0) {
      g.weights_ = s1;
      return g;
    }
    const auto s2 = simpson_weights(n, 2, h);
    g.weights_.resize(n);
    if ((n - 1) % 8 != 0) {
      for (std::size_t i = 0; i < n; ++i) g.weights_[i] = (16.0 * s1[i] - s2[i]) / 15.0;
      return g;
    }
    const auto s4 = simpson_weights(n, 4, h);
    for (std::size_t i = 0; i < n; ++i) {
      const double b1 = (16.0 * s1[i] - s2[i]) / 15.0;
      const double b2 = (16.0 * s2[i] - s4[i]) / 15.0;
      g.weights_[i] = (64.0 * b1 - b2) / 63.0;
    }
    return g;
  }

  static RadialGrid make(RadialRule rule, double q_max, std::size_t n) {
    return rule == RadialRule::gauss_legendre_mapped ? gauss_legendre(q_max, n)
                                                     : composite_simpson(q_max, n | 1u);
  }

  [[nodiscard]] double q_max() const noexcept { return q_max_; }
  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
  [[nodiscard]] RadialRule rule() const noexcept { return rule_; }
  [[nodiscard]] const std::vector<double>& nodes() const noexcept { return nodes_; }
  [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }
  [[nodiscard]] double node(std::size_t i) const noexcept { return nodes_[i]; }
  [[nodiscard]] double weight(std::size_t i) const noexcept { return weights_[i]; }

  // Uniform spacing for composite Simpson grids, NaN for Gauss-Legendre.
  [[nodiscard]] double uniform_spacing() const noexcept {
    if (rule_ != RadialRule::composite_simpson) return std::numeric_limits<double>::quiet_NaN();
    return q_max_ / static_cast<double>(nodes_.size() - 1);
  }

 private:
  RadialGrid(double q_max, RadialRule rule) : q_max_(q_max), rule_(rule) {}

  // Simpson weights using every `stride`-th node, zero elsewhere.
  static std::vector<double> simpson_weights(std::size_t n, std::size_t stride, double h) {
    std::vector<double> w(n, 0.0);
    const std::size_t last = (n - 1) / stride;
    const double hs = h * static_cast<double>(stride);
    for (std::size_t j = 0; j <= last; ++j) {
      const double c = (j == 0 || j == last) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
      w[j * stride] = c * hs / 3.0;
    }
    return w;
  }

  double q_max_;
  RadialRule rule_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

using RadialGridPtr = std::shared_ptr<const RadialGrid>;

inline RadialGridPtr share(RadialGrid grid) {
  return std::make_shared<const RadialGrid>(std::move(grid));
}

}  // namespace jtphase
