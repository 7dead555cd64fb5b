#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "jtphase/core/error.hpp"
#include "jtphase/core/grid.hpp"
#include "jtphase/core/special.hpp"
#include "jtphase/phase/field.hpp"
#include "jtphase/tdse/propagator.hpp"

// Gaussian test fixtures with analytic reference behaviour.

namespace jtphase::tdse {

enum class ScenarioId { ho_ground, ho_coherent, free_gaussian };

inline const char* to_string(ScenarioId id) noexcept {
  switch (id) {
    case ScenarioId::ho_ground: return "ho_ground";
    case ScenarioId::ho_coherent: return "ho_coherent";
    case ScenarioId::free_gaussian: return "free_gaussian";
  }
  return "?";
}

inline std::optional<ScenarioId> parse_scenario(std::string_view s) {
  if (s == "ho_ground") return ScenarioId::ho_ground;
  if (s == "ho_coherent") return ScenarioId::ho_coherent;
  if (s == "free_gaussian") return ScenarioId::free_gaussian;
  return std::nullopt;
}

// psi(x, 0) = (2 pi sigma^2)^{-1/4} exp(-(x - x0)^2 / (4 sigma^2) + i p x).
// sigma is the position standard deviation.
struct Scenario {
  ScenarioId id = ScenarioId::ho_ground;
  double omega = 1.0;         // 0 for the free packet
  double displacement = 0.0;  // x0
  double width = 1.0;         // sigma at t = 0
  double momentum = 0.0;      // p
  double t_final = 2.0 * kPi;
  MassParam m{};

  static Scenario make(ScenarioId id) {
    Scenario s;
    s.id = id;
    switch (id) {
      case ScenarioId::ho_ground:
        s.width = 1.0 / std::sqrt(2.0);
        break;
      case ScenarioId::ho_coherent:
        s.width = 1.0 / std::sqrt(2.0);
        s.displacement = 1.0;
        break;
      case ScenarioId::free_gaussian:
        s.omega = 0.0;
        s.width = 1.0;
        s.t_final = 1.0;
        break;
    }
    return s;
  }

  void validate() const {
    require(std::isfinite(omega) && omega >= 0.0, "scenario: omega must be >= 0");
    require(std::isfinite(width) && width > 0.0, "scenario: width must be > 0");
    require(std::isfinite(displacement) && std::abs(displacement) <= 50.0, "scenario: |displacement| must be <= 50");
    require(std::isfinite(momentum) && std::abs(momentum) <= 50.0, "scenario: |momentum| must be <= 50");
    require(std::isfinite(t_final) && t_final > 0.0, "scenario: t_final must be > 0");
    if (id != ScenarioId::free_gaussian) require(omega > 0.0, "scenario: oscillator fixtures need omega > 0");
  }

  [[nodiscard]] PotentialFn potential() const {
    const double k = m.value() * omega * omega;
    return [k](double x, double) { return 0.5 * k * x * x; };
  }

  // Analytic width at time t (free spreading, or constant for the oscillator
  // fixtures whose width matches the ground state).
  [[nodiscard]] double sigma_at(double t) const {
    if (id != ScenarioId::free_gaussian) return width;
    const double mm = m.value();
    return std::sqrt(width * width + t * t / (4.0 * width * width * mm * mm));
  }

  // <x>(t): x0 cos(wt) + p/(m w) sin(wt) for the oscillator, x0 + p t / m free.
  [[nodiscard]] double mean_position_at(double t) const {
    const double mm = m.value();
    if (id == ScenarioId::free_gaussian) return displacement + momentum * t / mm;
    return displacement * std::cos(omega * t) + momentum / (mm * omega) * std::sin(omega * t);
  }

  [[nodiscard]] double half_width() const {
    const double sigma_max = std::max(width, sigma_at(t_final));
    return std::abs(displacement) + std::abs(momentum) * t_final / m.value() + 12.0 * sigma_max;
  }

  [[nodiscard]] Grid1D make_grid(std::size_t n) const {
    const double L = half_width();
    return Grid1D(-L, L, n);
  }

  // Sampled and renormalized with the trapezoid measure; end nodes set to 0.
  [[nodiscard]] ComplexField1D initial_state(const Grid1D& g) const {
    validate();
    const double amp = std::pow(2.0 * kPi * width * width, -0.25);
    auto f = ComplexField1D::sample(g, [&](double x) {
      const double d = x - displacement;
      return amp * std::exp(cplx(-d * d / (4.0 * width * width), momentum * x));
    });
    f.values.front() = 0.0;
    f.values.back() = 0.0;
    const double s = 1.0 / std::sqrt(norm_squared(f));
    for (auto& z : f.values) z *= s;
    return f;
  }

  // Whole number of steps covering [0, t_final]; the nominal dt is shortened
  // to t_final / ceil(t_final / dt) when it does not divide t_final.
  [[nodiscard]] PropagatorConfig config(std::size_t n, double dt) const {
    validate();
    require(std::isfinite(dt) && dt > 0.0, "scenario: dt must be > 0");
    const double steps = std::ceil(t_final / dt * (1.0 - 1e-12));
    return config_steps(n, static_cast<std::size_t>(std::max(1.0, steps)));
  }

  [[nodiscard]] PropagatorConfig config_steps(std::size_t n, std::size_t steps) const {
    validate();
    require(steps >= 1, "scenario: steps must be >= 1");
    PropagatorConfig c{make_grid(n)};
    c.dt = t_final / static_cast<double>(steps);
    c.steps = steps;
    c.m = m;
    return c;
  }
};

}  // namespace jtphase::tdse
