#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "jtphase/core/error.hpp"
#include "jtphase/core/special.hpp"
#include "jtphase/phase/field.hpp"

namespace jtphase {

inline constexpr double kDefaultNodeEpsilon = 1e-8;

// psi = A exp(iS) on the grid. Nodes with A < node_epsilon * max A are masked;
// S there is carried over from the nearest unmasked neighbour on the sweep
// side and carries no meaning.
struct PolarForm {
  std::vector<double> modulus;
  std::vector<double> phase;
  std::vector<bool> node_mask;
  double max_modulus = 0.0;
  std::size_t anchor = 0;  // index of max modulus, where the unwrap starts

  [[nodiscard]] std::size_t size() const noexcept { return modulus.size(); }
  [[nodiscard]] bool masked(std::size_t i) const { return node_mask[i]; }

  [[nodiscard]] std::size_t masked_count() const {
    return static_cast<std::size_t>(std::count(node_mask.begin(), node_mask.end(), true));
  }

  // Fraction of masked nodes between the first and last unmasked node. Masked
  // runs touching the grid ends are decaying tails, not nodes, and do not count.
  [[nodiscard]] double interior_masked_fraction() const {
    std::size_t lo = 0;
    while (lo < size() && node_mask[lo]) ++lo;
    if (lo == size()) return 1.0;
    std::size_t hi = size() - 1;
    while (node_mask[hi]) --hi;
    std::size_t masked = 0;
    for (std::size_t i = lo; i <= hi; ++i) masked += node_mask[i] ? 1u : 0u;
    return static_cast<double>(masked) / static_cast<double>(hi - lo + 1);
  }
};

// Nearest-branch representative of `raw` relative to `reference`.
inline double continue_branch(double reference, double raw) {
  return reference + std::remainder(raw - reference, 2.0 * kPi);
}

// Any global 2*pi offset of S cancels in differences of mean phases.
inline PolarForm polar_decompose(const ComplexField1D& field, double node_epsilon = kDefaultNodeEpsilon) {
  require(node_epsilon >= 0.0 && node_epsilon < 1.0, "polar_decompose: node_epsilon must be in [0, 1)");
  const std::size_t n = field.size();
  PolarForm pf;
  pf.modulus.resize(n);
  pf.phase.assign(n, 0.0);
  pf.node_mask.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    pf.modulus[i] = std::abs(field.values[i]);
    if (pf.modulus[i] > pf.max_modulus) {
      pf.max_modulus = pf.modulus[i];
      pf.anchor = i;
    }
  }
  if (!(pf.max_modulus > 0.0)) throw InvalidArgument("polar_decompose: field vanishes everywhere above threshold");
  const double threshold = node_epsilon * pf.max_modulus;
  for (std::size_t i = 0; i < n; ++i) pf.node_mask[i] = pf.modulus[i] < threshold;
  if (pf.masked_count() == n) throw InvalidArgument("polar_decompose: field vanishes everywhere above threshold");

  const std::size_t a = pf.anchor;
  pf.phase[a] = std::arg(field.values[a]);
  double last = pf.phase[a];
  for (std::size_t i = a + 1; i < n; ++i) {
    if (!pf.node_mask[i]) last = continue_branch(last, std::arg(field.values[i]));
    pf.phase[i] = last;
  }
  last = pf.phase[a];
  for (std::size_t i = a; i-- > 0;) {
    if (!pf.node_mask[i]) last = continue_branch(last, std::arg(field.values[i]));
    pf.phase[i] = last;
  }
  return pf;
}

}  // namespace jtphase
