#pragma once

#include <cmath>
#include <sstream>
#include <string>

#include "jtphase/core/error.hpp"
#include "jtphase/core/grid.hpp"
#include "jtphase/core/summation.hpp"

namespace jtphase {

// Sum_i w_i f(q_i) in ascending node order with compensated summation.
template <class F>
double integrate_radial(F&& f, const RadialGrid& grid) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double q = grid.node(i);
    const double v = f(q);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "integrate_radial: non-finite integrand at node " << i << " (q = " << q << ")";
      throw NumericalError(msg.str());
    }
    acc.add(grid.weight(i) * v);
  }
  return acc.value();
}

// Same rule applied to integrand samples already evaluated on the nodes.
template <class Samples>
double integrate_radial_samples(const Samples& values, const RadialGrid& grid) {
  require(values.size() == grid.size(), "integrate_radial_samples: sample count != node count");
  CompensatedSum acc;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericalError("integrate_radial_samples: non-finite sample at node " + std::to_string(i));
    }
    acc.add(grid.weight(i) * values[i]);
  }
  return acc.value();
}

}  // namespace jtphase
