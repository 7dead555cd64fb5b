// Mean phase after one driven cycle against the coupling k.

#include <cstdio>

#include "jtphase/jt/model.hpp"

int main() {
  using namespace jtphase;
  const auto res = jt::sweep_phase(0.0, 4.0, 17);
  std::printf("%6s %20s %20s %10s\n", "k", "phase (quadrature)", "phase / pi", "|diff|");
  for (const auto& r : res.rows)
    std::printf("%6.2f %20.15f %20.15f %10.2e\n", r.k, r.phase_quadrature, r.phase_quadrature / kPi, r.abs_diff);
}
