// Variational gap of the guessed doublet against exact diagonalization.

#include <cstdio>

#include "jtphase/ed/jahn_teller.hpp"

int main() {
  using namespace jtphase;
  constexpr std::size_t cutoff = 40;
  std::printf("%5s %20s %20s %12s\n", "k", "E0 (exact)", "guessed", "gap");
  for (double k : {0.5, 1.0, 2.0, 3.0}) {
    const auto d = ed::ground_doublet(k, 1.0, cutoff);
    const auto g = ed::guessed_energy(k, 1.0, cutoff);
    std::printf("%5.1f %20.12f %20.12f %12.4e\n", k, d.e0, g.energy, g.energy - d.e0);
  }
}
