// Propagate the oscillator ground state for one period and compare the
// integrated phase with -E t_f and with the directly tracked <S>.

#include <cstdio>

#include "jtphase/tdse/validate.hpp"

int main() {
  using namespace jtphase;
  const auto sc = tdse::Scenario::make(tdse::ScenarioId::ho_ground);
  const auto run = tdse::run_scenario(sc, 2001, tdse::steps_for(sc, 0.005, 0));
  const auto& r = run.report;
  std::printf("integrated phase   %.12f\n", r.phase_total);
  std::printf("-E t_f             %.12f\n", -0.5 * sc.t_final);
  std::printf("direct <S> change  %.12f\n", r.phase_direct);
  std::printf("roi / continuity / hj / form gap: %.2e %.2e %.2e %.2e\n", r.roi_residual, r.continuity_residual,
              r.hj_residual, r.form_gap);
}
