#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

#include "jtphase/tdse/propagator.hpp"
#include "jtphase/tdse/scenario.hpp"
#include "jtphase/tdse/validate.hpp"

using namespace jtphase;
using namespace jtphase::tdse;

// --- tridiagonal solve ----------------------------------------------------------

TEST(Tridiagonal, MatchesDenseSolve) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = 60;
  std::vector<cplx> d(n);
  std::vector<cplx> b(n);
  const cplx off(u(rng), u(rng));
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  Eigen::VectorXcd rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = cplx(4.0 + u(rng), u(rng));
    b[i] = cplx(u(rng), u(rng));
    a(i, i) = d[i];
    if (i + 1 < n) a(i, i + 1) = a(i + 1, i) = off;
    rhs(i) = b[i];
  }
  const Eigen::VectorXcd ref = a.partialPivLu().solve(rhs);
  tdse::detail::solve_tridiagonal(d, off, b);
  for (std::size_t i = 0; i < n; ++i) EXPECT_LE(std::abs(b[i] - ref(i)), 1e-13);
}

// --- scenarios ----------------------------------------------------------------------

TEST(Scenario, FixturesAndParsing) {
  EXPECT_EQ(parse_scenario("ho_ground"), ScenarioId::ho_ground);
  EXPECT_EQ(parse_scenario("free_gaussian"), ScenarioId::free_gaussian);
  EXPECT_FALSE(parse_scenario("square_well").has_value());
  const Scenario g = Scenario::make(ScenarioId::ho_ground);
  EXPECT_NEAR(g.width, 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(g.t_final, 2.0 * kPi, 1e-15);
  const Scenario f = Scenario::make(ScenarioId::free_gaussian);
  EXPECT_EQ(f.t_final, 1.0);
  EXPECT_NEAR(f.sigma_at(1.0), std::sqrt(1.25), 1e-15);
}

TEST(Scenario, InitialStateIsNormalizedGroundState) {
  const Scenario sc = Scenario::make(ScenarioId::ho_ground);
  const Grid1D g = sc.make_grid(2001);
  const auto f = sc.initial_state(g);
  EXPECT_NEAR(norm_squared(f), 1.0, 1e-14);
  EXPECT_EQ(f.values.front(), cplx{});
  EXPECT_NEAR(discrete_energy(f, sc.potential()), 0.5, 1e-5);
}

TEST(Scenario, WholeStepCountCoversFinalTime) {
  const Scenario sc = Scenario::make(ScenarioId::ho_ground);
  const auto c = sc.config(2001, 0.005);
  EXPECT_EQ(c.steps, 1257u);
  EXPECT_NEAR(c.dt * static_cast<double>(c.steps), sc.t_final, 1e-12);
  EXPECT_EQ(sc.config(101, sc.t_final / 100.0).steps, 100u);
  EXPECT_EQ(steps_for(sc, 0.005, 2) % 4, 0u);
  EXPECT_GE(steps_for(sc, 0.005, 2), 1257u);
  EXPECT_THROW((void)sc.config(101, 0.0), InvalidArgument);
}

// --- propagation ------------------------------------------------------------------

TEST(Propagate, GroundStateAcquiresOnlyTheEnergyPhase) {
  const Scenario sc = Scenario::make(ScenarioId::ho_ground);
  const Grid1D g = sc.make_grid(2001);
  PropagatorConfig cfg{g};
  cfg.dt = 0.005;
  cfg.steps = 1000;
  const auto traj = propagate(sc.initial_state(g), sc.potential(), cfg);
  ASSERT_EQ(traj.size(), 1001u);
  const double t = traj.back().time;
  EXPECT_NEAR(t, 5.0, 1e-12);
  const cplx overlap = inner_product(traj.front(), traj.back());
  EXPECT_LE(1.0 - (overlap * std::polar(1.0, 0.5 * t)).real(), 1e-6);
  EXPECT_GE(fidelity(traj.front(), traj.back()), 1.0 - 1e-6);
}

TEST(Propagate, ConservesNormAndEnergy) {
  for (auto id : {ScenarioId::ho_ground, ScenarioId::ho_coherent, ScenarioId::free_gaussian}) {
    const Scenario sc = Scenario::make(id);
    const auto cfg = sc.config(1001, 0.01);
    const auto p = propagate_with_diagnostics(sc.initial_state(cfg.grid), sc.potential(), cfg);
    EXPECT_LE(p.diagnostics.total_norm_drift, 1e-8) << to_string(id);
    EXPECT_LE(std::abs(p.diagnostics.energy_final - p.diagnostics.energy_initial),
              1e-6 * std::abs(p.diagnostics.energy_initial))
        << to_string(id);
    EXPECT_LE(p.diagnostics.max_boundary_ratio, 1e-12);
  }
}

TEST(Propagate, FreePacketSpreadsAsPredicted) {
  const Scenario sc = Scenario::make(ScenarioId::free_gaussian);
  const auto cfg = sc.config(2001, 0.005);
  const auto traj = propagate(sc.initial_state(cfg.grid), sc.potential(), cfg);
  const double s = sc.sigma_at(1.0);
  EXPECT_NEAR(position_variance(traj.back()) / (s * s), 1.0, 1e-4);
  EXPECT_NEAR(position_mean(traj.back()), 0.0, 1e-12);
}

TEST(Propagate, RejectsBadInput) {
  const Scenario sc = Scenario::make(ScenarioId::ho_ground);
  const auto cfg = sc.config(401, 0.05);
  auto f = sc.initial_state(cfg.grid);
  for (auto& z : f.values) z *= 2.0;
  EXPECT_THROW((void)propagate(f, sc.potential(), cfg), InvalidArgument);
  PropagatorConfig bad = cfg;
  bad.dt = -1.0;
  EXPECT_THROW((void)propagate(sc.initial_state(cfg.grid), sc.potential(), bad), InvalidArgument);
  PropagatorConfig other = cfg;
  other.grid = Grid1D(-5.0, 5.0, 401);
  EXPECT_THROW((void)propagate(sc.initial_state(cfg.grid), sc.potential(), other), InvalidArgument);
}

TEST(Propagate, DensityReachingTheBoundaryAborts) {
  Scenario sc = Scenario::make(ScenarioId::ho_coherent);
  PropagatorConfig cfg{Grid1D(-3.0, 3.0, 601)};
  cfg.dt = 0.01;
  cfg.steps = 50;
  EXPECT_THROW((void)propagate(sc.initial_state(cfg.grid), sc.potential(), cfg), NumericalError);
}

// --- identity reports ----------------------------------------------------------------

TEST(Identities, StationaryStateAtDefaultResolution) {
  const Scenario sc = Scenario::make(ScenarioId::ho_ground);
  const auto res = default_resolution(sc.id);
  const auto run = run_scenario(sc, res.nodes, sc.config(res.nodes, res.dt).steps);
  EXPECT_NEAR(run.report.phase_total, -kPi, 2e-3);
  EXPECT_LE(std::abs(run.report.phase_delta_k), 1e-8);
  EXPECT_LE(run.report.roi_residual, 1e-5);
  EXPECT_LE(run.report.continuity_residual, 1e-5);
  EXPECT_LE(run.report.hj_residual, 1e-5);
  EXPECT_LE(run.report.form_gap, 1e-5);
  EXPECT_LE(run.report.phase_gap, 2e-3);
  EXPECT_FALSE(first_violation(run).has_value()) << *first_violation(run);
}

TEST(Identities, CoherentPacketFollowsTheClassicalOrbit) {
  const Scenario sc = Scenario::make(ScenarioId::ho_coherent);
  const auto res = default_resolution(sc.id);
  const auto run = run_scenario(sc, res.nodes, sc.config(res.nodes, res.dt).steps);
  ASSERT_EQ(run.analytic.size(), 1u);
  EXPECT_EQ(run.analytic[0].name, "mean_position");
  EXPECT_LE(run.analytic[0].error, 1e-4);
  EXPECT_GT(run.report.phase_delta_k, 0.0);
  EXPECT_FALSE(first_violation(run).has_value()) << *first_violation(run);
}

TEST(Identities, FreePacketRoiRelativeToEnergyScale) {
  const Scenario sc = Scenario::make(ScenarioId::free_gaussian);
  const auto run = run_scenario(sc, 2001, sc.config(2001, 0.005).steps);
  EXPECT_NEAR(run.report.energy_scale, 0.125, 1e-4);
  EXPECT_LE(run.report.roi_residual, 1e-6 * run.report.energy_scale);
}

TEST(Identities, CoarseCoherentRunReportsViolation) {
  const Scenario sc = Scenario::make(ScenarioId::ho_coherent);
  const auto run = run_scenario(sc, 1001, sc.config(1001, 0.01).steps);
  const auto v = first_violation(run);
  ASSERT_TRUE(v.has_value());
  EXPECT_NE(v->find("roi_residual"), std::string::npos) << *v;
}

// --- refinement -------------------------------------------------------------------

TEST(Refinement, FreePacketIsSecondOrder) {
  const Scenario sc = Scenario::make(ScenarioId::free_gaussian);
  const auto st = refinement_study(sc, 2001, steps_for(sc, 0.005, 2), 2);
  ASSERT_EQ(st.levels.size(), 3u);
  EXPECT_EQ(st.levels[0].nodes, 501u);
  EXPECT_EQ(st.levels[2].nodes, 2001u);
  for (const auto& r : st.ratios) {
    for (const auto& v : {r.roi, r.hj, r.form_gap}) {
      ASSERT_TRUE(v.has_value());
      EXPECT_GE(*v, 3.0);
      EXPECT_LE(*v, 5.0);
    }
  }
  EXPECT_FALSE(first_violation(st).has_value()) << *first_violation(st);
}

TEST(Refinement, GroundStatePhaseErrorIsSecondOrder) {
  const Scenario sc = Scenario::make(ScenarioId::ho_ground);
  const auto st = refinement_study(sc, 2001, steps_for(sc, 0.005, 2), 2, 3);
  for (const auto& r : st.ratios) {
    ASSERT_TRUE(r.analytic_phase.has_value());
    EXPECT_GE(*r.analytic_phase, 3.0);
    EXPECT_LE(*r.analytic_phase, 5.0);
  }
  EXPECT_NEAR(st.levels.back().report.phase_total, -kPi, 2e-3);
}

TEST(Refinement, ThreadCountDoesNotChangeResults) {
  const Scenario sc = Scenario::make(ScenarioId::free_gaussian);
  const auto a = refinement_study(sc, 801, 200, 2, 1);
  const auto b = refinement_study(sc, 801, 200, 2, 3);
  for (std::size_t l = 0; l < a.levels.size(); ++l) {
    EXPECT_EQ(a.levels[l].report.roi_residual, b.levels[l].report.roi_residual);
    EXPECT_EQ(a.levels[l].report.phase_total, b.levels[l].report.phase_total);
  }
}

TEST(Refinement, RejectsIndivisibleLevels) {
  const Scenario sc = Scenario::make(ScenarioId::free_gaussian);
  EXPECT_THROW((void)refinement_study(sc, 2000, 200, 2), InvalidArgument);
  EXPECT_THROW((void)refinement_study(sc, 2001, 202, 2), InvalidArgument);
  EXPECT_THROW((void)refinement_study(sc, 2001, 224, 5), InvalidArgument);
}
