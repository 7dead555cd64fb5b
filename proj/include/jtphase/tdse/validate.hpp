#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "jtphase/core/error.hpp"
#include "jtphase/core/summation.hpp"
#include "jtphase/phase/field.hpp"
#include "jtphase/phase/functionals.hpp"
#include "jtphase/phase/polar.hpp"
#include "jtphase/tdse/propagator.hpp"
#include "jtphase/tdse/scenario.hpp"

namespace jtphase::tdse {

// Documented tolerances used by the validate report.
struct Tolerances {
  double roi = 1e-5;           // absolute, radians per unit time
  double continuity = 1e-5;    // L2 norm, dx measure
  double hj = 1e-5;            // density-weighted RMS
  double form_gap = 1e-5;      // |form_a - form_b|
  double phase_direct = 2e-3;  // |integrated total - direct <S> change|
  double norm_drift = 1e-8;
  double energy_drift = 1e-6;  // relative
  double ratio_low = 3.0;
  double ratio_high = 5.0;
  double noise_floor = 1e-8;  // below this a residual carries no convergence information
};

struct IdentityReport {
  double roi_residual = 0.0;         // max over interior times of |residual|
  double continuity_residual = 0.0;  // max over interior times
  double hj_residual = 0.0;          // max over interior times
  double form_gap = 0.0;             // max over interior times of |form_a - form_b|
  double phase_total = 0.0;          // integrated_phase total
  double phase_dynamic = 0.0;
  double phase_delta_k = 0.0;
  double phase_direct = 0.0;         // <S>(t_f) - <S>(0) from node-wise unwrapping in t
  double phase_gap = 0.0;            // |phase_total - phase_direct|
  double norm_drift = 0.0;
  double energy_drift = 0.0;         // relative
  double energy_scale = 0.0;         // discrete energy at t = 0
};

// <S>(t_f) - <S>(0) where S at each node is followed through time by
// accumulating arg(conj(psi_n) psi_{n+1}) step by step.
inline double direct_phase_change(const Trajectory<ComplexField1D>& traj, double node_epsilon = kDefaultNodeEpsilon) {
  const ComplexField1D& f0 = traj.front();
  const PolarForm p0 = polar_decompose(f0, node_epsilon);
  std::vector<double> s = p0.phase;
  for (std::size_t n = 0; n + 1 < traj.size(); ++n) {
    const auto& a = traj[n].values;
    const auto& b = traj[n + 1].values;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const cplx z = std::conj(a[i]) * b[i];
      if (z != cplx{}) s[i] += std::arg(z);
    }
  }
  const ComplexField1D& ff = traj.back();
  CompensatedSum start;
  CompensatedSum end;
  for (std::size_t i = 0; i < s.size(); ++i) {
    start.add(f0.grid.weight(i) * std::norm(f0.values[i]) * p0.phase[i]);
    end.add(ff.grid.weight(i) * std::norm(ff.values[i]) * s[i]);
  }
  return end.value() - start.value();
}

// Identity residuals over the interior times of a propagated trajectory.
inline IdentityReport validate_identities(const Trajectory<ComplexField1D>& traj, const PotentialFn& V,
                                          MassParam m = {}, double node_epsilon = kDefaultNodeEpsilon) {
  require(traj.size() >= 3, "validate_identities: needs at least 3 snapshots");
  IdentityReport r;
  for (std::size_t i = 1; i + 1 < traj.size(); ++i) {
    const ComplexField1D& f = traj[i];
    const ComplexField1D d = time_derivative(traj, i);
    r.roi_residual = std::max(r.roi_residual, std::abs(roi_identity_residual(f, d, V, m)));
    const double fa = phase_rate_form_a(f, d, m, node_epsilon);
    const double fb = phase_rate_form_b(f, d, V, m, node_epsilon);
    r.form_gap = std::max(r.form_gap, std::abs(fa - fb));
    r.hj_residual = std::max(r.hj_residual, hj_residual(f, d, V, m, node_epsilon));
    r.continuity_residual = std::max(r.continuity_residual, continuity_residual(traj, m, i, node_epsilon));
  }
  const PhaseBreakdown pb = integrated_phase(traj, m, false);
  r.phase_total = pb.total;
  r.phase_dynamic = pb.dynamic_term;
  r.phase_delta_k = pb.delta_k_term;
  r.phase_direct = direct_phase_change(traj, node_epsilon);
  r.phase_gap = std::abs(r.phase_total - r.phase_direct);
  const double n0 = norm_squared(traj.front());
  for (const auto& s : traj) r.norm_drift = std::max(r.norm_drift, std::abs(norm_squared(s) - n0));
  r.energy_scale = discrete_energy(traj.front(), V, m);
  const double ef = discrete_energy(traj.back(), V, m);
  r.energy_drift = std::abs(ef - r.energy_scale) / std::max(std::abs(r.energy_scale), 1e-300);
  return r;
}

// Fixture-specific comparison against the analytic behaviour.
struct AnalyticCheck {
  std::string name;
  double error = 0.0;
  double tolerance = 0.0;
  [[nodiscard]] bool passed() const { return error <= tolerance; }
};

struct ScenarioRun {
  std::size_t nodes = 0;
  std::size_t steps = 0;
  double dx = 0.0;
  double dt = 0.0;
  IdentityReport report;
  PropagationDiagnostics diagnostics;
  std::vector<AnalyticCheck> analytic;
};

inline std::vector<AnalyticCheck> analytic_checks(const Scenario& sc, const Trajectory<ComplexField1D>& traj,
                                                  const IdentityReport& rep) {
  std::vector<AnalyticCheck> out;
  switch (sc.id) {
    case ScenarioId::ho_ground: {
      const double e0 = 0.5 * sc.omega;
      out.push_back({"phase_vs_minus_E_tf", std::abs(rep.phase_total + e0 * sc.t_final), 2e-3});
      out.push_back({"fidelity_loss", 1.0 - fidelity(traj.front(), traj.back()), 1e-6});
      break;
    }
    case ScenarioId::ho_coherent: {
      double worst = 0.0;
      for (const auto& s : traj) worst = std::max(worst, std::abs(position_mean(s) - sc.mean_position_at(s.time)));
      out.push_back({"mean_position", worst, 1e-4});
      break;
    }
    case ScenarioId::free_gaussian: {
      const double sig = sc.sigma_at(traj.back().time);
      out.push_back({"width_squared_relative", std::abs(position_variance(traj.back()) / (sig * sig) - 1.0), 1e-4});
      break;
    }
  }
  return out;
}

inline ScenarioRun run_scenario(const Scenario& sc, std::size_t nodes, std::size_t steps,
                                double node_epsilon = kDefaultNodeEpsilon) {
  const PropagatorConfig cfg = sc.config_steps(nodes, steps);
  const PotentialFn V = sc.potential();
  Propagation p = propagate_with_diagnostics(sc.initial_state(cfg.grid), V, cfg);
  ScenarioRun run;
  run.nodes = nodes;
  run.steps = steps;
  run.dx = cfg.grid.spacing();
  run.dt = cfg.dt;
  run.report = validate_identities(p.trajectory, V, sc.m, node_epsilon);
  run.diagnostics = p.diagnostics;
  run.analytic = analytic_checks(sc, p.trajectory, run.report);
  return run;
}

// Error measures followed under refinement. Fixtures with an analytic phase
// also track |total + E t_f|.
struct ConvergenceRatios {
  std::optional<double> roi;
  std::optional<double> continuity;
  std::optional<double> hj;
  std::optional<double> form_gap;
  std::optional<double> phase_gap;
  std::optional<double> analytic_phase;
};

struct RefinementStudy {
  Scenario scenario;
  std::vector<ScenarioRun> levels;
  std::vector<ConvergenceRatios> ratios;  // levels[i] over levels[i + 1], coarse over fine
};

inline std::optional<double> convergence_ratio(double coarse, double fine, double noise_floor) {
  if (!(fine > noise_floor) || !(coarse > noise_floor)) return std::nullopt;
  return coarse / fine;
}

inline double analytic_phase_error(const ScenarioRun& run) {
  for (const auto& c : run.analytic)
    if (c.name == "phase_vs_minus_E_tf") return c.error;
  return -1.0;
}

// Default finest resolution per fixture. The coherent packet moves through
// the grid and needs the finer level to meet the residual tolerances.
struct Resolution {
  std::size_t nodes;
  double dt;
};

inline Resolution default_resolution(ScenarioId id) {
  return id == ScenarioId::ho_coherent ? Resolution{4001, 0.0025} : Resolution{2001, 0.005};
}

// Steps for nominal dt, rounded up to a multiple of 2^halvings so every
// coarser level covers t_final exactly.
inline std::size_t steps_for(const Scenario& sc, double dt, unsigned halvings) {
  require(std::isfinite(dt) && dt > 0.0, "steps_for: dt must be > 0");
  const double block = dt * static_cast<double>(std::size_t{1} << halvings);
  const double blocks = std::max(1.0, std::ceil(sc.t_final / block * (1.0 - 1e-12)));
  return static_cast<std::size_t>(blocks) << halvings;
}

// `halvings` + 1 levels ending at (nodes, steps); level l (coarsest first)
// uses (nodes - 1) / 2^(H-l) + 1 nodes and steps / 2^(H-l) steps. Tolerances
// apply to the finest level, the coarser ones only measure convergence.
// Levels are independent and may run on separate threads; results are stored
// by index.
inline RefinementStudy refinement_study(const Scenario& sc, std::size_t nodes, std::size_t steps, unsigned halvings,
                                        unsigned threads = 1, const Tolerances& tol = {}) {
  require(halvings <= 4, "refinement_study: at most 4 halvings");
  const std::size_t f = std::size_t{1} << halvings;
  require(nodes >= 3 && (nodes - 1) % f == 0 && (nodes - 1) / f >= 2,
          "refinement_study: nodes - 1 must be divisible by 2^halvings");
  require(steps >= 1 && steps % f == 0, "refinement_study: steps must be divisible by 2^halvings");
  RefinementStudy st;
  st.scenario = sc;
  const std::size_t count = halvings + 1;
  st.levels.resize(count);
  auto level = [&](std::size_t l) {
    const std::size_t down = std::size_t{1} << (halvings - l);
    st.levels[l] = run_scenario(sc, (nodes - 1) / down + 1, steps / down);
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads == 1) {
    for (std::size_t l = 0; l < count; ++l) level(l);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          try {
            for (std::size_t l = t; l < count; l += threads) level(l);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  for (std::size_t l = 0; l + 1 < count; ++l) {
    const IdentityReport& a = st.levels[l].report;
    const IdentityReport& b = st.levels[l + 1].report;
    ConvergenceRatios c;
    c.roi = convergence_ratio(a.roi_residual, b.roi_residual, tol.noise_floor);
    c.continuity = convergence_ratio(a.continuity_residual, b.continuity_residual, tol.noise_floor);
    c.hj = convergence_ratio(a.hj_residual, b.hj_residual, tol.noise_floor);
    c.form_gap = convergence_ratio(a.form_gap, b.form_gap, tol.noise_floor);
    c.phase_gap = convergence_ratio(a.phase_gap, b.phase_gap, tol.noise_floor);
    const double ea = analytic_phase_error(st.levels[l]);
    const double eb = analytic_phase_error(st.levels[l + 1]);
    if (ea >= 0.0 && eb >= 0.0) c.analytic_phase = convergence_ratio(ea, eb, tol.noise_floor);
    st.ratios.push_back(c);
  }
  return st;
}

// First violated tolerance, or nullopt when the run is within all of them.
inline std::optional<std::string> first_violation(const ScenarioRun& run, const Tolerances& tol = {}) {
  const IdentityReport& r = run.report;
  if (r.roi_residual > tol.roi) return "roi_residual " + std::to_string(r.roi_residual) + " > " + std::to_string(tol.roi);
  if (r.continuity_residual > tol.continuity)
    return "continuity_residual " + std::to_string(r.continuity_residual) + " > " + std::to_string(tol.continuity);
  if (r.hj_residual > tol.hj) return "hj_residual " + std::to_string(r.hj_residual) + " > " + std::to_string(tol.hj);
  if (r.form_gap > tol.form_gap) return "form_gap " + std::to_string(r.form_gap) + " > " + std::to_string(tol.form_gap);
  if (r.phase_gap > tol.phase_direct)
    return "phase_gap " + std::to_string(r.phase_gap) + " > " + std::to_string(tol.phase_direct);
  if (r.norm_drift > tol.norm_drift)
    return "norm_drift " + std::to_string(r.norm_drift) + " > " + std::to_string(tol.norm_drift);
  if (r.energy_drift > tol.energy_drift)
    return "energy_drift " + std::to_string(r.energy_drift) + " > " + std::to_string(tol.energy_drift);
  for (const auto& c : run.analytic)
    if (!c.passed()) return c.name + " " + std::to_string(c.error) + " > " + std::to_string(c.tolerance);
  return std::nullopt;
}

inline std::optional<std::string> first_violation(const RefinementStudy& st, const Tolerances& tol = {}) {
  if (auto v = first_violation(st.levels.back(), tol)) return v;
  auto check = [&](const std::optional<double>& r, const char* name, std::size_t l) -> std::optional<std::string> {
    if (r && (*r < tol.ratio_low || *r > tol.ratio_high))
      return std::string(name) + " convergence ratio " + std::to_string(*r) + " outside [3, 5] at level " +
             std::to_string(l);
    return std::nullopt;
  };
  for (std::size_t l = 0; l < st.ratios.size(); ++l) {
    const auto& c = st.ratios[l];
    for (auto v : {check(c.roi, "roi_residual", l), check(c.continuity, "continuity_residual", l),
                   check(c.hj, "hj_residual", l), check(c.form_gap, "form_gap", l),
                   check(c.phase_gap, "phase_gap", l), check(c.analytic_phase, "phase_vs_minus_E_tf", l)})
      if (v) return v;
  }
  return std::nullopt;
}

}  // namespace jtphase::tdse
