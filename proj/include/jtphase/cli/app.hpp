#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "jtphase/core/error.hpp"
#include "jtphase/core/grid.hpp"
#include "jtphase/core/special.hpp"
#include "jtphase/ed/jahn_teller.hpp"
#include "jtphase/io/format.hpp"
#include "jtphase/jt/model.hpp"
#include "jtphase/tdse/propagator.hpp"
#include "jtphase/tdse/scenario.hpp"
#include "jtphase/tdse/validate.hpp"

// Command-line front end. run() is the whole program minus process setup so
// tests can drive it in-process.

namespace jtphase::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitUsage = 2;

// --threads, then JTPHASE_THREADS, then the hardware count.
inline unsigned resolve_threads(int flag) {
  if (flag < 0) throw InvalidArgument("--threads must be >= 1");
  if (flag > 0) return static_cast<unsigned>(flag);
  if (const char* env = std::getenv("JTPHASE_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1 || v > 4096) throw InvalidArgument("JTPHASE_THREADS must be a positive integer");
    return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// "0.5,1, 2" -> {0.5, 1, 2}
inline std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw InvalidArgument(std::string(what) + ": empty list entry");
    item = item.substr(b, e - b + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw InvalidArgument(std::string(what) + ": cannot parse '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InvalidArgument(std::string(what) + ": empty list");
  return out;
}

namespace detail {

inline std::string config_token(const nlohmann::json& v, const std::string& key) {
  switch (v.type()) {
    case nlohmann::json::value_t::string: return v.get<std::string>();
    case nlohmann::json::value_t::number_float: return io::format_double(v.get<double>());
    case nlohmann::json::value_t::number_integer:
    case nlohmann::json::value_t::number_unsigned:
    case nlohmann::json::value_t::boolean: return v.dump();
    case nlohmann::json::value_t::array: {
      std::string joined;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) joined += ',';
        joined += config_token(v[i], key);
      }
      return joined;
    }
    default: throw InvalidArgument("config: unsupported value for '" + key + "'");
  }
}

// Replace `--config file.json` by `--key value` tokens placed right after the
// subcommand, ahead of the explicit flags. Options keep their last value, so
// explicit flags win.
inline std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw InvalidArgument("--config needs a file argument");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!path) return args;
  if (args.empty() || args[0].rfind("-", 0) == 0) throw InvalidArgument("--config must follow a subcommand");
  std::ifstream in(*path);
  if (!in) throw InvalidArgument("cannot read config file '" + *path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("config file '" + *path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config file must hold a JSON object");
  std::vector<std::string> tokens;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "config") throw InvalidArgument("config: nested 'config' key is not allowed");
    if (it.value().is_null()) continue;
    tokens.push_back("--" + it.key());
    tokens.push_back(config_token(it.value(), it.key()));
  }
  args.insert(args.begin() + 1, tokens.begin(), tokens.end());
  return args;
}

// Buffered destination: "-" is the command's stdout, anything else a file
// written only after the command succeeded.
inline void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path == "-" || path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InvalidArgument("cannot open output file '" + path + "'");
  f << text;
  if (!f) throw NumericalError("failed writing output file '" + path + "'");
}

inline RadialRule parse_rule(const std::string& s) {
  if (s == "gauss_legendre_mapped" || s == "gl") return RadialRule::gauss_legendre_mapped;
  if (s == "composite_simpson" || s == "simpson") return RadialRule::composite_simpson;
  throw InvalidArgument("unknown radial rule '" + s + "'");
}

inline DoubletBranch parse_branch(const std::string& s) {
  if (s == "minus") return DoubletBranch::minus;
  if (s == "plus") return DoubletBranch::plus;
  throw InvalidArgument("unknown branch '" + s + "' (minus|plus)");
}

inline tdse::ScenarioId parse_scenario_or_throw(const std::string& s) {
  const auto id = tdse::parse_scenario(s);
  if (!id) throw InvalidArgument("unknown scenario '" + s + "' (ho_ground|ho_coherent|free_gaussian)");
  return *id;
}

inline nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json run_json(const tdse::ScenarioRun& run) {
  const auto& r = run.report;
  nlohmann::json a = nlohmann::json::object();
  for (const auto& c : run.analytic) a[c.name] = c.error;
  return {{"nodes", run.nodes},
          {"steps", run.steps},
          {"dx", run.dx},
          {"dt", run.dt},
          {"roi_residual", r.roi_residual},
          {"continuity_residual", r.continuity_residual},
          {"hj_residual", r.hj_residual},
          {"form_gap", r.form_gap},
          {"phase_total", r.phase_total},
          {"phase_dynamic", r.phase_dynamic},
          {"phase_delta_k", r.phase_delta_k},
          {"phase_direct", r.phase_direct},
          {"phase_gap", r.phase_gap},
          {"norm_drift", r.norm_drift},
          {"energy_drift", r.energy_drift},
          {"energy", r.energy_scale},
          {"analytic", a}};
}

}  // namespace detail

struct Options {
  // sweep
  double kmin = 0.0;
  double kmax = 0.0;
  std::size_t steps = 0;
  // shared radial grid controls
  std::string rule = "gauss_legendre_mapped";
  std::size_t nodes = 400;
  double margin = 8.0;
  // phase / deltak
  double k = 0.0;
  std::string k_list;
  std::string method = "closed";
  std::size_t ntime = 400;
  std::string branch = "minus";
  double drive = 1.0;
  double phi = 0.3;
  // validate / tdse
  std::string scenario;
  unsigned refine = 0;
  std::size_t n = 0;
  double dt = 0.0;
  std::size_t every = 50;
  // diag
  double omega = 1.0;
  std::size_t cutoff = 30;
  // common
  std::string out = "-";
  int threads = 0;
};

inline int cmd_sweep(const Options& o, std::ostream& out) {
  require(std::isfinite(o.kmin) && o.kmin >= 0.0, "--kmin must be >= 0");
  require(std::isfinite(o.kmax) && o.kmax > o.kmin, "--kmax must be > --kmin");
  require(o.steps >= 2, "--steps must be >= 2");
  jt::GridPolicy policy{detail::parse_rule(o.rule), o.nodes, o.margin};
  const auto res = jt::sweep_phase(o.kmin, o.kmax, o.steps, policy, resolve_threads(o.threads));
  std::ostringstream s;
  io::CsvWriter csv(s, {"k", "phase_quadrature", "phase_closed", "abs_diff"});
  for (const auto& r : res.rows) csv.row({r.k, r.phase_quadrature, r.phase_closed_form, r.abs_diff});
  detail::emit(o.out, s.str(), out);
  return kExitOk;
}

inline int cmd_phase(const Options& o, std::ostream& out) {
  require(std::isfinite(o.k) && o.k >= 0.0, "--k must be >= 0");
  jt::JTParams p;
  p.k = o.k;
  p.drive = o.drive;
  p.validate();
  const DoubletBranch br = detail::parse_branch(o.branch);
  const jt::GridPolicy policy{detail::parse_rule(o.rule), o.nodes, o.margin};
  nlohmann::json j{{"k", o.k}, {"method", o.method}, {"branch", to_string(br)}};
  double phase = 0.0;
  if (o.method == "closed") {
    phase = jt::mean_phase_closed_form(o.k);
    if (br == DoubletBranch::plus) phase = -phase;
  } else if (o.method == "quad") {
    phase = jt::mean_phase_quadrature(p, policy.make(o.k), br);
  } else if (o.method == "trajectory") {
    const auto pb = jt::cycle_phase(p, share(policy.make(o.k)), o.ntime, br);
    phase = pb.total;
    j["dynamic_term"] = pb.dynamic_term;
    j["delta_k_term"] = pb.delta_k_term;
    j["n_time"] = o.ntime;
  } else {
    throw InvalidArgument("unknown --method '" + o.method + "' (quad|closed|trajectory)");
  }
  j["phase_rad"] = phase;
  j["phase_over_pi"] = phase / kPi;
  detail::emit(o.out, io::to_json_line(j) + "\n", out);
  return kExitOk;
}

inline int cmd_deltak(const Options& o, std::ostream& out) {
  const auto ks = parse_list(o.k_list, "--k");
  for (double k : ks) require(std::isfinite(k) && k >= 0.0, "--k values must be >= 0");
  const DoubletBranch br = detail::parse_branch(o.branch);
  const jt::GridPolicy policy{detail::parse_rule(o.rule), o.nodes, o.margin};
  std::ostringstream s;
  io::CsvWriter csv(s, {"k", "phi", "delta_k", "gradient_scale", "relative", "spinor_texture"});
  for (double k : ks) {
    jt::JTParams p;
    p.k = k;
    const auto split = jt::jt_gradient_split(p, share(policy.make(k)), o.phi, br);
    const double rel = split.gradient_scale > 0.0 ? std::abs(split.phase_gradient) / split.gradient_scale : 0.0;
    csv.row({k, o.phi, split.phase_gradient, split.gradient_scale, rel, split.spinor_texture});
  }
  detail::emit(o.out, s.str(), out);
  return kExitOk;
}

inline int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
  const auto id = detail::parse_scenario_or_throw(o.scenario);
  require(o.refine <= 4, "--refine must be in [0, 4]");
  const auto sc = tdse::Scenario::make(id);
  const auto def = tdse::default_resolution(id);
  const std::size_t nodes = o.n ? o.n : def.nodes;
  const double dt = o.dt > 0.0 ? o.dt : def.dt;
  require(o.dt >= 0.0, "--dt must be > 0");
  const std::size_t steps = tdse::steps_for(sc, dt, o.refine);
  const tdse::Tolerances tol;
  const auto st = tdse::refinement_study(sc, nodes, steps, o.refine, resolve_threads(o.threads), tol);
  const auto violation = tdse::first_violation(st, tol);

  nlohmann::json levels = nlohmann::json::array();
  for (const auto& run : st.levels) levels.push_back(detail::run_json(run));
  nlohmann::json ratios = nlohmann::json::array();
  for (const auto& c : st.ratios) {
    ratios.push_back({{"roi_residual", detail::optional_json(c.roi)},
                      {"continuity_residual", detail::optional_json(c.continuity)},
                      {"hj_residual", detail::optional_json(c.hj)},
                      {"form_gap", detail::optional_json(c.form_gap)},
                      {"phase_gap", detail::optional_json(c.phase_gap)},
                      {"phase_vs_minus_E_tf", detail::optional_json(c.analytic_phase)}});
  }
  nlohmann::json j{{"scenario", tdse::to_string(id)},
                   {"refine", o.refine},
                   {"ok", !violation.has_value()},
                   {"violation", violation ? nlohmann::json(*violation) : nlohmann::json(nullptr)},
                   {"result", detail::run_json(st.levels.back())},
                   {"levels", levels},
                   {"ratios", ratios},
                   {"tolerances",
                    {{"roi_residual", tol.roi},
                     {"continuity_residual", tol.continuity},
                     {"hj_residual", tol.hj},
                     {"form_gap", tol.form_gap},
                     {"phase_gap", tol.phase_direct},
                     {"norm_drift", tol.norm_drift},
                     {"energy_drift", tol.energy_drift},
                     {"ratio_low", tol.ratio_low},
                     {"ratio_high", tol.ratio_high},
                     {"noise_floor", tol.noise_floor}}}};
  detail::emit(o.out, io::to_json_line(j) + "\n", out);
  if (violation) {
    err << "error: tolerance violated: " << *violation << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

inline int cmd_tdse(const Options& o, std::ostream& out) {
  const auto id = detail::parse_scenario_or_throw(o.scenario);
  require(o.every >= 1, "--every must be >= 1");
  const auto sc = tdse::Scenario::make(id);
  const auto def = tdse::default_resolution(id);
  require(o.dt >= 0.0, "--dt must be > 0");
  const auto cfg = sc.config(o.n ? o.n : def.nodes, o.dt > 0.0 ? o.dt : def.dt);
  const auto traj = tdse::propagate(sc.initial_state(cfg.grid), sc.potential(), cfg);
  std::ostringstream s;
  io::CsvWriter csv(s, {"t", "x", "re_psi", "im_psi"});
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (i % o.every != 0 && i + 1 != traj.size()) continue;
    const auto& f = traj[i];
    for (std::size_t x = 0; x < f.size(); ++x)
      csv.row({f.time, f.grid.node(x), f.values[x].real(), f.values[x].imag()});
  }
  detail::emit(o.out, s.str(), out);
  return kExitOk;
}

inline int cmd_diag(const Options& o, std::ostream& out, std::ostream& err) {
  const auto ks = parse_list(o.k_list, "--k");
  for (double k : ks) require(std::isfinite(k) && k >= 0.0, "--k values must be >= 0");
  require(std::isfinite(o.omega) && o.omega > 0.0, "--omega must be > 0");
  require(o.cutoff >= 1, "--cutoff must be >= 1");
  (void)ed::FockBasis(o.cutoff);  // dimension budget check before any work
  std::ostringstream s;
  io::CsvWriter csv(s, {"k", "E0", "E1", "guessed_energy", "captured_norm", "cutoff"});
  for (double k : ks) {
    const auto d = ed::ground_doublet(k, o.omega, o.cutoff);
    const auto ex = ed::fock_expand_guessed(k, o.cutoff, ed::expansion_grid(k));
    double ge = std::numeric_limits<double>::quiet_NaN();
    if (ex.warning.empty()) {
      const auto h = ed::build_hamiltonian(k, o.omega, o.cutoff);
      ge = ed::rayleigh_quotient(h.matrix, ex.coefficients);
    } else {
      err << "warning: k = " << io::format_double(k) << ": " << ex.warning << "\n";
    }
    csv.row({k, d.e0, d.e1, ge, ex.captured_norm, static_cast<double>(o.cutoff)});
  }
  detail::emit(o.out, s.str(), out);
  return kExitOk;
}

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Mean phase of the E x e Jahn-Teller doublet and supporting numerics", "jtphase"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_version_flag("--version", "jtphase 1.0.0");

  auto add_out = [&](CLI::App* c) { c->add_option("--out", o.out, "Output file, '-' for stdout"); };
  auto add_grid = [&](CLI::App* c) {
    c->add_option("--rule", o.rule, "Radial rule: gauss_legendre_mapped | composite_simpson");
    c->add_option("--nodes", o.nodes, "Radial nodes per row");
    c->add_option("--margin", o.margin, "q_max = k + margin");
  };
  auto add_threads = [&](CLI::App* c) {
    c->add_option("--threads", o.threads, "Worker threads (default: JTPHASE_THREADS or all cores)");
  };

  auto* sweep = app.add_subcommand("sweep", "Mean phase over a k range (CSV)");
  sweep->add_option("--kmin", o.kmin, "Smallest k")->required();
  sweep->add_option("--kmax", o.kmax, "Largest k")->required();
  sweep->add_option("--steps", o.steps, "Number of k rows (>= 2)")->required();
  add_grid(sweep);
  add_threads(sweep);
  add_out(sweep);

  auto* phase = app.add_subcommand("phase", "Mean phase at one k (JSON)");
  phase->add_option("--k", o.k, "Coupling k")->required();
  phase->add_option("--method", o.method, "quad | closed | trajectory");
  phase->add_option("--ntime", o.ntime, "Time slices per cycle for the trajectory method");
  phase->add_option("--branch", o.branch, "minus | plus");
  phase->add_option("--drive", o.drive, "Drive rate Omega");
  add_grid(phase);
  add_out(phase);

  auto* deltak = app.add_subcommand("deltak", "Radial delta K of the doublet for a list of k (CSV)");
  deltak->add_option("--k", o.k_list, "Comma separated k values")->required();
  deltak->add_option("--phi", o.phi, "Angle parameter");
  deltak->add_option("--branch", o.branch, "minus | plus");
  add_grid(deltak);
  add_out(deltak);

  auto* validate = app.add_subcommand("validate", "Identity residuals on a TDSE fixture (JSON)");
  validate->add_option("--scenario", o.scenario, "ho_ground | ho_coherent | free_gaussian")->required();
  validate->add_option("--refine", o.refine, "Coarser levels used to measure convergence (0-4)");
  validate->add_option("--n", o.n, "Grid nodes of the finest level");
  validate->add_option("--dt", o.dt, "Nominal time step of the finest level");
  add_threads(validate);
  add_out(validate);

  auto* tdse_cmd = app.add_subcommand("tdse", "Propagate a fixture and export psi (CSV)");
  tdse_cmd->add_option("--scenario", o.scenario, "ho_ground | ho_coherent | free_gaussian")->required();
  tdse_cmd->add_option("--n", o.n, "Grid nodes");
  tdse_cmd->add_option("--dt", o.dt, "Nominal time step");
  tdse_cmd->add_option("--every", o.every, "Export every n-th step (the last step is always written)");
  add_out(tdse_cmd);

  auto* diag = app.add_subcommand("diag", "Exact ground doublet and guessed-state energy (CSV)");
  diag->add_option("--k", o.k_list, "Comma separated k values")->required();
  diag->add_option("--omega", o.omega, "Vibrational frequency");
  diag->add_option("--cutoff", o.cutoff, "Maximum occupation per mode");
  add_out(diag);

  try {
    args = detail::expand_config(std::move(args));
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    for (auto* sub : app.get_subcommands()) err << sub->help();
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (sweep->parsed()) return cmd_sweep(o, out);
    if (phase->parsed()) return cmd_phase(o, out);
    if (deltak->parsed()) return cmd_deltak(o, out);
    if (validate->parsed()) return cmd_validate(o, out, err);
    if (tdse_cmd->parsed()) return cmd_tdse(o, out);
    if (diag->parsed()) return cmd_diag(o, out, err);
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  err << "usage error: no subcommand\n";
  return kExitUsage;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args), out, err);
}

}  // namespace jtphase::cli
