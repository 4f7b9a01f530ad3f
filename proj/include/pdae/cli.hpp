#pragma once

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdae/errors.hpp"
#include "pdae/index.hpp"
#include "pdae/plasma.hpp"
#include "pdae/serialization.hpp"
#include "pdae/splitting.hpp"
#include "pdae/stability.hpp"
#include "pdae/system.hpp"

namespace pdae::cli {

inline DiffScheme parse_scheme_name(const std::string& s) {
  if (s == "central") return DiffScheme::uniform(FirstDiff::Central);
  if (s == "forward") return DiffScheme::uniform(FirstDiff::Forward);
  if (s == "backward") return DiffScheme::uniform(FirstDiff::Backward);
  if (s == "upwind")
    return DiffScheme{FirstDiff::UpwindBySign, FirstDiff::Backward, {}};
  throw ConfigError("unknown scheme '" + s +
                    "' (expected central, forward, backward or upwind)");
}

inline SolverKind parse_solver_name(const std::string& s) {
  if (s == "full") return SolverKind::Full;
  if (s == "split") return SolverKind::Split;
  throw ConfigError("unknown solver '" + s + "' (expected full or split)");
}

// Everything a command needs, resolved from the config file plus overrides.
struct RunConfig {
  std::string model = "plasma";
  PlasmaParams plasma;
  ModelSetup setup;
  double K0 = std::numeric_limits<double>::quiet_NaN();
  double tau = std::numeric_limits<double>::quiet_NaN();
  int M = 20;
  Matrix stability_C0;

  double tau_at(int Mi) const {
    return std::isfinite(K0) ? K0 / static_cast<double>(Mi) : tau;
  }
};

namespace detail {

inline double want_number(const nlohmann::json& j, const std::string& key,
                          double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    throw ConfigError("config: " + key + " must be a number");
  return j[key].get<double>();
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j,
                              const std::string& scheme_override,
                              const std::string& solver_name) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  RunConfig cfg;
  if (j.contains("model")) {
    if (!j["model"].is_string())
      throw ConfigError("config: model must be a string");
    cfg.model = j["model"].get<std::string>();
  }
  if (cfg.model != "plasma" && cfg.model != "system")
    throw ConfigError("config: model must be 'plasma' or 'system'");

  const bool has_k0 = j.contains("K0"), has_tau = j.contains("tau");
  if (has_k0 == has_tau)
    throw ConfigError("config: give exactly one of K0 and tau");
  if (has_k0) {
    cfg.K0 = detail::want_number(j, "K0", 0.0);
    if (!(cfg.K0 > 0.0)) throw ConfigError("config: K0 must be positive");
  } else {
    cfg.tau = detail::want_number(j, "tau", 0.0);
    if (!(cfg.tau > 0.0)) throw ConfigError("config: tau must be positive");
  }
  const double t_e = detail::want_number(j, "t_e", 1.0);
  if (!(t_e > 0.0)) throw ConfigError("config: t_e must be positive");
  if (j.contains("M")) {
    if (!j["M"].is_number_integer())
      throw ConfigError("config: M must be an integer");
    cfg.M = j["M"].get<int>();
  }
  if (cfg.M < 2) throw ConfigError("config: M must be at least 2");

  std::string scheme_name;
  if (j.contains("scheme")) {
    if (!j["scheme"].is_string())
      throw ConfigError("config: scheme must be a string");
    scheme_name = j["scheme"].get<std::string>();
  }
  if (!scheme_override.empty()) scheme_name = scheme_override;

  if (cfg.model == "plasma") {
    cfg.plasma.b0 = detail::want_number(j, "b0", cfg.plasma.b0);
    cfg.plasma.d1 = detail::want_number(j, "d1", cfg.plasma.d1);
    cfg.plasma.u30 = detail::want_number(j, "u30", cfg.plasma.u30);
    cfg.plasma.K2 = detail::want_number(j, "K2", cfg.plasma.K2);
    const DiffScheme scheme = scheme_name.empty()
                                  ? plasma_default_scheme()
                                  : parse_scheme_name(scheme_name);
    cfg.setup = plasma_setup(cfg.plasma, scheme,
                             parse_solver_name(solver_name), t_e);
    cfg.stability_C0 = plasma_stability_C0(cfg.plasma);
  } else {
    if (!j.contains("system"))
      throw ConfigError("config: model 'system' needs a system object");
    PDAESystem sys = system_from_json(j["system"]);
    cfg.setup.system = sys;
    cfg.setup.iv = InitialSpec::zero(sys.n);
    cfg.setup.bv = BoundarySpec::homogeneous(sys.n);
    cfg.setup.f = SourceFn();
    cfg.setup.scheme = scheme_name.empty()
                           ? DiffScheme::uniform(FirstDiff::Backward)
                           : parse_scheme_name(scheme_name);
    cfg.setup.solver = parse_solver_name(solver_name);
    cfg.setup.t_e = t_e;
    cfg.stability_C0 = sys.C0;
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path,
                             const std::string& scheme_override,
                             const std::string& solver_name) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j, scheme_override, solver_name);
}

inline void cmd_run(const RunConfig& cfg, std::ostream& os) {
  const SpaceGrid grid(cfg.M);
  const TimeGrid tg(cfg.tau_at(cfg.M), cfg.setup.t_e);
  const Trajectory traj = integrate(cfg.setup, grid, tg, /*store_all=*/true);
  write_trajectory_csv(os, traj, grid, cfg.setup.bv);
}

inline void cmd_refine(const RunConfig& cfg, const std::vector<int>& levels,
                       std::ostream& os) {
  const auto rows = refinement_study(cfg.setup, cfg.K0, cfg.tau, levels);
  write_refinement_csv(os, rows);
}

inline void cmd_index(const RunConfig& cfg, std::ostream& os) {
  const SpaceGrid grid(cfg.M);
  const StateField probe = cfg.setup.iv.sample(grid);
  const DerivativeArraySpec spec = first_order_closure(cfg.setup.system);
  const IndexCertificate cert =
      time_index(cfg.setup.system, probe, grid, spec, cfg.setup.bv);
  nlohmann::json j = index_to_json(cert);
  if (cfg.model == "plasma") {
    // scalar reduction of the constraint pair: y'' = u4x y' + u3 y with the
    // initial coefficient profiles
    const double K4 = plasma_K4(cfg.plasma), u30 = cfg.plasma.u30;
    const double w = 2.0 * M_PI;
    auto c0 = [u30, K4, w](double x) {
      return u30 * std::exp(K4 * (std::cos(w * x) - 1.0));
    };
    auto c1 = [K4, w](double x) { return -w * K4 * std::sin(w * x); };
    j["lemma2_det"] = lemma2_determinant(c0, c1);
  }
  os << j.dump(2) << '\n';
}

inline void cmd_stability(const RunConfig& cfg, std::ostream& os) {
  const SpaceGrid grid(cfg.M);
  const StateField U = cfg.setup.iv.sample(grid);
  const StabilityReport rep =
      stability_report(cfg.setup.system, U, grid, cfg.tau_at(cfg.M),
                       cfg.setup.scheme, &cfg.stability_C0);
  os << stability_to_json(rep).dump(2) << '\n';
}

inline int report_error(int code, const std::string& message, long step = -1) {
  nlohmann::json j;
  j["code"] = code;
  j["error"] = message;
  if (step >= 0) j["time_index"] = step;
  std::cerr << j.dump() << std::endl;
  return code;
}

inline int dispatch(int argc, const char* const* argv) {
  CLI::App app{"finite-difference toolkit for mixed differential-algebraic "
               "systems with convection on the unit interval"};
  app.require_subcommand(1);
  std::string config_path, out_path, scheme_name, solver_name = "full";
  std::vector<int> levels{20, 40, 80, 160, 320};

  auto add_common = [&](CLI::App* sub, bool with_scheme, bool with_solver) {
    sub->add_option("--config", config_path, "JSON problem description")
        ->required();
    sub->add_option("--out", out_path, "output file (default stdout)");
    if (with_scheme)
      sub->add_option("--scheme", scheme_name,
                      "central|forward|backward|upwind (overrides config)");
    if (with_solver)
      sub->add_option("--solver", solver_name, "full|split");
  };
  CLI::App* run = app.add_subcommand("run", "integrate and dump trajectory");
  add_common(run, true, true);
  CLI::App* refine =
      app.add_subcommand("refine", "self-convergence over doubling grids");
  add_common(refine, true, true);
  refine->add_option("--levels", levels, "interior resolutions, doubling")
      ->delimiter(',');
  CLI::App* index =
      app.add_subcommand("index", "time-index certificate of the system");
  add_common(index, false, false);
  CLI::App* stability =
      app.add_subcommand("stability", "frozen-coefficient resolvent report");
  add_common(stability, true, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(2, e.what());
  }

  try {
    const RunConfig cfg = load_config(config_path, scheme_name, solver_name);
    std::ostringstream body;
    if (run->parsed()) cmd_run(cfg, body);
    if (refine->parsed()) cmd_refine(cfg, levels, body);
    if (index->parsed()) cmd_index(cfg, body);
    if (stability->parsed()) cmd_stability(cfg, body);
    if (out_path.empty())
      std::cout << body.str();
    else
      write_text_file(out_path, body.str());
    return 0;
  } catch (const SolverError& e) {
    return report_error(3, e.what(), e.time_step);
  } catch (const ConfigError& e) {
    return report_error(2, e.what());
  } catch (const nlohmann::json::exception& e) {
    return report_error(2, std::string("config error: ") + e.what());
  }
}

}  // namespace pdae::cli
