#pragma once

// Command-line front end: one config file, one subcommand per pipeline stage,
// stable CSV outputs. Exit codes: 0 success, 2 usage error, 1 runtime
// failure (with a machine-readable JSON error object on stderr).

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spinflow/config.hpp"
#include "spinflow/csv.hpp"
#include "spinflow/dimer.hpp"
#include "spinflow/oracle.hpp"
#include "spinflow/pipeline.hpp"
#include "spinflow/protocol.hpp"
#include "spinflow/sweep.hpp"

namespace spinflow::cli {

struct CommonArgs {
  std::string config_path;
  std::string output_override;
  int threads = 0;  // 0 = env/default
};

inline int resolve_threads(const CommonArgs& args) {
  return args.threads > 0 ? args.threads : default_thread_count();
}

inline std::string output_path(const CommonArgs& args, const RunConfig& cfg) {
  return args.output_override.empty() ? cfg.output_path : args.output_override;
}

inline double hz(double rad) { return rad / units::two_pi; }

// ---- subcommand bodies ----------------------------------------------------

inline void cmd_modes(const CommonArgs& args, const RunConfig& cfg) {
  const CrystalResult crystal = build_crystal(cfg);
  auto out = open_output(output_path(args, cfg));
  std::vector<std::string> header = {"branch", "n", "frequency_Hz"};
  for (int i = 1; i <= cfg.arrangement.size(); ++i) header.push_back("M_" + std::to_string(i));
  CsvWriter csv(out, header, cfg.precision);
  for (Branch b : {Branch::X, Branch::Y, Branch::Z}) {
    const auto& freqs = crystal.modes.branch_frequencies(b);
    const auto& disp = crystal.modes.branch_displacements(b);
    for (int n = 0; n < freqs.size(); ++n) {
      std::vector<std::string> row = {branch_name(b), std::to_string(n + 1),
                                      CsvWriter::format(hz(freqs[n]), cfg.precision)};
      for (int i = 0; i < disp.rows(); ++i)
        row.push_back(CsvWriter::format(disp(i, n), cfg.precision));
      csv.row_strings(row);
    }
  }
}

inline void cmd_reservoirs(const CommonArgs& args, const RunConfig& cfg) {
  const CrystalResult crystal = build_crystal(cfg);
  std::vector<double> grid;
  if (cfg.cooling_scan)
    grid = cfg.cooling_scan->values();
  else
    grid = {cfg.laser.detuning};

  auto out = open_output(output_path(args, cfg));
  CsvWriter csv(out,
                {"Delta_L_Hz", "mode", "Gamma_plus", "Gamma_minus", "kappa", "nbar", "T_mK",
                 "cooled", "warn_hot"},
                cfg.precision);
  const auto& freqs = crystal.modes.branch_frequencies(Branch::Z);
  CoolingLaser laser = cfg.laser;
  const size_t n_grid = grid.size();
  struct Row {
    double detuning, gp, gm, kappa, nbar, t_mk;
    int mode;
    bool cooled, hot;
  };
  std::vector<std::vector<Row>> all(n_grid);
  parallel_for(n_grid, resolve_threads(args), [&](size_t k) {
    CoolingLaser local = laser;
    local.detuning = grid[k];
    const auto rates = collective_rates(crystal.modes, cfg.arrangement, local);
    for (int n = 0; n < freqs.size(); ++n) {
      Row row{grid[k], rates[n].first, rates[n].second, 0, 0, 0, n + 1, false, false};
      try {
        const ReservoirSpec spec = reservoir_state(rates[n].first, rates[n].second, freqs[n]);
        row.kappa = spec.kappa;
        row.nbar = spec.nbar;
        row.t_mk = units::kelvin_to_mK(spec.temperature_K);
        row.cooled = true;
        row.hot = spec.nbar > 5.0;
      } catch (const std::runtime_error&) {
        row.cooled = false;
      }
      all[k].push_back(row);
    }
  });
  for (const auto& rows : all)
    for (const auto& r : rows)
      csv.row(hz(r.detuning), r.mode, r.gp, r.gm, r.kappa, r.nbar, r.t_mk, int(r.cooled),
              int(r.hot));
}

inline void cmd_dos(const CommonArgs& args, const RunConfig& cfg) {
  const CrystalResult crystal = build_crystal(cfg);
  const auto reservoirs = build_reservoirs(cfg, crystal.modes);
  auto out = open_output(output_path(args, cfg));
  CsvWriter csv(out, {"reservoir", "epsilon_Hz", "dos_s_per_rad"}, cfg.precision);
  for (const auto& spec : reservoirs) {
    const int points = 401;
    const double half = 10.0 * spec.kappa;
    for (int i = 0; i < points; ++i) {
      const double eps = spec.delta - half + 2.0 * half * double(i) / double(points - 1);
      csv.row(reservoir_name(spec.label), hz(eps), dos(eps, spec.delta, spec.kappa));
    }
  }
}

inline void cmd_spectrum(const CommonArgs& args, const RunConfig& cfg) {
  const CrystalResult crystal = build_crystal(cfg);
  const TransportSetup setup = build_transport_setup(cfg, crystal.modes);
  auto out = open_output(output_path(args, cfg));
  CsvWriter csv(out, {"record", "l", "lp", "energy_Hz", "omega_Hz", "g_S_Hz", "g_D_Hz"},
                cfg.precision);
  const auto& spec = setup.transitions.spectrum;
  for (int l = 0; l < spec.dimension(); ++l)
    csv.row("level", l, "", hz(spec.energies[l]), "", "", "");
  for (int l = 0; l < spec.dimension(); ++l)
    for (int lp = 0; lp < spec.dimension(); ++lp) {
      const double gs = std::abs(setup.transitions.gtilde[0](l, lp));
      const double gd = std::abs(setup.transitions.gtilde[1](l, lp));
      if (gs == 0 && gd == 0) continue;
      csv.row("coupling", l, lp, "", hz(setup.transitions.omega(l, lp)), hz(gs), hz(gd));
    }
}

inline void cmd_steady(const CommonArgs& args, const RunConfig& cfg) {
  const CrystalResult crystal = build_crystal(cfg);
  const TransportSetup setup = build_transport_setup(cfg, crystal.modes);
  const TransportGenerator gen = build_generator(setup.transitions, setup.reservoirs, setup.options);
  for (const auto& w : gen.warnings) std::cerr << "warning: " << w << "\n";

  const MatrixXcd rho0 =
      gen.spectrum.to_eigenbasis(initial_state_computational(cfg, setup.model.n_spins));
  SteadyStateOpts sopt;
  sopt.method = cfg.steady_method;
  const MatrixXcd rho = steady_state(gen, rho0, sopt);
  const CurrentResult cur = current(gen, rho);

  auto out = open_output(output_path(args, cfg));
  CsvWriter csv(out, {"record", "l", "lp", "value"}, cfg.precision);
  for (int l = 0; l < gen.dimension(); ++l)
    csv.row("population", l, "", rho(l, l).real());
  for (const auto& ch : cur.channels) csv.row("current_channel", ch.upper, ch.lower, ch.value);
  csv.row("current_source", "", "", cur.current_source);
  csv.row("current_drain", "", "", cur.current_drain);
  csv.row("energy_current", "", "", cur.energy_current);
}

inline void cmd_sweep(const CommonArgs& args, const RunConfig& cfg) {
  if (!cfg.sweep) throw std::runtime_error("sweep subcommand requires a drive.sweep section");
  const CrystalResult crystal = build_crystal(cfg);
  const TransportSetup setup = build_transport_setup(cfg, crystal.modes);
  const MatrixXcd rho0 = setup.transitions.spectrum.to_eigenbasis(
      initial_state_computational(cfg, setup.model.n_spins));

  std::vector<SweepPoint> grid;
  std::vector<double> scales;
  for (double scale : cfg.sweep->kappa_scales)
    for (double d : cfg.sweep->delta.values()) {
      SweepPoint p;
      p.delta_source = p.delta_drain = d;
      p.kappa_source = setup.reservoirs[0].kappa * scale;
      p.kappa_drain = setup.reservoirs[1].kappa * scale;
      grid.push_back(p);
      scales.push_back(scale);
    }

  SteadyStateOpts sopt;
  sopt.method = cfg.steady_method;
  const auto rows = current_sweep(setup.transitions, setup.reservoirs, grid, rho0, setup.options,
                                  sopt, resolve_threads(args));

  auto out = open_output(output_path(args, cfg));
  CsvWriter csv(out,
                {"delta_Hz", "kappa_scale", "kappa_S_Hz", "kappa_D_Hz", "I_S", "I_D", "status"},
                cfg.precision);
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    csv.row(hz(r.point.delta_source), scales[i], hz(r.point.kappa_source),
            hz(r.point.kappa_drain), r.current_source, r.current_drain,
            r.ok ? "ok" : ("failed: " + r.error));
  }
}

inline void cmd_dimer(const CommonArgs& args, const RunConfig& cfg) {
  const CrystalResult crystal = build_crystal(cfg);
  const TransportSetup setup = build_transport_setup(cfg, crystal.modes);
  const DimerConfig base = dimer_config_from(setup);
  const MatrixXcd rho0 = setup.transitions.spectrum.to_eigenbasis(
      initial_state_computational(cfg, setup.model.n_spins));

  std::vector<double> deltas;
  if (cfg.sweep)
    deltas = cfg.sweep->delta.values();
  else
    deltas = {setup.reservoirs[0].delta};

  struct Row {
    double delta, numeric = 0, analytic = 0, validity = 0;
    bool ok = false;
    std::string error;
  };
  std::vector<Row> rows(deltas.size());
  SteadyStateOpts sopt;
  sopt.method = cfg.steady_method;
  parallel_for(deltas.size(), resolve_threads(args), [&](size_t i) {
    Row& row = rows[i];
    row.delta = deltas[i];
    try {
      auto res = setup.reservoirs;
      res[0].delta = res[1].delta = deltas[i];
      const TransportGenerator gen = build_generator(setup.transitions, res, setup.options);
      row.numeric = current(gen, steady_state(gen, rho0, sopt)).current_source;
      DimerConfig dc = base;
      dc.delta = {deltas[i], deltas[i]};
      row.analytic = analytic_current(dc);
      row.validity = eq_populations(dc).validity;
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });

  auto out = open_output(output_path(args, cfg));
  CsvWriter csv(out, {"delta_Hz", "kappa_S_Hz", "I_numeric", "I_analytic", "validity", "status"},
                cfg.precision);
  for (const auto& r : rows)
    csv.row(hz(r.delta), hz(setup.reservoirs[0].kappa), r.numeric, r.analytic, r.validity,
            r.ok ? "ok" : ("failed: " + r.error));
}

inline void cmd_oracle(const CommonArgs& args, const RunConfig& cfg) {
  const CrystalResult crystal = build_crystal(cfg);
  const TransportSetup setup = build_transport_setup(cfg, crystal.modes);

  OracleConfig ocfg;
  ocfg.model = setup.model;
  ocfg.drive = build_drive(cfg, setup.model.n_spins);
  ocfg.kappa = {setup.reservoirs[0].kappa, setup.reservoirs[1].kappa};
  ocfg.nbar = {setup.reservoirs[0].nbar, setup.reservoirs[1].nbar};
  ocfg.n_max = cfg.oracle.n_max;
  ocfg.n_max_cap = cfg.oracle.n_max_cap;
  ocfg.truncation_threshold = cfg.oracle.truncation_threshold;
  const OracleMethod method =
      cfg.oracle.method == "direct" ? OracleMethod::Direct : OracleMethod::Propagate;
  const OracleSolution sol = solve_oracle(ocfg, method);

  // effective master equation on the same eigenbasis
  const TransportGenerator gen = build_generator(setup.transitions, setup.reservoirs, setup.options);
  const MatrixXcd rho0 = gen.spectrum.to_eigenbasis(
      initial_state_computational(cfg, setup.model.n_spins));
  const MatrixXcd rho_eff = steady_state(gen, rho0);
  const CurrentResult cur_eff = current(gen, rho_eff);

  auto rel = [](double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale > 0 ? std::abs(a - b) / scale : 0.0;
  };

  auto out = open_output(output_path(args, cfg));
  CsvWriter csv(out, {"quantity", "effective", "full", "rel_diff"}, cfg.precision);
  for (size_t a = 0; a < sol.model.kept.size(); ++a) {
    const int l = sol.model.kept[a];
    const double pe = rho_eff(l, l).real();
    const double pf = sol.magnet(long(a), long(a)).real();
    csv.row("population_" + std::to_string(l), pe, pf, rel(pe, pf));
  }
  csv.row("current", cur_eff.current_source, sol.current.drain_side,
          rel(cur_eff.current_source, sol.current.drain_side));
  csv.row("n_max", sol.model.config.n_max, sol.model.config.n_max, 0.0);
  csv.row("top_fock", sol.top_fock, sol.top_fock, 0.0);
}

inline void cmd_protocol(const CommonArgs& args, const RunConfig& cfg, int tq_points,
                         double tq_max_s) {
  if (cfg.protocol.dt <= 0)
    throw std::runtime_error("protocol subcommand requires solver.protocol.dt_s");
  const CrystalResult crystal = build_crystal(cfg);
  const TransportSetup setup = build_transport_setup(cfg, crystal.modes);

  RunConfig quenched_cfg = cfg;
  quenched_cfg.drive[1].g = 0.0;
  const TransitionData quenched = transition_data(
      setup.spectrum, build_drive(quenched_cfg, setup.model.n_spins), setup.model.n_spins);

  ProtocolConfig pc;
  pc.probe_interval = cfg.protocol.dt;
  pc.repetitions = cfg.protocol.repetitions;
  pc.seed = cfg.protocol.seed;
  pc.flip_probability = cfg.protocol.flip_probability;

  std::vector<double> tqs;
  if (tq_points > 0) {
    pc.min_equilibration_rates = 0.0;
    for (int i = 0; i < tq_points; ++i)
      tqs.push_back(tq_max_s * double(i + 1) / double(tq_points));
  } else {
    if (cfg.protocol.t_q <= 0)
      throw std::runtime_error("protocol subcommand requires solver.protocol.t_q_s");
    tqs = {cfg.protocol.t_q};
  }

  auto out = open_output(output_path(args, cfg));
  CsvWriter csv(out,
                {"t_q_s", "dt_s", "rho_dd_tq", "rho_dd_tq_dt", "I_est", "I_S", "bias_bound",
                 "dt_warning"},
                cfg.precision);
  for (double tq : tqs) {
    pc.t_equilibrate = tq;
    const ProtocolResult res =
        run_protocol(setup.transitions, quenched, setup.reservoirs, pc, setup.options);
    csv.row(tq, pc.probe_interval, res.rho_dd_tq, res.rho_dd_tq_dt, res.current_estimate,
            res.current_reference, res.bias_bound, int(res.dt_warning));
  }
}

// ---- entry point -----------------------------------------------------------

inline int run(int argc, const char* const* argv) {
  CLI::App app{"spinflow: energy transport through laser-cooled trapped-ion spin chains"};
  app.require_subcommand(1);

  CommonArgs args;
  int tq_points = 0;
  double tq_max_s = 0.0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", args.config_path, "JSON config file")->required();
    sub->add_option("-o,--output", args.output_override, "override output.path");
    sub->add_option("-t,--threads", args.threads,
                    "worker threads for sweeps (default: SPINFLOW_THREADS or 1)");
    return sub;
  };

  auto* modes = add_common(app.add_subcommand("modes", "equilibrium positions and normal modes"));
  auto* reservoirs =
      add_common(app.add_subcommand("reservoirs", "cooling rates and reservoir temperatures"));
  auto* dos_cmd = add_common(app.add_subcommand("dos", "sampled Lorentzian densities of states"));
  auto* spectrum =
      add_common(app.add_subcommand("spectrum", "magnet spectrum and dressed couplings"));
  auto* steady = add_common(app.add_subcommand("steady", "steady state and quanta current"));
  auto* sweep = add_common(app.add_subcommand("sweep", "current vs detuning/width grids"));
  auto* dimer = add_common(app.add_subcommand("dimer", "numeric vs analytic dimer current"));
  auto* oracle =
      add_common(app.add_subcommand("oracle", "full spin-phonon model vs effective theory"));
  auto* protocol =
      add_common(app.add_subcommand("protocol", "quench measurement of the current"));
  protocol->add_option("--tq-points", tq_points, "emit a t_q sweep with this many points");
  protocol->add_option("--tq-max-s", tq_max_s, "largest t_q of the sweep, seconds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    const RunConfig cfg = parse_config(args.config_path);
    if (modes->parsed()) cmd_modes(args, cfg);
    if (reservoirs->parsed()) cmd_reservoirs(args, cfg);
    if (dos_cmd->parsed()) cmd_dos(args, cfg);
    if (spectrum->parsed()) cmd_spectrum(args, cfg);
    if (steady->parsed()) cmd_steady(args, cfg);
    if (sweep->parsed()) cmd_sweep(args, cfg);
    if (dimer->parsed()) cmd_dimer(args, cfg);
    if (oracle->parsed()) cmd_oracle(args, cfg);
    if (protocol->parsed()) cmd_protocol(args, cfg, tq_points, tq_max_s);
  } catch (const ConfigError& e) {
    json err{{"error", {{"kind", "config"}, {"messages", e.errors()}}}};
    std::cerr << err.dump(2) << "\n";
    return 1;
  } catch (const std::exception& e) {
    json err{{"error", {{"kind", "runtime"}, {"message", e.what()}}}};
    std::cerr << err.dump(2) << "\n";
    return 1;
  }
  return 0;
}

}  // namespace spinflow::cli
