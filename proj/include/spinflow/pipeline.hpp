#pragma once

// Glue between the parsed RunConfig and the domain modules: builds the
// crystal, derives the reservoir parameters from the cooling stage (or the
// configured overrides), assembles the spin model and the transition tables.

#include <array>
#include <stdexcept>
#include <string>

#include "spinflow/config.hpp"
#include "spinflow/crystal.hpp"
#include "spinflow/dimer.hpp"
#include "spinflow/magnet.hpp"
#include "spinflow/reservoir.hpp"
#include "spinflow/transport.hpp"

namespace spinflow {

struct CrystalResult {
  Eigen::VectorXd positions_m;
  NormalModes modes;
};

inline CrystalResult build_crystal(const RunConfig& cfg) {
  CrystalResult out;
  out.positions_m = equilibrium_positions(cfg.trap, cfg.arrangement);
  out.modes = normal_modes(cfg.trap, cfg.arrangement, out.positions_m);
  return out;
}

// Reservoir parameters of the two driven modes: from the cooling rates, with
// per-side kappa/nbar overrides taking precedence.
inline std::array<ReservoirSpec, 2> build_reservoirs(const RunConfig& cfg,
                                                     const NormalModes& modes) {
  const auto& freqs = modes.branch_frequencies(Branch::Z);
  std::array<ReservoirSpec, 2> out;
  const bool need_cooling = !(cfg.drive[0].kappa_override && cfg.drive[0].nbar_override &&
                              cfg.drive[1].kappa_override && cfg.drive[1].nbar_override);
  std::vector<std::pair<double, double>> rates;
  if (need_cooling) rates = collective_rates(modes, cfg.arrangement, cfg.laser);

  for (int s = 0; s < 2; ++s) {
    const int mode = cfg.drive[s].mode;
    if (mode < 0 || mode >= freqs.size())
      throw std::runtime_error("drive mode index out of range for this crystal");
    ReservoirSpec spec;
    if (cfg.drive[s].kappa_override && cfg.drive[s].nbar_override) {
      spec.omega = freqs[mode];
      spec.kappa = *cfg.drive[s].kappa_override;
      spec.nbar = *cfg.drive[s].nbar_override;
      spec.gamma_minus = 0.25 * spec.kappa * (spec.nbar + 1.0) * 2.0;
      spec.gamma_plus = 0.5 * spec.kappa * spec.nbar;
      spec.temperature_K = units::mode_temperature_K(spec.omega, spec.nbar);
    } else {
      spec = reservoir_state(rates[mode].first, rates[mode].second, freqs[mode]);
      if (cfg.drive[s].kappa_override) spec.kappa = *cfg.drive[s].kappa_override;
      if (cfg.drive[s].nbar_override) {
        spec.nbar = *cfg.drive[s].nbar_override;
        spec.temperature_K = units::mode_temperature_K(spec.omega, spec.nbar);
      }
    }
    spec.label = s == 0 ? ReservoirLabel::Source : ReservoirLabel::Drain;
    spec.mode_index = mode;
    spec.delta = cfg.drive[s].delta;
    out[s] = spec;
  }
  return out;
}

inline SpinModel build_spin_model(const RunConfig& cfg, const NormalModes& modes) {
  const int n = int(cfg.arrangement.spin_sites().size());
  if (n < 1) throw std::runtime_error("arrangement has no spin sites");

  auto resolve_axis = [&](int axis) -> Eigen::MatrixXd {
    if (cfg.coupling_matrix[axis]) {
      if (cfg.coupling_matrix[axis]->rows() != n)
        throw std::runtime_error("coupling matrix size does not match the spin-site count");
      return *cfg.coupling_matrix[axis];
    }
    if (axis == 2 && cfg.force && cfg.magnet_kind == SpinModelKind::Ising)
      return mediated_couplings(modes, cfg.arrangement, cfg.force->amplitude,
                                cfg.force->detuning_above_branch, cfg.force->branch);
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    if (cfg.uniform_coupling[axis]) {
      for (int i = 0; i + 1 < n; ++i) j(i, i + 1) = j(i + 1, i) = *cfg.uniform_coupling[axis];
    }
    return j;
  };

  switch (cfg.magnet_kind) {
    case SpinModelKind::Ising:
      return SpinModel::ising(n, cfg.field, resolve_axis(2));
    case SpinModelKind::XY:
      return SpinModel::xy(n, cfg.field, resolve_axis(0), resolve_axis(1));
    case SpinModelKind::XXZ:
      return SpinModel::xxz(n, cfg.field, resolve_axis(0), resolve_axis(2));
    default:
      return SpinModel::xyz(n, cfg.field, resolve_axis(0), resolve_axis(1), resolve_axis(2));
  }
}

inline ExchangeDrive build_drive(const RunConfig& cfg, int n_spins) {
  return ExchangeDrive::homogeneous(n_spins, cfg.drive[0].g, cfg.drive[1].g, cfg.drive[0].delta,
                                    cfg.drive[1].delta);
}

struct TransportSetup {
  SpinModel model;
  SpinSpectrum spectrum;       // bare eigenbasis
  TransitionData transitions;  // drive-adapted
  std::array<ReservoirSpec, 2> reservoir_specs;
  std::array<TransportReservoir, 2> reservoirs;
  TransportOptions options;
};

inline TransportSetup build_transport_setup(const RunConfig& cfg, const NormalModes& modes) {
  TransportSetup setup;
  setup.model = build_spin_model(cfg, modes);
  const MatrixXcd h = build_hamiltonian(setup.model, cfg.spin_cap);
  setup.spectrum = diagonalize(h, modes.omega_z);
  setup.transitions = transition_data(setup.spectrum, build_drive(cfg, setup.model.n_spins),
                                      setup.model.n_spins);
  setup.reservoir_specs = build_reservoirs(cfg, modes);
  for (int s = 0; s < 2; ++s)
    setup.reservoirs[s] = TransportReservoir::from_spec(setup.reservoir_specs[s]);
  setup.options.mode = cfg.coherence_mode;
  setup.options.validity_warn = cfg.validity_warn;
  setup.options.validity_error = cfg.validity_error;
  return setup;
}

// Initial state in the computational basis per the configured choice.
inline MatrixXcd initial_state_computational(const RunConfig& cfg, int n_spins) {
  const long dim = 1L << n_spins;
  VectorXcd psi = VectorXcd::Zero(dim);
  if (cfg.initial_state == "all_down") {
    psi[0] = 1.0;
  } else {
    if (n_spins != 2)
      throw std::runtime_error("initial_state '" + cfg.initial_state + "' requires a two-spin magnet");
    if (cfg.initial_state == "triplet") {
      psi[1] = psi[2] = 1.0 / std::sqrt(2.0);
    } else {  // singlet
      psi[1] = 1.0 / std::sqrt(2.0);
      psi[2] = -1.0 / std::sqrt(2.0);
    }
  }
  return pure_density(psi);
}

inline DimerConfig dimer_config_from(const TransportSetup& setup) {
  if (setup.model.n_spins != 2)
    throw std::runtime_error("dimer analytics require a two-spin magnet");
  DimerConfig cfg;
  cfg.coupling = setup.model.jz(0, 1);
  for (int r = 0; r < 2; ++r) {
    cfg.g[r] = std::abs(setup.transitions.gtilde[r].cwiseAbs().maxCoeff()) / std::sqrt(2.0);
    cfg.delta[r] = setup.reservoirs[r].delta;
    cfg.kappa[r] = setup.reservoirs[r].kappa;
    cfg.nbar[r] = setup.reservoirs[r].nbar;
  }
  return cfg;
}

}  // namespace spinflow
