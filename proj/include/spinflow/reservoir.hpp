#pragma once

// Travelling-wave Doppler cooling of the axial modes and the effective
// thermal-reservoir picture: collective heating/cooling rates, occupations,
// temperatures, damping widths and the Lorentzian density of states.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinflow/crystal.hpp"
#include "spinflow/units.hpp"

namespace spinflow {

struct CoolingLaser {
  double rabi = 0.0;        // Omega_L, rad/s
  double detuning = 0.0;    // Delta_L from the coolant transition, rad/s (negative = red)
  double wavevector = 0.0;  // k projected along z, 1/m
  double linewidth = 0.0;   // Gamma of the coolant dipole transition, rad/s
  bool recoil_heating = false;  // add 2/5 carrier-recoil diffusion to Gamma_+

  void validate() const {
    if (rabi <= 0) throw std::invalid_argument("CoolingLaser: Rabi frequency must be positive");
    if (wavevector <= 0) throw std::invalid_argument("CoolingLaser: wavevector must be positive");
    if (linewidth <= 0) throw std::invalid_argument("CoolingLaser: linewidth must be positive");
  }
};

enum class ReservoirLabel { Source = 0, Drain = 1 };

inline const char* reservoir_name(ReservoirLabel r) {
  return r == ReservoirLabel::Source ? "S" : "D";
}

struct ReservoirSpec {
  ReservoirLabel label = ReservoirLabel::Source;
  int mode_index = 0;        // axial mode n_r (0-based)
  double omega = 0.0;        // mode frequency, rad/s
  double gamma_plus = 0.0;   // collective heating rate, rad/s
  double gamma_minus = 0.0;  // collective cooling rate, rad/s
  double kappa = 0.0;        // reservoir width 2(Gamma_- - Gamma_+), rad/s
  double nbar = 0.0;         // steady occupation
  double temperature_K = 0.0;
  double delta = 0.0;        // sideband detuning of the exchange drive, rad/s
};

// Resolved-sideband rates of a single trapped ion of mass m (kg) in a trap of
// frequency w_t, low saturation:
//   Gamma_pm = eta(w_t)^2 (Omega/2)^2 Gamma / ((Gamma/2)^2 + (Delta_L -+ w_t)^2).
// The optional recoil flag adds (2/5) of the carrier scattering rate to
// Gamma_+ to account for spontaneous-emission recoil along z.
inline std::pair<double, double> single_ion_rates(const CoolingLaser& laser, double mass_kg,
                                                  double omega_t) {
  laser.validate();
  if (omega_t <= 0) throw std::invalid_argument("single_ion_rates: omega_t must be positive");
  const double eta2 = std::pow(units::lamb_dicke(laser.wavevector, mass_kg, omega_t), 2);
  const double s = eta2 * 0.25 * laser.rabi * laser.rabi * laser.linewidth;
  const double hg = 0.5 * laser.linewidth;
  const double gamma_minus = s / (hg * hg + std::pow(laser.detuning + omega_t, 2));
  double gamma_plus = s / (hg * hg + std::pow(laser.detuning - omega_t, 2));
  if (laser.recoil_heating) {
    const double carrier = eta2 * 0.25 * laser.rabi * laser.rabi * laser.linewidth /
                           (hg * hg + laser.detuning * laser.detuning);
    gamma_plus += 0.4 * carrier;
  }
  return {gamma_plus, gamma_minus};
}

// Collective rates of every axial mode: sum over coolant sites i of
// (M_{i,n}^z)^2 (w_z / w_{n,z}) Gamma_pm(w_{n,z}).
inline std::vector<std::pair<double, double>> collective_rates(
    const NormalModes& modes, const CrystalArrangement& arrangement, const CoolingLaser& laser) {
  const auto coolants = arrangement.coolant_sites();
  if (coolants.empty())
    throw std::invalid_argument("collective_rates: arrangement has no coolant site");
  const auto& freqs = modes.branch_frequencies(Branch::Z);
  const auto& disp = modes.branch_displacements(Branch::Z);

  std::vector<std::pair<double, double>> rates;
  rates.reserve(freqs.size());
  for (int n = 0; n < freqs.size(); ++n) {
    double gp = 0.0, gm = 0.0;
    for (int i : coolants) {
      const double mass_kg = units::amu_to_kg(arrangement.species[i].mass_amu);
      const auto [sp, sm] = single_ion_rates(laser, mass_kg, freqs[n]);
      const double weight = disp(i, n) * disp(i, n) * modes.omega_z / freqs[n];
      gp += weight * sp;
      gm += weight * sm;
    }
    rates.emplace_back(gp, gm);
  }
  return rates;
}

// Thermal-reservoir parameters of one cooled mode.
inline ReservoirSpec reservoir_state(double gamma_plus, double gamma_minus, double omega) {
  if (gamma_minus <= gamma_plus)
    throw std::runtime_error("reservoir_state: no cooling (Gamma_- <= Gamma_+), no thermal steady state");
  ReservoirSpec spec;
  spec.omega = omega;
  spec.gamma_plus = gamma_plus;
  spec.gamma_minus = gamma_minus;
  spec.nbar = gamma_plus / (gamma_minus - gamma_plus);
  spec.kappa = 2.0 * (gamma_minus - gamma_plus);
  spec.temperature_K = units::mode_temperature_K(omega, spec.nbar);
  return spec;
}

// Lorentzian density of states of a damped reservoir mode, in s/rad:
//   D_r(eps) = (1/2pi) kappa / ((eps - delta)^2 + (kappa/2)^2).
inline double dos(double epsilon, double delta, double kappa) {
  if (kappa <= 0) throw std::invalid_argument("dos: kappa must be positive");
  return kappa / (units::two_pi * (std::pow(epsilon - delta, 2) + 0.25 * kappa * kappa));
}

struct TemperatureSweepRow {
  double detuning = 0.0;  // rad/s
  bool cooled = false;    // both modes reach a thermal steady state
  bool weak_cooling = false;
  double t_source_K = 0.0;
  double t_drain_K = 0.0;
  double nbar_source = 0.0;
  double nbar_drain = 0.0;
  double kappa_source = 0.0;
  double kappa_drain = 0.0;
};

// Temperatures of the source/drain modes over a grid of laser detunings.
// Rows where a mode is heated instead of cooled are flagged and carry zeros.
inline std::vector<TemperatureSweepRow> temperature_sweep(
    const std::vector<double>& detunings, const NormalModes& modes,
    const CrystalArrangement& arrangement, CoolingLaser laser, int source_mode, int drain_mode,
    double kappa_floor = 0.0) {
  std::vector<TemperatureSweepRow> rows;
  rows.reserve(detunings.size());
  for (double d : detunings) {
    laser.detuning = d;
    TemperatureSweepRow row;
    row.detuning = d;
    const auto rates = collective_rates(modes, arrangement, laser);
    const auto& freqs = modes.branch_frequencies(Branch::Z);
    try {
      const auto src = reservoir_state(rates.at(source_mode).first, rates.at(source_mode).second,
                                       freqs[source_mode]);
      const auto drn = reservoir_state(rates.at(drain_mode).first, rates.at(drain_mode).second,
                                       freqs[drain_mode]);
      row.cooled = true;
      row.t_source_K = src.temperature_K;
      row.t_drain_K = drn.temperature_K;
      row.nbar_source = src.nbar;
      row.nbar_drain = drn.nbar;
      row.kappa_source = src.kappa;
      row.kappa_drain = drn.kappa;
      row.weak_cooling = std::min(src.kappa, drn.kappa) < kappa_floor;
    } catch (const std::runtime_error&) {
      row.cooled = false;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace spinflow
