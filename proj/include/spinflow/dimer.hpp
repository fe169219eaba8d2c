#pragma once

// Closed-form results for the Ising dimer coupled to two reservoirs: the
// V-scheme channel rates, single-channel equilibrium populations and the
// blockade current. These are the analytic ground truth the numeric
// transport pipeline is validated against.

#include <array>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "spinflow/linops.hpp"
#include "spinflow/reservoir.hpp"
#include "spinflow/units.hpp"

namespace spinflow {

struct DimerConfig {
  double coupling = 0.0;  // Ising J, rad/s, antiferromagnetic (> 0)
  std::array<double, 2> g{};      // |g_r|, rad/s
  std::array<double, 2> delta{};  // rad/s
  std::array<double, 2> kappa{};  // rad/s
  std::array<double, 2> nbar{};

  void validate() const {
    if (coupling <= 0) throw std::invalid_argument("DimerConfig: J must be positive");
    for (int r = 0; r < 2; ++r) {
      if (kappa[r] <= 0) throw std::invalid_argument("DimerConfig: kappa must be positive");
      if (nbar[r] < 0) throw std::invalid_argument("DimerConfig: nbar must be non-negative");
    }
  }
};

struct DimerSpectrum {
  Eigen::Vector4d levels;   // {0, 0, 2J, 2J}
  VectorXcd triplet, singlet, up_up, down_down;  // two-spin computational basis
  bool singlet_dark = true;  // for homogeneous couplings
};

// Eigenstructure of the h = 0 Ising dimer. Basis order |s1 s0>: index
// 0 = down-down, 1/2 = one excitation, 3 = up-up.
inline DimerSpectrum dimer_spectrum(double coupling) {
  if (coupling < 0) throw std::invalid_argument("dimer_spectrum: J must be non-negative");
  DimerSpectrum s;
  s.levels << 0.0, 0.0, 2.0 * coupling, 2.0 * coupling;
  s.triplet = VectorXcd::Zero(4);
  s.triplet[1] = s.triplet[2] = 1.0 / std::sqrt(2.0);
  s.singlet = VectorXcd::Zero(4);
  s.singlet[1] = 1.0 / std::sqrt(2.0);
  s.singlet[2] = -1.0 / std::sqrt(2.0);
  s.down_down = VectorXcd::Zero(4);
  s.down_down[0] = 1.0;
  s.up_up = VectorXcd::Zero(4);
  s.up_up[3] = 1.0;
  return s;
}

// The four rates of one transport channel for both reservoirs.
struct DimerChannelRates {
  // channel 1: |T> <-> |up,up>, density of states at +2J
  std::array<double, 2> emit_upper{};    // Gamma_{rM}(T, upup)
  std::array<double, 2> absorb_upper{};  // Gamma_{Mr}(upup, T)
  // channel 2: |T> <-> |down,down>, density of states at -2J
  std::array<double, 2> emit_lower{};    // Gamma_{rM}(dndn, T)
  std::array<double, 2> absorb_lower{};  // Gamma_{Mr}(T, dndn)
};

inline DimerChannelRates channel_rates(const DimerConfig& cfg) {
  cfg.validate();
  DimerChannelRates rates;
  for (int r = 0; r < 2; ++r) {
    const double pref = 4.0 * units::pi * cfg.g[r] * cfg.g[r];
    const double d_pos = dos(+2.0 * cfg.coupling, cfg.delta[r], cfg.kappa[r]);
    const double d_neg = dos(-2.0 * cfg.coupling, cfg.delta[r], cfg.kappa[r]);
    rates.emit_upper[r] = pref * d_pos * (1.0 + cfg.nbar[r]);
    rates.absorb_upper[r] = pref * d_pos * cfg.nbar[r];
    rates.emit_lower[r] = pref * d_neg * (1.0 + cfg.nbar[r]);
    rates.absorb_lower[r] = pref * d_neg * cfg.nbar[r];
  }
  return rates;
}

struct DimerPopulations {
  double down_down = 0.0;
  double triplet = 0.0;
  double validity = 0.0;  // max_r D_r(+2J)/D_r(-2J); small = single-channel regime
};

// Single-channel equilibrium populations of the |T> <-> |down,down| channel.
inline DimerPopulations eq_populations(const DimerConfig& cfg) {
  const DimerChannelRates r = channel_rates(cfg);
  const double emit = r.emit_lower[0] + r.emit_lower[1];       // T -> dndn
  const double absorb = r.absorb_lower[0] + r.absorb_lower[1];  // dndn -> T
  const double total = emit + absorb;
  DimerPopulations pops;
  pops.down_down = emit / total;
  pops.triplet = absorb / total;
  for (int rr = 0; rr < 2; ++rr)
    pops.validity = std::max(pops.validity,
                             dos(+2.0 * cfg.coupling, cfg.delta[rr], cfg.kappa[rr]) /
                                 dos(-2.0 * cfg.coupling, cfg.delta[rr], cfg.kappa[rr]));
  return pops;
}

// Closed-form blockade current through the single active channel:
//   I_S = 4 pi |g_S g_D|^2 D_S(-2J) D_D(-2J) (n_S - n_D)
//         / sum_r |g_r|^2 D_r(-2J) (1 + 2 n_r).
inline double analytic_current(const DimerConfig& cfg) {
  cfg.validate();
  const double d_s = dos(-2.0 * cfg.coupling, cfg.delta[0], cfg.kappa[0]);
  const double d_d = dos(-2.0 * cfg.coupling, cfg.delta[1], cfg.kappa[1]);
  const double numerator = 4.0 * units::pi * cfg.g[0] * cfg.g[0] * cfg.g[1] * cfg.g[1] * d_s *
                           d_d * (cfg.nbar[0] - cfg.nbar[1]);
  const double denominator = cfg.g[0] * cfg.g[0] * d_s * (1.0 + 2.0 * cfg.nbar[0]) +
                             cfg.g[1] * cfg.g[1] * d_d * (1.0 + 2.0 * cfg.nbar[1]);
  if (denominator == 0.0) return 0.0;
  return numerator / denominator;
}

}  // namespace spinflow
