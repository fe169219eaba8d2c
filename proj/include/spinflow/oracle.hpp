#pragma once

// Brute-force ground truth: the full Lindblad dynamics of the spins together
// with the two laser-cooled modes on a truncated Fock space, in the frame
// co-rotating with both sideband drives (every drive phase is absorbed, so
// the composite generator is time independent). The cooling dissipator is
// invariant under that frame change. Validates the adiabatic elimination
// behind the transport module.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinflow/lindblad.hpp"
#include "spinflow/magnet.hpp"
#include "spinflow/transport.hpp"

namespace spinflow {

struct OracleConfig {
  SpinModel model;
  ExchangeDrive drive;
  std::array<double, 2> kappa{};  // population damping rate of each mode, rad/s
  std::array<double, 2> nbar{};   // target thermal occupation
  int n_max = 6;                  // Fock truncation per mode
  int n_max_cap = 14;
  long dimension_cap = 4096;
  double truncation_threshold = 1e-4;  // max tolerated top-Fock population
  // Restrict the spin space to eigenstates reachable from this computational
  // state through the exchange couplings (drops e.g. the dimer dark singlet).
  VectorXcd initial_spin_state;
};

struct FullModel {
  OracleConfig config;
  SpinSpectrum spectrum;          // drive-adapted eigenbasis of the magnet
  std::vector<int> kept;          // eigenstate indices kept in the composite space
  LindbladOps ops;                // composite generator
  std::vector<long> dims;         // {spin, fock, fock}
  std::array<SparseMatrixXcd, 2> mode_number;    // a^dag a embedded per mode
  std::array<SparseMatrixXcd, 2> mode_antinumber;  // a a^dag on the truncated ladder

  long dimension() const { return ops.dim; }
};

namespace detail {

// Eigenstates reachable from the support of `spin_state` via nonzero dressed
// couplings of either reservoir.
inline std::vector<int> reachable_eigenstates(const TransitionData& transitions,
                                              const VectorXcd& spin_state) {
  const int d = transitions.spectrum.dimension();
  double gmax = 0.0;
  for (int r = 0; r < 2; ++r)
    gmax = std::max(gmax, transitions.gtilde[r].cwiseAbs().maxCoeff());
  const double cutoff = 1e-12 * std::max(gmax, 1e-300);

  const VectorXcd amplitudes = transitions.spectrum.states.adjoint() * spin_state;
  std::vector<bool> in(d, false);
  std::vector<int> stack;
  for (int l = 0; l < d; ++l)
    if (std::abs(amplitudes[l]) > 1e-12) {
      in[l] = true;
      stack.push_back(l);
    }
  while (!stack.empty()) {
    const int l = stack.back();
    stack.pop_back();
    for (int m = 0; m < d; ++m) {
      if (in[m]) continue;
      bool coupled = false;
      for (int r = 0; r < 2 && !coupled; ++r)
        coupled = std::abs(transitions.gtilde[r](l, m)) > cutoff ||
                  std::abs(transitions.gtilde[r](m, l)) > cutoff;
      if (coupled) {
        in[m] = true;
        stack.push_back(m);
      }
    }
  }
  std::vector<int> kept;
  for (int l = 0; l < d; ++l)
    if (in[l]) kept.push_back(l);
  return kept;
}

}  // namespace detail

inline FullModel build_full(const OracleConfig& config) {
  for (int r = 0; r < 2; ++r) {
    if (config.kappa[r] <= 0) throw std::invalid_argument("build_full: kappa must be positive");
    if (config.nbar[r] < 0) throw std::invalid_argument("build_full: nbar must be non-negative");
  }
  FullModel model;
  model.config = config;

  const MatrixXcd h_m = build_hamiltonian(config.model);
  const SpinSpectrum bare = diagonalize(h_m);
  const TransitionData transitions = transition_data(bare, config.drive, config.model.n_spins);
  model.spectrum = transitions.spectrum;

  VectorXcd seed = config.initial_spin_state;
  if (seed.size() == 0) {
    seed = VectorXcd::Zero(1L << config.model.n_spins);
    seed[0] = 1.0;  // all spins down
  }
  model.kept = detail::reachable_eigenstates(transitions, seed);
  const long ds = long(model.kept.size());
  const long f = config.n_max + 1;
  const long dim = ds * f * f;
  if (dim > config.dimension_cap)
    throw std::runtime_error("build_full: composite dimension " + std::to_string(dim) +
                             " exceeds the cap of " + std::to_string(config.dimension_cap));
  model.dims = {ds, f, f};

  // restricted spin blocks
  MatrixXcd eps = MatrixXcd::Zero(ds, ds);
  std::array<MatrixXcd, 2> g_block;
  for (int r = 0; r < 2; ++r) g_block[r] = MatrixXcd::Zero(ds, ds);
  for (long a = 0; a < ds; ++a) {
    eps(a, a) = model.spectrum.energies[model.kept[a]];
    for (long b = 0; b < ds; ++b)
      for (int r = 0; r < 2; ++r)
        g_block[r](a, b) = transitions.gtilde[r](model.kept[a], model.kept[b]);
  }

  const SparseMatrixXcd id_s = sparse_identity(ds);
  const SparseMatrixXcd id_f = sparse_identity(f);
  const SparseMatrixXcd a_op = boson_annihilation(config.n_max);
  const SparseMatrixXcd n_op = SparseMatrixXcd(SparseMatrixXcd(a_op.adjoint()) * a_op);

  // In the frame where the exchange term g sigma^+ a e^{-i delta t} becomes
  // static, each mode picks up +delta_r n_r; a transition |d> -> |u| that
  // annihilates a phonon then conserves energy exactly at delta_r =
  // omega_{u,d}, matching the Lorentzian center of the effective theory.
  SparseMatrixXcd h = kron(SparseMatrixXcd(eps.sparseView()), kron(id_f, id_f));
  h += config.drive.delta(ReservoirLabel::Source) * kron(id_s, kron(n_op, id_f));
  h += config.drive.delta(ReservoirLabel::Drain) * kron(id_s, kron(id_f, n_op));
  {
    const SparseMatrixXcd gs = g_block[0].sparseView();
    const SparseMatrixXcd gd = g_block[1].sparseView();
    SparseMatrixXcd exch = kron(gs, kron(a_op, id_f)) + kron(gd, kron(id_f, a_op));
    h += exch + SparseMatrixXcd(exch.adjoint());
  }
  model.ops.hamiltonian = h;

  for (int r = 0; r < 2; ++r) {
    const SparseMatrixXcd a_r = r == 0 ? kron(id_s, kron(a_op, id_f)) : kron(id_s, kron(id_f, a_op));
    const double cool = config.kappa[r] * (1.0 + config.nbar[r]);
    const double heat = config.kappa[r] * config.nbar[r];
    model.ops.jumps.push_back(SparseMatrixXcd(std::sqrt(cool) * a_r));
    if (heat > 0)
      model.ops.jumps.push_back(SparseMatrixXcd(std::sqrt(heat) * SparseMatrixXcd(a_r.adjoint())));
    model.mode_number[r] = SparseMatrixXcd(SparseMatrixXcd(a_r.adjoint()) * a_r);
    model.mode_antinumber[r] = SparseMatrixXcd(a_r * SparseMatrixXcd(a_r.adjoint()));
  }
  model.ops.finalize();
  return model;
}

// Thermal mode state at occupation nbar on the truncated Fock space.
inline MatrixXcd thermal_state(int n_max, double nbar) {
  VectorXd p(n_max + 1);
  if (nbar <= 0) {
    p.setZero();
    p[0] = 1.0;
  } else {
    for (int n = 0; n <= n_max; ++n) p[n] = std::pow(nbar / (1.0 + nbar), n) / (1.0 + nbar);
  }
  p /= p.sum();
  MatrixXcd rho = MatrixXcd::Zero(n_max + 1, n_max + 1);
  rho.diagonal() = p.cast<Complex>();
  return rho;
}

// Default composite initial state: the configured spin state (projected onto
// the kept eigenstates) times thermal modes at the target occupations.
inline MatrixXcd initial_state(const FullModel& model) {
  VectorXcd seed = model.config.initial_spin_state;
  if (seed.size() == 0) {
    seed = VectorXcd::Zero(1L << model.config.model.n_spins);
    seed[0] = 1.0;
  }
  const VectorXcd amp_full = model.spectrum.states.adjoint() * seed;
  VectorXcd amp(model.kept.size());
  for (size_t a = 0; a < model.kept.size(); ++a) amp[long(a)] = amp_full[model.kept[a]];
  const double norm = amp.norm();
  if (norm < 1e-12)
    throw std::runtime_error("initial_state: spin state has no weight on the kept subspace");
  amp /= norm;
  MatrixXcd rho_spin = amp * amp.adjoint();
  const MatrixXcd th_s = thermal_state(model.config.n_max, model.config.nbar[0]);
  const MatrixXcd th_d = thermal_state(model.config.n_max, model.config.nbar[1]);

  const long ds = model.dims[0], fdim = model.dims[1];
  MatrixXcd rho(model.dimension(), model.dimension());
  for (long a = 0; a < ds; ++a)
    for (long b = 0; b < ds; ++b)
      for (long m = 0; m < fdim; ++m)
        for (long n = 0; n < fdim; ++n)
          rho.block(a * fdim * fdim + m * fdim, b * fdim * fdim + n * fdim, fdim, fdim) =
              rho_spin(a, b) * th_s(m, n) * th_d;
  return rho;
}

enum class OracleMethod { Direct, Propagate };

// Steady state of the composite model; Direct solves the sparse Liouvillian
// null space, Propagate integrates to the transport convergence criterion.
inline MatrixXcd full_steady_state(const FullModel& model, const MatrixXcd& rho0,
                                   OracleMethod method = OracleMethod::Direct,
                                   const SteadyStateOptions& opt = {}) {
  if (rho0.rows() != model.dimension())
    throw std::invalid_argument("full_steady_state: dimension mismatch");
  if (method == OracleMethod::Direct) return steady_state_direct(model.ops);
  return steady_state_propagate(model.ops, rho0, opt);
}

struct OracleCurrent {
  double drain_side = 0.0;   // net flux into the drain bath above its unbiased value
  double source_side = 0.0;  // negative of the above at steady state
};

// Net quanta dissipated into each electromagnetic bath: cooling events minus
// heating events, kappa (1+nbar) <a^dag a> - kappa nbar <a a^dag>, with the
// operator products taken on the truncated ladder exactly as in the jump
// operators (so total-excitation bookkeeping balances to round-off).
inline OracleCurrent full_current(const FullModel& model, const MatrixXcd& rho) {
  OracleCurrent cur;
  auto flux = [&](int r) {
    const double n = (MatrixXcd(model.mode_number[r]) * rho).trace().real();
    const double anti = (MatrixXcd(model.mode_antinumber[r]) * rho).trace().real();
    return model.config.kappa[r] * ((1.0 + model.config.nbar[r]) * n - model.config.nbar[r] * anti);
  };
  cur.source_side = flux(0);
  cur.drain_side = flux(1);
  return cur;
}

struct OracleSolution {
  FullModel model;      // with the accepted n_max
  MatrixXcd steady;     // composite steady state
  MatrixXcd magnet;     // reduced magnet state on the kept eigenstates
  MatrixXcd mode_source, mode_drain;
  OracleCurrent current;
  double top_fock = 0.0;  // worst top-Fock population at the accepted truncation
};

// Runs the truncation adequacy loop: solve, inspect the top Fock level of
// both reduced modes, and raise n_max by 2 until the population is below the
// configured threshold or the cap is hit.
inline OracleSolution solve_oracle(OracleConfig config, OracleMethod method = OracleMethod::Direct,
                                   const SteadyStateOptions& opt = {}) {
  while (true) {
    OracleSolution sol{build_full(config), {}, {}, {}, {}, {}, 0.0};
    const MatrixXcd rho0 = initial_state(sol.model);
    sol.steady = full_steady_state(sol.model, rho0, method, opt);
    sol.magnet = partial_trace_keep(sol.steady, sol.model.dims, 0);
    sol.mode_source = partial_trace_keep(sol.steady, sol.model.dims, 1);
    sol.mode_drain = partial_trace_keep(sol.steady, sol.model.dims, 2);
    const long top = config.n_max;
    sol.top_fock = std::max(sol.mode_source(top, top).real(), sol.mode_drain(top, top).real());
    sol.current = full_current(sol.model, sol.steady);
    if (sol.top_fock < config.truncation_threshold) return sol;
    if (config.n_max + 2 > config.n_max_cap)
      throw std::runtime_error("solve_oracle: truncation inadequate at the n_max cap (top-Fock " +
                               std::to_string(sol.top_fock) + ")");
    config.n_max += 2;
  }
}

}  // namespace spinflow
