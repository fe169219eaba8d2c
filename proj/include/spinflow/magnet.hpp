#pragma once

// Synthetic spin models on the non-cooled sites of the crystal: Hamiltonian
// assembly, eigen-decomposition with a drive-adapted basis inside degenerate
// blocks, and the transition tables (frequencies, dressed couplings) that
// feed the transport master equation.

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinflow/crystal.hpp"
#include "spinflow/linops.hpp"
#include "spinflow/reservoir.hpp"

namespace spinflow {

enum class SpinModelKind { Ising, XY, XXZ, XYZ };

inline const char* spin_model_name(SpinModelKind k) {
  switch (k) {
    case SpinModelKind::Ising: return "ising";
    case SpinModelKind::XY: return "xy";
    case SpinModelKind::XXZ: return "xxz";
    default: return "xyz";
  }
}

// Spin-chain model. The transverse field is along x for the Ising kind and
// along z for the others; the Ising pair term is J_ij (sigma^z sigma^z + 1),
// which pins the dimer spectrum to {0, 0, 2J, 2J}.
struct SpinModel {
  SpinModelKind kind = SpinModelKind::Ising;
  int n_spins = 0;
  double field = 0.0;  // rad/s
  Eigen::MatrixXd jx, jy, jz;  // rad/s, symmetric, zero diagonal

  static SpinModel ising(int n, double h, Eigen::MatrixXd couplings) {
    SpinModel m{SpinModelKind::Ising, n, h, Eigen::MatrixXd::Zero(n, n),
                Eigen::MatrixXd::Zero(n, n), std::move(couplings)};
    m.validate();
    return m;
  }
  static SpinModel xy(int n, double h, Eigen::MatrixXd jx, Eigen::MatrixXd jy) {
    SpinModel m{SpinModelKind::XY, n, h, std::move(jx), std::move(jy),
                Eigen::MatrixXd::Zero(n, n)};
    m.validate();
    return m;
  }
  static SpinModel xxz(int n, double h, Eigen::MatrixXd jperp, Eigen::MatrixXd jpar) {
    SpinModel m{SpinModelKind::XXZ, n, h, jperp, jperp, std::move(jpar)};
    m.validate();
    return m;
  }
  static SpinModel xyz(int n, double h, Eigen::MatrixXd jx, Eigen::MatrixXd jy,
                       Eigen::MatrixXd jz) {
    SpinModel m{SpinModelKind::XYZ, n, h, std::move(jx), std::move(jy), std::move(jz)};
    m.validate();
    return m;
  }

  void validate() const {
    if (n_spins < 1) throw std::invalid_argument("SpinModel: need at least one spin");
    auto check = [&](const Eigen::MatrixXd& j, const char* name) {
      if (j.rows() != n_spins || j.cols() != n_spins)
        throw std::invalid_argument(std::string("SpinModel: ") + name + " has wrong shape");
      if ((j - j.transpose()).cwiseAbs().maxCoeff() > 0)
        throw std::invalid_argument(std::string("SpinModel: ") + name + " must be symmetric");
      if (j.diagonal().cwiseAbs().maxCoeff() > 0)
        throw std::invalid_argument(std::string("SpinModel: ") + name + " must have zero diagonal");
    };
    check(jx, "J^x");
    check(jy, "J^y");
    check(jz, "J^z");
    switch (kind) {
      case SpinModelKind::Ising:
        if (jx.cwiseAbs().maxCoeff() > 0 || jy.cwiseAbs().maxCoeff() > 0)
          throw std::invalid_argument("SpinModel: Ising kind allows only J^z couplings");
        break;
      case SpinModelKind::XY:
        if (jz.cwiseAbs().maxCoeff() > 0)
          throw std::invalid_argument("SpinModel: XY kind forbids J^z couplings");
        break;
      case SpinModelKind::XXZ:
        if ((jx - jy).cwiseAbs().maxCoeff() > 0)
          throw std::invalid_argument("SpinModel: XXZ kind requires J^x = J^y");
        break;
      case SpinModelKind::XYZ:
        break;
    }
  }
};

inline constexpr int kDefaultSpinCap = 12;

// Dense Hermitian Hamiltonian of the model, dimension 2^N.
inline MatrixXcd build_hamiltonian(const SpinModel& model, int spin_cap = kDefaultSpinCap) {
  model.validate();
  if (model.n_spins > spin_cap)
    throw std::runtime_error("build_hamiltonian: " + std::to_string(model.n_spins) +
                             " spins exceeds the dense cap of " + std::to_string(spin_cap));
  const int n = model.n_spins;
  const long dim = 1L << n;
  MatrixXcd h = MatrixXcd::Zero(dim, dim);

  const char field_axis = model.kind == SpinModelKind::Ising ? 'x' : 'z';
  for (int i = 0; i < n; ++i)
    if (model.field != 0.0) h -= model.field * MatrixXcd(spin_op(n, i, field_axis));

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (model.jx(i, j) != 0.0) h += model.jx(i, j) * MatrixXcd(spin_pair_op(n, i, j, 'x'));
      if (model.jy(i, j) != 0.0) h += model.jy(i, j) * MatrixXcd(spin_pair_op(n, i, j, 'y'));
      if (model.jz(i, j) != 0.0) {
        h += model.jz(i, j) * MatrixXcd(spin_pair_op(n, i, j, 'z'));
        if (model.kind == SpinModelKind::Ising)
          h += model.jz(i, j) * MatrixXcd::Identity(dim, dim);
      }
    }
  return h;
}

struct SpinSpectrum {
  Eigen::VectorXd energies;   // ascending, rad/s
  MatrixXcd states;           // columns, computational basis
  std::vector<std::pair<int, int>> blocks;  // degenerate groups: (first index, size)
  double degeneracy_tolerance = 0.0;

  int dimension() const { return int(energies.size()); }
  double omega(int l, int lp) const { return energies[l] - energies[lp]; }

  // rho in the computational basis -> eigenbasis, and back.
  MatrixXcd to_eigenbasis(const MatrixXcd& rho) const { return states.adjoint() * rho * states; }
  MatrixXcd to_computational(const MatrixXcd& rho) const { return states * rho * states.adjoint(); }
};

namespace detail {

inline void phase_fix_columns(MatrixXcd& v) {
  for (int c = 0; c < v.cols(); ++c) {
    Eigen::Index imax = 0;
    v.col(c).cwiseAbs().maxCoeff(&imax);
    const Complex z = v(imax, c);
    if (std::abs(z) > 0) v.col(c) *= std::conj(z) / std::abs(z);
  }
}

}  // namespace detail

// Hermitian eigensolve with degeneracy grouping. `frequency_floor` sets the
// absolute scale of the grouping tolerance 1e-9 * max(spectral radius, floor).
inline SpinSpectrum diagonalize(const MatrixXcd& h, double frequency_floor = 1.0) {
  if (h.rows() != h.cols()) throw std::invalid_argument("diagonalize: non-square matrix");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
  if (es.info() != Eigen::Success) throw std::runtime_error("diagonalize: eigensolver failed");

  SpinSpectrum spec;
  spec.energies = es.eigenvalues();
  spec.states = es.eigenvectors();
  detail::phase_fix_columns(spec.states);

  const double scale = std::max(spec.energies.cwiseAbs().maxCoeff(), frequency_floor);
  spec.degeneracy_tolerance = 1e-9 * scale;
  int start = 0;
  for (int l = 1; l <= spec.dimension(); ++l) {
    if (l == spec.dimension() || spec.energies[l] - spec.energies[start] > spec.degeneracy_tolerance) {
      spec.blocks.emplace_back(start, l - start);
      start = l;
    }
  }
  return spec;
}

// Exchange drive of the two sideband lasers: site couplings on the spin
// register (zero entries for sites not addressed) and sideband detunings.
struct ExchangeDrive {
  std::array<VectorXcd, 2> couplings;  // g_{i,r}, rad/s, indexed by reservoir
  std::array<double, 2> deltas{};      // delta_r, rad/s

  const VectorXcd& g(ReservoirLabel r) const { return couplings[size_t(r)]; }
  double delta(ReservoirLabel r) const { return deltas[size_t(r)]; }

  static ExchangeDrive homogeneous(int n_spins, Complex g_source, Complex g_drain,
                                   double delta_source, double delta_drain) {
    ExchangeDrive d;
    d.couplings[0] = VectorXcd::Constant(n_spins, g_source);
    d.couplings[1] = VectorXcd::Constant(n_spins, g_drain);
    d.deltas = {delta_source, delta_drain};
    return d;
  }
};

// Transition tables in the (drive-adapted) eigenbasis: frequencies
// omega_{l,l'} and dressed couplings gtilde_{l,l',r} = sum_i g_{i,r}
// <l| sigma_i^+ |l'>.
struct TransitionData {
  SpinSpectrum spectrum;               // eigenbasis after block rotation
  std::array<MatrixXcd, 2> gtilde;     // per reservoir, (l, l') indexed
  std::array<double, 2> deltas{};

  double omega(int l, int lp) const { return spectrum.omega(l, lp); }
  const MatrixXcd& g(ReservoirLabel r) const { return gtilde[size_t(r)]; }
  double delta(ReservoirLabel r) const { return deltas[size_t(r)]; }
};

// Builds the transition tables. Inside each degenerate block the basis is
// rotated to diagonalize the summed coupling Gram matrix
//   sum_r P_B (S_r^- P_out S_r^+ + S_r^+ P_out S_r^-) P_B,
// so dark combinations (zero coupling to every reservoir, e.g. the dimer
// singlet) come out as basis states instead of depending on eigensolver
// ordering.
inline TransitionData transition_data(const SpinSpectrum& spectrum, const ExchangeDrive& drive,
                                      int n_spins) {
  const long dim = 1L << n_spins;
  if (spectrum.dimension() != dim)
    throw std::invalid_argument("transition_data: spectrum/drive size mismatch");

  std::array<SparseMatrixXcd, 2> raising;
  for (int r = 0; r < 2; ++r) {
    if (drive.couplings[r].size() != n_spins)
      throw std::invalid_argument("transition_data: coupling vector has wrong length");
    SparseMatrixXcd s(dim, dim);
    for (int i = 0; i < n_spins; ++i) {
      const Complex gi = drive.couplings[r][i];
      if (gi != Complex(0, 0)) s += SparseMatrixXcd(gi * spin_op(n_spins, i, '+'));
    }
    raising[r] = s;
  }

  TransitionData data;
  data.spectrum = spectrum;
  data.deltas = drive.deltas;
  MatrixXcd& v = data.spectrum.states;

  for (const auto& [first, size] : spectrum.blocks) {
    if (size < 2) continue;
    MatrixXcd vb = v.middleCols(first, size);
    MatrixXcd vo(v.rows(), v.cols() - size);
    vo << v.leftCols(first), v.rightCols(v.cols() - first - size);
    MatrixXcd gram = MatrixXcd::Zero(size, size);
    for (int r = 0; r < 2; ++r) {
      const MatrixXcd up = vo.adjoint() * (raising[r] * vb);
      const MatrixXcd down = vo.adjoint() * (raising[r].adjoint() * vb);
      gram += up.adjoint() * up + down.adjoint() * down;
    }
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(gram);
    v.middleCols(first, size) = vb * es.eigenvectors();
  }
  detail::phase_fix_columns(v);

  for (int r = 0; r < 2; ++r) data.gtilde[r] = v.adjoint() * (raising[r] * v);
  return data;
}

// Phonon-mediated spin-spin couplings from a state-dependent dipole force of
// amplitude F x0 (rad/s) on branch `branch`, driven at beat frequency
// mu_L = max_n w_n + detuning:
//   J_ij = (F x0)^2/2 sum_n M_in M_jn (w_br / w_n) / (mu_L - w_n),
// restricted to the spin sites of the arrangement. Blue detuning above the
// whole branch makes every denominator positive (antiferromagnetic J).
inline Eigen::MatrixXd mediated_couplings(const NormalModes& modes,
                                          const CrystalArrangement& arrangement,
                                          double force_amplitude, double detuning_above_branch,
                                          Branch branch = Branch::X,
                                          double guard_fraction = 1e-3,
                                          std::optional<int> only_mode = std::nullopt) {
  const auto& freqs = modes.branch_frequencies(branch);
  const auto& disp = modes.branch_displacements(branch);
  const auto spins = arrangement.spin_sites();
  const int ns = int(spins.size());

  const double omega_trap = branch == Branch::X   ? modes.trap.omega_x
                            : branch == Branch::Y ? modes.trap.omega_y
                                                  : modes.trap.omega_z;
  const double omega_top = freqs.maxCoeff();
  const double mu_l = omega_top + detuning_above_branch;
  const double guard = guard_fraction * omega_top;
  for (int n = 0; n < freqs.size(); ++n)
    if (std::abs(mu_l - freqs[n]) < guard)
      throw std::runtime_error("mediated_couplings: drive within the guard band of " +
                               std::string(branch_name(branch)) + " mode " + std::to_string(n + 1));

  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(ns, ns);
  const double pref = 0.5 * force_amplitude * force_amplitude;
  for (int a = 0; a < ns; ++a)
    for (int b = a + 1; b < ns; ++b) {
      double sum = 0.0;
      for (int n = 0; n < freqs.size(); ++n) {
        if (only_mode && *only_mode != n) continue;
        sum += disp(spins[a], n) * disp(spins[b], n) * (omega_trap / freqs[n]) / (mu_l - freqs[n]);
      }
      j(a, b) = j(b, a) = pref * sum;
    }
  return j;
}

}  // namespace spinflow
