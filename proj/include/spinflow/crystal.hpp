#pragma once

// Equilibrium structure and normal modes of a linear mixed-species Coulomb
// crystal in a harmonic trap.
//
// Internally the axial problem is dimensionless: lengths in the Coulomb
// length l = (e^2 / 4 pi eps0 M w_z^2)^(1/3) and masses in units of a
// reference mass M (the first species in the arrangement unless overridden).
// The axial confinement is electrostatic, so every ion sees the same
// curvature M w_z^2; radial (pseudopotential) frequencies scale as
// w_alpha,i = w_alpha * (M / m_i).

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinflow/units.hpp"

namespace spinflow {

enum class IonRole { Coolant, Spin };

struct IonSpecies {
  std::string name;
  double mass_amu = 0.0;
  double linewidth = 0.0;  // natural decay rate of the cooling transition, rad/s
  IonRole role = IonRole::Spin;
};

struct TrapConfig {
  double omega_x = 0.0;  // rad/s
  double omega_y = 0.0;
  double omega_z = 0.0;

  void validate() const {
    if (omega_x <= 0 || omega_y <= 0 || omega_z <= 0)
      throw std::invalid_argument("TrapConfig: all trap frequencies must be positive");
    if (omega_z >= std::min(omega_x, omega_y))
      throw std::invalid_argument("TrapConfig: omega_z must be below both radial frequencies");
  }
};

struct CrystalArrangement {
  std::vector<IonSpecies> species;  // site order i = 0..N-1
  int reference_site = 0;           // species whose mass defines the unit system

  int size() const { return int(species.size()); }
  double reference_mass_kg() const {
    return units::amu_to_kg(species.at(reference_site).mass_amu);
  }
  std::vector<int> coolant_sites() const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
      if (species[i].role == IonRole::Coolant) out.push_back(i);
    return out;
  }
  std::vector<int> spin_sites() const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
      if (species[i].role == IonRole::Spin) out.push_back(i);
    return out;
  }
  void validate() const {
    if (species.empty()) throw std::invalid_argument("CrystalArrangement: empty");
    for (const auto& s : species) {
      if (s.mass_amu <= 0)
        throw std::invalid_argument("CrystalArrangement: mass must be positive");
      if (s.linewidth < 0) throw std::invalid_argument("CrystalArrangement: negative linewidth");
    }
  }
};

enum class Branch { X = 0, Y = 1, Z = 2 };

inline const char* branch_name(Branch b) {
  switch (b) {
    case Branch::X: return "x";
    case Branch::Y: return "y";
    default: return "z";
  }
}

struct NormalModes {
  // Per branch: ascending frequencies (rad/s) and mass-weighted displacement
  // matrix with modes as columns, sign-fixed so the largest-magnitude
  // component of each column is positive.
  std::array<Eigen::VectorXd, 3> frequencies;
  std::array<Eigen::MatrixXd, 3> displacements;
  Eigen::VectorXd positions_dimensionless;  // ascending
  Eigen::VectorXd positions_m;
  double length_scale_m = 0.0;
  double omega_z = 0.0;
  TrapConfig trap;

  const Eigen::VectorXd& branch_frequencies(Branch b) const { return frequencies[size_t(b)]; }
  const Eigen::MatrixXd& branch_displacements(Branch b) const { return displacements[size_t(b)]; }
};

namespace detail {

// Dimensionless axial potential of a linear chain: sum u_i^2/2 + sum 1/|u_ij|.
inline double chain_potential(const Eigen::VectorXd& u) {
  double v = 0.5 * u.squaredNorm();
  for (int i = 0; i < u.size(); ++i)
    for (int j = i + 1; j < u.size(); ++j) v += 1.0 / std::abs(u[i] - u[j]);
  return v;
}

inline Eigen::VectorXd chain_gradient(const Eigen::VectorXd& u) {
  Eigen::VectorXd g = u;
  for (int i = 0; i < u.size(); ++i)
    for (int j = 0; j < u.size(); ++j) {
      if (j == i) continue;
      const double d = u[i] - u[j];
      g[i] -= (d > 0 ? 1.0 : -1.0) / (d * d);
    }
  return g;
}

inline Eigen::MatrixXd chain_axial_hessian(const Eigen::VectorXd& u) {
  const int n = int(u.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double inv3 = 1.0 / std::pow(std::abs(u[i] - u[j]), 3);
      h(i, i) += 2.0 * inv3;
      h(i, j) -= 2.0 * inv3;
    }
  return h;
}

// Transverse curvature matrix for branch frequency ratio r = w_alpha/w_z;
// mu_i are masses in reference units.
inline Eigen::MatrixXd chain_radial_hessian(const Eigen::VectorXd& u,
                                            const Eigen::VectorXd& mu, double ratio) {
  const int n = int(u.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) h(i, i) = ratio * ratio / mu[i];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double inv3 = 1.0 / std::pow(std::abs(u[i] - u[j]), 3);
      h(i, i) -= inv3;
      h(i, j) += inv3;
    }
  return h;
}

// Deterministic sign convention: largest-magnitude component positive.
inline void fix_eigenvector_signs(Eigen::MatrixXd& vectors) {
  for (int c = 0; c < vectors.cols(); ++c) {
    Eigen::Index imax = 0;
    vectors.col(c).cwiseAbs().maxCoeff(&imax);
    if (vectors(imax, c) < 0) vectors.col(c) = -vectors.col(c);
  }
}

}  // namespace detail

// Dimensionless equilibrium positions (ascending) of the linear chain.
// The axial potential is species-independent, so this depends only on N.
inline Eigen::VectorXd equilibrium_positions_dimensionless(int n_ions) {
  if (n_ions < 1) throw std::invalid_argument("equilibrium_positions: need at least one ion");
  if (n_ions == 1) return Eigen::VectorXd::Zero(1);

  Eigen::VectorXd u(n_ions);
  for (int i = 0; i < n_ions; ++i) u[i] = 1.2 * (i - 0.5 * (n_ions - 1));

  double v = detail::chain_potential(u);
  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::VectorXd g = detail::chain_gradient(u);
    if (g.cwiseAbs().maxCoeff() < 1e-13) break;
    const Eigen::MatrixXd h = detail::chain_axial_hessian(u);
    Eigen::VectorXd step = h.ldlt().solve(-g);
    double lambda = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      Eigen::VectorXd trial = u + lambda * step;
      std::sort(trial.data(), trial.data() + trial.size());
      // reject collisions
      bool ok = true;
      for (int i = 0; i + 1 < n_ions; ++i)
        if (trial[i + 1] - trial[i] < 1e-8) ok = false;
      if (ok) {
        const double vt = detail::chain_potential(trial);
        if (vt < v + 1e-14 * std::abs(v)) {
          u = trial;
          v = vt;
          accepted = true;
          break;
        }
      }
      lambda *= 0.5;
    }
    if (!accepted) break;
  }
  const double residual = detail::chain_gradient(u).cwiseAbs().maxCoeff();
  if (residual > 1e-10)
    throw std::runtime_error("equilibrium_positions: Newton did not converge, |grad|_max = " +
                             std::to_string(residual));
  return u;
}

// Equilibrium positions in meters, checking radial (zig-zag) stability.
inline Eigen::VectorXd equilibrium_positions(const TrapConfig& trap,
                                             const CrystalArrangement& arrangement) {
  trap.validate();
  arrangement.validate();
  const int n = arrangement.size();
  const Eigen::VectorXd u = equilibrium_positions_dimensionless(n);

  Eigen::VectorXd mu(n);
  const double mref = arrangement.reference_mass_kg();
  for (int i = 0; i < n; ++i) mu[i] = units::amu_to_kg(arrangement.species[i].mass_amu) / mref;

  for (Branch b : {Branch::X, Branch::Y}) {
    const double ratio = (b == Branch::X ? trap.omega_x : trap.omega_y) / trap.omega_z;
    Eigen::MatrixXd h = detail::chain_radial_hessian(u, mu, ratio);
    Eigen::MatrixXd d = h;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) d(i, j) /= std::sqrt(mu[i] * mu[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d);
    Eigen::Index imin = 0;
    const double lmin = es.eigenvalues().minCoeff(&imin);
    if (lmin <= 0)
      throw std::runtime_error(std::string("equilibrium_positions: zig-zag instability in ") +
                               branch_name(b) + " branch, mode " + std::to_string(imin + 1) +
                               " has non-positive curvature");
  }

  const double ell = units::coulomb_length_m(mref, trap.omega_z);
  return u * ell;
}

// Normal modes of all three branches at the given equilibrium positions.
inline NormalModes normal_modes(const TrapConfig& trap, const CrystalArrangement& arrangement,
                                const Eigen::VectorXd& positions_m) {
  trap.validate();
  arrangement.validate();
  const int n = arrangement.size();
  if (positions_m.size() != n)
    throw std::invalid_argument("normal_modes: positions/arrangement size mismatch");

  const double mref = arrangement.reference_mass_kg();
  const double ell = units::coulomb_length_m(mref, trap.omega_z);
  const Eigen::VectorXd u = positions_m / ell;

  Eigen::VectorXd mu(n);
  for (int i = 0; i < n; ++i) mu[i] = units::amu_to_kg(arrangement.species[i].mass_amu) / mref;

  NormalModes modes;
  modes.positions_dimensionless = u;
  modes.positions_m = positions_m;
  modes.length_scale_m = ell;
  modes.omega_z = trap.omega_z;
  modes.trap = trap;

  for (Branch b : {Branch::X, Branch::Y, Branch::Z}) {
    Eigen::MatrixXd h;
    if (b == Branch::Z) {
      h = detail::chain_axial_hessian(u);
    } else {
      const double ratio = (b == Branch::X ? trap.omega_x : trap.omega_y) / trap.omega_z;
      h = detail::chain_radial_hessian(u, mu, ratio);
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) h(i, j) /= std::sqrt(mu[i] * mu[j]);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    Eigen::VectorXd lam = es.eigenvalues();
    Eigen::MatrixXd vec = es.eigenvectors();
    Eigen::Index imin = 0;
    if (lam.minCoeff(&imin) <= 0)
      throw std::runtime_error(std::string("normal_modes: unstable crystal, ") + branch_name(b) +
                               " branch mode " + std::to_string(imin + 1) +
                               " has non-positive curvature");
    detail::fix_eigenvector_signs(vec);
    modes.frequencies[size_t(b)] = lam.cwiseSqrt() * trap.omega_z;
    modes.displacements[size_t(b)] = vec;
  }
  return modes;
}

}  // namespace spinflow
