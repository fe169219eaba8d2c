#pragma once

// Dense/sparse operator helpers for spin-1/2 registers and bosonic modes.
//
// Basis conventions: a register of N spins uses computational-basis indices
// b = sum_i s_i 2^i with s_i = 1 for |up> on site i (site 0 is the least
// significant bit). Pauli raising sigma^+ maps |down> -> |up>.

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace spinflow {

using Complex = std::complex<double>;
using MatrixXcd = Eigen::MatrixXcd;
using VectorXcd = Eigen::VectorXcd;
using MatrixXd = Eigen::MatrixXd;
using VectorXd = Eigen::VectorXd;
using SparseMatrixXcd = Eigen::SparseMatrix<Complex>;

inline constexpr Complex imag_unit{0.0, 1.0};

// Single-site Pauli operator embedded in an N-spin register. `pauli` is one
// of 'x','y','z','+','-'.
inline SparseMatrixXcd spin_op(int n_spins, int site, char pauli) {
  if (site < 0 || site >= n_spins) throw std::invalid_argument("spin_op: site out of range");
  const long dim = 1L << n_spins;
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(dim);
  const long bit = 1L << site;
  for (long b = 0; b < dim; ++b) {
    const bool up = (b & bit) != 0;
    switch (pauli) {
      case 'z':
        trips.emplace_back(b, b, up ? 1.0 : -1.0);
        break;
      case 'x':
        trips.emplace_back(b ^ bit, b, 1.0);
        break;
      case 'y':
        // sigma^y |down> = i |up>, sigma^y |up> = -i |down>
        trips.emplace_back(b ^ bit, b, up ? Complex(0, -1) : Complex(0, 1));
        break;
      case '+':
        if (!up) trips.emplace_back(b | bit, b, 1.0);
        break;
      case '-':
        if (up) trips.emplace_back(b & ~bit, b, 1.0);
        break;
      default:
        throw std::invalid_argument("spin_op: unknown pauli");
    }
  }
  SparseMatrixXcd op(dim, dim);
  op.setFromTriplets(trips.begin(), trips.end());
  return op;
}

// Product of the same Pauli on two sites, e.g. sigma_i^z sigma_j^z.
inline SparseMatrixXcd spin_pair_op(int n_spins, int i, int j, char pauli) {
  return SparseMatrixXcd(spin_op(n_spins, i, pauli) * spin_op(n_spins, j, pauli));
}

// Bosonic annihilation operator on a truncated Fock space {0..n_max}.
inline SparseMatrixXcd boson_annihilation(int n_max) {
  const int dim = n_max + 1;
  std::vector<Eigen::Triplet<Complex>> trips;
  for (int n = 1; n < dim; ++n) trips.emplace_back(n - 1, n, std::sqrt(double(n)));
  SparseMatrixXcd a(dim, dim);
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

inline SparseMatrixXcd sparse_identity(long dim) {
  SparseMatrixXcd id(dim, dim);
  id.setIdentity();
  return id;
}

// Kronecker product for sparse operators, A (x) B.
inline SparseMatrixXcd kron(const SparseMatrixXcd& a, const SparseMatrixXcd& b) {
  SparseMatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(size_t(a.nonZeros()) * size_t(b.nonZeros()));
  for (int ka = 0; ka < a.outerSize(); ++ka)
    for (SparseMatrixXcd::InnerIterator ita(a, ka); ita; ++ita)
      for (int kb = 0; kb < b.outerSize(); ++kb)
        for (SparseMatrixXcd::InnerIterator itb(b, kb); itb; ++itb)
          trips.emplace_back(ita.row() * b.rows() + itb.row(),
                             ita.col() * b.cols() + itb.col(),
                             ita.value() * itb.value());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

inline double hermiticity_error(const MatrixXcd& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// Smallest eigenvalue of the Hermitian part; used for positivity checks.
inline double min_eigenvalue(const MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es((m + m.adjoint()) / 2.0);
  return es.eigenvalues().minCoeff();
}

}  // namespace spinflow
