#pragma once

// Shared Lindblad-equation machinery: right-hand-side application for a
// Hamiltonian plus jump operators, vectorized superoperator assembly, and
// steady-state solvers (long-time propagation, sparse direct null-space,
// dense SVD null-space with conservation-law matching).

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "spinflow/linops.hpp"
#include "spinflow/ode.hpp"

namespace spinflow {

struct DensityCheck {
  double hermiticity = 0.0;
  double trace_deviation = 0.0;
  double min_eigenvalue = 0.0;
  bool ok(double herm_tol = 1e-12, double trace_tol = 1e-10, double pos_tol = -1e-9) const {
    return hermiticity < herm_tol && trace_deviation < trace_tol && min_eigenvalue >= pos_tol;
  }
};

inline DensityCheck check_density(const MatrixXcd& rho) {
  DensityCheck c;
  c.hermiticity = hermiticity_error(rho);
  c.trace_deviation = std::abs(rho.trace().real() - 1.0) + std::abs(rho.trace().imag());
  c.min_eigenvalue = min_eigenvalue(rho);
  return c;
}

inline MatrixXcd pure_density(const VectorXcd& psi) {
  return psi * psi.adjoint() / psi.squaredNorm();
}

// Time-independent Lindblad generator with sparse operators. Jump operators
// carry their sqrt(rate) prefactor.
struct LindbladOps {
  SparseMatrixXcd hamiltonian;
  std::vector<SparseMatrixXcd> jumps;

  // caches
  std::vector<SparseMatrixXcd> jumps_dag;
  SparseMatrixXcd half_sum_jdagj;  // 0.5 sum_k L_k^dag L_k
  long dim = 0;

  void finalize() {
    dim = hamiltonian.rows();
    jumps_dag.clear();
    SparseMatrixXcd acc(dim, dim);
    for (const auto& l : jumps) {
      jumps_dag.push_back(l.adjoint());
      acc += SparseMatrixXcd(l.adjoint() * l);
    }
    half_sum_jdagj = 0.5 * acc;
  }

  // out = -i[H, rho] + sum_k (L rho L^dag) - {A, rho} with A = 0.5 sum L^dag L.
  void apply(const MatrixXcd& rho, MatrixXcd& out) const {
    out.noalias() = Complex(0, -1) * (hamiltonian * rho);
    out.noalias() += Complex(0, 1) * (rho * hamiltonian);
    out.noalias() -= half_sum_jdagj * rho;
    out.noalias() -= rho * half_sum_jdagj;
    for (size_t k = 0; k < jumps.size(); ++k)
      out.noalias() += jumps[k] * rho * jumps_dag[k];
  }

  // Total jump-rate scale: sum_k tr(L^dag L) / dim, a characteristic
  // relaxation rate used to normalize convergence thresholds.
  double rate_scale() const {
    double tr = 0.0;
    for (long k = 0; k < half_sum_jdagj.outerSize(); ++k)
      for (SparseMatrixXcd::InnerIterator it(half_sum_jdagj, k); it; ++it)
        if (it.row() == it.col()) tr += 2.0 * it.value().real();
    return tr > 0 ? tr / double(dim) : 1.0;
  }

  // Column-major vectorization: d(vec rho)/dt = superoperator() * vec(rho).
  SparseMatrixXcd superoperator() const {
    const SparseMatrixXcd id = sparse_identity(dim);
    SparseMatrixXcd h_t = hamiltonian.transpose();
    SparseMatrixXcd sup = Complex(0, -1) * (kron(id, hamiltonian) - kron(h_t, id));
    for (const auto& l : jumps) {
      SparseMatrixXcd l_conj = l.conjugate();
      SparseMatrixXcd ldl = SparseMatrixXcd(l.adjoint() * l);
      SparseMatrixXcd ldl_t = ldl.transpose();
      sup += kron(l_conj, l);
      sup -= 0.5 * kron(id, ldl);
      sup -= 0.5 * kron(ldl_t, id);
    }
    return sup;
  }
};

struct SteadyStateOptions {
  double convergence = 1e-12;   // |d rho/dt|_max below convergence * rate scale
  double horizon_rates = 1e7;   // give up after this many 1/rate_scale
  int check_interval = 25;      // accepted steps between convergence checks
  OdeOptions ode{1e-10, 1e-14};
};

// Steady state by long-time propagation of the master equation.
inline MatrixXcd steady_state_propagate(const LindbladOps& ops, const MatrixXcd& rho0,
                                        const SteadyStateOptions& opt = {}) {
  const double scale = ops.rate_scale();
  const double tol = opt.convergence * scale;
  MatrixXcd rho = rho0;
  MatrixXcd deriv = rho;
  auto rhs = [&](double, const MatrixXcd& y, MatrixXcd& out) { ops.apply(y, out); };

  const double window = 20.0 / scale;
  double elapsed = 0.0;
  bool converged = false;
  while (!converged && elapsed < opt.horizon_rates / scale) {
    int counter = 0;
    integrate_dopri5_observed(
        rhs, rho, 0.0, window,
        [&](double, const MatrixXcd& y) {
          if (++counter % opt.check_interval != 0) return true;
          ops.apply(y, deriv);
          if (deriv.cwiseAbs().maxCoeff() < tol) {
            converged = true;
            return false;
          }
          return true;
        },
        opt.ode);
    if (!converged) {
      ops.apply(rho, deriv);
      converged = deriv.cwiseAbs().maxCoeff() < tol;
    }
    elapsed += window;
  }
  if (!converged)
    throw std::runtime_error("steady_state_propagate: no convergence within the configured horizon");
  // clean up residual asymmetry
  rho = 0.5 * (rho + rho.adjoint().eval());
  rho /= rho.trace().real();
  return rho;
}

// Steady state by a sparse direct solve of L vec(rho) = 0 with the trace
// normalization replacing one row. Requires a unique steady state (rank
// deficiency exactly one); dark sectors must be projected out beforehand.
inline MatrixXcd steady_state_direct(const LindbladOps& ops) {
  const long d = ops.dim;
  const long d2 = d * d;
  SparseMatrixXcd sup = ops.superoperator();

  // Replace the first row by the trace functional.
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(sup.nonZeros() + d);
  for (long k = 0; k < sup.outerSize(); ++k)
    for (SparseMatrixXcd::InnerIterator it(sup, k); it; ++it)
      if (it.row() != 0) trips.emplace_back(it.row(), it.col(), it.value());
  for (long i = 0; i < d; ++i) trips.emplace_back(0, i * d + i, Complex(1, 0));
  SparseMatrixXcd m(d2, d2);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();

  Eigen::SparseLU<SparseMatrixXcd> lu;
  lu.compute(m);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("steady_state_direct: factorization failed (degenerate steady state?)");
  VectorXcd b = VectorXcd::Zero(d2);
  b[0] = 1.0;
  VectorXcd x = lu.solve(b);

  const double residual = (sup * x).cwiseAbs().maxCoeff() / std::max(ops.rate_scale(), 1e-300);
  if (!(residual < 1e-6))
    throw std::runtime_error("steady_state_direct: null-space residual too large (" +
                             std::to_string(residual) + "); steady state may be non-unique");

  MatrixXcd rho = Eigen::Map<MatrixXcd>(x.data(), d, d);
  rho = 0.5 * (rho + rho.adjoint().eval());
  rho /= rho.trace().real();
  return rho;
}

// Steady state consistent with rho0 for a (small) generator given as a dense
// superoperator: SVD null space, with coefficients fixed by the conserved
// quantities (left null vectors).
inline MatrixXcd steady_state_nullspace_dense(const MatrixXcd& superop, const MatrixXcd& rho0,
                                              double rate_scale) {
  const long d2 = superop.rows();
  const long d = long(std::llround(std::sqrt(double(d2))));
  Eigen::JacobiSVD<MatrixXcd> svd(superop, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double tol = std::max(1e-12 * rate_scale, 1e-14 * sv.maxCoeff());
  int null_dim = 0;
  for (int i = int(sv.size()) - 1; i >= 0 && sv[i] < tol; --i) ++null_dim;
  if (null_dim == 0) throw std::runtime_error("steady_state_nullspace_dense: empty null space");

  const MatrixXcd v_null = svd.matrixV().rightCols(null_dim);   // right null basis
  const MatrixXcd w_null = svd.matrixU().rightCols(null_dim);   // left null basis
  const VectorXcd r0 = Eigen::Map<const VectorXcd>(rho0.data(), d2);

  // <w_j, x> must equal <w_j, rho0> for every conserved functional w_j.
  const MatrixXcd a = w_null.adjoint() * v_null;
  const VectorXcd rhs = w_null.adjoint() * r0;
  const VectorXcd c = a.fullPivLu().solve(rhs);
  VectorXcd x = v_null * c;

  MatrixXcd rho = Eigen::Map<MatrixXcd>(x.data(), d, d);
  rho = 0.5 * (rho + rho.adjoint().eval());
  const double tr = rho.trace().real();
  if (std::abs(tr) < 1e-10)
    throw std::runtime_error("steady_state_nullspace_dense: vanishing trace in null projection");
  rho /= tr;
  return rho;
}

// Partial trace over a tensor-product space with factor dimensions `dims`
// (leftmost factor is the most significant index), keeping factor `keep`.
inline MatrixXcd partial_trace_keep(const MatrixXcd& rho, const std::vector<long>& dims,
                                    size_t keep) {
  long total = 1;
  for (long d : dims) total *= d;
  if (rho.rows() != total) throw std::invalid_argument("partial_trace_keep: dimension mismatch");
  const long dk = dims[keep];
  long stride = 1;  // index stride of the kept factor
  for (size_t f = keep + 1; f < dims.size(); ++f) stride *= dims[f];
  const long outer = total / dk;  // combined dimension of all other factors

  MatrixXcd out = MatrixXcd::Zero(dk, dk);
  // enumerate the composite index of the traced factors
  for (long o = 0; o < outer; ++o) {
    const long low = o % stride;
    const long high = o / stride;
    const long base = high * stride * dk + low;
    for (long a = 0; a < dk; ++a)
      for (long b = 0; b < dk; ++b) out(a, b) += rho(base + a * stride, base + b * stride);
  }
  return out;
}

}  // namespace spinflow
