#pragma once

// Reduced master equation for the magnet after adiabatic elimination of the
// laser-cooled reservoir modes: Lamb shifts, transition rates built from the
// dressed couplings, Bose occupations and the Lorentzian density of states,
// plus steady states, time evolution and the quanta current.

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinflow/lindblad.hpp"
#include "spinflow/magnet.hpp"
#include "spinflow/ode.hpp"
#include "spinflow/reservoir.hpp"
#include "spinflow/sweep.hpp"
#include "spinflow/units.hpp"

namespace spinflow {

struct TransportReservoir {
  double kappa = 0.0;   // Lorentzian width, rad/s
  double nbar = 0.0;    // Bose occupation at the mode frequency
  double delta = 0.0;   // sideband detuning (Lorentzian center), rad/s
  double omega = 0.0;   // mode frequency, rad/s (energy-current bookkeeping)

  static TransportReservoir from_spec(const ReservoirSpec& s) {
    return {s.kappa, s.nbar, s.delta, s.omega};
  }
};

// One allowed sigma^+ transition |d> -> |u| with its per-reservoir rates.
struct TransportChannel {
  int upper = 0, lower = 0;
  double omega = 0.0;                     // eps_u - eps_d
  std::array<Complex, 2> gtilde{};        // dressed coupling per reservoir
  std::array<double, 2> dos_value{};      // D_r(omega)
  std::array<double, 2> rate_absorb{};    // Gamma_{Mr}(u,d): lower -> upper
  std::array<double, 2> rate_emit{};      // Gamma_{rM}(d,u): upper -> lower
};

enum class CoherenceMode { Secular, Nonsecular };
enum class SteadyMethod { Nullspace, Propagate, CrossCheck };

struct TransportOptions {
  CoherenceMode mode = CoherenceMode::Secular;
  double validity_warn = 0.1;   // |g|/kappa above this: warning
  double validity_error = 0.5;  // above this: hard error
  double channel_cutoff = 1e-14;  // relative |gtilde| below which a channel is dropped
};

struct TransportGenerator {
  SpinSpectrum spectrum;  // drive-adapted eigenbasis
  std::array<TransportReservoir, 2> reservoirs;
  std::vector<TransportChannel> channels;
  Eigen::VectorXd lamb_shifts;       // per level, summed over reservoirs
  Eigen::MatrixXd rate_matrix;       // population generator: dp/dt = R p
  Eigen::VectorXd coherence_decay;   // gamma_l = <l| sum L^dag L |l>
  CoherenceMode mode = CoherenceMode::Secular;
  std::vector<std::string> warnings;
  double rate_scale = 0.0;  // sum of all channel rates

  int dimension() const { return spectrum.dimension(); }
  const TransportReservoir& reservoir(ReservoirLabel r) const { return reservoirs[size_t(r)]; }

  // Collective jump operators (absorption/emission per reservoir) realizing
  // the non-secular completion; in the secular mode each channel is its own
  // jump operator and these are not used.
  std::array<MatrixXcd, 2> collective_absorb;
  std::array<MatrixXcd, 2> collective_emit;
};

inline TransportGenerator build_generator(const TransitionData& transitions,
                                          const std::array<TransportReservoir, 2>& reservoirs,
                                          const TransportOptions& opt = {}) {
  TransportGenerator gen;
  gen.spectrum = transitions.spectrum;
  gen.reservoirs = reservoirs;
  gen.mode = opt.mode;
  const int d = gen.dimension();

  double gmax = 0.0;
  for (int r = 0; r < 2; ++r) gmax = std::max(gmax, transitions.gtilde[r].cwiseAbs().maxCoeff());
  for (int r = 0; r < 2; ++r) {
    if (reservoirs[r].kappa <= 0)
      throw std::invalid_argument("build_generator: kappa must be positive");
    if (reservoirs[r].nbar < 0)
      throw std::invalid_argument("build_generator: nbar must be non-negative");
    const double ratio = transitions.gtilde[r].cwiseAbs().maxCoeff() / reservoirs[r].kappa;
    if (ratio > opt.validity_error)
      throw std::runtime_error(
          "build_generator: reservoir validity violated, |gtilde|/kappa = " + std::to_string(ratio) +
          " for reservoir " + reservoir_name(ReservoirLabel(r)));
    if (ratio > opt.validity_warn)
      gen.warnings.push_back(std::string("reservoir ") + reservoir_name(ReservoirLabel(r)) +
                             ": |gtilde|/kappa = " + std::to_string(ratio) +
                             " exceeds the adiabatic-elimination comfort zone");
  }

  gen.lamb_shifts = Eigen::VectorXd::Zero(d);
  gen.rate_matrix = Eigen::MatrixXd::Zero(d, d);
  gen.coherence_decay = Eigen::VectorXd::Zero(d);
  for (int r = 0; r < 2; ++r) {
    gen.collective_absorb[r] = MatrixXcd::Zero(d, d);
    gen.collective_emit[r] = MatrixXcd::Zero(d, d);
  }

  const double cutoff = opt.channel_cutoff * gmax;
  for (int u = 0; u < d; ++u)
    for (int l = 0; l < d; ++l) {
      // Lamb shifts use the full table, including sub-cutoff entries.
      for (int r = 0; r < 2; ++r) {
        const double g2 = std::norm(transitions.gtilde[r](u, l));
        if (g2 == 0.0) continue;
        const double det = reservoirs[r].delta - transitions.omega(u, l);
        gen.lamb_shifts[u] -= g2 * det / (det * det + 0.25 * std::pow(reservoirs[r].kappa, 2));
      }

      const double gabs = std::max(std::abs(transitions.gtilde[0](u, l)),
                                   std::abs(transitions.gtilde[1](u, l)));
      if (gabs <= cutoff) continue;

      TransportChannel ch;
      ch.upper = u;
      ch.lower = l;
      ch.omega = transitions.omega(u, l);
      for (int r = 0; r < 2; ++r) {
        ch.gtilde[r] = transitions.gtilde[r](u, l);
        ch.dos_value[r] = dos(ch.omega, reservoirs[r].delta, reservoirs[r].kappa);
        const double base = units::two_pi * std::norm(ch.gtilde[r]) * ch.dos_value[r];
        ch.rate_absorb[r] = base * reservoirs[r].nbar;
        ch.rate_emit[r] = base * (1.0 + reservoirs[r].nbar);
        gen.collective_absorb[r](u, l) += ch.gtilde[r] * std::sqrt(units::two_pi *
                                          ch.dos_value[r] * reservoirs[r].nbar);
        gen.collective_emit[r](l, u) += std::conj(ch.gtilde[r]) *
                                        std::sqrt(units::two_pi * ch.dos_value[r] *
                                                  (1.0 + reservoirs[r].nbar));
      }
      const double absorb = ch.rate_absorb[0] + ch.rate_absorb[1];
      const double emit = ch.rate_emit[0] + ch.rate_emit[1];
      if (u != l) {
        gen.rate_matrix(u, l) += absorb;
        gen.rate_matrix(l, l) -= absorb;
        gen.rate_matrix(l, u) += emit;
        gen.rate_matrix(u, u) -= emit;
      }
      gen.coherence_decay[l] += absorb;
      gen.coherence_decay[u] += emit;
      gen.rate_scale += absorb + emit;
      gen.channels.push_back(ch);
    }
  if (gen.rate_scale <= 0) gen.rate_scale = 1.0;
  return gen;
}

namespace detail {

// RHS of the secular master equation in the eigenbasis: populations follow
// the classical rate matrix, coherences rotate with the Lamb shifts and decay
// with the mean outflow of their two levels.
inline void secular_rhs(const TransportGenerator& gen, const MatrixXcd& rho, MatrixXcd& out) {
  const int d = gen.dimension();
  out.resize(d, d);
  const Eigen::VectorXd p = rho.diagonal().real();
  const Eigen::VectorXd dp = gen.rate_matrix * p;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      if (a == b) {
        out(a, a) = dp[a];
      } else {
        const Complex phase(0.0, -(gen.lamb_shifts[a] - gen.lamb_shifts[b]));
        const double decay = 0.5 * (gen.coherence_decay[a] + gen.coherence_decay[b]);
        out(a, b) = (phase - decay) * rho(a, b);
      }
    }
}

inline LindbladOps nonsecular_ops(const TransportGenerator& gen) {
  LindbladOps ops;
  const int d = gen.dimension();
  MatrixXcd h = MatrixXcd::Zero(d, d);
  h.diagonal() = gen.lamb_shifts.cast<Complex>();
  ops.hamiltonian = h.sparseView();
  for (int r = 0; r < 2; ++r) {
    ops.jumps.push_back(gen.collective_absorb[r].sparseView());
    ops.jumps.push_back(gen.collective_emit[r].sparseView());
  }
  ops.finalize();
  return ops;
}

}  // namespace detail

// Evolve rho (eigenbasis) for a duration t under the transport master
// equation (interaction picture of the bare magnet).
inline MatrixXcd propagate(const TransportGenerator& gen, const MatrixXcd& rho0, double t,
                           const OdeOptions& ode = {}) {
  if (rho0.rows() != gen.dimension() || rho0.cols() != gen.dimension())
    throw std::invalid_argument("propagate: state dimension mismatch");
  if (t == 0.0) return rho0;
  MatrixXcd rho = rho0;
  if (gen.mode == CoherenceMode::Secular) {
    auto rhs = [&](double, const MatrixXcd& y, MatrixXcd& out) { detail::secular_rhs(gen, y, out); };
    integrate_dopri5(rhs, rho, 0.0, t, ode);
  } else {
    const LindbladOps ops = detail::nonsecular_ops(gen);
    auto rhs = [&](double, const MatrixXcd& y, MatrixXcd& out) { ops.apply(y, out); };
    integrate_dopri5(rhs, rho, 0.0, t, ode);
  }
  return rho;
}

// As propagate(), but also returns interpolated states at the sample times.
inline MatrixXcd propagate_sampled(const TransportGenerator& gen, const MatrixXcd& rho0,
                                   const std::vector<double>& times,
                                   std::vector<MatrixXcd>& samples, const OdeOptions& ode = {}) {
  MatrixXcd rho = rho0;
  const double t_end = times.empty() ? 0.0 : times.back();
  if (t_end == 0.0) {
    samples.assign(times.size(), rho0);
    return rho0;
  }
  if (gen.mode == CoherenceMode::Secular) {
    auto rhs = [&](double, const MatrixXcd& y, MatrixXcd& out) { detail::secular_rhs(gen, y, out); };
    integrate_dopri5_sampled(rhs, rho, 0.0, t_end, times, samples, ode);
  } else {
    const LindbladOps ops = detail::nonsecular_ops(gen);
    auto rhs = [&](double, const MatrixXcd& y, MatrixXcd& out) { ops.apply(y, out); };
    integrate_dopri5_sampled(rhs, rho, 0.0, t_end, times, samples, ode);
  }
  return rho;
}

namespace detail {

// Populations consistent with p0 from the rate-matrix null space; conserved
// functionals (left null vectors) pin the reachable combination.
inline Eigen::VectorXd population_steady_state(const Eigen::MatrixXd& rate_matrix,
                                               const Eigen::VectorXd& p0, double rate_scale) {
  const int d = int(rate_matrix.rows());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rate_matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double tol = std::max(1e-12 * rate_scale, 1e-14 * (sv.size() ? sv.maxCoeff() : 0.0));
  int null_dim = 0;
  for (int i = d - 1; i >= 0 && sv[i] < tol; --i) ++null_dim;
  if (null_dim == 0)
    throw std::runtime_error("population_steady_state: rate matrix has no null space");
  const Eigen::MatrixXd v = svd.matrixV().rightCols(null_dim);
  const Eigen::MatrixXd w = svd.matrixU().rightCols(null_dim);
  const Eigen::VectorXd c = (w.transpose() * v).fullPivLu().solve(w.transpose() * p0);
  Eigen::VectorXd p = v * c;
  // scrub numerical negatives
  for (int i = 0; i < d; ++i)
    if (p[i] < 0 && p[i] > -1e-12) p[i] = 0.0;
  const double total = p.sum();
  if (std::abs(total - 1.0) > 1e-8)
    throw std::runtime_error("population_steady_state: probability not conserved in null solve");
  return p / total;
}

}  // namespace detail

struct SteadyStateOpts {
  SteadyMethod method = SteadyMethod::Nullspace;
  double cross_check_tolerance = 1e-8;
  SteadyStateOptions propagation{};
};

// Steady state reached from rho0 (eigenbasis). Dark states make the result
// rho0-dependent, which the null-space solve honours through conservation
// laws; coherences decay unless their levels are jointly decoupled, in which
// case they are frozen at their initial value.
inline MatrixXcd steady_state(const TransportGenerator& gen, const MatrixXcd& rho0,
                              const SteadyStateOpts& opt = {}) {
  if (rho0.rows() != gen.dimension()) throw std::invalid_argument("steady_state: dimension mismatch");
  const int d = gen.dimension();

  auto by_propagation = [&]() {
    if (gen.mode == CoherenceMode::Secular) {
      // wrap the secular RHS in a LindbladOps-like propagation loop
      MatrixXcd rho = rho0;
      MatrixXcd deriv = rho;
      const double tol = opt.propagation.convergence * gen.rate_scale;
      const double window = 20.0 / gen.rate_scale;
      double elapsed = 0.0;
      bool converged = false;
      auto rhs = [&](double, const MatrixXcd& y, MatrixXcd& out) { detail::secular_rhs(gen, y, out); };
      while (!converged && elapsed < opt.propagation.horizon_rates / gen.rate_scale) {
        int counter = 0;
        integrate_dopri5_observed(
            rhs, rho, 0.0, window,
            [&](double, const MatrixXcd& y) {
              if (++counter % opt.propagation.check_interval != 0) return true;
              detail::secular_rhs(gen, y, deriv);
              if (deriv.cwiseAbs().maxCoeff() < tol) {
                converged = true;
                return false;
              }
              return true;
            },
            opt.propagation.ode);
        if (!converged) {
          detail::secular_rhs(gen, rho, deriv);
          converged = deriv.cwiseAbs().maxCoeff() < tol;
        }
        elapsed += window;
      }
      if (!converged)
        throw std::runtime_error("steady_state: propagation did not converge within the horizon");
      return rho;
    }
    return steady_state_propagate(detail::nonsecular_ops(gen), rho0, opt.propagation);
  };

  auto by_nullspace = [&]() {
    if (gen.mode == CoherenceMode::Secular) {
      const Eigen::VectorXd p =
          detail::population_steady_state(gen.rate_matrix, rho0.diagonal().real(), gen.rate_scale);
      MatrixXcd rho = MatrixXcd::Zero(d, d);
      rho.diagonal() = p.cast<Complex>();
      // coherences between jointly undamped, degenerate-shift levels persist
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          if (a == b) continue;
          if (gen.coherence_decay[a] + gen.coherence_decay[b] == 0.0 &&
              gen.lamb_shifts[a] == gen.lamb_shifts[b])
            rho(a, b) = rho0(a, b);
        }
      return rho;
    }
    const LindbladOps ops = detail::nonsecular_ops(gen);
    const MatrixXcd sup = MatrixXcd(ops.superoperator());
    return steady_state_nullspace_dense(sup, rho0, gen.rate_scale);
  };

  switch (opt.method) {
    case SteadyMethod::Propagate:
      return by_propagation();
    case SteadyMethod::Nullspace:
      return by_nullspace();
    case SteadyMethod::CrossCheck: {
      const MatrixXcd a = by_nullspace();
      const MatrixXcd b = by_propagation();
      const double diff = (a - b).cwiseAbs().maxCoeff();
      if (diff > opt.cross_check_tolerance)
        throw std::runtime_error("steady_state: methods disagree by " + std::to_string(diff));
      return a;
    }
  }
  throw std::logic_error("steady_state: unreachable");
}

struct ChannelCurrent {
  int upper = 0, lower = 0;
  double value = 0.0;  // quanta/s absorbed from the source through this channel
};

struct CurrentResult {
  double current_source = 0.0;  // I_S, quanta/s
  double current_drain = 0.0;   // I_D defined symmetrically (into the drain)
  double energy_current = 0.0;  // I_S * omega_S, rad/s^2 (hbar = 1)
  double coherence_correction = 0.0;  // non-secular only
  std::vector<ChannelCurrent> channels;
};

// Net quanta current: absorbed-from-source minus emitted-into-source, summed
// over channels; and the symmetric drain-side expression.
inline CurrentResult current(const TransportGenerator& gen, const MatrixXcd& rho) {
  CurrentResult res;
  const Eigen::VectorXd p = rho.diagonal().real();
  constexpr int src = 0, drn = 1;
  for (const auto& ch : gen.channels) {
    const double i_s = ch.rate_absorb[src] * p[ch.lower] - ch.rate_emit[src] * p[ch.upper];
    const double i_d = ch.rate_emit[drn] * p[ch.upper] - ch.rate_absorb[drn] * p[ch.lower];
    res.channels.push_back({ch.upper, ch.lower, i_s});
    res.current_source += i_s;
    res.current_drain += i_d;
  }
  if (gen.mode == CoherenceMode::Nonsecular) {
    auto event_rate = [&](const MatrixXcd& op) {
      return ((op * rho * op.adjoint()).trace()).real();
    };
    const double exact_s = event_rate(gen.collective_absorb[src]) -
                           event_rate(gen.collective_emit[src]);
    res.coherence_correction = exact_s - res.current_source;
    res.current_source = exact_s;
    res.current_drain = event_rate(gen.collective_emit[drn]) -
                        event_rate(gen.collective_absorb[drn]);
  }
  res.energy_current = res.current_source * gen.reservoir(ReservoirLabel::Source).omega;
  return res;
}

struct SweepPoint {
  double delta_source = 0.0, delta_drain = 0.0;
  double kappa_source = 0.0, kappa_drain = 0.0;
};

struct SweepRow {
  SweepPoint point;
  bool ok = false;
  std::string error;
  double current_source = 0.0, current_drain = 0.0;
  std::vector<ChannelCurrent> channels;
};

// Rebuilds the generator at every grid point and evaluates the steady-state
// current from rho0. Per-point failures are flagged; the sweep continues.
// Grid points are independent; with threads > 1 they run concurrently and
// the row order stays fixed by the grid.
inline std::vector<SweepRow> current_sweep(const TransitionData& transitions,
                                           std::array<TransportReservoir, 2> base,
                                           const std::vector<SweepPoint>& grid,
                                           const MatrixXcd& rho0_eigen,
                                           const TransportOptions& topt = {},
                                           const SteadyStateOpts& sopt = {}, int threads = 1) {
  std::vector<SweepRow> rows(grid.size());
  parallel_for(grid.size(), threads, [&](size_t i) {
    SweepRow& row = rows[i];
    row.point = grid[i];
    try {
      auto res = base;
      res[0].delta = grid[i].delta_source;
      res[1].delta = grid[i].delta_drain;
      res[0].kappa = grid[i].kappa_source;
      res[1].kappa = grid[i].kappa_drain;
      const TransportGenerator gen = build_generator(transitions, res, topt);
      const MatrixXcd rho = steady_state(gen, rho0_eigen, sopt);
      const CurrentResult cur = current(gen, rho);
      row.current_source = cur.current_source;
      row.current_drain = cur.current_drain;
      row.channels = cur.channels;
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
  });
  return rows;
}

}  // namespace spinflow
