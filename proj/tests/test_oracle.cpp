#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "spinflow/dimer.hpp"
#include "spinflow/magnet.hpp"
#include "spinflow/oracle.hpp"
#include "spinflow/transport.hpp"
#include "spinflow/units.hpp"

using namespace spinflow;

namespace {

const double kJ = units::khz_to_rad(0.16);

Eigen::MatrixXd dimer_j() {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 1) = m(1, 0) = kJ;
  return m;
}

OracleConfig make_config(double kappa, double g, double delta, double nbar_s, double nbar_d,
                         int n_max) {
  OracleConfig cfg;
  cfg.model = SpinModel::ising(2, 0.0, dimer_j());
  cfg.drive = ExchangeDrive::homogeneous(2, g, g, delta, delta);
  cfg.kappa = {kappa, kappa};
  cfg.nbar = {nbar_s, nbar_d};
  cfg.n_max = n_max;
  return cfg;
}

struct EffectiveReference {
  TransportGenerator gen;
  MatrixXcd steady;
  double current = 0.0;
};

// Mean occupation of the thermal state on the truncated ladder; this is the
// occupation the oracle's reservoir actually holds.
double truncated_nbar(int n_max, double nbar) {
  const MatrixXcd th = thermal_state(n_max, nbar);
  double mean = 0.0;
  for (int n = 0; n <= n_max; ++n) mean += n * th(n, n).real();
  return mean;
}

EffectiveReference effective_reference(const OracleConfig& cfg, int truncation = -1) {
  const auto spec = diagonalize(build_hamiltonian(cfg.model));
  const auto transitions = transition_data(spec, cfg.drive, cfg.model.n_spins);
  std::array<TransportReservoir, 2> res;
  for (int r = 0; r < 2; ++r) {
    const double nbar =
        truncation >= 0 ? truncated_nbar(truncation, cfg.nbar[r]) : cfg.nbar[r];
    res[r] = {cfg.kappa[r], nbar, cfg.drive.deltas[r], units::mhz_to_rad(1.0)};
  }
  EffectiveReference ref{build_generator(transitions, res), {}, 0.0};
  MatrixXcd rho0 = MatrixXcd::Zero(4, 4);
  rho0(0, 0) = 1.0;
  ref.steady = steady_state(ref.gen, ref.gen.spectrum.to_eigenbasis(rho0));
  ref.current = current(ref.gen, ref.steady).current_source;
  return ref;
}

double population_discrepancy(const OracleSolution& sol, const EffectiveReference& ref) {
  double worst = 0.0;
  for (size_t a = 0; a < sol.model.kept.size(); ++a) {
    const int l = sol.model.kept[a];
    worst = std::max(worst, std::abs(sol.magnet(long(a), long(a)).real() -
                                     ref.steady(l, l).real()));
  }
  return worst;
}

// Uhlmann fidelity F = (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const MatrixXcd& rho, const MatrixXcd& sigma) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho);
  const MatrixXcd sqrt_rho = es.operatorSqrt();
  Eigen::SelfAdjointEigenSolver<MatrixXcd> inner(sqrt_rho * sigma * sqrt_rho);
  double tr = 0.0;
  for (int i = 0; i < inner.eigenvalues().size(); ++i)
    tr += std::sqrt(std::max(0.0, inner.eigenvalues()[i]));
  return tr * tr;
}

}  // namespace

TEST_CASE("decoupled spins leave the modes in their thermal states") {
  auto cfg = make_config(kJ / 2.0, 0.0, -2.0 * kJ, 0.25, 0.1, 5);
  const auto sol = solve_oracle(cfg);
  // reduced modes are thermal at the target occupations
  const MatrixXcd th_s = thermal_state(sol.model.config.n_max, 0.25);
  const MatrixXcd th_d = thermal_state(sol.model.config.n_max, 0.1);
  REQUIRE((sol.mode_source - th_s).cwiseAbs().maxCoeff() < 1e-8);
  REQUIRE((sol.mode_drain - th_d).cwiseAbs().maxCoeff() < 1e-8);
  // no transport; the only residual flux is the truncated-ladder tail,
  // <n>_truncated sitting a hair below the infinite-ladder nbar
  REQUIRE(std::abs(sol.current.drain_side) < 1e-5 * cfg.kappa[1]);
  // with g = 0 nothing is reachable beyond the initial eigenstate
  REQUIRE(sol.model.kept.size() == 1);
}

TEST_CASE("vacuum-only truncation freezes the spins") {
  auto cfg = make_config(kJ / 2.0, 0.05 * kJ / 2.0, -2.0 * kJ, 0.0, 0.0, 0);
  cfg.truncation_threshold = 2.0;  // accept the trivial truncation
  const auto model = build_full(cfg);
  const MatrixXcd rho0 = initial_state(model);
  // the exchange needs a phonon: H reduces to level energies, rho0 is steady
  MatrixXcd deriv(rho0.rows(), rho0.cols());
  model.ops.apply(rho0, deriv);
  REQUIRE(deriv.cwiseAbs().maxCoeff() < 1e-12 * kJ);
}

TEST_CASE("homogeneous dimer keeps three reachable eigenstates") {
  const double kappa = kJ / 2.0;
  const auto model = build_full(make_config(kappa, 0.1 * kappa, -2.0 * kJ, 0.2, 0.05, 3));
  REQUIRE(model.kept.size() == 3);  // the singlet is dropped
  REQUIRE(model.dims == std::vector<long>{3, 4, 4});
}

TEST_CASE("composite dimension cap is enforced") {
  auto cfg = make_config(kJ / 2.0, 0.05 * kJ / 2.0, -2.0 * kJ, 0.2, 0.05, 10);
  cfg.dimension_cap = 100;
  REQUIRE_THROWS_WITH(build_full(cfg), Catch::Matchers::ContainsSubstring("cap"));
}

TEST_CASE("truncation adequacy loop raises n_max until the top level empties") {
  auto cfg = make_config(kJ / 2.0, 0.05 * kJ / 2.0, -2.0 * kJ, 0.3, 0.1, 2);
  const auto sol = solve_oracle(cfg);
  REQUIRE(sol.model.config.n_max > 2);
  REQUIRE(sol.top_fock < cfg.truncation_threshold);
}

TEST_CASE("steady state is a valid density matrix and fluxes balance") {
  const double kappa = kJ / 2.0;
  const auto cfg = make_config(kappa, 0.1 * kappa, -2.0 * kJ, 0.25, 0.1, 5);
  const auto sol = solve_oracle(cfg);

  const auto check = check_density(sol.steady);
  REQUIRE(check.hermiticity < 1e-12);
  REQUIRE(check.trace_deviation < 1e-10);
  REQUIRE(check.min_eigenvalue > -1e-9);

  // quanta conservation: source feeds exactly what the drain dissipates
  REQUIRE(sol.current.drain_side > 0.0);
  REQUIRE(sol.current.source_side ==
          Catch::Approx(-sol.current.drain_side).epsilon(1e-8));
}

TEST_CASE("oracle matches the effective master equation in the elimination regime") {
  const double kappa = kJ / 20.0;
  const auto cfg = make_config(kappa, 0.1 * kappa, -2.0 * kJ, 0.25, 0.1, 6);
  const auto sol = solve_oracle(cfg);
  const auto ref = effective_reference(cfg);

  REQUIRE(sol.model.config.n_max == 6);  // adequate without raising

  // populations within 5%
  REQUIRE(population_discrepancy(sol, ref) < 0.05);
  // drain-flux current within 10% of the effective prediction
  REQUIRE(sol.current.drain_side == Catch::Approx(ref.current).epsilon(0.10));

  // reduced phonon states stay close to thermal
  const MatrixXcd th_s = thermal_state(sol.model.config.n_max, cfg.nbar[0]);
  const MatrixXcd th_d = thermal_state(sol.model.config.n_max, cfg.nbar[1]);
  REQUIRE(fidelity(sol.mode_source, th_s) > 0.999);
  REQUIRE(fidelity(sol.mode_drain, th_d) > 0.999);
}

TEST_CASE("elimination error shrinks when the coupling ratio is halved") {
  // Mildly asymmetric reservoirs: with identical widths and detunings the
  // second-order rate corrections cancel out of every population ratio and
  // the discrepancy sits on the Fock-truncation noise floor. Breaking the
  // symmetry makes the O((g/kappa)^2) elimination error visible on the
  // populations as well as the current.
  const double kappa_s = kJ / 20.0, kappa_d = kJ / 12.0;
  auto asym = [&](double g_frac) {
    auto cfg = make_config(kappa_s, g_frac * kappa_s, -2.0 * kJ, 0.25, 0.1, 6);
    cfg.kappa = {kappa_s, kappa_d};
    cfg.drive.deltas[1] = -2.0 * kJ + 0.35 * kappa_d;
    return cfg;
  };
  const auto cfg_1 = asym(0.1);
  const auto cfg_2 = asym(0.05);

  const auto sol_1 = solve_oracle(cfg_1);
  const auto sol_2 = solve_oracle(cfg_2);
  // feed the effective theory the occupation the truncated reservoir
  // actually holds, so the elimination error is isolated from the
  // (g-independent) truncation offset
  const auto ref_1 = effective_reference(cfg_1, sol_1.model.config.n_max);
  const auto ref_2 = effective_reference(cfg_2, sol_2.model.config.n_max);

  const double pop_err_1 = population_discrepancy(sol_1, ref_1);
  const double pop_err_2 = population_discrepancy(sol_2, ref_2);
  REQUIRE(pop_err_2 / pop_err_1 < 0.6);

  const double cur_err_1 = std::abs(sol_1.current.drain_side - ref_1.current) / ref_1.current;
  const double cur_err_2 = std::abs(sol_2.current.drain_side - ref_2.current) / ref_2.current;
  REQUIRE(cur_err_2 / cur_err_1 < 0.6);
}

TEST_CASE("direct and propagated steady states agree") {
  const double kappa = kJ / 2.0;
  auto cfg = make_config(kappa, 0.1 * kappa, -2.0 * kJ, 0.15, 0.05, 3);
  const auto model = build_full(cfg);
  const MatrixXcd direct = full_steady_state(model, initial_state(model), OracleMethod::Direct);

  SteadyStateOptions opt;
  opt.convergence = 1e-9;
  const MatrixXcd propagated =
      full_steady_state(model, initial_state(model), OracleMethod::Propagate, opt);

  const MatrixXcd magnet_a = partial_trace_keep(direct, model.dims, 0);
  const MatrixXcd magnet_b = partial_trace_keep(propagated, model.dims, 0);
  REQUIRE((magnet_a - magnet_b).cwiseAbs().maxCoeff() < 1e-5);

  const auto cur_a = full_current(model, direct);
  const auto cur_b = full_current(model, propagated);
  REQUIRE(cur_a.drain_side == Catch::Approx(cur_b.drain_side).epsilon(1e-3));
}

TEST_CASE("current converges in the truncation level") {
  const double kappa = kJ / 2.0;
  auto cfg = make_config(kappa, 0.1 * kappa, -2.0 * kJ, 0.2, 0.05, 4);
  const auto sol = solve_oracle(cfg);
  auto cfg_up = cfg;
  cfg_up.n_max = sol.model.config.n_max + 2;
  const auto sol_up = solve_oracle(cfg_up);
  REQUIRE(sol.current.drain_side ==
          Catch::Approx(sol_up.current.drain_side).epsilon(0.01));
}
