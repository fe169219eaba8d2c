#pragma once

// Adaptive Dormand-Prince 5(4) integrator with dense output, generic over a
// vector-space state (anything supporting Eigen-style arithmetic and a
// cwiseAbs().maxCoeff() norm: MatrixXcd, VectorXd, ...).

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinflow {

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double initial_step = 0.0;     // 0 = auto
  double max_step = 0.0;         // 0 = horizon
  double min_step_fraction = 1e-14;  // of the interval; below this -> stiffness error
  long max_steps = 50'000'000;
};

struct OdeStats {
  long n_steps = 0;
  long n_rejected = 0;
  long n_rhs = 0;
};

class OdeStepUnderflow : public std::runtime_error {
 public:
  explicit OdeStepUnderflow(const std::string& what) : std::runtime_error(what) {}
};

// Continuous extension over one accepted step [t, t+h]; evaluate(theta) with
// theta in [0,1] reproduces the 4th-order interpolant.
template <typename State>
struct DenseStep {
  double t = 0, h = 0;
  State c1, c2, c3, c4, c5;
  State evaluate(double theta) const {
    const double th1 = 1.0 - theta;
    return c1 + theta * (c2 + th1 * (c3 + theta * (c4 + th1 * c5)));
  }
};

namespace detail {
// Butcher tableau (Dormand & Prince, RK5(4)7M).
inline constexpr double dp_c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double dp_a[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
inline constexpr double dp_e[7] = {71.0 / 57600,    0.0,          -71.0 / 16695, 71.0 / 1920,
                                   -17253.0 / 339200, 22.0 / 525, -1.0 / 40};
// Dense-output weights (Hairer, Norsett & Wanner, DOPRI5 contd5).
inline constexpr double dp_d[7] = {-12715105075.0 / 11282082432.0,
                                   0.0,
                                   87487479700.0 / 32700410799.0,
                                   -10690763975.0 / 1880347072.0,
                                   701980252875.0 / 199316789632.0,
                                   -1453857185.0 / 822651844.0,
                                   69997945.0 / 29380423.0};
}  // namespace detail

// Core integrator. `on_step(dense, y)` is called after every accepted step
// and may return false to stop early; pass nullptr-like no-op for plain runs.
template <typename State, typename Rhs, typename OnStep>
OdeStats integrate_dopri5_core(const Rhs& rhs, State& y, double t0, double t1,
                               const OdeOptions& opt, OnStep&& on_step,
                               bool want_dense) {
  using detail::dp_a;
  using detail::dp_c;
  using detail::dp_d;
  using detail::dp_e;

  OdeStats stats;
  if (t1 == t0) return stats;
  if (t1 < t0) throw std::invalid_argument("integrate_dopri5: t1 < t0");
  const double horizon = t1 - t0;
  const double max_step = opt.max_step > 0 ? opt.max_step : horizon;

  State k[7];
  for (auto& ki : k) ki = y;  // shape init
  rhs(t0, y, k[0]);
  stats.n_rhs++;

  double h = opt.initial_step;
  if (h <= 0.0) {
    const double ynorm = y.cwiseAbs().maxCoeff();
    const double fnorm = k[0].cwiseAbs().maxCoeff();
    h = (fnorm > 0 && ynorm > 0) ? 0.01 * ynorm / fnorm : horizon * 1e-6;
    h = std::min(h, max_step);
  }

  double t = t0;
  State ynew = y, yerr = y, work = y;
  DenseStep<State> dense;
  bool fsal_valid = true;

  while (t < t1) {
    if (stats.n_steps + stats.n_rejected > opt.max_steps)
      throw std::runtime_error("integrate_dopri5: max step count exceeded");
    h = std::min(h, max_step);
    if (t + h > t1) h = t1 - t;
    if (h < opt.min_step_fraction * horizon)
      throw OdeStepUnderflow("integrate_dopri5: step size underflow (stiff problem?)");

    if (!fsal_valid) {
      rhs(t, y, k[0]);
      stats.n_rhs++;
    }
    for (int s = 1; s < 7; ++s) {
      work = y;
      for (int j = 0; j < s; ++j)
        if (dp_a[s][j] != 0.0) work += (h * dp_a[s][j]) * k[j];
      rhs(t + h * dp_c[s], work, k[s]);
      stats.n_rhs++;
    }
    // Stage 6 input is the 5th-order solution (FSAL tableau).
    ynew = work;
    yerr = (h * dp_e[0]) * k[0];
    for (int s = 2; s < 7; ++s) yerr += (h * dp_e[s]) * k[s];

    const double scale =
        opt.atol + opt.rtol * std::max(y.cwiseAbs().maxCoeff(), ynew.cwiseAbs().maxCoeff());
    const double err = yerr.cwiseAbs().maxCoeff() / scale;

    if (err <= 1.0) {
      if (want_dense) {
        dense.t = t;
        dense.h = h;
        dense.c1 = y;
        dense.c2 = ynew - y;
        dense.c3 = h * k[0] - dense.c2;
        dense.c4 = dense.c2 - h * k[6] - dense.c3;
        dense.c5 = (h * dp_d[0]) * k[0];
        for (int s = 2; s < 7; ++s) dense.c5 += (h * dp_d[s]) * k[s];
      } else {
        dense.t = t;
        dense.h = h;
      }
      t += h;
      y = ynew;
      k[0] = k[6];  // FSAL
      fsal_valid = true;
      stats.n_steps++;
      if (!on_step(dense, y)) break;
    } else {
      stats.n_rejected++;
      fsal_valid = false;
    }
    const double factor =
        std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
    h *= factor;
  }
  return stats;
}

template <typename State, typename Rhs>
OdeStats integrate_dopri5(const Rhs& rhs, State& y, double t0, double t1,
                          const OdeOptions& opt = {}) {
  return integrate_dopri5_core(
      rhs, y, t0, t1, opt, [](const DenseStep<State>&, const State&) { return true; },
      /*want_dense=*/false);
}

// As above but also returns interpolated states at the requested times
// (which must be sorted, within [t0, t1]).
template <typename State, typename Rhs>
OdeStats integrate_dopri5_sampled(const Rhs& rhs, State& y, double t0, double t1,
                                  const std::vector<double>& sample_times,
                                  std::vector<State>& samples,
                                  const OdeOptions& opt = {}) {
  samples.clear();
  samples.reserve(sample_times.size());
  size_t next = 0;
  while (next < sample_times.size() && sample_times[next] <= t0) {
    samples.push_back(y);
    ++next;
  }
  auto stats = integrate_dopri5_core(
      rhs, y, t0, t1, opt,
      [&](const DenseStep<State>& dense, const State&) {
        while (next < sample_times.size() &&
               sample_times[next] <= dense.t + dense.h + 1e-15 * (t1 - t0)) {
          const double theta = std::clamp((sample_times[next] - dense.t) / dense.h, 0.0, 1.0);
          samples.push_back(dense.evaluate(theta));
          ++next;
        }
        return true;
      },
      /*want_dense=*/true);
  while (next < sample_times.size()) {
    samples.push_back(y);
    ++next;
  }
  return stats;
}

// Convenience: integrate with an early-exit observer on accepted steps.
template <typename State, typename Rhs, typename Observer>
OdeStats integrate_dopri5_observed(const Rhs& rhs, State& y, double t0, double t1,
                                   Observer&& observer, const OdeOptions& opt = {}) {
  return integrate_dopri5_core(
      rhs, y, t0, t1, opt,
      [&](const DenseStep<State>& dense, const State& state) {
        return observer(dense.t + dense.h, state);
      },
      /*want_dense=*/false);
}

}  // namespace spinflow
