#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "capshock/errors.hpp"

namespace capshock {

struct IntegrationStats {
  int steps = 0;
  int rejections = 0;
  double min_norm_ratio = 1.0;  // extremes of |y(t)| / |y(t0)| over accepted steps, when tracked
  double max_norm_ratio = 1.0;
};

namespace detail {

/// Drives odeint's controlled Dormand-Prince stepper from t0 to t1 > t0,
/// counting accepted and rejected steps. `observe(y, t)` runs after every
/// accepted step and returns false to stop early. max_step <= 0 means unbounded.
template <class State, class System, class Observer>
IntegrationStats integrate_dopri(System&& system, State& y, double t0, double t1, double abs_tol,
                                 double rel_tol, double max_step, Observer&& observe,
                                 int max_steps = 2'000'000) {
  namespace odeint = boost::numeric::odeint;
  auto stepper = odeint::make_controlled(abs_tol, rel_tol, std::max(max_step, 0.0),
                                         odeint::runge_kutta_dopri5<State>());
  IntegrationStats stats;
  double t = t0;
  double dt = (t1 - t0) / 64.0;
  if (max_step > 0.0) dt = std::min(dt, max_step);
  const double end_slack = 1e-13 * std::max(1.0, std::abs(t1));
  while (t1 - t > end_slack) {
    dt = std::min(dt, t1 - t);
    const auto result = stepper.try_step(system, y, t, dt);
    if (result == odeint::success) {
      ++stats.steps;
      if (!observe(y, t)) break;
    } else {
      ++stats.rejections;
      if (dt < 1e-14 * std::max(1.0, std::abs(t))) {
        throw NumericError("adaptive integration step underflow at t=" + std::to_string(t));
      }
    }
    if (stats.steps + stats.rejections > max_steps) {
      throw NumericError("adaptive integration exceeded " + std::to_string(max_steps) +
                         " steps at t=" + std::to_string(t));
    }
  }
  return stats;
}

}  // namespace detail
}  // namespace capshock
