#pragma once

// Fixed-step classical RK4. The stepping kernel is generic over the state
// container so the same scheme drives the sphere model, the conjugated
// nonlinear flow used for splitting checks, and plain phase oscillators.

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "lhs/errors.hpp"
#include "lhs/model.hpp"

namespace lhs {

inline void axpy(Configuration& y, double a, const Configuration& x) {
  for (std::size_t j = 0; j < y.size(); ++j) y[j].add_scaled(a, x[j]);
}

inline void axpy(std::vector<double>& y, double a, const std::vector<double>& x) {
  for (std::size_t j = 0; j < y.size(); ++j) y[j] += a * x[j];
}

inline bool all_finite(const Configuration& y) {
  for (const auto& v : y)
    if (!is_finite(v)) return false;
  return true;
}

inline bool all_finite(const std::vector<double>& y) {
  for (double v : y)
    if (!std::isfinite(v)) return false;
  return true;
}

// One classical RK4 step of dy/dt = field(t, y), in place.
template <class State, class Field>
void rk4_advance(State& y, double t, double dt, Field&& field) {
  const State k1 = field(t, y);
  State tmp = y;
  axpy(tmp, 0.5 * dt, k1);
  const State k2 = field(t + 0.5 * dt, tmp);
  tmp = y;
  axpy(tmp, 0.5 * dt, k2);
  const State k3 = field(t + 0.5 * dt, tmp);
  tmp = y;
  axpy(tmp, dt, k3);
  const State k4 = field(t + dt, tmp);
  axpy(y, dt / 6.0, k1);
  axpy(y, dt / 3.0, k2);
  axpy(y, dt / 3.0, k3);
  axpy(y, dt / 6.0, k4);
}

struct IntegrationPlan {
  double dt = 0.02;
  double t_final = 10.0;
  std::size_t record_stride = 1;
  bool renormalize = false;
  double drift_abort_threshold = 1e-3;

  void validate() const {
    if (!(dt > 0.0)) throw DomainError("IntegrationPlan: dt must be positive");
    if (!(t_final >= dt)) throw DomainError("IntegrationPlan: t_final must be at least dt");
    if (record_stride < 1) throw DomainError("IntegrationPlan: record_stride must be >= 1");
    if (!(drift_abort_threshold > 0.0))
      throw DomainError("IntegrationPlan: drift_abort_threshold must be positive");
    const double steps = t_final / dt;
    if (std::abs(steps - std::round(steps)) > 1e-9 * steps)
      throw DomainError("IntegrationPlan: t_final must be an integer multiple of dt");
  }

  std::size_t step_count() const { return static_cast<std::size_t>(std::llround(t_final / dt)); }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<EnsembleState> states;
  double max_norm_drift = 0.0;

  std::size_t size() const { return times.size(); }
};

inline EnsembleState renormalize(const EnsembleState& s) {
  EnsembleState out{{}, s.time};
  out.z.reserve(s.size());
  for (const auto& v : s.z) {
    const double n = norm(v);
    if (!(n > 0.0)) throw DomainError("renormalize: zero-norm particle");
    out.z.push_back((1.0 / n) * v);
  }
  return out;
}

inline EnsembleState rk4_step(const EnsembleState& s, const ModelParams& p, double dt) {
  if (!(dt > 0.0)) throw DomainError("rk4_step: dt must be positive");
  detail::check_shapes(s.z, p.N(), p.ambient());
  const CMatrix v0 = p.V0();
  const CMatrix v1 = p.V1();
  const FieldSpec spec{p.omegas(), v0, v1, p.kappa0(), p.kappa1()};
  EnsembleState out = s;
  rk4_advance(out.z, s.time, dt, [&spec](double, const Configuration& z) {
    return meanfield_field(z, spec);
  });
  out.time = s.time + dt;
  if (!all_finite(out.z)) throw IntegrationError("non-finite state after RK4 step", 0);
  return out;
}

// Integrates an arbitrary field over the plan's grid, recording every
// record_stride-th state plus the first and last.
template <class Field>
Trajectory simulate_field(const EnsembleState& init, Field&& field, const IntegrationPlan& plan) {
  plan.validate();
  const std::size_t steps = plan.step_count();
  Trajectory traj;
  traj.times.reserve(steps / plan.record_stride + 2);
  traj.states.reserve(steps / plan.record_stride + 2);

  EnsembleState cur = init;
  auto record = [&](const EnsembleState& s) {
    traj.times.push_back(s.time);
    traj.states.push_back(s);
    traj.max_norm_drift = std::max(traj.max_norm_drift, norm_drift(s));
  };
  record(cur);
  for (std::size_t k = 1; k <= steps; ++k) {
    rk4_advance(cur.z, cur.time, plan.dt, field);
    // Time from the step index, not by accumulation, so sweeps share a grid.
    cur.time = init.time + static_cast<double>(k) * plan.dt;
    if (!all_finite(cur.z)) throw IntegrationError("non-finite state", k);
    if (plan.renormalize) {
      cur = renormalize(cur);
    } else if (norm_drift(cur) > plan.drift_abort_threshold) {
      throw DriftAbort("norm drift exceeded abort threshold", k);
    }
    if (k % plan.record_stride == 0 || k == steps) record(cur);
  }
  return traj;
}

inline Trajectory simulate(const EnsembleState& init, const ModelParams& p,
                           const IntegrationPlan& plan) {
  detail::check_shapes(init.z, p.N(), p.ambient());
  if (norm_drift(init) > 1e-10) throw DomainError("simulate: initial state is not on the unit sphere");
  const CMatrix v0 = p.V0();
  const CMatrix v1 = p.V1();
  const FieldSpec spec{p.omegas(), v0, v1, p.kappa0(), p.kappa1()};
  return simulate_field(
      init, [&spec](double, const Configuration& z) { return meanfield_field(z, spec); }, plan);
}

}  // namespace lhs
