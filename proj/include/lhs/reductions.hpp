#pragma once

// Kuramoto oscillators with a uniform phase lag, their two embeddings into
// the sphere model, and the free-flow / nonlinear-flow splitting check for
// identical ensembles.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "lhs/errors.hpp"
#include "lhs/integrator.hpp"
#include "lhs/linalg.hpp"
#include "lhs/model.hpp"

namespace lhs {

struct KuramotoState {
  std::vector<double> theta;
  std::vector<double> nu;
  double kappa = 0.0;
  double alpha = 0.0;
};

namespace detail {
inline std::vector<double> kuramoto_field(const std::vector<double>& theta,
                                          const std::vector<double>& nu, double kappa,
                                          double alpha) {
  const std::size_t n = theta.size();
  std::vector<double> out(n);
  // sum_k sin(t_k - t_j + a) = Im(e^{i(a - t_j)} sum_k e^{i t_k})
  cplx order{0.0, 0.0};
  for (double t : theta) order += std::polar(1.0, t);
  for (std::size_t j = 0; j < n; ++j)
    out[j] = nu[j] + kappa / static_cast<double>(n) * (std::polar(1.0, alpha - theta[j]) * order).imag();
  return out;
}
}  // namespace detail

// dtheta_j = nu_j + kappa/N sum_k sin(theta_k - theta_j + alpha)
inline std::vector<double> kuramoto_rhs(const KuramotoState& s) {
  if (s.theta.size() != s.nu.size()) throw DimensionError("kuramoto_rhs: theta/nu length mismatch");
  if (s.theta.empty()) throw DimensionError("kuramoto_rhs: empty ensemble");
  return detail::kuramoto_field(s.theta, s.nu, s.kappa, s.alpha);
}

struct PhaseTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> phases;
};

inline PhaseTrajectory simulate_kuramoto(const KuramotoState& init, const IntegrationPlan& plan) {
  plan.validate();
  kuramoto_rhs(init);
  PhaseTrajectory out;
  std::vector<double> theta = init.theta;
  out.times.push_back(0.0);
  out.phases.push_back(theta);
  const std::size_t steps = plan.step_count();
  auto field = [&](double, const std::vector<double>& th) {
    return detail::kuramoto_field(th, init.nu, init.kappa, init.alpha);
  };
  for (std::size_t k = 1; k <= steps; ++k) {
    rk4_advance(theta, static_cast<double>(k - 1) * plan.dt, plan.dt, field);
    if (!all_finite(theta)) throw IntegrationError("non-finite phase", k);
    if (k % plan.record_stride == 0 || k == steps) {
      out.times.push_back(static_cast<double>(k) * plan.dt);
      out.phases.push_back(theta);
    }
  }
  return out;
}

// Difference of two angles folded into (-pi, pi].
inline double wrapped_difference(double a, double b) {
  return std::remainder(a - b, 2.0 * std::numbers::pi);
}

struct Embedding {
  EnsembleState state;
  ModelParams params;
};

inline CMatrix planar_rotation(double alpha) {
  return CMatrix::from_rows({{std::cos(alpha), -std::sin(alpha)}, {std::sin(alpha), std::cos(alpha)}});
}

// Real circle: x_j = (cos t_j, sin t_j), Omega_j the planar generator with
// speed nu_j, V0 the rotation by alpha (passed as an override since it is not
// of the form I + W), kappa0 = kappa, kappa1 = 0.
inline Embedding embed_subsystem_a(const std::vector<double>& theta, double alpha,
                                   const std::vector<double>& nu, double kappa) {
  if (theta.size() != nu.size() || theta.empty())
    throw DimensionError("embed_subsystem_a: theta/nu length mismatch");
  EnsembleState s;
  std::vector<SkewHermitian> omega;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    s.z.push_back(CVector{std::cos(theta[j]), std::sin(theta[j])});
    omega.emplace_back(CMatrix::from_rows({{0.0, -nu[j]}, {nu[j], 0.0}}), 0.0);
  }
  ModelParams p(kappa, 0.0, SkewHermitian::zero(2), SkewHermitian::zero(2), std::move(omega));
  return {std::move(s), p.with_frustration_override(planar_rotation(alpha), std::nullopt)};
}

// Scalar phases: z_j = e^{i t_j}, Omega_j = i nu_j, V1 = e^{i alpha},
// kappa0 = 0, kappa1 = kappa/2.
inline Embedding embed_subsystem_b(const std::vector<double>& theta, double alpha,
                                   const std::vector<double>& nu, double kappa) {
  if (theta.size() != nu.size() || theta.empty())
    throw DimensionError("embed_subsystem_b: theta/nu length mismatch");
  EnsembleState s;
  std::vector<SkewHermitian> omega;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    s.z.push_back(CVector{std::polar(1.0, theta[j])});
    omega.emplace_back(CMatrix::from_rows({{cplx(0.0, nu[j])}}), 0.0);
  }
  ModelParams p(0.0, kappa / 2.0, SkewHermitian::zero(1), SkewHermitian::zero(1), std::move(omega));
  return {std::move(s), p.with_frustration_override(std::nullopt,
                                                    CMatrix::from_rows({{std::polar(1.0, alpha)}}))};
}

// Phase read back from a subsystem-A or subsystem-B particle.
inline double embedded_phase(const CVector& z) {
  if (z.size() == 2) return std::atan2(z[1].real(), z[0].real());
  if (z.size() == 1) return std::arg(z[0]);
  throw DimensionError("embedded_phase: expected a 1- or 2-component state");
}

struct ReductionResult {
  double max_phase_error = 0.0;
  double max_norm_drift = 0.0;
};

// Integrates the embedded system and the phase model side by side on the
// same grid and reports the largest wrapped phase discrepancy.
inline ReductionResult compare_reduction(const KuramotoState& k, bool subsystem_a,
                                         const IntegrationPlan& plan) {
  const Embedding e = subsystem_a ? embed_subsystem_a(k.theta, k.alpha, k.nu, k.kappa)
                                  : embed_subsystem_b(k.theta, k.alpha, k.nu, k.kappa);
  const Trajectory traj = simulate(e.state, e.params, plan);
  const PhaseTrajectory ref = simulate_kuramoto(k, plan);
  if (ref.times.size() != traj.size()) throw DimensionError("compare_reduction: grids differ");
  ReductionResult r;
  r.max_norm_drift = traj.max_norm_drift;
  for (std::size_t s = 0; s < traj.size(); ++s)
    for (std::size_t j = 0; j < k.theta.size(); ++j)
      r.max_phase_error = std::max(
          r.max_phase_error,
          std::abs(wrapped_difference(embedded_phase(traj.states[s].z[j]), ref.phases[s][j])));
  return r;
}

// e^{-Omega t} V e^{Omega t}
inline CMatrix tilde_V(const CMatrix& v, const SkewHermitian& omega, double t) {
  return matrix_exp(omega.matrix(), -t) * v * matrix_exp(omega.matrix(), t);
}

struct SplittingResult {
  double max_deviation = 0.0;
  std::size_t snapshots = 0;
};

// Runs the full system and, separately, the nonlinear flow driven by the
// conjugated frustrations tilde_V0(t), tilde_V1(t) (recomputed at every RK4
// stage time); returns max_j sup_t ||z_j(t) - e^{Omega t} w_j(t)||.
inline SplittingResult verify_splitting(const ModelParams& p, const EnsembleState& init, double t_final,
                                        double dt) {
  if (!p.identical_omega()) throw DomainError("verify_splitting: requires identical Omega");
  detail::check_shapes(init.z, p.N(), p.ambient());
  IntegrationPlan plan;
  plan.dt = dt;
  plan.t_final = t_final;
  const Trajectory full = simulate(init, p, plan);

  const SkewHermitian& omega = p.omega(0);
  const CMatrix v0 = p.V0();
  const CMatrix v1 = p.V1();
  const double t0 = init.time;
  auto nonlinear = [&](double t, const Configuration& w) {
    const CMatrix a = matrix_exp(omega.matrix(), -(t - t0));
    const CMatrix b = matrix_exp(omega.matrix(), t - t0);
    const CMatrix tv0 = a * v0 * b;
    const CMatrix tv1 = a * v1 * b;
    return meanfield_field(w, FieldSpec{{}, tv0, tv1, p.kappa0(), p.kappa1()});
  };
  const Trajectory inner = simulate_field(init, nonlinear, plan);

  SplittingResult r;
  r.snapshots = full.size();
  for (std::size_t s = 0; s < full.size(); ++s) {
    const CMatrix rot = matrix_exp(omega.matrix(), full.times[s] - t0);
    for (std::size_t j = 0; j < p.N(); ++j)
      r.max_deviation =
          std::max(r.max_deviation, norm(full.states[s].z[j] - rot * inner.states[s].z[j]));
  }
  return r;
}

}  // namespace lhs
