#pragma once

// Built-in invariant suites behind `lhs verify`. Each check reports the
// measured worst value against its limit.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "lhs/config.hpp"
#include "lhs/diagnostics.hpp"
#include "lhs/experiment.hpp"
#include "lhs/linalg.hpp"
#include "lhs/model.hpp"
#include "lhs/reductions.hpp"

namespace lhs {

struct SuiteCheck {
  std::string suite;
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool passed() const { return value <= limit; }
};

// The identical-ensemble desk configuration: N = 50 on the 2-sphere,
// kappa0 = 1, Omega entries in [-1, 1], W0 entries in [-0.1, 0.1], T = 10.
inline RunConfig desk_identical_config(unsigned long long seed = 1) {
  RunConfig c;
  c.d = 2;
  c.N = 50;
  c.kappa0 = 1.0;
  c.t_final = 10.0;
  c.seed = seed;
  return c;
}

namespace detail {

template <class Rng>
EnsembleState random_unit_state(std::size_t n, std::size_t dim, Rng& rng) {
  std::normal_distribution<double> g;
  EnsembleState s;
  for (std::size_t j = 0; j < n; ++j) {
    CVector v(dim);
    for (auto& x : v) x = cplx(g(rng), g(rng));
    s.z.push_back(normalized(v));
  }
  return s;
}

template <class Rng>
ModelParams random_params(std::size_t n, std::size_t dim, Rng& rng) {
  std::uniform_real_distribution<double> k(0.0, 2.0);
  const double k0 = k(rng), k1 = k(rng);
  SkewHermitian w0 = random_skew_hermitian(dim, 0.5, rng);
  SkewHermitian w1 = random_skew_hermitian(dim, 0.5, rng);
  std::vector<SkewHermitian> om;
  for (std::size_t j = 0; j < n; ++j) om.push_back(random_skew_hermitian(dim, 1.0, rng));
  return ModelParams(k0, k1, std::move(w0), std::move(w1), std::move(om));
}

}  // namespace detail

inline std::vector<SuiteCheck> verify_conservation() {
  std::vector<SuiteCheck> out;
  const RunResult r = run_single(desk_identical_config(), false);
  double cr = 0.0, drift = 0.0;
  for (double x : r.series.cross_ratio_drift) cr = std::max(cr, x);
  for (double x : r.series.norm_drift) drift = std::max(drift, x);
  out.push_back({"conservation", "max norm drift, N=50 identical run to T=10", drift, 1e-6});
  out.push_back({"conservation", "cross-ratio relative drift, 20 quadruples", cr, 1e-6});

  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 8, dim = 1 + trial % 4;
    const ModelParams p = detail::random_params(n, dim, rng);
    const EnsembleState s = detail::random_unit_state(n, dim, rng);
    const Derivative d = rhs_meanfield(s, p);
    for (std::size_t j = 0; j < n; ++j)
      worst = std::max(worst, std::abs(2.0 * herm_inner(s.z[j], d.dz[j]).real()));
  }
  out.push_back({"conservation", "d/dt |z_j|^2 on unit states, 200 draws", worst, 1e-10});
  return out;
}

inline std::vector<SuiteCheck> verify_meanfield() {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::uniform_int_distribution<std::size_t> pn(1, 8), pd(1, 4);
    const std::size_t n = pn(rng), dim = pd(rng);
    const ModelParams p = detail::random_params(n, dim, rng);
    const EnsembleState s = detail::random_unit_state(n, dim, rng);
    const Derivative a = rhs_meanfield(s, p), b = rhs_sum(s, p);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < dim; ++i) worst = std::max(worst, std::abs(a.dz[j][i] - b.dz[j][i]));
  }
  return {{"meanfield", "mean-field vs pairwise sum, 1000 instances", worst, 1e-12}};
}

inline std::vector<SuiteCheck> verify_reduction() {
  std::vector<SuiteCheck> out;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi), freq(-1.0, 1.0),
      lag(-1.5, 1.5);
  IntegrationPlan plan;
  double worst_a = 0.0, worst_b = 0.0;
  for (double kappa : {0.5, 1.0, 2.0}) {
    KuramotoState k;
    for (int j = 0; j < 10; ++j) {
      k.theta.push_back(phase(rng));
      k.nu.push_back(freq(rng));
    }
    k.kappa = kappa;
    k.alpha = lag(rng);
    worst_a = std::max(worst_a, compare_reduction(k, true, plan).max_phase_error);
    worst_b = std::max(worst_b, compare_reduction(k, false, plan).max_phase_error);
  }
  out.push_back({"reduction", "real circle embedding vs phase model, N=10, T=10", worst_a, 1e-6});
  out.push_back({"reduction", "scalar phase embedding vs phase model, N=10, T=10", worst_b, 1e-6});
  return out;
}

// The three splitting cases: no free flow, frustrations commuting with
// Omega, and a generic draw.
inline std::vector<SuiteCheck> verify_splitting_suite() {
  std::vector<SuiteCheck> out;
  std::mt19937_64 rng(17);
  const std::size_t n = 10, dim = 3;
  const EnsembleState init = gen_initial(desk_identical_config(), 0.8);
  EnsembleState small;
  small.z.assign(init.z.begin(), init.z.begin() + n);

  const SkewHermitian omega = random_skew_hermitian(dim, 1.0, rng);
  const SkewHermitian w0 = random_skew_hermitian(dim, 0.1, rng);
  const SkewHermitian w1 = random_skew_hermitian(dim, 0.1, rng);

  const ModelParams none = ModelParams::identical(n, 1.0, 0.5, w0, w1, SkewHermitian::zero(dim));
  out.push_back({"splitting", "Omega = 0", verify_splitting(none, small, 10.0, 0.02).max_deviation, 1e-6});

  const CMatrix& om = omega.matrix();
  CMatrix c0 = om;
  c0 *= 0.05;
  CMatrix cube = om * om * om;
  cube *= 0.01;
  CMatrix c1 = om;
  c1 *= -0.03;
  const ModelParams commuting =
      ModelParams::identical(n, 1.0, 0.5, skew_hermitize(c0 + cube), skew_hermitize(c1), omega);
  out.push_back({"splitting", "W0, W1 commuting with Omega",
                 verify_splitting(commuting, small, 10.0, 0.02).max_deviation, 1e-6});

  const ModelParams generic = ModelParams::identical(n, 1.0, 0.5, w0, w1, omega);
  out.push_back({"splitting", "generic non-commuting draw",
                 verify_splitting(generic, small, 10.0, 0.02).max_deviation, 1e-6});
  return out;
}

inline std::vector<SuiteCheck> run_suite(const std::string& name) {
  if (name == "conservation") return verify_conservation();
  if (name == "splitting") return verify_splitting_suite();
  if (name == "reduction") return verify_reduction();
  if (name == "meanfield") return verify_meanfield();
  if (name == "all") {
    std::vector<SuiteCheck> all;
    for (const char* s : {"conservation", "splitting", "reduction", "meanfield"}) {
      auto part = run_suite(s);
      all.insert(all.end(), part.begin(), part.end());
    }
    return all;
  }
  throw ConfigError("unknown suite '" + name + "'", "suite");
}

}  // namespace lhs
