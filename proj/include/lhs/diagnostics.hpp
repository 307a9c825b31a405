#pragma once

// Observables on ensemble snapshots: pair angles, correlation parts, the
// aggregation functional J_ij = ((1 - R_ij)^2 + I_ij^2)^{1/4}, diameters,
// the four-point cross-ratio, and tail estimators.
//
// Correlations are evaluated on the radial projection of each snapshot, and
// 1 - <u, v> is formed from u - v rather than by subtracting from one. The
// exact flow keeps every ||z_j|| = 1; integrator drift of ~1e-8 in the norms
// would otherwise put a floor of ~1e-4 under J for coincident particles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "lhs/errors.hpp"
#include "lhs/linalg.hpp"
#include "lhs/model.hpp"

namespace lhs {

class RealMatrix {
 public:
  RealMatrix() = default;
  explicit RealMatrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}
  std::size_t size() const { return n_; }
  bool empty() const { return n_ == 0; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

// 1 - <u, v> for unit u, v without cancellation:
// Re = |u - v|^2 / 2, Im = -Im<u, v - u>.
inline cplx one_minus_inner(const CVector& u, const CVector& v) {
  const CVector diff = v - u;
  return {0.5 * norm_squared(diff), -herm_inner(u, diff).imag()};
}

inline Configuration projected(const Configuration& z) {
  Configuration out;
  out.reserve(z.size());
  for (const auto& v : z) out.push_back(normalized(v));
  return out;
}

struct Correlations {
  RealMatrix R;
  RealMatrix I;
  RealMatrix gap;  // 1 - R_ij, accurate when R_ij is close to one
};

inline Correlations correlations(const EnsembleState& s) {
  const std::size_t n = s.size();
  const Configuration u = projected(s.z);
  Correlations c{RealMatrix(n), RealMatrix(n), RealMatrix(n)};
  for (std::size_t i = 0; i < n; ++i) {
    c.R(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const cplx w = one_minus_inner(u[i], u[j]);
      c.gap(i, j) = c.gap(j, i) = w.real();
      c.R(i, j) = c.R(j, i) = 1.0 - w.real();
      c.I(i, j) = -w.imag();
      c.I(j, i) = w.imag();
    }
  }
  return c;
}

inline RealMatrix agg_functional(const RealMatrix& R, const RealMatrix& I) {
  if (R.size() != I.size()) throw DimensionError("agg_functional: R/I size mismatch");
  const std::size_t n = R.size();
  RealMatrix J(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double a = 1.0 - R(i, j);
      J(i, j) = std::sqrt(std::sqrt(a * a + I(i, j) * I(i, j)));
    }
  return J;
}

// Same functional, using the cancellation-free gap instead of 1 - R.
inline RealMatrix agg_functional(const Correlations& c) {
  const std::size_t n = c.R.size();
  RealMatrix J(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double a = c.gap(i, j);
      J(i, j) = std::sqrt(std::sqrt(a * a + c.I(i, j) * c.I(i, j)));
    }
  return J;
}

struct PairMax {
  double value = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
};

// Max over i < j; ties go to the lexicographically smallest pair. Fewer than
// two particles yield 0 with the sentinel pair (0, 0).
inline PairMax max_functional(const RealMatrix& m) {
  PairMax best;
  bool first = true;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j)
      if (first || m(i, j) > best.value) {
        best = {m(i, j), i, j};
        first = false;
      }
  return best;
}

// theta_ij = arccos <x_i, x_j>, evaluated as 2 atan2(|x_i - x_j|, |x_i + x_j|)
// on the projected vectors, which agrees with the clamped arccos and stays
// accurate near 0 and pi.
inline RealMatrix pair_angles(const EnsembleState& s) {
  if (!is_real(s, 1e-10)) throw DomainError("pair_angles: state has nonzero imaginary parts");
  const std::size_t n = s.size();
  const Configuration u = projected(s.z);
  RealMatrix th(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      th(i, j) = th(j, i) = 2.0 * std::atan2(norm(u[i] - u[j]), norm(u[i] + u[j]));
  return th;
}

inline double diameter(const EnsembleState& s) {
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j) d = std::max(d, norm(s.z[i] - s.z[j]));
  return d;
}

struct PairDiagnostics {
  RealMatrix theta;  // empty for complex snapshots
  RealMatrix R;
  RealMatrix I;
  RealMatrix J;
  double theta_M = std::numeric_limits<double>::quiet_NaN();
  double J_M = 0.0;
  std::pair<std::size_t, std::size_t> argmax_pair{0, 0};
  double diameter = 0.0;
};

inline PairDiagnostics pair_diagnostics(const EnsembleState& s) {
  PairDiagnostics d;
  Correlations c = correlations(s);
  d.J = agg_functional(c);
  const PairMax jm = max_functional(d.J);
  d.J_M = jm.value;
  d.argmax_pair = {jm.i, jm.j};
  d.R = std::move(c.R);
  d.I = std::move(c.I);
  if (is_real(s, 1e-10)) {
    d.theta = pair_angles(s);
    d.theta_M = max_functional(d.theta).value;
  }
  d.diameter = diameter(s);
  return d;
}

// Only the maximal J, without keeping the matrices.
inline double max_agg_functional(const EnsembleState& s) {
  const Configuration u = projected(s.z);
  double best = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = i + 1; j < u.size(); ++j)
      best = std::max(best, std::sqrt(std::abs(one_minus_inner(u[i], u[j]))));
  return best;
}

struct Quadruple {
  std::size_t i, j, k, l;
};

struct CrossRatio {
  cplx value;
  Quadruple indices;
};

inline constexpr double cross_ratio_min_factor = 1e-10;

// C_ijkl = (1 - <z_i,z_j>)(1 - <z_k,z_l>) / ((1 - <z_i,z_l>)(1 - <z_k,z_j>))
// Tracking a fixed quadruple along a collapsing trajectory can pass a
// smaller min_factor; the default is the general-position floor for sampling.
inline CrossRatio cross_ratio(const EnsembleState& s, Quadruple q,
                              double min_factor = cross_ratio_min_factor) {
  const std::size_t n = s.size();
  if (q.i >= n || q.j >= n || q.k >= n || q.l >= n)
    throw DimensionError("cross_ratio: index out of range");
  const std::size_t idx[4] = {q.i, q.j, q.k, q.l};
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      if (idx[a] == idx[b]) throw DomainError("cross_ratio: indices must be distinct");
  const CVector zi = normalized(s.z[q.i]), zj = normalized(s.z[q.j]);
  const CVector zk = normalized(s.z[q.k]), zl = normalized(s.z[q.l]);
  const cplx den_il = one_minus_inner(zi, zl);
  const cplx den_kj = one_minus_inner(zk, zj);
  if (std::abs(den_il) <= min_factor || std::abs(den_kj) <= min_factor)
    throw DegeneratePosition("cross_ratio: points not in general position");
  return {one_minus_inner(zi, zj) * one_minus_inner(zk, zl) / (den_il * den_kj), q};
}

inline CrossRatio cross_ratio(const EnsembleState& s, std::size_t i, std::size_t j,
                              std::size_t k, std::size_t l) {
  return cross_ratio(s, Quadruple{i, j, k, l});
}

// Draws `count` quadruples of distinct indices whose cross-ratio is well
// defined on `s`. Retries degenerate draws; gives up after 100 tries per slot.
template <class Rng>
std::vector<Quadruple> sample_quadruples(const EnsembleState& s, std::size_t count, Rng& rng) {
  if (s.size() < 4) throw DimensionError("sample_quadruples: need at least four particles");
  std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
  std::vector<Quadruple> out;
  for (std::size_t c = 0; c < count; ++c) {
    bool found = false;
    for (int attempt = 0; attempt < 100 && !found; ++attempt) {
      std::size_t v[4];
      for (int a = 0; a < 4; ++a) {
        bool fresh = false;
        while (!fresh) {
          v[a] = pick(rng);
          fresh = std::none_of(v, v + a, [&](std::size_t x) { return x == v[a]; });
        }
      }
      const Quadruple q{v[0], v[1], v[2], v[3]};
      try {
        cross_ratio(s, q);
        out.push_back(q);
        found = true;
      } catch (const DegeneratePosition&) {
      }
    }
    if (!found) throw DegeneratePosition("sample_quadruples: no quadruple in general position");
  }
  return out;
}

// max_{i,j} ||Omega_i - Omega_j||_F
inline double omega_diameter(const ModelParams& p) {
  if (p.identical_omega()) return 0.0;
  double d = 0.0;
  for (std::size_t i = 0; i < p.N(); ++i)
    for (std::size_t j = i + 1; j < p.N(); ++j)
      d = std::max(d, frobenius_norm(p.omega(i).matrix() - p.omega(j).matrix()));
  return d;
}

// Estimator for limsup: the largest value over the final `tail_fraction` of
// the time window [t_0, t_end].
inline double tail_sup(std::span<const double> times, std::span<const double> values,
                       double tail_fraction = 0.2) {
  if (values.empty()) throw DomainError("tail_sup: empty series");
  if (times.size() != values.size()) throw DimensionError("tail_sup: times/values length mismatch");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw DomainError("tail_sup: tail_fraction must lie in (0, 1]");
  const double t0 = times.front();
  const double t1 = times.back();
  const double start = t1 - tail_fraction * (t1 - t0);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < values.size(); ++k)
    if (times[k] >= start - 1e-12 * (1.0 + std::abs(start))) best = std::max(best, values[k]);
  return best;
}

// d/dt <z_i, z_j> for the kappa1 = 0 flow on unit states:
// <(Omega_i - Omega_j) z_i, z_j> + kappa0 (1 - <z_i,z_j>)(<V0 z_c, z_j> + <z_i, V0 z_c>).
inline cplx inner_product_rate(const EnsembleState& s, const ModelParams& p, std::size_t i,
                               std::size_t j) {
  if (p.kappa1() != 0.0) throw DomainError("inner_product_rate: requires kappa1 = 0");
  detail::check_shapes(s.z, p.N(), p.ambient());
  const CVector v0zc = p.V0() * centroid(s);
  const CMatrix dom = p.omega(i).matrix() - p.omega(j).matrix();
  return herm_inner(dom * s.z[i], s.z[j]) +
         p.kappa0() * (1.0 - herm_inner(s.z[i], s.z[j])) *
             (herm_inner(v0zc, s.z[j]) + herm_inner(s.z[i], v0zc));
}

}  // namespace lhs
