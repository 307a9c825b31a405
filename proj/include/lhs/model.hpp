#pragma once

// Ensemble state, parameters, and the right-hand side of the frustrated
// Lohe hermitian sphere dynamics
//
//   dz_j/dt = Omega_j z_j
//           + kappa0 (<z_j,z_j> V0 z_c - <V0 z_c, z_j> z_j)
//           + kappa1 (<z_j, V1 z_c> - <V1 z_c, z_j>) z_j,
//
// with V0 = I + W0, V1 = I + W1 and z_c the ensemble centroid. The pairwise
// sum form is kept as an independent evaluation path.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lhs/errors.hpp"
#include "lhs/linalg.hpp"

namespace lhs {

using Configuration = std::vector<CVector>;

struct EnsembleState {
  Configuration z;
  double time = 0.0;

  std::size_t size() const { return z.size(); }
  // Ambient complex dimension d + 1.
  std::size_t ambient() const { return z.empty() ? 0 : z.front().size(); }
};

struct Derivative {
  Configuration dz;
};

inline bool is_real(const EnsembleState& s, double tol = 1e-10) {
  for (const auto& v : s.z)
    if (!is_real(v, tol)) return false;
  return true;
}

// max_j | ||z_j|| - 1 |
inline double norm_drift(const EnsembleState& s) {
  double worst = 0.0;
  for (const auto& v : s.z) worst = std::max(worst, std::abs(norm(v) - 1.0));
  return worst;
}

class ModelParams {
 public:
  ModelParams(double kappa0, double kappa1, SkewHermitian w0, SkewHermitian w1,
              std::vector<SkewHermitian> omega)
      : kappa0_(kappa0),
        kappa1_(kappa1),
        w0_(std::move(w0)),
        w1_(std::move(w1)),
        omega_(std::move(omega)) {
    if (omega_.empty()) throw DimensionError("ModelParams: need at least one particle");
    if (!(kappa0_ >= 0.0) || !(kappa1_ >= 0.0))
      throw DomainError("ModelParams: coupling strengths must be nonnegative");
    const std::size_t n = w0_.order();
    if (n == 0 || w1_.order() != n) throw DimensionError("ModelParams: W0/W1 order mismatch");
    for (const auto& o : omega_)
      if (o.order() != n) throw DimensionError("ModelParams: Omega order mismatch");
    identical_ = true;
    for (std::size_t j = 1; j < omega_.size() && identical_; ++j)
      identical_ = frobenius_norm(omega_[j].matrix() - omega_[0].matrix()) <= 1e-12;
  }

  // N copies of one frequency matrix.
  static ModelParams identical(std::size_t n_particles, double kappa0, double kappa1,
                               SkewHermitian w0, SkewHermitian w1, const SkewHermitian& omega) {
    return ModelParams(kappa0, kappa1, std::move(w0), std::move(w1),
                       std::vector<SkewHermitian>(n_particles, omega));
  }

  std::size_t d() const { return w0_.order() - 1; }
  std::size_t ambient() const { return w0_.order(); }
  std::size_t N() const { return omega_.size(); }
  double kappa0() const { return kappa0_; }
  double kappa1() const { return kappa1_; }
  const SkewHermitian& W0() const { return w0_; }
  const SkewHermitian& W1() const { return w1_; }
  const SkewHermitian& omega(std::size_t j) const { return omega_.at(j); }
  std::span<const SkewHermitian> omegas() const { return omega_; }
  bool identical_omega() const { return identical_; }

  // V = I + W unless a general frustration matrix was supplied.
  CMatrix V0() const { return v0_override_ ? *v0_override_ : CMatrix::identity(ambient()) + w0_.matrix(); }
  CMatrix V1() const { return v1_override_ ? *v1_override_ : CMatrix::identity(ambient()) + w1_.matrix(); }

  bool has_frustration_override() const { return v0_override_.has_value() || v1_override_.has_value(); }

  // Replaces I + W by an arbitrary V (e.g. a planar rotation). Threshold
  // calculators refuse parameters carrying an override.
  ModelParams with_frustration_override(std::optional<CMatrix> v0, std::optional<CMatrix> v1) const {
    ModelParams p = *this;
    if (v0 && v0->order() != ambient()) throw DimensionError("V0 override order mismatch");
    if (v1 && v1->order() != ambient()) throw DimensionError("V1 override order mismatch");
    p.v0_override_ = std::move(v0);
    p.v1_override_ = std::move(v1);
    return p;
  }

  ModelParams with_kappa0(double kappa0) const {
    if (!(kappa0 >= 0.0)) throw DomainError("ModelParams: kappa0 must be nonnegative");
    ModelParams p = *this;
    p.kappa0_ = kappa0;
    return p;
  }

  bool is_real() const {
    if (!w0_.matrix().is_real() || !w1_.matrix().is_real()) return false;
    if (v0_override_ && !v0_override_->is_real()) return false;
    if (v1_override_ && !v1_override_->is_real()) return false;
    for (const auto& o : omega_)
      if (!o.matrix().is_real()) return false;
    return true;
  }

 private:
  double kappa0_;
  double kappa1_;
  SkewHermitian w0_;
  SkewHermitian w1_;
  std::vector<SkewHermitian> omega_;
  bool identical_ = true;
  std::optional<CMatrix> v0_override_;
  std::optional<CMatrix> v1_override_;
};

namespace detail {
inline void check_shapes(const Configuration& z, std::size_t n, std::size_t ambient) {
  if (z.size() != n) throw DimensionError("state/parameter particle count mismatch");
  for (const auto& v : z)
    if (v.size() != ambient) throw DimensionError("state/parameter dimension mismatch");
}
}  // namespace detail

inline CVector centroid(const Configuration& z) {
  if (z.empty()) throw DimensionError("centroid of an empty ensemble");
  CVector c(z.front().size());
  for (const auto& v : z) c += v;
  c *= 1.0 / static_cast<double>(z.size());
  return c;
}

inline CVector centroid(const EnsembleState& s) { return centroid(s.z); }

// Everything the mean-field vector field needs. An empty omega span means
// no free flow; V0/V1 are explicit so time-dependent conjugates can be fed in.
struct FieldSpec {
  std::span<const SkewHermitian> omega;
  const CMatrix& V0;
  const CMatrix& V1;
  double kappa0;
  double kappa1;
};

inline Configuration meanfield_field(const Configuration& z, const FieldSpec& f) {
  const std::size_t n = z.size();
  if (!f.omega.empty() && f.omega.size() != n)
    throw DimensionError("meanfield_field: Omega count mismatch");
  const CVector zc = centroid(z);
  const CVector v0zc = f.V0 * zc;
  const CVector v1zc = f.V1 * zc;
  Configuration out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const CVector& zj = z[j];
    CVector dz = f.omega.empty() ? CVector(zj.size()) : f.omega[j] * zj;
    if (f.kappa0 != 0.0) {
      dz.add_scaled(f.kappa0 * herm_inner(zj, zj), v0zc);
      dz.add_scaled(-f.kappa0 * herm_inner(v0zc, zj), zj);
    }
    if (f.kappa1 != 0.0) {
      const cplx phase = herm_inner(zj, v1zc) - herm_inner(v1zc, zj);
      dz.add_scaled(f.kappa1 * phase, zj);
    }
    out.push_back(std::move(dz));
  }
  return out;
}

inline Derivative rhs_meanfield(const EnsembleState& s, const ModelParams& p) {
  detail::check_shapes(s.z, p.N(), p.ambient());
  const CMatrix v0 = p.V0();
  const CMatrix v1 = p.V1();
  return {meanfield_field(s.z, FieldSpec{p.omegas(), v0, v1, p.kappa0(), p.kappa1()})};
}

// Pairwise double sum; O(N^2) and kept as a cross-check on rhs_meanfield.
inline Derivative rhs_sum(const EnsembleState& s, const ModelParams& p) {
  detail::check_shapes(s.z, p.N(), p.ambient());
  const std::size_t n = s.size();
  const CMatrix v0 = p.V0();
  const CMatrix v1 = p.V1();
  const double inv_n = 1.0 / static_cast<double>(n);
  Derivative d;
  d.dz.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const CVector& zj = s.z[j];
    CVector dz = p.omega(j) * zj;
    const cplx zz = herm_inner(zj, zj);
    for (std::size_t k = 0; k < n; ++k) {
      const CVector v0zk = v0 * s.z[k];
      const CVector v1zk = v1 * s.z[k];
      dz.add_scaled(p.kappa0() * inv_n * zz, v0zk);
      dz.add_scaled(-p.kappa0() * inv_n * herm_inner(v0zk, zj), zj);
      dz.add_scaled(p.kappa1() * inv_n * (herm_inner(zj, v1zk) - herm_inner(v1zk, zj)), zj);
    }
    d.dz.push_back(std::move(dz));
  }
  return d;
}

// Real sphere restriction: dx_j = Omega_j x_j + kappa (<x_j,x_j> V x_c - <V x_c, x_j> x_j).
inline Derivative rhs_real_ls(const EnsembleState& s, const ModelParams& p) {
  if (p.kappa1() != 0.0) throw DomainError("rhs_real_ls: kappa1 must be zero");
  if (!is_real(s, 0.0) || !p.is_real()) throw DomainError("rhs_real_ls: inputs must be real");
  Derivative d = rhs_meanfield(s, p);
  for (auto& v : d.dz)
    for (auto& x : v) x = cplx(x.real(), 0.0);
  return d;
}

}  // namespace lhs
