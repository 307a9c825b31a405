#pragma once

// Small dense complex linear algebra for state vectors in C^{d+1} and the
// (d+1)x(d+1) generator / frustration matrices. Orders here never exceed a
// handful, so everything is plain row-major storage with no blocking.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <random>
#include <vector>

#include "lhs/errors.hpp"

namespace lhs {

using cplx = std::complex<double>;

inline constexpr double default_atol = 1e-12;
inline constexpr double default_rtol = 1e-10;

// |a - b| <= atol + rtol * max(|a|, |b|)
inline bool approx_equal(double a, double b, double atol = default_atol,
                         double rtol = default_rtol) {
  return std::abs(a - b) <= atol + rtol * std::max(std::abs(a), std::abs(b));
}

inline bool approx_equal(cplx a, cplx b, double atol = default_atol,
                         double rtol = default_rtol) {
  return std::abs(a - b) <= atol + rtol * std::max(std::abs(a), std::abs(b));
}

class CVector {
 public:
  CVector() = default;
  explicit CVector(std::size_t n) : v_(n) {}
  CVector(std::initializer_list<cplx> init) : v_(init) {}
  explicit CVector(std::vector<cplx> v) : v_(std::move(v)) {}

  std::size_t size() const { return v_.size(); }
  cplx& operator[](std::size_t i) { return v_[i]; }
  const cplx& operator[](std::size_t i) const { return v_[i]; }
  auto begin() { return v_.begin(); }
  auto end() { return v_.end(); }
  auto begin() const { return v_.begin(); }
  auto end() const { return v_.end(); }

  CVector& operator+=(const CVector& o) {
    check_same(o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
  }
  CVector& operator-=(const CVector& o) {
    check_same(o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
  }
  CVector& operator*=(cplx s) {
    for (auto& x : v_) x *= s;
    return *this;
  }
  // this += a * x, the only update the integrator needs in its inner loop.
  CVector& add_scaled(cplx a, const CVector& x) {
    check_same(x);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += a * x.v_[i];
    return *this;
  }

  friend CVector operator+(CVector a, const CVector& b) { return a += b; }
  friend CVector operator-(CVector a, const CVector& b) { return a -= b; }
  friend CVector operator*(cplx s, CVector a) { return a *= s; }
  friend CVector operator*(CVector a, cplx s) { return a *= s; }
  friend bool operator==(const CVector& a, const CVector& b) { return a.v_ == b.v_; }

 private:
  void check_same(const CVector& o) const {
    if (o.v_.size() != v_.size()) throw DimensionError("vector length mismatch");
  }
  std::vector<cplx> v_;
};

// Hermitian inner product, conjugate-linear in the first argument.
inline cplx herm_inner(const CVector& u, const CVector& v) {
  if (u.size() != v.size()) throw DimensionError("herm_inner: length mismatch");
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < u.size(); ++i) s += std::conj(u[i]) * v[i];
  return s;
}

inline double norm_squared(const CVector& u) {
  double s = 0.0;
  for (const auto& x : u) s += std::norm(x);
  return s;
}

inline double norm(const CVector& u) { return std::sqrt(norm_squared(u)); }

inline bool is_finite(const CVector& u) {
  return std::all_of(u.begin(), u.end(), [](cplx x) {
    return std::isfinite(x.real()) && std::isfinite(x.imag());
  });
}

inline bool is_real(const CVector& u, double tol = 0.0) {
  return std::all_of(u.begin(), u.end(), [tol](cplx x) { return std::abs(x.imag()) <= tol; });
}

inline CVector normalized(const CVector& u) {
  const double n = norm(u);
  if (!(n > 0.0)) throw DomainError("cannot normalize a zero vector");
  return (1.0 / n) * u;
}

// Square complex matrix, row-major.
class CMatrix {
 public:
  CMatrix() = default;
  explicit CMatrix(std::size_t n) : n_(n), a_(n * n) {}

  static CMatrix identity(std::size_t n) {
    CMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  // Throws DimensionError unless every row has as many entries as there are rows.
  static CMatrix from_rows(const std::vector<std::vector<cplx>>& rows) {
    CMatrix m(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != rows.size()) throw DimensionError("matrix is not square");
      for (std::size_t c = 0; c < rows.size(); ++c) m(r, c) = rows[r][c];
    }
    return m;
  }

  std::size_t order() const { return n_; }
  cplx& operator()(std::size_t r, std::size_t c) { return a_[r * n_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return a_[r * n_ + c]; }

  CMatrix adjoint() const {
    CMatrix m(n_);
    for (std::size_t r = 0; r < n_; ++r)
      for (std::size_t c = 0; c < n_; ++c) m(r, c) = std::conj((*this)(c, r));
    return m;
  }

  bool is_real(double tol = 0.0) const {
    return std::all_of(a_.begin(), a_.end(), [tol](cplx x) { return std::abs(x.imag()) <= tol; });
  }

  bool is_finite() const {
    return std::all_of(a_.begin(), a_.end(), [](cplx x) {
      return std::isfinite(x.real()) && std::isfinite(x.imag());
    });
  }

  CMatrix& operator+=(const CMatrix& o) {
    check_same(o);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
  }
  CMatrix& operator-=(const CMatrix& o) {
    check_same(o);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
  }
  CMatrix& operator*=(cplx s) {
    for (auto& x : a_) x *= s;
    return *this;
  }

  friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
  friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
  friend CMatrix operator*(cplx s, CMatrix a) { return a *= s; }

  friend CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    a.check_same(b);
    CMatrix m(a.n_);
    for (std::size_t r = 0; r < a.n_; ++r)
      for (std::size_t k = 0; k < a.n_; ++k) {
        const cplx ark = a(r, k);
        for (std::size_t c = 0; c < a.n_; ++c) m(r, c) += ark * b(k, c);
      }
    return m;
  }

  friend CVector operator*(const CMatrix& a, const CVector& x) {
    if (x.size() != a.n_) throw DimensionError("matrix-vector order mismatch");
    CVector y(a.n_);
    for (std::size_t r = 0; r < a.n_; ++r) {
      cplx s{0.0, 0.0};
      for (std::size_t c = 0; c < a.n_; ++c) s += a(r, c) * x[c];
      y[r] = s;
    }
    return y;
  }

  friend bool operator==(const CMatrix& a, const CMatrix& b) {
    return a.n_ == b.n_ && a.a_ == b.a_;
  }

 private:
  void check_same(const CMatrix& o) const {
    if (o.n_ != n_) throw DimensionError("matrix order mismatch");
  }
  std::size_t n_ = 0;
  std::vector<cplx> a_;
};

// ||M||_F = Tr(M^† M)^{1/2}
inline double frobenius_norm(const CMatrix& m) {
  double s = 0.0;
  for (std::size_t r = 0; r < m.order(); ++r)
    for (std::size_t c = 0; c < m.order(); ++c) s += std::norm(m(r, c));
  return std::sqrt(s);
}

inline bool is_skew_hermitian(const CMatrix& m, double tol = default_atol) {
  return frobenius_norm(m + m.adjoint()) <= tol * (1.0 + frobenius_norm(m));
}

// Skew-hermitian matrix; the only way to obtain one is through a checked
// constructor or one of the projections below.
class SkewHermitian {
 public:
  SkewHermitian() = default;
  explicit SkewHermitian(CMatrix m, double tol = default_atol) : m_(std::move(m)) {
    if (!is_skew_hermitian(m_, tol)) throw DomainError("matrix is not skew-hermitian");
    if (!m_.is_finite()) throw DomainError("matrix has non-finite entries");
  }

  static SkewHermitian zero(std::size_t n) { return SkewHermitian(CMatrix(n)); }

  const CMatrix& matrix() const { return m_; }
  std::size_t order() const { return m_.order(); }
  cplx operator()(std::size_t r, std::size_t c) const { return m_(r, c); }

  friend CVector operator*(const SkewHermitian& a, const CVector& x) { return a.m_ * x; }
  friend bool operator==(const SkewHermitian& a, const SkewHermitian& b) { return a.m_ == b.m_; }

 private:
  CMatrix m_;
};

inline double frobenius_norm(const SkewHermitian& m) { return frobenius_norm(m.matrix()); }

// (A - A^†)/2
inline SkewHermitian skew_hermitize(const CMatrix& a) {
  CMatrix m = a - a.adjoint();
  m *= 0.5;
  return SkewHermitian(std::move(m), 0.0);
}

namespace detail {
template <class Rng>
double symmetric_uniform(Rng& rng, double range) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return range * (2.0 * unit(rng) - 1.0);
}
}  // namespace detail

// Strict upper triangle gets real and imaginary parts uniform in
// [-range, range], the diagonal an imaginary part in the same interval, and
// the lower triangle the negated conjugate of the upper. The result is
// skew-hermitian bit-for-bit.
template <class Rng>
SkewHermitian random_skew_hermitian(std::size_t dim, double range, Rng& rng) {
  if (dim == 0) throw DimensionError("random_skew_hermitian: dim must be positive");
  if (!(range >= 0.0)) throw DomainError("random_skew_hermitian: range must be nonnegative");
  CMatrix m(dim);
  for (std::size_t r = 0; r < dim; ++r) {
    m(r, r) = cplx(0.0, detail::symmetric_uniform(rng, range));
    for (std::size_t c = r + 1; c < dim; ++c) {
      const double re = detail::symmetric_uniform(rng, range);
      const double im = detail::symmetric_uniform(rng, range);
      m(r, c) = cplx(re, im);
      m(c, r) = -std::conj(m(r, c));
    }
  }
  return SkewHermitian(std::move(m), 0.0);
}

// Real skew-symmetric variant for the real sphere model.
template <class Rng>
SkewHermitian random_skew_symmetric(std::size_t dim, double range, Rng& rng) {
  if (dim == 0) throw DimensionError("random_skew_symmetric: dim must be positive");
  if (!(range >= 0.0)) throw DomainError("random_skew_symmetric: range must be nonnegative");
  CMatrix m(dim);
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = r + 1; c < dim; ++c) {
      const double x = detail::symmetric_uniform(rng, range);
      m(r, c) = x;
      m(c, r) = -x;
    }
  return SkewHermitian(std::move(m), 0.0);
}

// exp(tM) by scaling and squaring: scale until ||tM/2^s||_F <= 1/2, sum an
// 18-term Taylor series, square s times.
inline CMatrix matrix_exp(const CMatrix& m, double t) {
  const std::size_t n = m.order();
  CMatrix a = cplx(t, 0.0) * m;
  const double nrm = frobenius_norm(a);
  int squarings = 0;
  if (nrm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
  a *= std::ldexp(1.0, -squarings);

  CMatrix result = CMatrix::identity(n);
  CMatrix term = CMatrix::identity(n);
  for (int k = 1; k <= 18; ++k) {
    term = term * a;
    term *= 1.0 / k;
    result += term;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

struct PairingBound {
  double lhs;
  double rhs;
  bool holds(double tol = default_atol) const { return lhs <= rhs + tol; }
};

// |<x, W y>| against ||W||_F / sqrt(2) * sqrt(|x|^2 |y|^2 - <x,y>^2) for a
// real skew-symmetric W and real x, y.
inline PairingBound pairing_bound_real(const CMatrix& w, const CVector& x, const CVector& y) {
  if (x.size() != y.size() || w.order() != x.size())
    throw DimensionError("pairing_bound_real: dimension mismatch");
  if (!w.is_real() || !is_real(x) || !is_real(y))
    throw DomainError("pairing_bound_real: inputs must be real");
  if (!is_skew_hermitian(w)) throw DomainError("pairing_bound_real: W must be skew-symmetric");
  const double xy = herm_inner(x, y).real();
  const double lhs = std::abs(herm_inner(x, w * y).real());
  const double gram = std::max(0.0, norm_squared(x) * norm_squared(y) - xy * xy);
  return {lhs, frobenius_norm(w) / std::sqrt(2.0) * std::sqrt(gram)};
}

// |<Wx, y> + <y, Wx>| against sqrt(2) ||W||_F sqrt(|x|^2 |y|^2 - Re(<x,y>^2)).
inline PairingBound pairing_bound_complex(const SkewHermitian& w, const CVector& x,
                                          const CVector& y) {
  if (x.size() != y.size() || w.order() != x.size())
    throw DimensionError("pairing_bound_complex: dimension mismatch");
  const CVector wx = w * x;
  const double lhs = std::abs(herm_inner(wx, y) + herm_inner(y, wx));
  const cplx xy = herm_inner(x, y);
  const double gram = std::max(0.0, norm_squared(x) * norm_squared(y) - (xy * xy).real());
  return {lhs, std::sqrt(2.0) * frobenius_norm(w) * std::sqrt(gram)};
}

}  // namespace lhs
