#pragma once

// Sufficient conditions, guaranteed decay rates and the polynomial-root
// apparatus of the aggregation estimates, plus check_run, which binds them
// to an observed trajectory.
//
// Six guarantees are tracked:
//   real_complete      angle decay theta_ij(t) <= theta_ij(0) exp(-L_ij t)  (real, identical)
//   real_practical     sup theta_M <= pi/2, quadratic roots (s1, s2)       (real, heterogeneous)
//   complex_complete   J_ij(t) <= J_ij(0) exp(-L_ij t)                     (kappa1 = 0, identical)
//   complex_practical  limsup J_M <= J_-(kappa0)                           (kappa1 = 0, heterogeneous)
//   full_complete      J_M(t) <= J_M(0) exp(-L t)                          (kappa0 > 2 kappa1, W1 = 0, identical)
//   full_practical     limsup J_M <= J_-(kappa0, kappa1)                   (kappa1 > 0, non-identical or W1 != 0)

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lhs/diagnostics.hpp"
#include "lhs/errors.hpp"
#include "lhs/integrator.hpp"
#include "lhs/linalg.hpp"
#include "lhs/model.hpp"

namespace lhs {

namespace detail {
inline const double sqrt2 = std::sqrt(2.0);
inline const double fourth_root5 = std::sqrt(std::sqrt(5.0));
// Coefficient of ||W0||_F J in the aggregation-functional estimates.
inline double frustration_slope(double w0_norm) { return fourth_root5 / sqrt2 * w0_norm; }
inline void require_nonnegative(double x, const char* what) {
  if (!(x >= 0.0)) throw DomainError(std::string(what) + " must be nonnegative");
}
}  // namespace detail

// ---------------------------------------------------------------- real case

// arccot(||W||_F / sqrt 2), in (0, pi/2].
inline double threshold_p31(double w_norm) {
  detail::require_nonnegative(w_norm, "threshold_p31: ||W||_F");
  return std::atan2(1.0, w_norm / detail::sqrt2);
}

inline double threshold_p31(const SkewHermitian& w) {
  if (!w.matrix().is_real()) throw DomainError("threshold_p31: W must be real");
  return threshold_p31(frobenius_norm(w));
}

// L_ij = kappa/(2N) sum_k (cos t_ik + cos t_jk - ||W||/sqrt2 (sin t_ik + sin t_jk))
// from initial angles. Throws HypothesisViolated unless every initial angle
// is below threshold_p31.
inline double rate_p31(const RealMatrix& theta_in, double kappa, double w_norm, std::size_t i,
                       std::size_t j) {
  const std::size_t n = theta_in.size();
  if (i >= n || j >= n) throw DimensionError("rate_p31: index out of range");
  const double thr = threshold_p31(w_norm);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (!(theta_in(a, b) < thr)) throw HypothesisViolated("rate_p31: initial angle above threshold");
  const double c = w_norm / detail::sqrt2;
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    sum += std::cos(theta_in(i, k)) + std::cos(theta_in(j, k)) -
           c * (std::sin(theta_in(i, k)) + std::sin(theta_in(j, k)));
  return kappa / (2.0 * static_cast<double>(n)) * sum;
}

struct RootPair {
  double lower;
  double upper;
};

// Roots of p(s) = (4 + 2 sqrt2 ||W||) kappa s^2 - 2 kappa s + D/4 when the
// discriminant 4 kappa^2 - kappa (4 + 2 sqrt2 ||W||) D is positive.
inline std::optional<RootPair> quad_roots_t31(double kappa, double d_omega, double w_norm) {
  if (!(kappa > 0.0)) throw DomainError("quad_roots_t31: kappa must be positive");
  detail::require_nonnegative(d_omega, "quad_roots_t31: D(Omega)");
  detail::require_nonnegative(w_norm, "quad_roots_t31: ||W||_F");
  const double a = (4.0 + 2.0 * detail::sqrt2 * w_norm) * kappa;
  const double b = -2.0 * kappa;
  const double c = d_omega / 4.0;
  const double disc = b * b - 4.0 * a * c;
  if (!(disc > 0.0)) return std::nullopt;
  const double upper = (-b + std::sqrt(disc)) / (2.0 * a);
  // Vieta instead of the difference form keeps the small root accurate.
  const double lower = c / (a * upper);
  return RootPair{lower, upper};
}

// --------------------------------------------------- complex, kappa1 = 0

// 2 sqrt2 / (sqrt(sqrt5 ||W0||^2 + 8) + 5^{1/4} ||W0||)
inline double threshold_t41(double w0_norm) {
  detail::require_nonnegative(w0_norm, "threshold_t41: ||W0||_F");
  return 2.0 * detail::sqrt2 /
         (std::sqrt(std::sqrt(5.0) * w0_norm * w0_norm + 8.0) + detail::fourth_root5 * w0_norm);
}

// L_ij = kappa0/(2N) sum_k (2 - J_ik^2 - J_jk^2 - c (J_ik + J_jk)), c = 5^{1/4}/sqrt2 ||W0||.
inline double rate_t41(const RealMatrix& j_in, double kappa0, double w0_norm, std::size_t i,
                       std::size_t j) {
  const std::size_t n = j_in.size();
  if (i >= n || j >= n) throw DimensionError("rate_t41: index out of range");
  const double thr = threshold_t41(w0_norm);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (!(j_in(a, b) < thr)) throw HypothesisViolated("rate_t41: initial J above threshold");
  const double c = detail::frustration_slope(w0_norm);
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double a = j_in(i, k), b = j_in(j, k);
    sum += 2.0 - a * a - b * b - c * (a + b);
  }
  return kappa0 / (2.0 * static_cast<double>(n)) * sum;
}

// p(J) = kappa0 J^2 (J^2 + c J - 1) + kappa1 J (2J + sqrt2 ||W1||) + 3 sqrt2/4 D(Omega)
struct AggregationQuartic {
  double kappa0 = 0.0;
  double kappa1 = 0.0;
  double d_omega = 0.0;
  double w0_norm = 0.0;
  double w1_norm = 0.0;

  double operator()(double J) const {
    const double c = detail::frustration_slope(w0_norm);
    return kappa0 * J * J * (J * J + c * J - 1.0) +
           kappa1 * J * (2.0 * J + detail::sqrt2 * w1_norm) + 0.75 * detail::sqrt2 * d_omega;
  }

  // Sum of coefficient magnitudes; residual checks are relative to this.
  double scale() const {
    const double c = detail::frustration_slope(w0_norm);
    return kappa0 * (1.0 + c + 1.0) + kappa1 * (2.0 + detail::sqrt2 * w1_norm) +
           0.75 * detail::sqrt2 * d_omega;
  }
};

namespace detail {
template <class F>
double bisect_root(const F& p, double lo, double hi) {
  // Invariant: sign(p(lo)) != sign(p(hi)) (p(lo) > 0 or p(lo) < 0 as entered).
  const bool lo_positive = p(lo) > 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((p(mid) > 0.0) == lo_positive)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}
}  // namespace detail

// The two positive roots J- < J+ bracketing the negative dip of p on
// (0, 2]. Brackets come from a pre-scan at resolution 1e-3 and are refined
// by bisection. When p vanishes at 0 and is negative just right of it,
// J- = 0. Returns nullopt if p never dips below zero on the grid.
inline std::optional<RootPair> practical_roots(const AggregationQuartic& p) {
  if (!(p.kappa0 > 0.0)) throw DomainError("quartic roots: kappa0 must be positive");
  constexpr double step = 1e-3;
  constexpr int cells = 2000;
  std::optional<double> lower;
  double prev_j = 0.0;
  double prev_v = p(0.0);
  if (prev_v <= 0.0) {
    // p(0) = 0 (no constant term); J- = 0 if p turns negative immediately.
    if (p(step) < 0.0) lower = 0.0;
  }
  for (int k = 1; k <= cells; ++k) {
    const double J = k * step;
    const double v = p(J);
    if (!lower && prev_v > 0.0 && v <= 0.0) {
      lower = v == 0.0 ? J : detail::bisect_root(p, prev_j, J);
    } else if (lower && prev_v < 0.0 && v >= 0.0) {
      const double upper = v == 0.0 ? J : detail::bisect_root(p, prev_j, J);
      return RootPair{*lower, upper};
    }
    prev_j = J;
    prev_v = v;
  }
  return std::nullopt;
}

inline std::optional<RootPair> quartic_roots_t42(double kappa0, double d_omega, double w0_norm) {
  detail::require_nonnegative(d_omega, "quartic_roots_t42: D(Omega)");
  detail::require_nonnegative(w0_norm, "quartic_roots_t42: ||W0||_F");
  return practical_roots(AggregationQuartic{kappa0, 0.0, d_omega, w0_norm, 0.0});
}

// ------------------------------------------------- full model, kappa1 > 0

// 2 sqrt2 q / (sqrt(sqrt5 ||W0||^2 + 8 q) + 5^{1/4} ||W0||), q = 1 - 2 kappa1/kappa0.
inline double threshold_t51(double w0_norm, double kappa0, double kappa1) {
  detail::require_nonnegative(w0_norm, "threshold_t51: ||W0||_F");
  detail::require_nonnegative(kappa1, "threshold_t51: kappa1");
  if (!(kappa0 > 2.0 * kappa1)) throw DomainError("threshold_t51: requires kappa0 > 2 kappa1");
  const double q = 1.0 - 2.0 * kappa1 / kappa0;
  return 2.0 * detail::sqrt2 * q /
         (std::sqrt(std::sqrt(5.0) * w0_norm * w0_norm + 8.0 * q) + detail::fourth_root5 * w0_norm);
}

// kappa0 (1 - 2 kappa1/kappa0 - J_M^2 - c J_M)
inline double rate_t51(double jm_in, double kappa0, double kappa1, double w0_norm) {
  if (!(jm_in < threshold_t51(w0_norm, kappa0, kappa1)))
    throw HypothesisViolated("rate_t51: initial J_M above threshold");
  const double c = detail::frustration_slope(w0_norm);
  return kappa0 * (1.0 - 2.0 * kappa1 / kappa0 - jm_in * jm_in - c * jm_in);
}

inline std::optional<RootPair> quartic_roots_t52(double kappa0, double kappa1, double d_omega,
                                                 double w0_norm, double w1_norm) {
  detail::require_nonnegative(kappa1, "quartic_roots_t52: kappa1");
  detail::require_nonnegative(d_omega, "quartic_roots_t52: D(Omega)");
  detail::require_nonnegative(w0_norm, "quartic_roots_t52: ||W0||_F");
  detail::require_nonnegative(w1_norm, "quartic_roots_t52: ||W1||_F");
  return practical_roots(AggregationQuartic{kappa0, kappa1, d_omega, w0_norm, w1_norm});
}

// ------------------------------------------------------------- reports

enum class Guarantee {
  real_complete,
  real_practical,
  complex_complete,
  complex_practical,
  full_complete,
  full_practical,
};

inline const char* to_string(Guarantee g) {
  switch (g) {
    case Guarantee::real_complete: return "real_complete";
    case Guarantee::real_practical: return "real_practical";
    case Guarantee::complex_complete: return "complex_complete";
    case Guarantee::complex_practical: return "complex_practical";
    case Guarantee::full_complete: return "full_complete";
    case Guarantee::full_practical: return "full_practical";
  }
  return "unknown";
}

enum class Outcome { not_checked, passed, failed };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::not_checked: return "not_checked";
    case Outcome::passed: return "pass";
    case Outcome::failed: return "fail";
  }
  return "unknown";
}

struct GuaranteeReport {
  Guarantee theorem = Guarantee::complex_complete;
  bool hypothesis_satisfied = false;
  double threshold_value = std::numeric_limits<double>::quiet_NaN();
  double observed_initial = std::numeric_limits<double>::quiet_NaN();
  // Pairwise guarantees report the smallest pair rate.
  std::optional<double> predicted_rate;
  std::optional<RootPair> roots;
  Outcome outcome = Outcome::not_checked;
  // min over checks of (bound - observed); negative means violated.
  double worst_margin = std::numeric_limits<double>::quiet_NaN();
  std::string verdict_details;
};

struct CheckOptions {
  double tail_fraction = 0.2;
  double envelope_rtol = 1e-3;  // multiplicative slack on exponential envelopes
  double envelope_atol = 1e-8;
  double tail_slack = 0.25;     // tail_sup <= (1 + slack) J-
};

namespace detail {

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

struct RunFacts {
  bool real = false;
  bool identical = false;
  double d_omega = 0.0;
  double w0 = 0.0;
  double w1 = 0.0;
  double kappa0 = 0.0;
  double kappa1 = 0.0;
};

inline RunFacts facts(const ModelParams& p, const EnsembleState& init) {
  RunFacts f;
  f.identical = p.identical_omega();
  f.real = is_real(init, 1e-10) && p.is_real() && p.kappa1() == 0.0;
  f.d_omega = omega_diameter(p);
  f.w0 = frobenius_norm(p.W0());
  f.w1 = frobenius_norm(p.W1());
  f.kappa0 = p.kappa0();
  f.kappa1 = p.kappa1();
  return f;
}

inline GuaranteeReport assess_real_complete(const RunFacts& f, const RealMatrix& theta0) {
  GuaranteeReport r;
  r.theorem = Guarantee::real_complete;
  r.threshold_value = threshold_p31(f.w0);
  r.observed_initial = max_functional(theta0).value;
  r.hypothesis_satisfied = r.observed_initial < r.threshold_value && f.kappa0 > 0.0;
  if (r.hypothesis_satisfied) {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < theta0.size(); ++i)
      for (std::size_t j = i + 1; j < theta0.size(); ++j)
        lo = std::min(lo, rate_p31(theta0, f.kappa0, f.w0, i, j));
    r.predicted_rate = lo;
  }
  r.verdict_details = "max initial angle " + fmt(r.observed_initial) + " vs arccot threshold " +
                      fmt(r.threshold_value);
  return r;
}

inline GuaranteeReport assess_real_practical(const RunFacts& f, const RealMatrix& theta0) {
  GuaranteeReport r;
  r.theorem = Guarantee::real_practical;
  const double theta_m = max_functional(theta0).value;
  r.threshold_value = 1.0 / (2.0 + sqrt2 * f.w0);
  r.observed_initial = std::sin(theta_m);
  r.hypothesis_satisfied = r.observed_initial < r.threshold_value && theta_m < std::numbers::pi / 2;
  if (f.kappa0 > 0.0) r.roots = quad_roots_t31(f.kappa0, f.d_omega, f.w0);
  r.verdict_details = "max sin(theta_in) " + fmt(r.observed_initial) + " vs " +
                      fmt(r.threshold_value) + "; s(0)=sin(theta_M/2)=" +
                      fmt(std::sin(theta_m / 2.0));
  // The prose coupling condition is weaker than the discriminant; say so
  // when kappa sits between the two.
  const double prose = f.d_omega * (2.0 + 2.0 * sqrt2 * f.w0) / 4.0;
  const double disc = f.d_omega * (4.0 + 2.0 * sqrt2 * f.w0) / 4.0;
  if (f.kappa0 > prose && f.kappa0 <= disc)
    r.verdict_details += "; kappa meets the prose condition but not the discriminant";
  return r;
}

inline GuaranteeReport assess_complex_complete(const RunFacts& f, const RealMatrix& j0) {
  GuaranteeReport r;
  r.theorem = Guarantee::complex_complete;
  r.threshold_value = threshold_t41(f.w0);
  r.observed_initial = max_functional(j0).value;
  r.hypothesis_satisfied = r.observed_initial < r.threshold_value && f.kappa0 > 0.0;
  if (r.hypothesis_satisfied) {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < j0.size(); ++i)
      for (std::size_t j = i + 1; j < j0.size(); ++j)
        lo = std::min(lo, rate_t41(j0, f.kappa0, f.w0, i, j));
    r.predicted_rate = lo;
  }
  r.verdict_details = "max initial J " + fmt(r.observed_initial) + " vs threshold " +
                      fmt(r.threshold_value);
  return r;
}

inline GuaranteeReport assess_practical(Guarantee g, const RunFacts& f, double jm0) {
  GuaranteeReport r;
  r.theorem = g;
  r.threshold_value = threshold_t41(f.w0);
  r.observed_initial = jm0;
  r.hypothesis_satisfied = jm0 < r.threshold_value;
  if (f.kappa0 > 0.0) {
    r.roots = g == Guarantee::complex_practical
                  ? quartic_roots_t42(f.kappa0, f.d_omega, f.w0)
                  : quartic_roots_t52(f.kappa0, f.kappa1, f.d_omega, f.w0, f.w1);
  }
  r.verdict_details = "initial J_M " + fmt(jm0) + " vs threshold " + fmt(r.threshold_value) +
                      "; D(Omega)=" + fmt(f.d_omega);
  if (!r.roots) r.verdict_details += "; quartic has no positive dip at this coupling";
  return r;
}

inline GuaranteeReport assess_full_complete(const RunFacts& f, double jm0) {
  GuaranteeReport r;
  r.theorem = Guarantee::full_complete;
  r.observed_initial = jm0;
  std::string why;
  if (!(f.kappa0 > 2.0 * f.kappa1)) why += "kappa0 <= 2 kappa1; ";
  if (f.w1 > 1e-12) why += "W1 != 0; ";
  if (!f.identical) why += "D(Omega) > 0; ";
  if (f.kappa0 > 2.0 * f.kappa1) {
    r.threshold_value = threshold_t51(f.w0, f.kappa0, f.kappa1);
    if (!(jm0 < r.threshold_value)) why += "initial J_M above threshold; ";
  }
  r.hypothesis_satisfied = why.empty();
  if (r.hypothesis_satisfied) {
    r.predicted_rate = rate_t51(jm0, f.kappa0, f.kappa1, f.w0);
    r.verdict_details = "initial J_M " + fmt(jm0) + " vs threshold " + fmt(r.threshold_value);
  } else {
    r.verdict_details = "hypothesis not satisfied: " + why.substr(0, why.size() - 2);
  }
  return r;
}

}  // namespace detail

// Hypotheses, thresholds, rates and roots for every guarantee that applies
// to (params, init); no trajectory needed.
inline std::vector<GuaranteeReport> assess_hypotheses(const ModelParams& p, const EnsembleState& init) {
  detail::check_shapes(init.z, p.N(), p.ambient());
  std::vector<GuaranteeReport> out;
  if (p.has_frustration_override()) {
    for (Guarantee g : {Guarantee::complex_complete, Guarantee::complex_practical}) {
      GuaranteeReport r;
      r.theorem = g;
      r.verdict_details = "refused: general frustration override, thresholds need ||W||_F";
      out.push_back(r);
    }
    return out;
  }
  const detail::RunFacts f = detail::facts(p, init);
  const Correlations c = correlations(init);
  const RealMatrix j0 = agg_functional(c);
  const double jm0 = max_functional(j0).value;

  if (f.real) {
    const RealMatrix theta0 = pair_angles(init);
    out.push_back(f.identical ? detail::assess_real_complete(f, theta0)
                              : detail::assess_real_practical(f, theta0));
  }
  if (f.kappa1 == 0.0) {
    out.push_back(f.identical ? detail::assess_complex_complete(f, j0)
                              : detail::assess_practical(Guarantee::complex_practical, f, jm0));
  } else {
    out.push_back(detail::assess_full_complete(f, jm0));
    if (!f.identical || f.w1 > 1e-12)
      out.push_back(detail::assess_practical(Guarantee::full_practical, f, jm0));
  }
  return out;
}

namespace detail {

inline void record_margin(GuaranteeReport& r, double margin) {
  if (std::isnan(r.worst_margin) || margin < r.worst_margin) r.worst_margin = margin;
}

inline void finish(GuaranteeReport& r, const std::string& what) {
  r.outcome = r.worst_margin >= 0.0 ? Outcome::passed : Outcome::failed;
  r.verdict_details += "; " + what + " worst margin " + fmt(r.worst_margin);
}

// Pairwise exponential envelope for a matrix-valued observable.
template <class Observe>
void check_pairwise_envelope(GuaranteeReport& r, const Trajectory& traj, const RealMatrix& initial,
                             const RealMatrix& rates, const CheckOptions& o, Observe&& observe) {
  const double t0 = traj.times.front();
  for (std::size_t s = 0; s < traj.size(); ++s) {
    const RealMatrix now = observe(traj.states[s]);
    const double t = traj.times[s] - t0;
    for (std::size_t i = 0; i < now.size(); ++i)
      for (std::size_t j = i + 1; j < now.size(); ++j) {
        const double bound =
            initial(i, j) * std::exp(-rates(i, j) * t) * (1.0 + o.envelope_rtol) + o.envelope_atol;
        record_margin(r, bound - now(i, j));
      }
  }
}

}  // namespace detail

// Binds the guarantees to an observed trajectory. Complete-aggregation
// envelopes are checked at every snapshot; practical-aggregation bounds via
// the tail estimator; the real practical estimate via sup theta_M <= pi/2.
inline std::vector<GuaranteeReport> check_run(const ModelParams& p, const EnsembleState& init,
                                              const Trajectory& traj, const CheckOptions& o = {}) {
  if (traj.size() == 0) throw DimensionError("check_run: empty trajectory");
  for (const auto& z0 : {std::cref(traj.states.front())})
    if (z0.get().size() != init.size() || z0.get().z != init.z)
      throw DomainError("check_run: trajectory does not start from the given initial state");

  std::vector<GuaranteeReport> reports = assess_hypotheses(p, init);
  if (p.has_frustration_override()) return reports;
  const detail::RunFacts f = detail::facts(p, init);
  const std::size_t n = init.size();

  std::vector<double> jm;
  jm.reserve(traj.size());
  for (const auto& s : traj.states) jm.push_back(max_agg_functional(s));
  const double tail = tail_sup(traj.times, jm, o.tail_fraction);

  for (auto& r : reports) {
    switch (r.theorem) {
      case Guarantee::real_complete: {
        if (!r.hypothesis_satisfied) break;
        const RealMatrix theta0 = pair_angles(init);
        RealMatrix rates(n);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = i + 1; j < n; ++j)
            rates(i, j) = rates(j, i) = rate_p31(theta0, f.kappa0, f.w0, i, j);
        detail::check_pairwise_envelope(r, traj, theta0, rates, o,
                                        [](const EnsembleState& s) { return pair_angles(s); });
        detail::finish(r, "angle envelope");
        break;
      }
      case Guarantee::real_practical: {
        if (!r.hypothesis_satisfied) break;
        const double s0 = std::sin(max_functional(pair_angles(init)).value / 2.0);
        std::vector<double> half_sin;
        half_sin.reserve(traj.size());
        double sup_theta = 0.0;
        for (const auto& s : traj.states) {
          const double th = max_functional(pair_angles(s)).value;
          sup_theta = std::max(sup_theta, th);
          half_sin.push_back(std::sin(th / 2.0));
        }
        r.verdict_details += "; sup theta_M " + detail::fmt(sup_theta) + "; tail sin(theta_M/2) " +
                             detail::fmt(tail_sup(traj.times, half_sin, o.tail_fraction));
        if (r.roots && s0 < r.roots->upper) {
          r.worst_margin = std::numbers::pi / 2 + o.envelope_atol - sup_theta;
          detail::finish(r, "sup angle bound");
        } else {
          r.verdict_details += "; s(0) not below s2 or no roots, sup bound not guaranteed";
        }
        break;
      }
      case Guarantee::complex_complete: {
        if (!r.hypothesis_satisfied) break;
        const RealMatrix j0 = agg_functional(correlations(init));
        RealMatrix rates(n);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = i + 1; j < n; ++j)
            rates(i, j) = rates(j, i) = rate_t41(j0, f.kappa0, f.w0, i, j);
        detail::check_pairwise_envelope(r, traj, j0, rates, o, [](const EnsembleState& s) {
          return agg_functional(correlations(s));
        });
        detail::finish(r, "J envelope");
        break;
      }
      case Guarantee::full_complete: {
        if (!r.hypothesis_satisfied) break;
        const double rate = *r.predicted_rate;
        const double t0 = traj.times.front();
        for (std::size_t s = 0; s < traj.size(); ++s) {
          const double bound = jm.front() * std::exp(-rate * (traj.times[s] - t0)) *
                                   (1.0 + o.envelope_rtol) + o.envelope_atol;
          detail::record_margin(r, bound - jm[s]);
        }
        detail::finish(r, "J_M envelope");
        break;
      }
      case Guarantee::complex_practical:
      case Guarantee::full_practical: {
        r.verdict_details += "; tail_sup(J_M) " + detail::fmt(tail);
        if (!r.hypothesis_satisfied) break;
        if (r.roots && r.observed_initial < r.roots->upper) {
          r.worst_margin = (1.0 + o.tail_slack) * r.roots->lower - tail;
          detail::finish(r, "tail bound");
        } else if (r.roots) {
          r.verdict_details += "; initial J_M not below J+, tail bound not guaranteed";
        }
        break;
      }
    }
  }
  return reports;
}

inline bool any_failed(const std::vector<GuaranteeReport>& reports) {
  return std::any_of(reports.begin(), reports.end(),
                     [](const GuaranteeReport& r) { return r.outcome == Outcome::failed; });
}

}  // namespace lhs
