#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lhs/reductions.hpp"
#include "oracles.hpp"

using namespace lhs;

namespace {

template <class Rng>
KuramotoState random_kuramoto(std::size_t n, double kappa, double alpha, Rng& rng) {
  std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi), speed(-1.0, 1.0);
  KuramotoState k;
  for (std::size_t j = 0; j < n; ++j) {
    k.theta.push_back(phase(rng));
    k.nu.push_back(speed(rng));
  }
  k.kappa = kappa;
  k.alpha = alpha;
  return k;
}

}  // namespace

TEST(Kuramoto, FieldMatchesDirectSum) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    const KuramotoState k = random_kuramoto(1 + t % 12, 2.3, 0.4, rng);
    const auto got = kuramoto_rhs(k);
    const auto want = oracle::kuramoto(k.theta, k.nu, k.kappa, k.alpha);
    for (std::size_t j = 0; j < got.size(); ++j) EXPECT_NEAR(got[j], want[j], 1e-13);
  }
}

TEST(Kuramoto, SynchronizedWithoutLagDriftsAtNaturalSpeed) {
  const KuramotoState k{{0.3, 0.3, 0.3}, {0.5, 0.5, 0.5}, 2.0, 0.0};
  for (double v : kuramoto_rhs(k)) EXPECT_NEAR(v, 0.5, 1e-15);
  // with lag the common speed shifts by kappa sin(alpha)
  const KuramotoState lag{{0.3, 0.3, 0.3}, {0.5, 0.5, 0.5}, 2.0, 0.25};
  for (double v : kuramoto_rhs(lag)) EXPECT_NEAR(v, 0.5 + 2.0 * std::sin(0.25), 1e-15);
}

TEST(Kuramoto, Errors) {
  EXPECT_THROW(kuramoto_rhs(KuramotoState{{0.0}, {}, 1.0, 0.0}), DimensionError);
  EXPECT_THROW(kuramoto_rhs(KuramotoState{}), DimensionError);
}

TEST(Kuramoto, SimulationGrid) {
  std::mt19937_64 rng(2);
  const PhaseTrajectory t = simulate_kuramoto(random_kuramoto(5, 1.0, 0.0, rng), IntegrationPlan{});
  EXPECT_EQ(t.times.size(), 501u);
  EXPECT_EQ(t.phases.size(), 501u);
}

TEST(WrappedDifference, FoldsIntoPrincipalRange) {
  EXPECT_NEAR(wrapped_difference(1.5 * std::numbers::pi, 0.0), -0.5 * std::numbers::pi, 1e-15);
  EXPECT_NEAR(wrapped_difference(0.1, 2 * std::numbers::pi - 0.1), 0.2, 1e-14);
  EXPECT_NEAR(wrapped_difference(1.0, 1.0), 0.0, 0.0);
}

TEST(EmbeddingA, PhaseRateEqualsKuramotoField) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const KuramotoState k = random_kuramoto(6, 1.5, 0.3, rng);
    const Embedding e = embed_subsystem_a(k.theta, k.alpha, k.nu, k.kappa);
    EXPECT_TRUE(e.params.has_frustration_override());
    const Configuration d = oracle::rhs(e.state, e.params);
    const auto want = oracle::kuramoto(k.theta, k.nu, k.kappa, k.alpha);
    for (std::size_t j = 0; j < 6; ++j) {
      const CVector& x = e.state.z[j];
      EXPECT_NEAR(embedded_phase(x), k.theta[j], 1e-14);
      // d/dt atan2(x1, x0) = x0 x1' - x1 x0' on the unit circle
      const double rate = x[0].real() * d[j][1].real() - x[1].real() * d[j][0].real();
      EXPECT_NEAR(rate, want[j], 1e-12);
      // no radial component
      EXPECT_NEAR(x[0].real() * d[j][0].real() + x[1].real() * d[j][1].real(), 0.0, 1e-12);
    }
  }
}

TEST(EmbeddingB, PhaseRateEqualsKuramotoField) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 50; ++t) {
    const KuramotoState k = random_kuramoto(6, 1.5, -0.6, rng);
    const Embedding e = embed_subsystem_b(k.theta, k.alpha, k.nu, k.kappa);
    EXPECT_EQ(e.params.kappa0(), 0.0);
    EXPECT_EQ(e.params.kappa1(), 0.75);
    const Configuration d = oracle::rhs(e.state, e.params);
    const auto want = oracle::kuramoto(k.theta, k.nu, k.kappa, k.alpha);
    for (std::size_t j = 0; j < 6; ++j) {
      const cplx z = e.state.z[j][0];
      EXPECT_NEAR(std::abs(wrapped_difference(embedded_phase(e.state.z[j]), k.theta[j])), 0.0, 1e-14);
      EXPECT_NEAR((std::conj(z) * d[j][0]).imag(), want[j], 1e-12);
      EXPECT_NEAR((std::conj(z) * d[j][0]).real(), 0.0, 1e-12);
    }
  }
}

TEST(Embedding, Errors) {
  EXPECT_THROW(embed_subsystem_a({0.0, 1.0}, 0.0, {0.0}, 1.0), DimensionError);
  EXPECT_THROW(embed_subsystem_b({}, 0.0, {}, 1.0), DimensionError);
  EXPECT_THROW(embedded_phase(CVector{1.0, 0.0, 0.0}), DimensionError);
}

TEST(Reduction, TrajectoriesAgree) {
  std::mt19937_64 rng(5);
  for (double kappa : {0.5, 1.0, 2.0}) {
    const KuramotoState k = random_kuramoto(10, kappa, 0.3, rng);
    const ReductionResult a = compare_reduction(k, true, IntegrationPlan{});
    const ReductionResult b = compare_reduction(k, false, IntegrationPlan{});
    EXPECT_LE(a.max_phase_error, 1e-6) << "kappa " << kappa;
    EXPECT_LE(b.max_phase_error, 1e-6) << "kappa " << kappa;
    EXPECT_LE(a.max_norm_drift, 1e-6);
    EXPECT_LE(b.max_norm_drift, 1e-6);
  }
}

TEST(TildeV, ConjugationProperties) {
  std::mt19937_64 rng(6);
  const SkewHermitian om = random_skew_hermitian(3, 1.0, rng);
  const CMatrix v = CMatrix::identity(3) + random_skew_hermitian(3, 0.3, rng).matrix();
  EXPECT_LT(oracle::max_entry_diff(tilde_V(v, om, 0.0), v), 1e-15);
  for (double t : {0.3, 1.0, 7.5}) {
    const CMatrix tv = tilde_V(v, om, t);
    EXPECT_NEAR(frobenius_norm(tv), frobenius_norm(v), 1e-12);
    const CMatrix want = oracle::expm(om.matrix(), -t) * v * oracle::expm(om.matrix(), t);
    EXPECT_LT(oracle::max_entry_diff(tv, want), 1e-12);
  }
  // anything commuting with Omega is left alone
  const CMatrix c = CMatrix::identity(3) + om.matrix() * om.matrix() * om.matrix();
  EXPECT_LT(oracle::max_entry_diff(tilde_V(c, om, 2.0), c), 1e-12);
}

namespace {

template <class Rng>
EnsembleState near_cluster(std::size_t n, Rng& rng) {
  const CVector base = oracle::random_unit(3, rng);
  EnsembleState s;
  for (std::size_t j = 0; j < n; ++j) {
    CVector v = base;
    v.add_scaled(0.3, oracle::random_vector(3, rng));
    s.z.push_back(normalized(v));
  }
  return s;
}

}  // namespace

TEST(Splitting, NoFreeFlowIsExact) {
  std::mt19937_64 rng(7);
  const ModelParams p = ModelParams::identical(8, 1.0, 0.5, random_skew_hermitian(3, 0.1, rng),
                                               random_skew_hermitian(3, 0.1, rng), SkewHermitian::zero(3));
  const SplittingResult r = verify_splitting(p, near_cluster(8, rng), 10.0, 0.02);
  EXPECT_EQ(r.snapshots, 501u);
  EXPECT_LE(r.max_deviation, 1e-13);
}

TEST(Splitting, CommutingFrustrationsAgree) {
  std::mt19937_64 rng(8);
  const SkewHermitian om = random_skew_hermitian(3, 1.0, rng);
  const CMatrix& m = om.matrix();
  CMatrix w0 = m, cube = m * m * m, w1 = m;
  w0 *= 0.05;
  cube *= 0.01;
  w0 += cube;
  w1 *= -0.03;
  const ModelParams p = ModelParams::identical(8, 1.0, 0.5, skew_hermitize(w0), skew_hermitize(w1), om);
  EXPECT_LE(verify_splitting(p, near_cluster(8, rng), 10.0, 0.02).max_deviation, 1e-6);
}

TEST(Splitting, GenericFrustrationsAgree) {
  std::mt19937_64 rng(9);
  const ModelParams p = ModelParams::identical(8, 1.0, 0.5, random_skew_hermitian(3, 0.1, rng),
                                               random_skew_hermitian(3, 0.1, rng), random_skew_hermitian(3, 1.0, rng));
  EXPECT_LE(verify_splitting(p, near_cluster(8, rng), 10.0, 0.02).max_deviation, 1e-6);
}

TEST(Splitting, DeviationIsDiscretizationErrorOfOrderFour) {
  std::mt19937_64 rng(10);
  const ModelParams p = ModelParams::identical(8, 2.0, 0.5, random_skew_hermitian(3, 0.3, rng),
                                               random_skew_hermitian(3, 0.3, rng), random_skew_hermitian(3, 1.0, rng));
  const EnsembleState init = near_cluster(8, rng);
  const double a = verify_splitting(p, init, 2.0, 0.1).max_deviation;
  const double b = verify_splitting(p, init, 2.0, 0.05).max_deviation;
  const double c = verify_splitting(p, init, 2.0, 0.025).max_deviation;
  EXPECT_GT(c, 1e-12);
  const double slope = std::log(a / c) / std::log(4.0);
  EXPECT_NEAR(slope, 4.0, 0.5) << a << " " << b << " " << c;
}

TEST(Splitting, RejectsHeterogeneousFrequencies) {
  std::mt19937_64 rng(11);
  const ModelParams p(1.0, 0.0, SkewHermitian::zero(3), SkewHermitian::zero(3),
                      {random_skew_hermitian(3, 1.0, rng), random_skew_hermitian(3, 1.0, rng)});
  EXPECT_THROW(verify_splitting(p, oracle::random_state(2, 3, rng), 1.0, 0.02), DomainError);
}
