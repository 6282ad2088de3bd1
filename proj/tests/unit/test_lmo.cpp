#include <gtest/gtest.h>

#include "eigen_oracle.hpp"
#include "imuon/errors.hpp"
#include "imuon/lmo.hpp"
#include "imuon/random.hpp"

using namespace imuon;

TEST(SpectralLmo, Examples) {
  const auto r = lmo_spectral_exact(Tensor::diag({2, 3}));
  EXPECT_LE(frobenius(r.direction + Tensor::identity(2)), 1e-14);
  EXPECT_EQ(r.declared_delta, 0.0);
  EXPECT_THROW(lmo_spectral_exact(Tensor::zeros(3, 3)), DegenerateGradient);
  EXPECT_THROW(lmo_spectral_exact(Tensor::diag({1e-15, 0})), DegenerateGradient);
}

TEST(SpectralLmo, MatchesIndependentSvd) {
  Rng rng = make_rng(21);
  for (int t = 0; t < 10; ++t) {
    const Tensor g = random_gaussian(7, 4, rng);
    const auto r = lmo_spectral_exact(g);
    EXPECT_LE(oracle::spectral(r.direction + oracle::polar(g)), 1e-8);
    EXPECT_NEAR(dot(g, r.direction), -oracle::nuclear(g), 1e-10);
    const auto sv = oracle::singular_values(r.direction);
    for (int i = 0; i < sv.size(); ++i) EXPECT_NEAR(sv(i), 1.0, 1e-9);
    EXPECT_FALSE(r.ill_conditioned);
  }
}

TEST(SpectralLmo, FlagsRankDeficiency) {
  const auto r = lmo_spectral_exact(Tensor::matrix({{1, 2}, {2, 4}}));
  EXPECT_TRUE(r.ill_conditioned);
  EXPECT_NEAR(dot(Tensor::matrix({{1, 2}, {2, 4}}), r.direction), -5.0, 1e-12);
}

TEST(LinfLmo, Examples) {
  EXPECT_EQ(lmo_linf_exact(Tensor::vector({0.5, -2, 0})).direction, Tensor::vector({-1, 1, 0}));
  EXPECT_EQ(lmo_linf_exact(Tensor::vector({-1, -1})).direction, Tensor::vector({1, 1}));
  EXPECT_THROW(lmo_linf_exact(Tensor::vector({0, 0})), DegenerateGradient);
  Rng rng = make_rng(22);
  const Tensor g = random_gaussian(100, 1, rng);
  EXPECT_NEAR(dot(g, lmo_linf_exact(g).direction), -l1(g), 1e-12);
}

TEST(LinfLmo, Idempotent) {
  Rng rng = make_rng(23);
  const Tensor g = random_gaussian(20, 3, rng);
  const Tensor d = lmo_linf_exact(g).direction;
  EXPECT_EQ(lmo_linf_exact(-d).direction, d);
}

TEST(EuclideanLmo, Examples) {
  const auto r = lmo_euclidean_exact(Tensor::vector({3, 4}));
  EXPECT_NEAR(r.direction[0], -0.6, 1e-15);
  EXPECT_NEAR(r.direction[1], -0.8, 1e-15);
  EXPECT_EQ(lmo_euclidean_exact(Tensor::vector({1, 0, 0})).direction, Tensor::vector({-1, 0, 0}));
  EXPECT_THROW(lmo_euclidean_exact(Tensor::vector({0, 0})), DegenerateGradient);
  Rng rng = make_rng(24);
  EXPECT_NEAR(frobenius(lmo_euclidean_exact(random_gaussian(9, 2, rng)).direction), 1.0, 1e-12);
}

TEST(Lmo, DualityForAllGeometries) {
  Rng rng = make_rng(25);
  for (auto n : {NormKind::Spectral, NormKind::LInf, NormKind::Euclidean}) {
    for (int t = 0; t < 20; ++t) {
      const Tensor g = random_gaussian(6, 5, rng);
      const auto r = lmo_exact(g, n);
      EXPECT_NEAR(dot(g, r.direction), -dual_norm(g, n), 1e-8);
      EXPECT_LE(primal_norm(r.direction, n), 1.0 + 1e-9);
    }
  }
}

TEST(ApproxLmo, OrthogonalInputIsFixedPoint) {
  Rng rng = make_rng(26);
  const Tensor q = random_orthonormal(8, 8, rng);
  auto r = lmo_spectral_approx(q, newton_schulz(5, Normalization::SpectralScale));
  EXPECT_LE(measure_delta(q, r, NormKind::Spectral), 1e-12);
  EXPECT_EQ(r.oracle_matmuls, 10u);
  // Frobenius pre-scaling puts every singular value at 1/sqrt(8), far from converged after 5 steps
  auto loose = lmo_spectral_approx(q, newton_schulz(5));
  EXPECT_GT(measure_delta(q, loose, NormKind::Spectral), 1e-6);
  EXPECT_THROW(lmo_spectral_approx(Tensor::zeros(3, 3), newton_schulz(5)), DegenerateGradient);
}

TEST(ApproxLmo, DeltaDecreasesWithIterations) {
  Rng rng = make_rng(27);
  const Tensor g = random_gaussian(32, 32, rng);
  double prev = 2.0;
  for (int it : {1, 3, 5}) {
    auto r = lmo_spectral_approx(g, newton_schulz(it));
    const double d = measure_delta(g, r, NormKind::Spectral);
    EXPECT_LT(d, prev) << it;
    prev = d;
  }
}

TEST(ApproxLmo, InexactInnerProductAndFeasibility) {
  Rng rng = make_rng(28);
  for (const auto& scheme : {newton_schulz(1), newton_schulz(3), muon_quintic(5), polar_express(2)}) {
    for (int t = 0; t < 20; ++t) {
      const Tensor g = random_gaussian(10, 6, rng);
      auto r = lmo_spectral_approx(g, scheme);
      const double d = measure_delta(g, r, NormKind::Spectral);
      EXPECT_LE(dot(g, r.direction), -nuclear_norm(g) * (1.0 - d) + 1e-9);
      EXPECT_LE(spectral_norm(r.direction), 1.0 + d + 1e-9);
    }
  }
}

TEST(MeasureDelta, Examples) {
  Rng rng = make_rng(29);
  const Tensor g = random_gaussian(9, 7, rng);
  auto exact = lmo_spectral_exact(g);
  EXPECT_LE(measure_delta(g, exact, NormKind::Spectral), 1e-9);
  ASSERT_TRUE(exact.measured_delta);

  const double eps = 0.037;
  LmoResult scaled{(1.0 + eps) * exact.direction, std::nullopt, std::nullopt, 0, false};
  EXPECT_NEAR(measure_delta(g, scaled, NormKind::Spectral), eps, 1e-9);

  const Tensor h = random_gaussian(16, 16, rng);
  auto ns1 = lmo_spectral_approx(h, newton_schulz(1));
  const double d = measure_delta(h, ns1, NormKind::Spectral);
  EXPECT_GT(d, 0.0);
  EXPECT_NEAR(d, oracle::spectral(ns1.direction + oracle::polar(h)), 1e-8);
  // against a converged iteration instead of the SVD
  const Tensor ns100 = -approx_polar(h, newton_schulz(100));
  EXPECT_NEAR(d, oracle::spectral(ns1.direction - ns100), 1e-8);
}

TEST(ApproxLmo, DeclaredDeltaNeedsSpectrumFloor) {
  Rng rng = make_rng(30);
  const Tensor g = matrix_with_spectrum(8, 8, 0.5, 1.0, rng);
  EXPECT_FALSE(lmo_spectral_approx(g, newton_schulz(3)).declared_delta);
  auto s = newton_schulz(3, Normalization::SpectralScale);
  s.spectrum_floor = 0.5;
  auto r = lmo_spectral_approx(g, s);
  ASSERT_TRUE(r.declared_delta);
  EXPECT_NEAR(*r.declared_delta, std::pow(0.75, 8.0), 1e-15);
  EXPECT_LE(measure_delta(g, r, NormKind::Spectral), *r.declared_delta);
}
