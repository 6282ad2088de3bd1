#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "eigen_oracle.hpp"
#include "imuon/errors.hpp"
#include "imuon/norms.hpp"
#include "imuon/random.hpp"
#include "imuon/svd.hpp"
#include "imuon/tensor.hpp"

using namespace imuon;

TEST(Tensor, RejectsNonFinite) {
  EXPECT_THROW(Tensor(1, 2, {1.0, std::numeric_limits<double>::quiet_NaN()}), NonFiniteValue);
  EXPECT_THROW(Tensor(1, 1, {std::numeric_limits<double>::infinity()}), NonFiniteValue);
  const Tensor big = Tensor::vector({1e308});
  EXPECT_THROW(big + big, NonFiniteValue);
}

TEST(Tensor, ShapeChecks) {
  EXPECT_THROW(Tensor(2, 2, {1.0, 2.0}), ShapeMismatch);
  EXPECT_THROW(Tensor::zeros(2, 3) + Tensor::zeros(3, 2), ShapeMismatch);
  EXPECT_THROW(matmul(Tensor::zeros(2, 3), Tensor::zeros(2, 3)), ShapeMismatch);
}

TEST(Tensor, ArithmeticMatchesEigen) {
  Rng rng = make_rng(11);
  const Tensor a = random_gaussian(5, 3, rng), b = random_gaussian(3, 4, rng), c = random_gaussian(5, 3, rng);
  const auto ea = oracle::to_eigen(a), eb = oracle::to_eigen(b), ec = oracle::to_eigen(c);
  EXPECT_LE((oracle::to_eigen(matmul(a, b)) - ea * eb).norm(), 1e-13);
  EXPECT_LE((oracle::to_eigen(matmul_tn(a, c)) - ea.transpose() * ec).norm(), 1e-13);
  EXPECT_LE((oracle::to_eigen(gram(a)) - ea.transpose() * ea).norm(), 1e-13);
  EXPECT_LE((oracle::to_eigen(lincomb(2.0, a, -0.5, c)) - (2.0 * ea - 0.5 * ec)).norm(), 1e-14);
  EXPECT_NEAR(dot(a, c), (ea.array() * ec.array()).sum(), 1e-13);
  EXPECT_NEAR(frobenius(a), ea.norm(), 1e-13);
  EXPECT_EQ(a.transpose().transpose(), a);
}

TEST(Tensor, FrobeniusDoesNotOverflow) {
  EXPECT_NEAR(frobenius(Tensor::vector({3e200, 4e200})), 5e200, 1e188);
}

TEST(Svd, ReconstructsAndMatchesEigen) {
  Rng rng = make_rng(3);
  for (auto [r, c] : {std::pair{7, 4}, {4, 7}, {16, 16}, {1, 5}, {5, 1}, {33, 20}}) {
    const Tensor a = random_gaussian(r, c, rng);
    const Svd s = jacobi_svd(a);
    const auto ref = oracle::singular_values(a);
    ASSERT_EQ(s.s.size(), static_cast<std::size_t>(ref.size()));
    for (std::size_t i = 0; i < s.s.size(); ++i) EXPECT_NEAR(s.s[i], ref(i), 1e-12 * ref(0));
    const Tensor rec = matmul(s.u, matmul(Tensor::diag(s.s, s.s.size(), s.s.size()), s.v.transpose()));
    EXPECT_LE(frobenius(rec - a), 1e-12 * frobenius(a));
    EXPECT_LE(frobenius(gram(s.u) - Tensor::identity(s.s.size())), 1e-12);
    EXPECT_LE(frobenius(gram(s.v) - Tensor::identity(s.s.size())), 1e-12);
  }
}

TEST(Svd, RankDeficientLeavesZeroDirections) {
  const Tensor a = Tensor::matrix({{1, 2}, {2, 4}, {3, 6}});
  const Svd s = jacobi_svd(a);
  EXPECT_NEAR(s.s[1], 0.0, 1e-14);
  const Tensor p = polar_factor(a);
  const auto sv = oracle::singular_values(p);
  EXPECT_NEAR(sv(0), 1.0, 1e-12);
  EXPECT_NEAR(sv(1), 0.0, 1e-12);
}

TEST(Norms, SpecExamples) {
  const Tensor d = Tensor::diag({2, 3});
  EXPECT_DOUBLE_EQ(primal_norm(d, NormKind::Spectral), 3.0);
  EXPECT_NEAR(dual_norm(d, NormKind::Spectral), 5.0, 1e-14);
  EXPECT_DOUBLE_EQ(dual_norm(Tensor::vector({1, -2, 3}), NormKind::LInf), 6.0);
  for (auto n : {NormKind::Spectral, NormKind::LInf, NormKind::Euclidean}) {
    EXPECT_EQ(primal_norm(Tensor::zeros(4, 4), n), 0.0);
    EXPECT_EQ(dual_norm(Tensor::zeros(4, 4), n), 0.0);
  }
  EXPECT_DOUBLE_EQ(primal_norm(Tensor::vector({3, 4}), NormKind::Euclidean), 5.0);
  EXPECT_DOUBLE_EQ(primal_norm(Tensor::vector({3, -4}), NormKind::LInf), 4.0);
}

TEST(Norms, SpectralMatchesOracle) {
  Rng rng = make_rng(5);
  for (int t = 0; t < 20; ++t) {
    const Tensor a = random_gaussian(8, 5, rng);
    EXPECT_NEAR(spectral_norm(a), oracle::spectral(a), 1e-10 * oracle::spectral(a));
  }
  // clustered top singular values slow power iteration down
  const Tensor close = matrix_with_spectrum(12, 12, 0.999, 1.0, rng);
  EXPECT_NEAR(spectral_norm(close), 1.0, 1e-10);
}

TEST(Norms, NuclearMatchesOracle) {
  Rng rng = make_rng(6);
  for (int t = 0; t < 20; ++t) {
    const Tensor a = random_gaussian(6, 6, rng);
    EXPECT_NEAR(nuclear_norm(a), oracle::nuclear(a), 1e-9);
  }
}

TEST(Norms, CompatRhoExamples) {
  EXPECT_DOUBLE_EQ(norm_compat_rho(NormKind::Euclidean, 7, 3), 1.0);
  EXPECT_DOUBLE_EQ(norm_compat_rho(NormKind::Spectral, 4, 9), 2.0);
  EXPECT_DOUBLE_EQ(norm_compat_rho(NormKind::LInf, 3, 1), std::sqrt(3.0));
}

TEST(Norms, CompatRhoIsValidBound) {
  Rng rng = make_rng(7);
  for (auto n : {NormKind::Spectral, NormKind::LInf, NormKind::Euclidean}) {
    for (auto [r, c] : {std::pair{4, 9}, {3, 1}, {5, 5}}) {
      const double rho = norm_compat_rho(n, r, c);
      double worst = 0.0;
      for (int t = 0; t < 1000; ++t) {
        const Tensor a = random_gaussian(r, c, rng);
        worst = std::max(worst, dual_norm(a, n) / frobenius(a));
      }
      EXPECT_LE(worst, rho * (1 + 1e-12));
    }
  }
  // the constant is attained
  EXPECT_NEAR(dual_norm(Tensor::identity(4), NormKind::Spectral) / frobenius(Tensor::identity(4)), 2.0, 1e-12);
}

TEST(Norms, Axioms) {
  Rng rng = make_rng(8);
  for (auto n : {NormKind::Spectral, NormKind::LInf, NormKind::Euclidean}) {
    for (int t = 0; t < 50; ++t) {
      const Tensor a = random_gaussian(5, 4, rng), b = random_gaussian(5, 4, rng);
      const double s = -2.5;
      EXPECT_LE(primal_norm(a + b, n), primal_norm(a, n) + primal_norm(b, n) + 1e-12);
      EXPECT_LE(dual_norm(a + b, n), dual_norm(a, n) + dual_norm(b, n) + 1e-12);
      EXPECT_NEAR(primal_norm(s * a, n), std::abs(s) * primal_norm(a, n), 1e-11);
      EXPECT_NEAR(dual_norm(s * a, n), std::abs(s) * dual_norm(a, n), 1e-11);
      // Hoelder: <a, b> <= ||a|| ||b||_*
      EXPECT_LE(dot(a, b), primal_norm(a, n) * dual_norm(b, n) + 1e-11);
    }
  }
}

TEST(Norms, NamesRoundTrip) {
  for (auto n : {NormKind::Spectral, NormKind::LInf, NormKind::Euclidean}) {
    EXPECT_EQ(norm_kind_from_string(to_string(n)), n);
  }
  EXPECT_THROW(norm_kind_from_string("l2"), ConfigError);
}

TEST(Random, DeterministicStreams) {
  Rng a = make_rng(1, 2, 3), b = make_rng(1, 2, 3), c = make_rng(1, 2, 4), d = make_rng(1, 3, 3);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, d());
}

TEST(Random, PrescribedSpectrum) {
  Rng rng = make_rng(9);
  const Tensor m = matrix_with_spectrum(10, 6, 0.2, 1.0, rng);
  const auto s = oracle::singular_values(m);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(s(i), 1.0 - 0.16 * i, 1e-12);
  const Tensor q = random_orthonormal(7, 4, rng);
  EXPECT_LE(frobenius(gram(q) - Tensor::identity(4)), 1e-14);
}
