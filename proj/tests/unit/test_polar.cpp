#include <gtest/gtest.h>

#include <fstream>

#include "eigen_oracle.hpp"
#include "imuon/errors.hpp"
#include "imuon/polar.hpp"
#include "imuon/random.hpp"

using namespace imuon;

TEST(Polar, OrthogonalIsFixedPoint) {
  Rng rng = make_rng(31);
  const Tensor q = random_orthonormal(12, 12, rng);
  const auto ns = newton_schulz(5, Normalization::SpectralScale);
  EXPECT_LE(oracle::spectral(approx_polar(q, ns) - q), 1e-12);
  const Tensor tall = random_orthonormal(12, 5, rng);
  EXPECT_LE(oracle::spectral(approx_polar(tall, ns) - tall), 1e-12);
}

TEST(Polar, SvdReference) {
  EXPECT_LE(frobenius(approx_polar(Tensor::diag({1, 0.5}), svd_reference()) - Tensor::identity(2)), 1e-14);
  Rng rng = make_rng(32);
  for (auto [r, c] : {std::pair{9, 9}, {12, 5}, {5, 12}}) {
    const Tensor m = random_gaussian(r, c, rng);
    const Tensor p = approx_polar(m, svd_reference());
    EXPECT_LE(oracle::spectral(p - oracle::polar(m)), 1e-9);
    const Tensor rtr = gram(p);
    EXPECT_LE(oracle::spectral(matmul(rtr, rtr) - rtr), 1e-8);
  }
}

TEST(Polar, ErrorDecreasesWithIterations) {
  Rng rng = make_rng(33);
  const Tensor m = matrix_with_spectrum(24, 16, 0.2, 1.0, rng);
  const Tensor ref = oracle::polar(m);
  double prev = 1e9;
  for (int it = 1; it <= 8; ++it) {
    const double e = oracle::spectral(approx_polar(m, newton_schulz(it)) - ref);
    EXPECT_LT(e, prev) << it;
    prev = e;
  }
}

TEST(Polar, WideInputsUseTransposedOrientation) {
  Rng rng = make_rng(34);
  const Tensor m = random_gaussian(4, 11, rng);
  const auto wide = polar_iterate(m, muon_quintic(3));
  const auto tall = polar_iterate(m.transpose(), muon_quintic(3));
  EXPECT_LE(frobenius(wide.x - tall.x.transpose()), 1e-14);
  EXPECT_EQ(wide.matmuls, 9u);
  EXPECT_EQ(polar_iterate(m, newton_schulz(4)).matmuls, 8u);
}

TEST(Polar, SpectralScaleIsScaleInvariant) {
  Rng rng = make_rng(35);
  const Tensor m = random_gaussian(10, 7, rng);
  const auto s = newton_schulz(4, Normalization::SpectralScale);
  // powers of two keep the normalized input bitwise identical
  EXPECT_EQ(approx_polar(m, s), approx_polar(8.0 * m, s));
  EXPECT_LE(frobenius(approx_polar(m, s) - approx_polar(3.7 * m, s)), 1e-13);
}

TEST(Polar, TableReuseAndDivergence) {
  const auto s = polynomial_table({{3, -3, 1}, {1.5, -0.5, 0}}, 5);
  EXPECT_EQ(s.row(0), (Coeffs{3, -3, 1}));
  EXPECT_EQ(s.row(4), (Coeffs{1.5, -0.5, 0}));
  Rng rng = make_rng(36);
  const Tensor m = random_gaussian(6, 6, rng);
  EXPECT_THROW(approx_polar(m, polynomial_table({{30, 0, 0}}, 3)), SchemeDiverged);
  EXPECT_THROW(validate(polynomial_table({{1, 0, 0}}, 0)), ValidationError);
}

TEST(Polar, PolarExpressConverges) {
  Rng rng = make_rng(37);
  const Tensor m = matrix_with_spectrum(20, 20, 1e-3, 1.0, rng);
  const Tensor ref = oracle::polar(m);
  const double e1 = oracle::spectral(approx_polar(m, polar_express(1)) - ref);
  const double e8 = oracle::spectral(approx_polar(m, polar_express(8)) - ref);
  EXPECT_LT(e8, e1);
  EXPECT_LT(e8, 0.05);
}

TEST(AprioriBound, Examples) {
  EXPECT_EQ(apriori_error_bound({1.0, 2, 3}), 0.0);
  EXPECT_EQ(apriori_error_bound({0.0, 2, 3}), 1.0);
  EXPECT_DOUBLE_EQ(apriori_error_bound({0.5, 2, 1}), 0.421875);
  EXPECT_THROW(apriori_error_bound({1.5, 1, 1}), ValidationError);
}

TEST(AprioriBound, SchemeDegree) {
  EXPECT_EQ(degree_q(newton_schulz(3)), 1);
  EXPECT_EQ(degree_q(muon_quintic(3)), 2);
  EXPECT_EQ(declared_delta(svd_reference()), 0.0);
  EXPECT_FALSE(declared_delta(newton_schulz(3)));
}

TEST(AprioriBound, MonitoredAgainstMeasurement) {
  // cubic NS from spectral scaling: the bound is a valid upper bound
  Rng rng = make_rng(38);
  for (int it : {1, 2, 4, 6}) {
    auto s = newton_schulz(it, Normalization::SpectralScale);
    s.spectrum_floor = 0.5;
    const Tensor m = matrix_with_spectrum(16, 16, 0.5, 1.0, rng);
    const double err = oracle::spectral(approx_polar(m, s) - oracle::polar(m));
    EXPECT_LE(err, 1.1 * *declared_delta(s)) << it;
  }
}

TEST(CoefficientTable, Parsing) {
  const auto t = parse_coefficient_table("3.4445 -4.7750 2.0315\n");
  EXPECT_EQ(t.scheme.kind, PolarKind::PolynomialTable);
  EXPECT_EQ(t.scheme.iterations, 1);
  EXPECT_EQ(t.scheme.row(0), (Coeffs{3.4445, -4.7750, 2.0315}));

  const auto c = parse_coefficient_table("# comment\n\n1.5 -0.5 0  # trailing\n", 4);
  EXPECT_EQ(c.scheme.iterations, 4);
  EXPECT_TRUE(c.warnings.empty());

  EXPECT_THROW(parse_coefficient_table(""), ParseError);
  EXPECT_THROW(parse_coefficient_table("# only a comment\n"), ParseError);
  try {
    parse_coefficient_table("1 2 3\n1.5 -0.5\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_coefficient_table("1 2 x\n"), ParseError);
  EXPECT_THROW(parse_coefficient_table("1 2 3 4\n"), ParseError);
  // sanity warning, not fatal
  EXPECT_FALSE(parse_coefficient_table("5 1 1\n").warnings.empty());
}

TEST(CoefficientTable, BitExactDecimalParse) {
  const auto t = parse_coefficient_table("0.1 0.2 0.30000000000000004\n");
  EXPECT_EQ(t.scheme.row(0).a, 0.1);
  EXPECT_EQ(t.scheme.row(0).c, 0.30000000000000004);
}

TEST(CoefficientTable, ShippedFilesMatchBuiltins) {
  const auto pe = load_coefficient_table(std::string(IMUON_SOURCE_DATA) + "/polar_express.txt");
  EXPECT_EQ(pe.scheme.coefficients, polar_express(8).coefficients);
  const auto mu = load_coefficient_table(std::string(IMUON_SOURCE_DATA) + "/muon_quintic.txt", 5);
  EXPECT_EQ(mu.scheme.coefficients, muon_quintic(5).coefficients);
  EXPECT_THROW(load_coefficient_table("/nonexistent/table.txt"), ConfigError);
}
