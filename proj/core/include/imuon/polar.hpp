#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "imuon/tensor.hpp"

namespace imuon {

enum class PolarKind { NewtonSchulz, PolynomialTable, SvdReference };
enum class Normalization { FrobeniusScale, SpectralScale };

std::string_view to_string(PolarKind k);
std::string_view to_string(Normalization n);
Normalization normalization_from_string(std::string_view s);

// One odd polynomial step p(x) = a x + b x^3 + c x^5.
struct Coeffs {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  bool operator==(const Coeffs&) const = default;
};

struct PolarScheme {
  PolarKind kind = PolarKind::NewtonSchulz;
  int iterations = 5;
  std::vector<Coeffs> coefficients;
  Normalization normalization = Normalization::FrobeniusScale;
  // X0 = m / (margin * s); PolarExpress uses 1.01
  double scale_margin = 1.0;
  // Assumed lower end of the normalized spectrum, enables the a-priori bound.
  std::optional<double> spectrum_floor;
  std::string label;

  const Coeffs& row(int step) const;
};

// Classical cubic X <- 1.5 X - 0.5 X X^T X.
PolarScheme newton_schulz(int iterations, Normalization n = Normalization::FrobeniusScale);
PolarScheme polynomial_table(std::vector<Coeffs> rows, int iterations,
                             Normalization n = Normalization::FrobeniusScale);
PolarScheme svd_reference();
// (3.4445, -4.7750, 2.0315) every step.
PolarScheme muon_quintic(int iterations);
PolarScheme polar_express(int iterations);

void validate(const PolarScheme& s);

struct PolarResult {
  Tensor x;
  std::size_t matmuls = 0;
};

PolarResult polar_iterate(const Tensor& m, const PolarScheme& s);
Tensor approx_polar(const Tensor& m, const PolarScheme& s);

struct ErrorModelParams {
  double ell = 1.0;
  double q = 1.0;
  double p = 1.0;
};

// |1 - ell^2|^((q+1)^p)
double apriori_error_bound(const ErrorModelParams& params);

// Largest degree parameter q over the rows actually used (degree 2q+1).
int degree_q(const PolarScheme& s);

// A-priori bound for this scheme, or nullopt when no spectrum floor is known.
std::optional<double> declared_delta(const PolarScheme& s);

struct ParsedTable {
  PolarScheme scheme;
  std::vector<std::string> warnings;
};

// Text format: one row "a b c" per line, '#' starts a comment.
// iterations == 0 uses the number of rows.
ParsedTable parse_coefficient_table(std::string_view text, int iterations = 0,
                                    Normalization n = Normalization::FrobeniusScale);
ParsedTable load_coefficient_table(const std::filesystem::path& path, int iterations = 0,
                                   Normalization n = Normalization::FrobeniusScale);

}  // namespace imuon
