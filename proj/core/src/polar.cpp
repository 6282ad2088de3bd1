#include "imuon/polar.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "imuon/errors.hpp"
#include "imuon/norms.hpp"
#include "imuon/svd.hpp"

namespace imuon {

namespace {

constexpr double kDivergenceNorm = 10.0;

const std::vector<Coeffs>& polar_express_rows() {
  static const std::vector<Coeffs> rows = {
      {8.28721201814563, -23.595886519098837, 17.300387312530933},
      {4.107059111542203, -2.9478499167379106, 0.5448431082926601},
      {3.9486908534822946, -2.908902115962949, 0.5518191394370137},
      {3.3184196573706015, -2.488488024314874, 0.51004894012372},
      {2.300652019954817, -1.6689039845747493, 0.4188073119525673},
      {1.891301407787398, -1.2679958271945868, 0.37680408948524835},
      {1.8750014808534479, -1.2500016453999487, 0.3750001645474248},
      {1.875, -1.25, 0.375},
  };
  return rows;
}

// a = X^T X; max row sum bounds lambda_max(a) = ||X||_2^2
void guard(const Tensor& a) {
  const std::size_t n = a.rows();
  double bound = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(a(i, j));
    bound = std::max(bound, row);
  }
  if (bound <= kDivergenceNorm * kDivergenceNorm) return;
  const double s = std::sqrt(singular_values(a).front());
  if (s > kDivergenceNorm) {
    throw SchemeDiverged("polar iterate spectral norm " + std::to_string(s) + " exceeds 10");
  }
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string_view to_string(PolarKind k) {
  switch (k) {
    case PolarKind::NewtonSchulz: return "newton_schulz";
    case PolarKind::PolynomialTable: return "table";
    case PolarKind::SvdReference: return "svd";
  }
  return "unknown";
}

std::string_view to_string(Normalization n) {
  return n == Normalization::FrobeniusScale ? "frobenius" : "spectral";
}

Normalization normalization_from_string(std::string_view s) {
  if (s == "frobenius") return Normalization::FrobeniusScale;
  if (s == "spectral") return Normalization::SpectralScale;
  throw ConfigError("unknown normalization '" + std::string(s) + "'");
}

const Coeffs& PolarScheme::row(int step) const {
  const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(step), coefficients.size() - 1);
  return coefficients[i];
}

PolarScheme newton_schulz(int iterations, Normalization n) {
  PolarScheme s;
  s.kind = PolarKind::NewtonSchulz;
  s.iterations = iterations;
  s.coefficients = {{1.5, -0.5, 0.0}};
  s.normalization = n;
  s.label = "ns" + std::to_string(iterations);
  validate(s);
  return s;
}

PolarScheme polynomial_table(std::vector<Coeffs> rows, int iterations, Normalization n) {
  PolarScheme s;
  s.kind = PolarKind::PolynomialTable;
  s.iterations = iterations;
  s.coefficients = std::move(rows);
  s.normalization = n;
  s.label = "table" + std::to_string(iterations);
  validate(s);
  return s;
}

PolarScheme svd_reference() {
  PolarScheme s;
  s.kind = PolarKind::SvdReference;
  s.iterations = 1;
  s.label = "svd";
  return s;
}

PolarScheme muon_quintic(int iterations) {
  PolarScheme s = polynomial_table({{3.4445, -4.7750, 2.0315}}, iterations);
  s.label = "muon" + std::to_string(iterations);
  return s;
}

PolarScheme polar_express(int iterations) {
  PolarScheme s = polynomial_table(polar_express_rows(), iterations);
  s.scale_margin = 1.01;
  s.label = "pe" + std::to_string(iterations);
  return s;
}

void validate(const PolarScheme& s) {
  if (s.iterations < 1) throw ValidationError("polar scheme needs at least one iteration");
  if (s.kind != PolarKind::SvdReference && s.coefficients.empty()) {
    throw ValidationError("polar scheme has no coefficient rows");
  }
  for (const auto& r : s.coefficients) {
    if (!std::isfinite(r.a) || !std::isfinite(r.b) || !std::isfinite(r.c)) {
      throw ValidationError("non-finite polar coefficient");
    }
  }
  if (!(s.scale_margin > 0.0) || !std::isfinite(s.scale_margin)) {
    throw ValidationError("scale margin must be positive");
  }
  if (s.spectrum_floor && !(*s.spectrum_floor > 0.0 && *s.spectrum_floor <= 1.0)) {
    throw ValidationError("spectrum floor must lie in (0, 1]");
  }
}

PolarResult polar_iterate(const Tensor& m, const PolarScheme& s) {
  if (s.kind == PolarKind::SvdReference) return {polar_factor(m), 0};
  validate(s);

  const bool wide = m.rows() < m.cols();
  Tensor x = wide ? m.transpose() : m;
  const double scale =
      (s.normalization == Normalization::FrobeniusScale ? frobenius(x) : spectral_norm(x)) *
      s.scale_margin;
  if (scale == 0.0) throw SchemeDiverged("cannot normalize a zero matrix");
  x = x.scaled(1.0 / scale);

  std::size_t matmuls = 0;
  try {
    for (int k = 0; k < s.iterations; ++k) {
      const Coeffs& r = s.row(k);
      // tall orientation: X (bI + cA) A with A = X^T X, small side
      const Tensor a = gram(x);
      ++matmuls;
      if (k > 0) guard(a);
      Tensor poly = a.scaled(r.b);
      if (r.c != 0.0) {
        poly = lincomb(1.0, poly, r.c, matmul(a, a));
        ++matmuls;
      }
      x = lincomb(r.a, x, 1.0, matmul(x, poly));
      ++matmuls;
    }
    if (s.iterations > 0) guard(gram(x));
  } catch (const NonFiniteValue&) {
    throw SchemeDiverged("polar iterate overflowed");
  }
  return {wide ? x.transpose() : std::move(x), matmuls};
}

Tensor approx_polar(const Tensor& m, const PolarScheme& s) { return polar_iterate(m, s).x; }

double apriori_error_bound(const ErrorModelParams& p) {
  if (!(p.ell >= 0.0 && p.ell <= 1.0)) throw ValidationError("ell must lie in [0, 1]");
  const double base = std::abs(1.0 - p.ell * p.ell);
  if (base == 0.0) return 0.0;
  return std::pow(base, std::pow(p.q + 1.0, p.p));
}

int degree_q(const PolarScheme& s) {
  if (s.kind == PolarKind::SvdReference) return 0;
  int q = 0;
  const int used = std::min<int>(s.iterations, static_cast<int>(s.coefficients.size()));
  for (int k = 0; k < used; ++k) {
    const Coeffs& r = s.coefficients[static_cast<std::size_t>(k)];
    q = std::max(q, r.c != 0.0 ? 2 : (r.b != 0.0 ? 1 : 0));
  }
  return q;
}

std::optional<double> declared_delta(const PolarScheme& s) {
  if (s.kind == PolarKind::SvdReference) return 0.0;
  if (!s.spectrum_floor) return std::nullopt;
  return apriori_error_bound({*s.spectrum_floor, static_cast<double>(degree_q(s)),
                              static_cast<double>(s.iterations)});
}

ParsedTable parse_coefficient_table(std::string_view text, int iterations, Normalization n) {
  std::vector<Coeffs> rows;
  std::vector<std::string> warnings;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    if (const auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    const std::string body = trim(line);
    if (body.empty()) continue;

    std::istringstream in(body);
    std::vector<double> vals;
    std::string tok;
    while (in >> tok) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
        throw ParseError(lineno, "not a decimal number: '" + tok + "'");
      }
      vals.push_back(v);
    }
    if (vals.size() != 3) {
      throw ParseError(lineno, "expected 3 coefficients, found " + std::to_string(vals.size()));
    }
    const Coeffs r{vals[0], vals[1], vals[2]};
    const double at_one = r.a + r.b + r.c;
    if (!(at_one > 0.0 && at_one < 2.0)) {
      warnings.push_back("line " + std::to_string(lineno) + ": a+b+c = " + std::to_string(at_one) +
                         " maps singular value 1 outside (0, 2)");
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw ParseError(lineno, "coefficient table has no rows");
  const int iters = iterations > 0 ? iterations : static_cast<int>(rows.size());
  return {polynomial_table(std::move(rows), iters, n), std::move(warnings)};
}

ParsedTable load_coefficient_table(const std::filesystem::path& path, int iterations,
                                   Normalization n) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open coefficient table " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  ParsedTable t = parse_coefficient_table(ss.str(), iterations, n);
  t.scheme.label = path.stem().string() + std::to_string(t.scheme.iterations);
  return t;
}

}  // namespace imuon
