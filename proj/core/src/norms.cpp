#include "imuon/norms.hpp"

#include <cmath>
#include <vector>

#include "imuon/errors.hpp"
#include "imuon/svd.hpp"

namespace imuon {

std::string_view to_string(NormKind n) {
  switch (n) {
    case NormKind::Spectral: return "spectral";
    case NormKind::LInf: return "linf";
    case NormKind::Euclidean: return "euclidean";
  }
  return "unknown";
}

NormKind norm_kind_from_string(std::string_view s) {
  if (s == "spectral") return NormKind::Spectral;
  if (s == "linf") return NormKind::LInf;
  if (s == "euclidean") return NormKind::Euclidean;
  throw ConfigError("unknown norm '" + std::string(s) + "'");
}

double spectral_norm(const Tensor& t) {
  if (t.empty()) return 0.0;
  if (t.cols() == 1 || t.rows() == 1) return frobenius(t);
  const auto s = singular_values(t);
  return s.empty() ? 0.0 : s.front();
}

double nuclear_norm(const Tensor& t) {
  if (t.empty()) return 0.0;
  if (t.cols() == 1 || t.rows() == 1) return frobenius(t);
  double s = 0.0;
  for (double x : singular_values(t)) s += x;
  return s;
}

double primal_norm(const Tensor& t, NormKind n) {
  switch (n) {
    case NormKind::Spectral: return spectral_norm(t);
    case NormKind::LInf: return max_abs(t);
    case NormKind::Euclidean: return frobenius(t);
  }
  return 0.0;
}

double dual_norm(const Tensor& t, NormKind n) {
  switch (n) {
    case NormKind::Spectral: return nuclear_norm(t);
    case NormKind::LInf: return l1(t);
    case NormKind::Euclidean: return frobenius(t);
  }
  return 0.0;
}

double norm_compat_rho(NormKind n, std::size_t rows, std::size_t cols) {
  switch (n) {
    case NormKind::Spectral: return std::sqrt(static_cast<double>(std::min(rows, cols)));
    case NormKind::LInf: return std::sqrt(static_cast<double>(rows * cols));
    case NormKind::Euclidean: return 1.0;
  }
  return 1.0;
}

}  // namespace imuon
