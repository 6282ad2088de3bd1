#include "imuon/lmo.hpp"

#include <cmath>
#include <vector>

#include "imuon/errors.hpp"
#include "imuon/svd.hpp"

namespace imuon {

namespace {

void require_nondegenerate(double norm, const char* which) {
  if (!(norm >= kDegenerateThreshold)) {
    throw DegenerateGradient(std::string(which) + ": gradient norm " + std::to_string(norm) +
                             " below 1e-14");
  }
}

}  // namespace

LmoResult lmo_spectral_exact(const Tensor& g) {
  require_nondegenerate(spectral_norm(g), "spectral LMO");
  const Svd d = jacobi_svd(g);
  const std::size_t m = g.rows(), n = g.cols(), k = d.s.size();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t r = 0; r < k; ++r) {
      const double uir = d.u(i, r);
      if (uir == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] -= uir * d.v(j, r);
    }
  LmoResult res;
  res.direction = Tensor(m, n, std::move(out));
  res.declared_delta = 0.0;
  res.ill_conditioned = k > 1 && d.s.back() < kIllConditionedRatio * d.s.front();
  return res;
}

LmoResult lmo_linf_exact(const Tensor& g) {
  require_nondegenerate(max_abs(g), "linf LMO");
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g[i];
    out[i] = x > 0.0 ? -1.0 : (x < 0.0 ? 1.0 : 0.0);
  }
  LmoResult res;
  res.direction = Tensor(g.rows(), g.cols(), std::move(out));
  res.declared_delta = 0.0;
  return res;
}

LmoResult lmo_euclidean_exact(const Tensor& g) {
  const double n = frobenius(g);
  require_nondegenerate(n, "euclidean LMO");
  LmoResult res;
  res.direction = g.scaled(-1.0 / n);
  res.declared_delta = 0.0;
  return res;
}

LmoResult lmo_exact(const Tensor& g, NormKind n) {
  switch (n) {
    case NormKind::Spectral: return lmo_spectral_exact(g);
    case NormKind::LInf: return lmo_linf_exact(g);
    case NormKind::Euclidean: return lmo_euclidean_exact(g);
  }
  throw ValidationError("unknown norm");
}

LmoResult lmo_spectral_approx(const Tensor& g, const PolarScheme& scheme) {
  require_nondegenerate(spectral_norm(g), "spectral LMO");
  PolarResult p = polar_iterate(g, scheme);
  LmoResult res;
  res.direction = -p.x;
  res.declared_delta = declared_delta(scheme);
  res.oracle_matmuls = p.matmuls;
  return res;
}

double measure_delta(const Tensor& g, LmoResult& approx, NormKind n) {
  const LmoResult exact = lmo_exact(g, n);
  const double d = primal_norm(approx.direction - exact.direction, n);
  approx.measured_delta = d;
  approx.ill_conditioned = approx.ill_conditioned || exact.ill_conditioned;
  return d;
}

}  // namespace imuon
