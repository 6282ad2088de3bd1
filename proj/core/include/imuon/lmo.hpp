#pragma once

#include <cstddef>
#include <optional>

#include "imuon/norms.hpp"
#include "imuon/polar.hpp"
#include "imuon/tensor.hpp"

namespace imuon {

inline constexpr double kDegenerateThreshold = 1e-14;
inline constexpr double kIllConditionedRatio = 1e-8;

struct LmoResult {
  Tensor direction;
  std::optional<double> declared_delta;
  std::optional<double> measured_delta;
  std::size_t oracle_matmuls = 0;
  // smallest singular value below 1e-8 * largest: exact polar factor not unique
  bool ill_conditioned = false;
};

LmoResult lmo_spectral_exact(const Tensor& g);
// Zero coordinates get a zero direction entry.
LmoResult lmo_linf_exact(const Tensor& g);
LmoResult lmo_euclidean_exact(const Tensor& g);
LmoResult lmo_exact(const Tensor& g, NormKind n);

LmoResult lmo_spectral_approx(const Tensor& g, const PolarScheme& scheme);

// primal_norm(approx.direction - exact.direction); also stored in approx.
double measure_delta(const Tensor& g, LmoResult& approx, NormKind n);

}  // namespace imuon
