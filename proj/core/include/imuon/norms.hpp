#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "imuon/tensor.hpp"

namespace imuon {

enum class NormKind { Spectral, LInf, Euclidean };

std::string_view to_string(NormKind n);
NormKind norm_kind_from_string(std::string_view s);

struct ParamBlock {
  std::string name;
  Tensor value;
  NormKind norm = NormKind::Euclidean;
};

// Largest singular value by power iteration on the smaller Gram matrix.
double spectral_norm(const Tensor& t);
double nuclear_norm(const Tensor& t);

double primal_norm(const Tensor& t, NormKind n);
double dual_norm(const Tensor& t, NormKind n);

// Smallest rho with dual_norm(t) <= rho * frobenius(t) for every t of this shape.
double norm_compat_rho(NormKind n, std::size_t rows, std::size_t cols);

}  // namespace imuon
