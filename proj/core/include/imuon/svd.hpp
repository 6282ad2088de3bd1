#pragma once

#include <cstddef>
#include <vector>

#include "imuon/tensor.hpp"

namespace imuon {

// Thin SVD a = U diag(s) V^T with k = min(rows, cols).
// Singular values sorted descending.
struct Svd {
  Tensor u;  // rows x k
  std::vector<double> s;
  Tensor v;  // cols x k
  std::size_t sweeps = 0;
};

// One-sided Hestenes-Jacobi. Columns of U for numerically zero singular
// values are left as zero vectors.
Svd jacobi_svd(const Tensor& a);

// U V^T over the numerical range of a; zero directions contribute nothing.
Tensor polar_factor(const Tensor& a);

std::vector<double> singular_values(const Tensor& a);

}  // namespace imuon
