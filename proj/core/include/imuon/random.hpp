#pragma once

#include <cstdint>
#include <random>

#include "imuon/tensor.hpp"

namespace imuon {

using Rng = std::mt19937_64;

std::uint64_t mix_key(std::uint64_t seed, std::uint64_t step, std::uint64_t stream);

// Independent generator for (seed, step, stream); the same key always
// yields the same sequence.
Rng make_rng(std::uint64_t seed, std::uint64_t step = 0, std::uint64_t stream = 0);

Tensor random_gaussian(std::size_t rows, std::size_t cols, Rng& rng, double stddev = 1.0);

// rows x k with orthonormal columns (k <= rows), Gram-Schmidt on a Gaussian draw.
Tensor random_orthonormal(std::size_t rows, std::size_t k, Rng& rng);

// U diag(s) V^T with s evenly spaced over [smin, smax], both endpoints included.
Tensor matrix_with_spectrum(std::size_t rows, std::size_t cols, double smin, double smax, Rng& rng);

}  // namespace imuon
