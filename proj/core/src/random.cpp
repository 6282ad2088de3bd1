#include "imuon/random.hpp"

#include <cmath>
#include <vector>

#include "imuon/errors.hpp"

namespace imuon {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_key(std::uint64_t seed, std::uint64_t step, std::uint64_t stream) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ step);
  h = splitmix64(h ^ (stream * 0xd1b54a32d192ed03ULL));
  return h;
}

Rng make_rng(std::uint64_t seed, std::uint64_t step, std::uint64_t stream) {
  return Rng(mix_key(seed, step, stream));
}

Tensor random_gaussian(std::size_t rows, std::size_t cols, Rng& rng, double stddev) {
  std::normal_distribution<double> nd(0.0, stddev);
  std::vector<double> d(rows * cols);
  for (auto& x : d) x = nd(rng);
  return Tensor(rows, cols, std::move(d));
}

Tensor random_orthonormal(std::size_t rows, std::size_t k, Rng& rng) {
  if (k > rows) throw ShapeMismatch("random_orthonormal: k > rows");
  std::normal_distribution<double> nd;
  std::vector<std::vector<double>> q;
  while (q.size() < k) {
    std::vector<double> v(rows);
    for (auto& x : v) x = nd(rng);
    // two passes of modified Gram-Schmidt
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& u : q) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows; ++i) s += u[i] * v[i];
        for (std::size_t i = 0; i < rows; ++i) v[i] -= s * u[i];
      }
    }
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n < 1e-8) continue;
    for (auto& x : v) x /= n;
    q.push_back(std::move(v));
  }
  std::vector<double> d(rows * k);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < rows; ++i) d[i * k + j] = q[j][i];
  return Tensor(rows, k, std::move(d));
}

Tensor matrix_with_spectrum(std::size_t rows, std::size_t cols, double smin, double smax,
                            Rng& rng) {
  const std::size_t k = std::min(rows, cols);
  const Tensor u = random_orthonormal(rows, k, rng);
  const Tensor v = random_orthonormal(cols, k, rng);
  std::vector<double> us(u.data());
  for (std::size_t j = 0; j < k; ++j) {
    const double s =
        k == 1 ? smax : smax - (smax - smin) * static_cast<double>(j) / static_cast<double>(k - 1);
    for (std::size_t i = 0; i < rows; ++i) us[i * k + j] *= s;
  }
  return matmul(Tensor(rows, k, std::move(us)), v.transpose());
}

}  // namespace imuon
