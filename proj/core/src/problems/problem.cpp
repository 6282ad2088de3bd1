#include <cmath>

#include "imuon/errors.hpp"
#include "imuon/problems.hpp"
#include "imuon/random.hpp"

namespace imuon {

void Problem::check_params(const Params& x) const {
  if (x.size() != blocks_.size()) {
    throw ShapeMismatch(name_ + ": expected " + std::to_string(blocks_.size()) + " blocks, got " +
                        std::to_string(x.size()));
  }
  for (std::size_t b = 0; b < x.size(); ++b) {
    if (x[b].rows() != blocks_[b].rows || x[b].cols() != blocks_[b].cols) {
      throw ShapeMismatch(name_ + ": block " + blocks_[b].name + " has wrong shape");
    }
  }
}

Params gaussian_noise(const std::vector<BlockSpec>& blocks, double sigma, std::uint64_t seed,
                      std::uint64_t step) {
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.rows * b.cols;
  const double sd = total ? sigma / std::sqrt(static_cast<double>(total)) : 0.0;
  Params out;
  out.reserve(blocks.size());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    Rng rng = make_rng(seed, step, i);
    out.push_back(random_gaussian(blocks[i].rows, blocks[i].cols, rng, sd));
  }
  return out;
}

Params Problem::stochastic_gradient(const Params& x, std::uint64_t seed, std::uint64_t step) const {
  Params g = gradient(x);
  if (sigma_ == 0.0) return g;
  const Params noise = gaussian_noise(blocks_, sigma_, seed, step);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = g[i] + noise[i];
  return g;
}

std::optional<std::vector<double>> Problem::block_smoothness(const Params&) const {
  if (!L_ || blocks_.size() != 1) return std::nullopt;
  return std::vector<double>{*L_};
}

}  // namespace imuon
