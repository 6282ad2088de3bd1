#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "imuon/norms.hpp"
#include "imuon/tensor.hpp"

namespace imuon {

using Params = std::vector<Tensor>;

struct BlockSpec {
  std::string name;
  std::size_t rows = 1;
  std::size_t cols = 1;
  NormKind norm = NormKind::Euclidean;
};

struct GeneralizedSmoothness {
  double L0 = 0.0;
  double L1 = 0.0;
};

// Stream ids for make_rng; block noise uses the block index.
inline constexpr std::uint64_t kMinibatchStream = 0x6d696e69ULL;

class Problem {
 public:
  virtual ~Problem() = default;

  const std::string& name() const noexcept { return name_; }
  const std::vector<BlockSpec>& blocks() const noexcept { return blocks_; }
  const Params& initial_point() const noexcept { return x0_; }
  double f_star() const noexcept { return f_star_; }
  // sqrt of E||g - grad f||_2^2 (at x0 for minibatch problems)
  double sigma() const noexcept { return sigma_; }

  virtual double value(const Params& x) const = 0;
  virtual Params gradient(const Params& x) const = 0;
  virtual std::pair<double, Params> evaluate(const Params& x) const {
    return {value(x), gradient(x)};
  }

  // Unbiased; deterministic in (x, seed, step). Default: gradient plus
  // Gaussian noise with total variance sigma^2 spread over all entries.
  virtual Params stochastic_gradient(const Params& x, std::uint64_t seed, std::uint64_t step) const;

  // Global L with respect to each block's own norm (single-block problems).
  virtual std::optional<double> smoothness() const { return L_; }
  // Local per-block constants valid for one simultaneous step from x.
  virtual std::optional<std::vector<double>> block_smoothness(const Params& x) const;
  virtual std::optional<GeneralizedSmoothness> generalized_smoothness() const { return std::nullopt; }

  // Replace the certified constant (used to test miscertified runs).
  void declare_smoothness(double L) { L_ = L; }

  void check_params(const Params& x) const;

 protected:
  std::string name_;
  std::vector<BlockSpec> blocks_;
  Params x0_;
  double f_star_ = 0.0;
  double sigma_ = 0.0;
  std::optional<double> L_;
};

Params gaussian_noise(const std::vector<BlockSpec>& blocks, double sigma, std::uint64_t seed,
                      std::uint64_t step);

enum class QuadraticTarget { Random, Zero };
enum class QuadraticInit { Zero, Identity, Random };

struct QuadraticOptions {
  std::size_t rows = 4;
  std::size_t cols = 4;
  std::uint64_t seed = 0;
  double sigma = 0.0;
  NormKind norm = NormKind::Spectral;
  QuadraticTarget target = QuadraticTarget::Random;
  QuadraticInit init = QuadraticInit::Zero;
};

// f(X) = 0.5 ||X - A||_F^2. L = min(rows, cols) for the spectral norm,
// rows*cols for linf, 1 for euclidean.
std::unique_ptr<Problem> make_matrix_quadratic(const QuadraticOptions& o);
std::unique_ptr<Problem> make_matrix_quadratic(std::size_t rows, std::size_t cols, std::uint64_t seed);

struct LogisticOptions {
  std::size_t dim = 10;
  std::size_t samples = 100;
  // 2: binary labels, vector block, linf geometry.
  // >2: softmax over a classes x dim weight matrix, spectral geometry.
  std::size_t classes = 2;
  std::size_t batch = 1;
  std::uint64_t seed = 0;
  // extra additive Gaussian noise on top of minibatch sampling
  double extra_sigma = 0.0;
  double margin = 0.1;
  double teacher_scale = 1.0;
};

// Binary: mean log(1 + exp(-y <w, x>)) on separable data with margin,
// L = max_i ||x_i||_1^2 / 4.
// Softmax: mean cross-entropy, labels sampled from a random teacher,
// L = max_i ||x_i||_2^2 / 2.
// Minibatch gradients draw `batch` samples with replacement.
std::unique_ptr<Problem> make_logistic(const LogisticOptions& o);
std::unique_ptr<Problem> make_logistic(std::size_t dim, std::size_t n_samples, std::uint64_t seed);

struct FactorizationOptions {
  std::size_t n = 8;
  std::size_t r = 2;
  std::size_t target_rank = 2;
  std::uint64_t seed = 0;
  double init_scale = 0.5;
  double sigma = 0.0;
};

// f(U, V) = 0.5 ||U V^T - A||_F^2 with blocks U, V (n x r), spectral norm.
// block_smoothness at (U, V), R = U V^T - A:
//   base_U = 3 ||V||_F^2 + ||R||_nuc, base_V = 3 ||U||_F^2 + ||R||_nuc
//   tau = max_i ||g_i||_nuc / base_i
//   L_i = base_i + 1.5 r tau^2
// which bounds f after any joint step with ||dU||, ||dV|| <= tau.
std::unique_ptr<Problem> make_matrix_factorization(const FactorizationOptions& o);
std::unique_ptr<Problem> make_matrix_factorization(std::size_t n, std::size_t r, std::uint64_t seed);

struct QuarticOptions {
  std::size_t dim = 10;
  std::uint64_t seed = 0;
  double x0_norm = 10.0;
};

// f(x) = 0.25 ||x||_2^4, euclidean geometry, not globally L-smooth.
// With u = ||x0|| / 10, (L0, L1) = (6 u^2, 6 / u) bounds the local
// Hessian 3||x||^2 by L0 + L1 ||grad f(x)|| everywhere.
std::unique_ptr<Problem> make_quartic(const QuarticOptions& o);
std::unique_ptr<Problem> make_quartic(std::size_t dim, std::uint64_t seed);

}  // namespace imuon
