#include <algorithm>
#include <cmath>

#include "imuon/errors.hpp"
#include "imuon/problems.hpp"
#include "imuon/random.hpp"

namespace imuon {

namespace {

class MatrixFactorization final : public Problem {
 public:
  explicit MatrixFactorization(const FactorizationOptions& o) : r_(o.r) {
    if (o.n == 0 || o.r == 0 || o.target_rank == 0) {
      throw ValidationError("factorization: n, r and target rank must be positive");
    }
    name_ = "factorization";
    blocks_ = {{"U", o.n, o.r, NormKind::Spectral}, {"V", o.n, o.r, NormKind::Spectral}};
    Rng rng = make_rng(o.seed, 0, 0);
    const double s = 1.0 / std::sqrt(static_cast<double>(o.target_rank));
    const Tensor a = random_gaussian(o.n, o.target_rank, rng, std::sqrt(s));
    const Tensor b = random_gaussian(o.n, o.target_rank, rng, std::sqrt(s));
    target_ = matmul(a, b.transpose());
    x0_ = {random_gaussian(o.n, o.r, rng, o.init_scale), random_gaussian(o.n, o.r, rng, o.init_scale)};
    sigma_ = o.sigma;
    // f* = 0 only when A is representable at rank r
    f_star_ = 0.0;
  }

  double value(const Params& x) const override {
    check_params(x);
    const double n = frobenius(residual(x));
    return 0.5 * n * n;
  }

  Params gradient(const Params& x) const override { return evaluate(x).second; }

  std::pair<double, Params> evaluate(const Params& x) const override {
    check_params(x);
    const Tensor r = residual(x);
    const double n = frobenius(r);
    return {0.5 * n * n, {matmul(r, x[1]), matmul_tn(r, x[0])}};
  }

  std::optional<std::vector<double>> block_smoothness(const Params& x) const override {
    check_params(x);
    const Tensor r = residual(x);
    const double rn = nuclear_norm(r);
    const double fu = frobenius(x[0]), fv = frobenius(x[1]);
    const double base_u = 3.0 * fv * fv + rn;
    const double base_v = 3.0 * fu * fu + rn;
    const Tensor gu = matmul(r, x[1]);
    const Tensor gv = matmul_tn(r, x[0]);
    double tau = 0.0;
    if (base_u > 0.0) tau = std::max(tau, nuclear_norm(gu) / base_u);
    if (base_v > 0.0) tau = std::max(tau, nuclear_norm(gv) / base_v);
    const double extra = 1.5 * static_cast<double>(r_) * tau * tau;
    return std::vector<double>{base_u + extra, base_v + extra};
  }

 private:
  Tensor residual(const Params& x) const { return matmul(x[0], x[1].transpose()) - target_; }

  std::size_t r_;
  Tensor target_;
};

}  // namespace

std::unique_ptr<Problem> make_matrix_factorization(const FactorizationOptions& o) {
  return std::make_unique<MatrixFactorization>(o);
}

std::unique_ptr<Problem> make_matrix_factorization(std::size_t n, std::size_t r, std::uint64_t seed) {
  FactorizationOptions o;
  o.n = n;
  o.r = r;
  o.target_rank = r;
  o.seed = seed;
  return make_matrix_factorization(o);
}

}  // namespace imuon
