#include <cmath>

#include "imuon/errors.hpp"
#include "imuon/problems.hpp"
#include "imuon/random.hpp"

namespace imuon {

namespace {

class Quartic final : public Problem {
 public:
  explicit Quartic(const QuarticOptions& o) {
    if (o.dim == 0 || !(o.x0_norm > 0.0)) throw ValidationError("quartic: dim and x0 norm must be positive");
    name_ = "quartic";
    blocks_ = {{"x", o.dim, 1, NormKind::Euclidean}};
    Rng rng = make_rng(o.seed, 0, 0);
    Tensor x = random_gaussian(o.dim, 1, rng);
    x0_ = {x.scaled(o.x0_norm / frobenius(x))};
    const double u = o.x0_norm / 10.0;
    gs_ = {6.0 * u * u, 6.0 / u};
  }

  double value(const Params& x) const override {
    check_params(x);
    const double n = frobenius(x[0]);
    return 0.25 * n * n * n * n;
  }

  Params gradient(const Params& x) const override {
    check_params(x);
    const double n = frobenius(x[0]);
    return {x[0].scaled(n * n)};
  }

  std::optional<GeneralizedSmoothness> generalized_smoothness() const override { return gs_; }

 private:
  GeneralizedSmoothness gs_;
};

}  // namespace

std::unique_ptr<Problem> make_quartic(const QuarticOptions& o) { return std::make_unique<Quartic>(o); }

std::unique_ptr<Problem> make_quartic(std::size_t dim, std::uint64_t seed) {
  QuarticOptions o;
  o.dim = dim;
  o.seed = seed;
  return make_quartic(o);
}

}  // namespace imuon
