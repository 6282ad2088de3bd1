#include <algorithm>

#include "imuon/problems.hpp"
#include "imuon/random.hpp"

namespace imuon {

namespace {

class MatrixQuadratic final : public Problem {
 public:
  MatrixQuadratic(const QuadraticOptions& o) {
    name_ = "quadratic";
    blocks_ = {{"X", o.rows, o.cols, o.norm}};
    Rng rng = make_rng(o.seed, 0, 0);
    target_ = o.target == QuadraticTarget::Zero ? Tensor(o.rows, o.cols)
                                                : random_gaussian(o.rows, o.cols, rng);
    switch (o.init) {
      case QuadraticInit::Zero: x0_ = {Tensor(o.rows, o.cols)}; break;
      case QuadraticInit::Identity: {
        std::vector<double> ones(std::min(o.rows, o.cols), 1.0);
        x0_ = {Tensor::diag(ones, o.rows, o.cols)};
        break;
      }
      case QuadraticInit::Random: x0_ = {random_gaussian(o.rows, o.cols, rng)}; break;
    }
    sigma_ = o.sigma;
    f_star_ = 0.0;
    switch (o.norm) {
      case NormKind::Spectral: L_ = static_cast<double>(std::min(o.rows, o.cols)); break;
      case NormKind::LInf: L_ = static_cast<double>(o.rows * o.cols); break;
      case NormKind::Euclidean: L_ = 1.0; break;
    }
  }

  double value(const Params& x) const override {
    check_params(x);
    const double n = frobenius(x[0] - target_);
    return 0.5 * n * n;
  }

  Params gradient(const Params& x) const override {
    check_params(x);
    return {x[0] - target_};
  }

  std::pair<double, Params> evaluate(const Params& x) const override {
    check_params(x);
    Tensor g = x[0] - target_;
    const double n = frobenius(g);
    return {0.5 * n * n, {std::move(g)}};
  }

 private:
  Tensor target_;
};

}  // namespace

std::unique_ptr<Problem> make_matrix_quadratic(const QuadraticOptions& o) {
  return std::make_unique<MatrixQuadratic>(o);
}

std::unique_ptr<Problem> make_matrix_quadratic(std::size_t rows, std::size_t cols,
                                               std::uint64_t seed) {
  QuadraticOptions o;
  o.rows = rows;
  o.cols = cols;
  o.seed = seed;
  return make_matrix_quadratic(o);
}

}  // namespace imuon
