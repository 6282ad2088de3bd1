#include <algorithm>
#include <cmath>
#include <random>

#include "imuon/errors.hpp"
#include "imuon/problems.hpp"
#include "imuon/random.hpp"

namespace imuon {

namespace {

double softplus(double u) { return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u))); }

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

class Logistic final : public Problem {
 public:
  explicit Logistic(const LogisticOptions& o)
      : n_(o.samples), d_(o.dim), classes_(o.classes), batch_(o.batch), extra_sigma_(o.extra_sigma) {
    if (o.dim == 0 || o.samples == 0 || o.batch == 0 || o.classes < 2) {
      throw ValidationError("logistic: dim, samples, batch >= 1 and classes >= 2 required");
    }
    Rng rng = make_rng(o.seed, 0, 0);
    std::normal_distribution<double> nd;
    x_.resize(n_ * d_);
    for (auto& v : x_) v = nd(rng);
    y_.resize(n_);

    if (binary()) {
      name_ = "logistic";
      std::vector<double> w(d_);
      double wn = 0.0;
      for (auto& v : w) {
        v = nd(rng);
        wn += v * v;
      }
      wn = std::sqrt(wn);
      for (auto& v : w) v /= wn;
      for (std::size_t i = 0; i < n_; ++i) {
        double* xi = x_.data() + i * d_;
        double z = 0.0;
        for (std::size_t j = 0; j < d_; ++j) z += w[j] * xi[j];
        if (std::abs(z) < o.margin) {
          const double shift = (z >= 0.0 ? o.margin : -o.margin) - z;
          for (std::size_t j = 0; j < d_; ++j) xi[j] += shift * w[j];
          z += shift;
        }
        y_[i] = z >= 0.0 ? 1 : -1;
      }
      blocks_ = {{"w", d_, 1, NormKind::LInf}};
      double m = 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d_; ++j) s += std::abs(x_[i * d_ + j]);
        m = std::max(m, s * s);
      }
      L_ = 0.25 * m;
    } else {
      name_ = "softmax";
      const Tensor teacher = random_gaussian(classes_, d_, rng);
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      std::vector<double> p(classes_);
      for (std::size_t i = 0; i < n_; ++i) {
        const double* xi = x_.data() + i * d_;
        for (std::size_t c = 0; c < classes_; ++c) {
          double z = 0.0;
          for (std::size_t j = 0; j < d_; ++j) z += teacher(c, j) * xi[j];
          p[c] = o.teacher_scale * z;
        }
        softmax_inplace(p);
        double u = unif(rng), acc = 0.0;
        int label = static_cast<int>(classes_) - 1;
        for (std::size_t c = 0; c < classes_; ++c) {
          acc += p[c];
          if (u < acc) {
            label = static_cast<int>(c);
            break;
          }
        }
        y_[i] = label;
      }
      blocks_ = {{"W", classes_, d_, NormKind::Spectral}};
      double m = 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d_; ++j) s += x_[i * d_ + j] * x_[i * d_ + j];
        m = std::max(m, s);
      }
      L_ = 0.5 * m;
    }

    x0_ = {Tensor(blocks_[0].rows, blocks_[0].cols)};
    f_star_ = 0.0;

    // exact minibatch variance at x0 (sampling with replacement)
    const Tensor full = gradient(x0_)[0];
    double var = 0.0;
    std::vector<double> gi;
    for (std::size_t i = 0; i < n_; ++i) {
      gi.assign(full.size(), 0.0);
      accumulate_sample(x0_[0], i, nullptr, gi);
      for (std::size_t k = 0; k < gi.size(); ++k) var += (gi[k] - full[k]) * (gi[k] - full[k]);
    }
    var /= static_cast<double>(n_ * batch_);
    sigma_ = std::sqrt(var + extra_sigma_ * extra_sigma_);
  }

  double value(const Params& x) const override {
    check_params(x);
    double f = 0.0;
    for (std::size_t i = 0; i < n_; ++i) f += sample_loss(x[0], i);
    return f / static_cast<double>(n_);
  }

  Params gradient(const Params& x) const override { return evaluate(x).second; }

  std::pair<double, Params> evaluate(const Params& x) const override {
    check_params(x);
    std::vector<double> g(x[0].size(), 0.0);
    double f = 0.0;
    for (std::size_t i = 0; i < n_; ++i) accumulate_sample(x[0], i, &f, g);
    const double inv = 1.0 / static_cast<double>(n_);
    for (auto& v : g) v *= inv;
    return {f * inv, {Tensor(x[0].rows(), x[0].cols(), std::move(g))}};
  }

  Params stochastic_gradient(const Params& x, std::uint64_t seed, std::uint64_t step) const override {
    check_params(x);
    Rng rng = make_rng(seed, step, kMinibatchStream);
    std::uniform_int_distribution<std::size_t> pick(0, n_ - 1);
    std::vector<double> g(x[0].size(), 0.0);
    for (std::size_t b = 0; b < batch_; ++b) accumulate_sample(x[0], pick(rng), nullptr, g);
    const double inv = 1.0 / static_cast<double>(batch_);
    for (auto& v : g) v *= inv;
    Params out{Tensor(x[0].rows(), x[0].cols(), std::move(g))};
    if (extra_sigma_ > 0.0) out[0] = out[0] + gaussian_noise(blocks_, extra_sigma_, seed, step)[0];
    return out;
  }

 private:
  bool binary() const { return classes_ == 2; }

  static void softmax_inplace(std::vector<double>& z) {
    const double mx = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (auto& v : z) {
      v = std::exp(v - mx);
      s += v;
    }
    for (auto& v : z) v /= s;
  }

  double sample_loss(const Tensor& w, std::size_t i) const {
    std::vector<double> g;
    double f = 0.0;
    accumulate_sample(w, i, &f, g, false);
    return f;
  }

  // adds sample i's loss to *f (if given) and its gradient to g (if want_grad)
  void accumulate_sample(const Tensor& w, std::size_t i, double* f, std::vector<double>& g,
                         bool want_grad = true) const {
    const double* xi = x_.data() + i * d_;
    if (binary()) {
      double t = 0.0;
      for (std::size_t j = 0; j < d_; ++j) t += w[j] * xi[j];
      const double yt = y_[i] * t;
      if (f) *f += softplus(-yt);
      if (want_grad) {
        const double coef = -y_[i] * sigmoid(-yt);
        for (std::size_t j = 0; j < d_; ++j) g[j] += coef * xi[j];
      }
      return;
    }
    std::vector<double> z(classes_);
    for (std::size_t c = 0; c < classes_; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < d_; ++j) s += w(c, j) * xi[j];
      z[c] = s;
    }
    const std::size_t yi = static_cast<std::size_t>(y_[i]);
    if (f) {
      const double mx = *std::max_element(z.begin(), z.end());
      double s = 0.0;
      for (double v : z) s += std::exp(v - mx);
      *f += mx + std::log(s) - z[yi];
    }
    if (want_grad) {
      softmax_inplace(z);
      z[yi] -= 1.0;
      for (std::size_t c = 0; c < classes_; ++c) {
        double* gc = g.data() + c * d_;
        for (std::size_t j = 0; j < d_; ++j) gc[j] += z[c] * xi[j];
      }
    }
  }

  std::size_t n_, d_, classes_, batch_;
  double extra_sigma_;
  std::vector<double> x_;
  std::vector<int> y_;
};

}  // namespace

std::unique_ptr<Problem> make_logistic(const LogisticOptions& o) {
  return std::make_unique<Logistic>(o);
}

std::unique_ptr<Problem> make_logistic(std::size_t dim, std::size_t n_samples, std::uint64_t seed) {
  LogisticOptions o;
  o.dim = dim;
  o.samples = n_samples;
  o.seed = seed;
  return make_logistic(o);
}

}  // namespace imuon
