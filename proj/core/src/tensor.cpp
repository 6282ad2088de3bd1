#include "imuon/tensor.hpp"

#include <cmath>
#include <string>

#include "imuon/errors.hpp"

namespace imuon {

namespace {

void check_finite(const std::vector<double>& d) {
  for (double x : d) {
    if (!std::isfinite(x)) throw NonFiniteValue("tensor entry is not finite");
  }
}

}  // namespace

Tensor::Tensor(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeMismatch("data length " + std::to_string(data_.size()) + " does not match " +
                        std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  check_finite(data_);
}

Tensor Tensor::identity(std::size_t n) {
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 1.0;
  return Tensor(n, n, std::move(d));
}

Tensor Tensor::diag(std::initializer_list<double> d) {
  std::vector<double> v(d);
  return diag(v, v.size(), v.size());
}

Tensor Tensor::diag(const std::vector<double>& d, std::size_t rows, std::size_t cols) {
  std::vector<double> out(rows * cols, 0.0);
  for (std::size_t i = 0; i < d.size() && i < rows && i < cols; ++i) out[i * cols + i] = d[i];
  return Tensor(rows, cols, std::move(out));
}

Tensor Tensor::vector(std::initializer_list<double> v) { return vector(std::vector<double>(v)); }

Tensor Tensor::vector(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor(n, 1, std::move(v));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> d;
  d.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeMismatch("ragged matrix literal");
    d.insert(d.end(), row.begin(), row.end());
  }
  return Tensor(r, c, std::move(d));
}

Tensor Tensor::transpose() const {
  std::vector<double> d(data_.size());
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) d[j * rows_ + i] = data_[i * cols_ + j];
  return Tensor(cols_, rows_, std::move(d));
}

Tensor Tensor::scaled(double s) const {
  std::vector<double> d(data_);
  for (double& x : d) x *= s;
  return Tensor(rows_, cols_, std::move(d));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* where) {
  if (!a.same_shape(b)) {
    throw ShapeMismatch(std::string(where) + ": " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()));
  }
}

Tensor lincomb(double alpha, const Tensor& a, double beta, const Tensor& b) {
  require_same_shape(a, b, "lincomb");
  std::vector<double> d(a.size());
  const auto& x = a.data();
  const auto& y = b.data();
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = alpha * x[k] + beta * y[k];
  return Tensor(a.rows(), a.cols(), std::move(d));
}

Tensor operator+(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "operator+");
  std::vector<double> d(a.data());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] += b[k];
  return Tensor(a.rows(), a.cols(), std::move(d));
}

Tensor operator-(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "operator-");
  std::vector<double> d(a.data());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] -= b[k];
  return Tensor(a.rows(), a.cols(), std::move(d));
}

Tensor operator-(const Tensor& a) { return a.scaled(-1.0); }

Tensor operator*(double s, const Tensor& a) { return a.scaled(s); }

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw ShapeMismatch("matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                        std::to_string(b.rows()));
  }
  const std::size_t m = a.rows(), n = b.cols(), k = a.cols();
  std::vector<double> c(m * n, 0.0);
  const auto& A = a.data();
  const auto& B = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      if (aip == 0.0) continue;
      const double* bp = B.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
  return Tensor(m, n, std::move(c));
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) {
    throw ShapeMismatch("matmul_tn: row counts " + std::to_string(a.rows()) + " and " +
                        std::to_string(b.rows()));
  }
  const std::size_t m = a.cols(), n = b.cols(), k = a.rows();
  std::vector<double> c(m * n, 0.0);
  const auto& A = a.data();
  const auto& B = b.data();
  for (std::size_t p = 0; p < k; ++p) {
    const double* ap = A.data() + p * m;
    const double* bp = B.data() + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double api = ap[i];
      if (api == 0.0) continue;
      double* ci = c.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += api * bp[j];
    }
  }
  return Tensor(m, n, std::move(c));
}

Tensor gram(const Tensor& a) { return matmul_tn(a, a); }

double dot(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "dot");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double frobenius(const Tensor& a) {
  // scaled accumulation so tiny and huge entries do not under/overflow
  double scale = 0.0, ssq = 1.0;
  for (double x : a.data()) {
    if (x == 0.0) continue;
    const double ax = std::abs(x);
    if (scale < ax) {
      ssq = 1.0 + ssq * (scale / ax) * (scale / ax);
      scale = ax;
    } else {
      ssq += (ax / scale) * (ax / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

double max_abs(const Tensor& a) {
  double m = 0.0;
  for (double x : a.data()) m = std::max(m, std::abs(x));
  return m;
}

double l1(const Tensor& a) {
  double s = 0.0;
  for (double x : a.data()) s += std::abs(x);
  return s;
}

}  // namespace imuon
