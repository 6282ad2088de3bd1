#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace imuon {

// Dense row-major matrix of doubles. Vectors are rows x 1.
// Every constructed value is checked for NaN/Inf.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols);
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Tensor zeros(std::size_t rows, std::size_t cols) { return Tensor(rows, cols); }
  static Tensor identity(std::size_t n);
  static Tensor diag(std::initializer_list<double> d);
  static Tensor diag(const std::vector<double>& d, std::size_t rows, std::size_t cols);
  static Tensor vector(std::initializer_list<double> v);
  static Tensor vector(std::vector<double> v);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_vector() const noexcept { return cols_ == 1; }
  bool same_shape(const Tensor& o) const noexcept { return rows_ == o.rows_ && cols_ == o.cols_; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double operator[](std::size_t k) const { return data_[k]; }
  const std::vector<double>& data() const noexcept { return data_; }

  Tensor transpose() const;
  Tensor scaled(double s) const;

  bool operator==(const Tensor& o) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a);
Tensor operator*(double s, const Tensor& a);

// alpha*a + beta*b
Tensor lincomb(double alpha, const Tensor& a, double beta, const Tensor& b);

Tensor matmul(const Tensor& a, const Tensor& b);
// a^T b without materializing the transpose
Tensor matmul_tn(const Tensor& a, const Tensor& b);
// a^T a
Tensor gram(const Tensor& a);

double dot(const Tensor& a, const Tensor& b);
double frobenius(const Tensor& a);
double max_abs(const Tensor& a);
double l1(const Tensor& a);

void require_same_shape(const Tensor& a, const Tensor& b, const char* where);

}  // namespace imuon
