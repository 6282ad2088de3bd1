#include "imuon/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace imuon {

namespace {

constexpr std::size_t kMaxSweeps = 60;

// Columns stored contiguously; rotations touch two columns at a time.
using Columns = std::vector<std::vector<double>>;

Columns to_columns(const Tensor& a) {
  Columns c(a.cols(), std::vector<double>(a.rows()));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c[j][i] = a(i, j);
  return c;
}

double col_dot(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

void rotate(std::vector<double>& x, std::vector<double>& y, double c, double s) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i], yi = y[i];
    x[i] = c * xi - s * yi;
    y[i] = s * xi + c * yi;
  }
}

// Tall case, rows >= cols.
Svd jacobi_tall(const Tensor& a) {
  const std::size_t m = a.rows(), n = a.cols();
  Columns u = to_columns(a);
  Columns v(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) v[j][j] = 1.0;

  const double tol = std::sqrt(static_cast<double>(m)) * std::numeric_limits<double>::epsilon();
  std::size_t sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = col_dot(u[p], u[p]);
        const double beta = col_dot(u[q], u[q]);
        const double gamma = col_dot(u[p], u[q]);
        if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        rotate(u[p], u[q], c, s);
        rotate(v[p], v[q], c, s);
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sv(n);
  for (std::size_t j = 0; j < n; ++j) sv[j] = std::sqrt(col_dot(u[j], u[j]));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sv[x] > sv[y]; });

  const double smax = n ? sv[order[0]] : 0.0;
  const double cutoff =
      static_cast<double>(std::max(m, n)) * std::numeric_limits<double>::epsilon() * smax;

  std::vector<double> ud(m * n, 0.0), vd(n * n, 0.0), s(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    s[k] = sv[j];
    for (std::size_t i = 0; i < n; ++i) vd[i * n + k] = v[j][i];
    if (sv[j] > cutoff && sv[j] > 0.0) {
      for (std::size_t i = 0; i < m; ++i) ud[i * n + k] = u[j][i] / sv[j];
    }
  }
  Svd out{Tensor(m, n, std::move(ud)), std::move(s), Tensor(n, n, std::move(vd)), sweep};
  return out;
}

}  // namespace

Svd jacobi_svd(const Tensor& a) {
  if (a.rows() >= a.cols()) return jacobi_tall(a);
  Svd t = jacobi_tall(a.transpose());
  return Svd{std::move(t.v), std::move(t.s), std::move(t.u), t.sweeps};
}

Tensor polar_factor(const Tensor& a) {
  const Svd d = jacobi_svd(a);
  // zero columns of U already drop the null directions
  const std::size_t m = a.rows(), n = a.cols(), k = d.s.size();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t r = 0; r < k; ++r) {
      const double uir = d.u(i, r);
      if (uir == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += uir * d.v(j, r);
    }
  return Tensor(m, n, std::move(out));
}

std::vector<double> singular_values(const Tensor& a) { return jacobi_svd(a).s; }

}  // namespace imuon
