#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "imuon/optimizer.hpp"
#include "imuon/problems.hpp"

namespace imuon {

// Deterministic method, arbitrary step and inexactness sequences:
// (D0 + L/2 sum g_k^2 (1+d_k)^2) / sum g_k (1-d_k), bounds min_k ||grad f(x^k)||_*.
double bound_det_general(const std::vector<double>& gammas, const std::vector<double>& deltas,
                         double L, double delta0);

// Constant gamma and delta: D0/(K g (1-d)) + L g (1+d)^2 / (2 (1-d)).
double bound_det_constant(double delta0, std::size_t K, double gamma, double L, double delta);

struct DetOptimum {
  double gamma = 0.0;
  double rate = 0.0;
};

// gamma* = sqrt(2 D0 / (K L)) / (1+d), rate = (1+d)/(1-d) sqrt(2 D0 L / K)
DetOptimum optimal_gamma_det(double delta0, double K, double L, double delta);

struct StochasticOptimum {
  double gamma = 0.0;
  double alpha = 0.0;
  double alpha_unclamped = 0.0;
  bool alpha_clamped = false;
  // 2^(9/4) D0^(1/4) s^(1/2) (L (1+d))^(1/4) / (K^(1/4) (1-d)), s the noise scale used
  double rate_dominant = 0.0;
  // remaining two terms of the bound at these parameters (rho sigma form only)
  double rate_higher_order = 0.0;
};

struct StochasticParams {
  // gamma* = (D0/K)^(3/4) (s^2 L (1+d))^(-1/4), alpha* = sqrt(D0 L (1+d) / (K s^2)), s = sigma
  StochasticOptimum primary;
  // derivation form with s = rho sigma:
  // alpha* = sqrt(2 D0 L (1+d)) / (sqrt(K) rho sigma)
  // gamma* = D0^(3/4) / (2^(1/4) K^(3/4) L^(1/4) (rho sigma)^(1/2) (1+d)^(1/4))
  StochasticOptimum rho_sigma;
};

StochasticParams optimal_params_stochastic(double delta0, double K, double L, double sigma,
                                           double rho, double delta);

// (1/(1-d)) [D0/(K g) + 2 rho sigma (1/(a K) + sqrt(a)) + L g ((7+3d)/2 + 2(1+d)/a)]
double bound_stochastic(double delta0, double K, double gamma, double alpha, double L, double sigma,
                        double rho, double delta);

// min_k ||grad f(x^k)||_*^2 <= 2 L D0 / sum (1-d_k)^2/(1+d_k)^2
double adaptive_bound_det(const std::vector<double>& deltas, double L, double delta0);
// constant-delta form after the square root: (1+d)/(1-d) sqrt(2 L D0 / K)
double adaptive_rate_constant(double delta, double L, double delta0, double K);

// guaranteed decrease of one adaptive step: g^2 (1-d)^2 / (2 L (1+d)^2)
double adaptive_descent(double grad_dual, double L, double delta);

// ceil(2 D0 (1+d)^2/(1-d)^2 (L0/eps^2 + L1/eps))
std::uint64_t complexity_glsmooth(double delta0, double L0, double L1, double eps, double delta);

struct LayerwiseComplexity {
  std::uint64_t iterations = 0;
  std::size_t bottleneck = 0;
  double factor = 1.0;
};

// ceil(2 D0 / eps^2 * max_j (1+d_j)^2/(1-d_j)^2)
LayerwiseComplexity complexity_layerwise(double delta0, double eps, const std::vector<double>& deltas);

// Unrolled momentum-error bound after k+1 steps with constant parameters:
// (1-a)^(k+1) rho sigma + rho sigma sqrt(a)/sqrt(2-a) + L g (1+d)/a
double momentum_error_bound(std::size_t k, double rho, double sigma, double alpha, double L,
                            double gamma, double delta);
double momentum_error_steady_state(double rho, double sigma, double alpha, double L, double gamma,
                                   double delta);

struct BoundReport {
  std::string name;
  double theoretical = 0.0;
  double empirical = 0.0;
  bool satisfied = true;
  double margin = 0.0;
  bool advisory = false;
  std::string note;
};

// satisfied <=> empirical <= theoretical + 1e-9 max(1, |theoretical|)
BoundReport make_report(std::string name, double theoretical, double empirical, bool advisory,
                        std::string note = {});

// Checks the deterministic and adaptive descent inequalities on a trace. `final_loss` is f at
// the point after the last record; without it the last step is not checked.
std::vector<BoundReport> verify_bounds(const std::vector<TraceRecord>& trace, const Problem& problem,
                                       const OptimizerConfig& config,
                                       std::optional<double> final_loss = std::nullopt);

}  // namespace imuon
