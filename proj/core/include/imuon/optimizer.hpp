#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "imuon/lmo.hpp"
#include "imuon/polar.hpp"
#include "imuon/problems.hpp"

namespace imuon {

struct ConstantStep {
  double gamma = 0.01;
};
// gamma = ||g||_* (1 - delta) / (L (1 + delta)^2); L defaults to the problem's certificate.
struct AdaptiveSmoothStep {
  std::optional<double> L;
};
// gamma = ||g||_* (1 - delta) / ((L0 + L1 ||g||_*) (1 + delta)^2)
struct AdaptiveGeneralizedStep {
  std::optional<double> L0;
  std::optional<double> L1;
};
// gamma_k = gamma0 / (k + 1)^(3/4)
struct TimeVaryingStep {
  double gamma0 = 0.01;
  static constexpr double exponent = 0.75;
};
using StepPolicy = std::variant<ConstantStep, AdaptiveSmoothStep, AdaptiveGeneralizedStep, TimeVaryingStep>;

struct NoMomentum {};
struct ConstantMomentum {
  double alpha = 0.1;
};
// alpha_k = alpha0 / (k + 1)^(1/2)
struct TimeVaryingMomentum {
  double alpha0 = 0.1;
  static constexpr double exponent = 0.5;
};
using MomentumPolicy = std::variant<NoMomentum, ConstantMomentum, TimeVaryingMomentum>;

enum class MomentumInit { FirstGradient, Zero };

struct ExactOracle {
  bool operator==(const ExactOracle&) const = default;
};
using BlockOracle = std::variant<ExactOracle, PolarScheme>;

struct OracleSpec {
  BlockOracle default_oracle = ExactOracle{};
  std::map<std::string, BlockOracle> per_block;
  // measure delta every this many steps, 0 = never
  std::size_t measure_delta_every = 1;

  const BlockOracle& for_block(const std::string& name) const;
};

struct OptimizerState {
  Params params;
  std::optional<Params> momentum;
  std::size_t step = 0;
  std::uint64_t seed = 0;
  std::vector<std::optional<double>> last_delta;
};

OptimizerState initial_state(const Problem& p, std::uint64_t seed);

enum class RunStatus { Ok, Converged, Diverged };
std::string_view to_string(RunStatus s);
RunStatus run_status_from_string(std::string_view s);

struct BlockMetrics {
  std::string name;
  double grad_dual = 0.0;
  std::optional<double> delta_measured;
  double delta_used = 0.0;
  double gamma = 0.0;
  double L = 0.0;  // 0 when the policy needs none
  std::size_t oracle_matmuls = 0;
  bool ill_conditioned = false;
};

// Values are taken at x^k, before the update. Across blocks: grad_dual and
// matmuls are summed, delta and gamma are maxima. NaN marks a value that
// was not evaluated on this step.
struct TraceRecord {
  std::size_t step = 0;
  double loss = 0.0;
  double grad_dual_norm = 0.0;
  std::optional<double> momentum_err_dual;
  std::optional<double> delta_measured;
  double delta_used = 0.0;
  double gamma_k = 0.0;
  std::optional<double> alpha_k;
  std::size_t oracle_matmuls = 0;
  RunStatus status = RunStatus::Ok;
  std::vector<BlockMetrics> blocks;
};

// (1 - alpha) m + alpha g; alpha == 1 returns g unchanged.
Tensor momentum_update(const Tensor& m, const Tensor& g, double alpha);

double adaptive_step_size(double grad_dual, double L, double delta);
double glsmooth_step_size(double grad_dual, double L0, double L1, double delta);
double time_varying_gamma(double gamma0, std::size_t k);
double time_varying_alpha(double alpha0, std::size_t k);

struct StepOutcome {
  OptimizerState state;
  TraceRecord record;
};

StepOutcome step_deterministic(const OptimizerState& s, const Problem& p, const StepPolicy& policy,
                               const OracleSpec& oracle);

struct StochasticOptions {
  MomentumInit init = MomentumInit::FirstGradient;
  // compute loss, true gradient and momentum error on this step
  bool evaluate_metrics = true;
};

StepOutcome step_stochastic(const OptimizerState& s, const Problem& p, const StepPolicy& step,
                            const MomentumPolicy& mom, const OracleSpec& oracle,
                            const StochasticOptions& opts = {});

struct BlockPolicy {
  StepPolicy step;
  BlockOracle oracle;
};

StepOutcome step_layerwise(const OptimizerState& s, const Problem& p,
                           const std::map<std::string, BlockPolicy>& per_block,
                           std::size_t measure_delta_every = 1);

enum class Variant { Deterministic, Stochastic, Layerwise };
std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view s);

struct OptimizerConfig {
  Variant variant = Variant::Deterministic;
  StepPolicy step = ConstantStep{};
  MomentumPolicy momentum = NoMomentum{};
  OracleSpec oracle;
  // layer-wise overrides; blocks without an entry use `step` and the oracle spec
  std::map<std::string, StepPolicy> block_steps;
  MomentumInit momentum_init = MomentumInit::FirstGradient;
  std::uint64_t seed = 0;
  // stochastic runs: evaluate loss and true gradient every n steps (and the last)
  std::size_t eval_every = 1;
};

struct RunResult {
  std::vector<TraceRecord> records;
  RunStatus status = RunStatus::Ok;
  std::string message;
  Params final_params;
  double final_loss = 0.0;
};

RunResult run(const OptimizerConfig& config, const Problem& problem, std::size_t K);

}  // namespace imuon
