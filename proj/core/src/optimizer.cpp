#include "imuon/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "imuon/errors.hpp"

namespace imuon {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

struct BlockPlan {
  const StepPolicy* step;
  const BlockOracle* oracle;
};

void check_delta(double delta) {
  if (!(delta >= 0.0 && delta < 1.0)) {
    throw InvalidInexactness("inexactness " + std::to_string(delta) + " outside [0, 1)");
  }
}

LmoResult direction_for(const Tensor& v, NormKind norm, const BlockOracle& oracle, bool measure) {
  return std::visit(
      overloaded{[&](const ExactOracle&) {
                   LmoResult r = lmo_exact(v, norm);
                   if (measure) r.measured_delta = 0.0;
                   return r;
                 },
                 [&](const PolarScheme& scheme) {
                   if (norm != NormKind::Spectral) {
                     throw ValidationError("polar schemes need a spectral-norm block");
                   }
                   LmoResult r = lmo_spectral_approx(v, scheme);
                   if (measure) measure_delta(v, r, norm);
                   return r;
                 }},
      oracle);
}

// The spectral LMO rejects a small spectral norm; nuclear <= rank * spectral bounds when that can happen.
bool degenerate_block(const Tensor& g, NormKind n, double dual) {
  if (dual < kDegenerateThreshold) return true;
  if (n != NormKind::Spectral) return false;
  const double rank = static_cast<double>(std::min(g.rows(), g.cols()));
  return dual < rank * kDegenerateThreshold && spectral_norm(g) < kDegenerateThreshold;
}

// Shared update x_i <- x_i + gamma_i d_i, driven by `drive` (gradient or momentum).
StepOutcome update_core(const OptimizerState& s, const Problem& p, const Params& drive,
                        const std::vector<BlockPlan>& plans, std::size_t measure_every,
                        TraceRecord rec) {
  const auto& blocks = p.blocks();
  const std::size_t nb = blocks.size();

  std::vector<double> duals(nb);
  std::vector<bool> skip(nb);
  double total = 0.0;
  for (std::size_t i = 0; i < nb; ++i) {
    duals[i] = dual_norm(drive[i], blocks[i].norm);
    total += duals[i];
    skip[i] = degenerate_block(drive[i], blocks[i].norm, duals[i]);
  }
  rec.step = s.step;
  if (total < kDegenerateThreshold || std::all_of(skip.begin(), skip.end(), [](bool b) { return b; })) {
    rec.status = RunStatus::Converged;
    rec.gamma_k = 0.0;
    return {s, std::move(rec)};
  }

  const bool measure = measure_every > 0 && s.step % measure_every == 0;
  std::optional<std::vector<double>> local_L;
  bool local_L_tried = false;
  auto block_L = [&](std::size_t i) -> double {
    if (!local_L_tried) {
      local_L = p.block_smoothness(s.params);
      local_L_tried = true;
    }
    if (!local_L) throw MissingCertificate(p.name() + ": no smoothness constant for adaptive step");
    return (*local_L)[i];
  };

  OptimizerState next = s;
  next.last_delta.resize(nb);
  rec.blocks.clear();
  rec.oracle_matmuls = 0;
  rec.gamma_k = 0.0;
  rec.delta_used = 0.0;
  rec.delta_measured.reset();

  for (std::size_t i = 0; i < nb; ++i) {
    BlockMetrics bm;
    bm.name = blocks[i].name;
    bm.grad_dual = duals[i];
    if (skip[i]) {
      rec.blocks.push_back(std::move(bm));
      continue;
    }
    LmoResult r = direction_for(drive[i], blocks[i].norm, *plans[i].oracle, measure);
    double delta = 0.0;
    if (r.measured_delta) {
      delta = *r.measured_delta;
      next.last_delta[i] = delta;
    } else if (i < s.last_delta.size() && s.last_delta[i]) {
      delta = *s.last_delta[i];
    } else if (r.declared_delta) {
      delta = *r.declared_delta;
    }

    const double gamma = std::visit(
        overloaded{[&](const ConstantStep& c) { return c.gamma; },
                   [&](const AdaptiveSmoothStep& a) {
                     bm.L = a.L ? *a.L : block_L(i);
                     return adaptive_step_size(duals[i], bm.L, delta);
                   },
                   [&](const AdaptiveGeneralizedStep& a) {
                     const auto gs = p.generalized_smoothness();
                     if ((!a.L0 || !a.L1) && !gs) {
                       throw MissingCertificate(p.name() + ": no (L0, L1) certificate");
                     }
                     const double L0 = a.L0 ? *a.L0 : gs->L0;
                     const double L1 = a.L1 ? *a.L1 : gs->L1;
                     bm.L = L0 + L1 * duals[i];
                     return glsmooth_step_size(duals[i], L0, L1, delta);
                   },
                   [&](const TimeVaryingStep& t) { return time_varying_gamma(t.gamma0, s.step); }},
        *plans[i].step);

    next.params[i] = lincomb(1.0, s.params[i], gamma, r.direction);

    bm.delta_measured = r.measured_delta;
    bm.delta_used = delta;
    bm.gamma = gamma;
    bm.oracle_matmuls = r.oracle_matmuls;
    bm.ill_conditioned = r.ill_conditioned;

    rec.oracle_matmuls += r.oracle_matmuls;
    rec.gamma_k = std::max(rec.gamma_k, gamma);
    rec.delta_used = std::max(rec.delta_used, delta);
    if (r.measured_delta) {
      rec.delta_measured = std::max(rec.delta_measured.value_or(0.0), *r.measured_delta);
    }
    rec.blocks.push_back(std::move(bm));
  }
  next.step = s.step + 1;
  rec.status = RunStatus::Ok;
  return {std::move(next), std::move(rec)};
}

StepOutcome deterministic_core(const OptimizerState& s, const Problem& p,
                               const std::vector<BlockPlan>& plans, std::size_t measure_every) {
  auto [f, g] = p.evaluate(s.params);
  TraceRecord rec;
  rec.loss = f;
  rec.grad_dual_norm = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) rec.grad_dual_norm += dual_norm(g[i], p.blocks()[i].norm);
  return update_core(s, p, g, plans, measure_every, std::move(rec));
}

}  // namespace

const BlockOracle& OracleSpec::for_block(const std::string& name) const {
  const auto it = per_block.find(name);
  return it == per_block.end() ? default_oracle : it->second;
}

OptimizerState initial_state(const Problem& p, std::uint64_t seed) {
  OptimizerState s;
  s.params = p.initial_point();
  s.seed = seed;
  s.last_delta.assign(s.params.size(), std::nullopt);
  return s;
}

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Ok: return "ok";
    case RunStatus::Converged: return "converged";
    case RunStatus::Diverged: return "diverged";
  }
  return "unknown";
}

RunStatus run_status_from_string(std::string_view s) {
  if (s == "ok") return RunStatus::Ok;
  if (s == "converged") return RunStatus::Converged;
  if (s == "diverged") return RunStatus::Diverged;
  throw ParseError(0, "unknown status '" + std::string(s) + "'");
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Deterministic: return "deterministic";
    case Variant::Stochastic: return "stochastic";
    case Variant::Layerwise: return "layerwise";
  }
  return "unknown";
}

Variant variant_from_string(std::string_view s) {
  if (s == "deterministic") return Variant::Deterministic;
  if (s == "stochastic") return Variant::Stochastic;
  if (s == "layerwise") return Variant::Layerwise;
  throw ConfigError("unknown optimizer variant '" + std::string(s) + "'");
}

Tensor momentum_update(const Tensor& m, const Tensor& g, double alpha) {
  require_same_shape(m, g, "momentum_update");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("momentum alpha must lie in (0, 1]");
  if (alpha == 1.0) return g;
  return lincomb(1.0 - alpha, m, alpha, g);
}

double adaptive_step_size(double grad_dual, double L, double delta) {
  check_delta(delta);
  if (!(L > 0.0)) throw ValidationError("smoothness constant must be positive");
  return grad_dual * (1.0 - delta) / (L * (1.0 + delta) * (1.0 + delta));
}

double glsmooth_step_size(double grad_dual, double L0, double L1, double delta) {
  check_delta(delta);
  if (!(L0 >= 0.0 && L1 >= 0.0) || (L0 == 0.0 && L1 == 0.0)) {
    throw ValidationError("need L0, L1 >= 0, not both zero");
  }
  return grad_dual * (1.0 - delta) / ((L0 + L1 * grad_dual) * (1.0 + delta) * (1.0 + delta));
}

double time_varying_gamma(double gamma0, std::size_t k) {
  return gamma0 / std::pow(static_cast<double>(k + 1), TimeVaryingStep::exponent);
}

double time_varying_alpha(double alpha0, std::size_t k) {
  return alpha0 / std::pow(static_cast<double>(k + 1), TimeVaryingMomentum::exponent);
}

StepOutcome step_deterministic(const OptimizerState& s, const Problem& p, const StepPolicy& policy,
                               const OracleSpec& oracle) {
  p.check_params(s.params);
  std::vector<BlockPlan> plans;
  for (const auto& b : p.blocks()) plans.push_back({&policy, &oracle.for_block(b.name)});
  return deterministic_core(s, p, plans, oracle.measure_delta_every);
}

StepOutcome step_layerwise(const OptimizerState& s, const Problem& p,
                           const std::map<std::string, BlockPolicy>& per_block,
                           std::size_t measure_delta_every) {
  p.check_params(s.params);
  std::vector<BlockPlan> plans;
  for (const auto& b : p.blocks()) {
    const auto it = per_block.find(b.name);
    if (it == per_block.end()) throw MissingBlockPolicy("no policy for block '" + b.name + "'");
    plans.push_back({&it->second.step, &it->second.oracle});
  }
  return deterministic_core(s, p, plans, measure_delta_every);
}

StepOutcome step_stochastic(const OptimizerState& s, const Problem& p, const StepPolicy& step,
                            const MomentumPolicy& mom, const OracleSpec& oracle,
                            const StochasticOptions& opts) {
  p.check_params(s.params);
  const Params g = p.stochastic_gradient(s.params, s.seed, s.step);

  const std::optional<double> alpha = std::visit(
      overloaded{[](const NoMomentum&) -> std::optional<double> { return std::nullopt; },
                 [](const ConstantMomentum& c) -> std::optional<double> { return c.alpha; },
                 [&](const TimeVaryingMomentum& t) -> std::optional<double> {
                   return time_varying_alpha(t.alpha0, s.step);
                 }},
      mom);

  Params m;
  if (alpha) {
    m.reserve(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Tensor prev = s.momentum ? (*s.momentum)[i]
                                     : (opts.init == MomentumInit::FirstGradient
                                            ? g[i]
                                            : Tensor(g[i].rows(), g[i].cols()));
      m.push_back(momentum_update(prev, g[i], *alpha));
    }
  } else {
    m = g;
  }

  TraceRecord rec;
  rec.alpha_k = alpha;
  if (opts.evaluate_metrics) {
    auto [f, grad] = p.evaluate(s.params);
    rec.loss = f;
    double gd = 0.0, err = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) {
      gd += dual_norm(grad[i], p.blocks()[i].norm);
      err += dual_norm(m[i] - grad[i], p.blocks()[i].norm);
    }
    rec.grad_dual_norm = gd;
    rec.momentum_err_dual = err;
  } else {
    rec.loss = kNaN;
    rec.grad_dual_norm = kNaN;
  }

  std::vector<BlockPlan> plans;
  for (const auto& b : p.blocks()) plans.push_back({&step, &oracle.for_block(b.name)});
  StepOutcome out = update_core(s, p, m, plans, oracle.measure_delta_every, std::move(rec));
  if (alpha && out.record.status == RunStatus::Ok) out.state.momentum = std::move(m);
  return out;
}

RunResult run(const OptimizerConfig& config, const Problem& problem, std::size_t K) {
  if (K < 1) throw ValidationError("iteration budget K must be at least 1");
  RunResult res;
  OptimizerState state = initial_state(problem, config.seed);

  std::map<std::string, BlockPolicy> layer;
  if (config.variant == Variant::Layerwise) {
    for (const auto& b : problem.blocks()) {
      const auto it = config.block_steps.find(b.name);
      layer.emplace(b.name, BlockPolicy{it == config.block_steps.end() ? config.step : it->second,
                                        config.oracle.for_block(b.name)});
    }
  }

  auto diverge = [&](const std::string& why) {
    TraceRecord rec;
    rec.step = state.step;
    rec.status = RunStatus::Diverged;
    rec.alpha_k = std::nullopt;
    rec.loss = kNaN;
    rec.grad_dual_norm = kNaN;
    try {
      rec.loss = problem.value(state.params);
    } catch (const Error&) {
    }
    res.records.push_back(std::move(rec));
    res.status = RunStatus::Diverged;
    res.message = why;
  };

  for (std::size_t k = 0; k < K; ++k) {
    StepOutcome out;
    try {
      switch (config.variant) {
        case Variant::Deterministic:
          out = step_deterministic(state, problem, config.step, config.oracle);
          break;
        case Variant::Layerwise:
          out = step_layerwise(state, problem, layer, config.oracle.measure_delta_every);
          break;
        case Variant::Stochastic: {
          StochasticOptions opts;
          opts.init = config.momentum_init;
          const std::size_t every = std::max<std::size_t>(config.eval_every, 1);
          opts.evaluate_metrics = k % every == 0 || k + 1 == K;
          out = step_stochastic(state, problem, config.step, config.momentum, config.oracle, opts);
          break;
        }
      }
    } catch (const SchemeDiverged& e) {
      diverge(e.what());
      break;
    } catch (const NonFiniteValue& e) {
      diverge(e.what());
      break;
    } catch (const InvalidInexactness& e) {
      diverge(e.what());
      break;
    }
    const bool bad_loss = !std::isnan(out.record.loss) && !std::isfinite(out.record.loss);
    if (bad_loss) {
      diverge("loss is not finite");
      break;
    }
    res.records.push_back(out.record);
    if (out.record.status == RunStatus::Converged) {
      res.status = RunStatus::Converged;
      break;
    }
    state = std::move(out.state);
  }

  res.final_params = state.params;
  if (res.status != RunStatus::Diverged) {
    try {
      res.final_loss = problem.value(state.params);
    } catch (const NonFiniteValue&) {
      res.final_loss = kNaN;
    }
    if (!std::isfinite(res.final_loss)) {
      res.status = RunStatus::Diverged;
      res.message = "final loss is not finite";
    }
  } else {
    res.final_loss = kNaN;
  }
  return res;
}

}  // namespace imuon
