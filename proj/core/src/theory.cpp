#include "imuon/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "imuon/errors.hpp"

namespace imuon {

namespace {

constexpr double kTol = 1e-9;

void check_delta(double d) {
  if (!(d >= 0.0 && d < 1.0)) {
    throw InvalidInexactness("inexactness " + std::to_string(d) + " outside [0, 1)");
  }
}

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string(what) + " must be positive");
}

// ceil that ignores round-off just above an integer
std::uint64_t safe_ceil(double v) {
  const double r = std::round(v);
  if (std::abs(v - r) <= 1e-12 * std::max(1.0, std::abs(v))) return static_cast<std::uint64_t>(r);
  return static_cast<std::uint64_t>(std::ceil(v));
}

double ratio_sq(double d) { return ((1.0 + d) / (1.0 - d)) * ((1.0 + d) / (1.0 - d)); }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double record_delta(const TraceRecord& r) {
  return r.delta_measured ? *r.delta_measured : r.delta_used;
}

struct StepPair {
  const TraceRecord* rec;
  double f_next;
};

// Ok rows paired with the loss at the following iterate, when known.
std::vector<StepPair> step_pairs(const std::vector<TraceRecord>& trace, std::optional<double> final_loss) {
  std::vector<StepPair> out;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].status != RunStatus::Ok) continue;
    double next = std::numeric_limits<double>::quiet_NaN();
    if (i + 1 < trace.size()) {
      next = trace[i + 1].loss;
    } else if (final_loss) {
      next = *final_loss;
    }
    out.push_back({&trace[i], next});
  }
  return out;
}

// Worst step of f_next <= f - decrease(rec).
template <class Decrease>
std::optional<BoundReport> per_step_report(const std::string& name, const std::vector<StepPair>& pairs,
                                           Decrease decrease) {
  std::optional<BoundReport> worst;
  for (const auto& p : pairs) {
    if (std::isnan(p.f_next)) continue;
    const double allowed = p.rec->loss - decrease(*p.rec);
    BoundReport r = make_report(name, allowed, p.f_next, false, "step " + std::to_string(p.rec->step));
    if (!worst || r.margin < worst->margin) worst = r;
  }
  return worst;
}

}  // namespace

double bound_det_general(const std::vector<double>& gammas, const std::vector<double>& deltas,
                         double L, double delta0) {
  if (gammas.empty() || gammas.size() != deltas.size()) {
    throw ValidationError("gamma and delta sequences must be nonempty and of equal length");
  }
  double num = delta0, den = 0.0;
  for (std::size_t k = 0; k < gammas.size(); ++k) {
    check_delta(deltas[k]);
    const double g = gammas[k], d = deltas[k];
    num += 0.5 * L * g * g * (1.0 + d) * (1.0 + d);
    den += g * (1.0 - d);
  }
  if (!(den > 0.0)) throw ValidationError("sum of gamma_k (1 - delta_k) must be positive");
  return num / den;
}

double bound_det_constant(double delta0, std::size_t K, double gamma, double L, double delta) {
  check_delta(delta);
  check_positive(gamma, "gamma");
  const double k = static_cast<double>(K);
  return delta0 / (k * gamma * (1.0 - delta)) +
         L * gamma * (1.0 + delta) * (1.0 + delta) / (2.0 * (1.0 - delta));
}

DetOptimum optimal_gamma_det(double delta0, double K, double L, double delta) {
  check_delta(delta);
  check_positive(delta0, "delta0");
  check_positive(K, "K");
  check_positive(L, "L");
  return {std::sqrt(2.0 * delta0 / (K * L)) / (1.0 + delta),
          (1.0 + delta) / (1.0 - delta) * std::sqrt(2.0 * delta0 * L / K)};
}

StochasticParams optimal_params_stochastic(double delta0, double K, double L, double sigma,
                                           double rho, double delta) {
  check_delta(delta);
  check_positive(delta0, "delta0");
  check_positive(K, "K");
  check_positive(L, "L");
  check_positive(sigma, "sigma");
  check_positive(rho, "rho");

  const double one_d = 1.0 + delta;
  auto dominant = [&](double s) {
    return std::pow(2.0, 2.25) * std::pow(delta0, 0.25) * std::sqrt(s) * std::pow(L * one_d, 0.25) /
           (std::pow(K, 0.25) * (1.0 - delta));
  };
  auto clamp = [](StochasticOptimum& o) {
    o.alpha_unclamped = o.alpha;
    if (o.alpha > 1.0) {
      o.alpha = 1.0;
      o.alpha_clamped = true;
    }
  };

  StochasticParams out;
  StochasticOptimum& m = out.primary;
  m.gamma = std::pow(delta0 / K, 0.75) * std::pow(sigma * sigma * L * one_d, -0.25);
  m.alpha = std::sqrt(delta0 * L * one_d / (K * sigma * sigma));
  m.rate_dominant = dominant(sigma);
  clamp(m);

  const double rs = rho * sigma;
  StochasticOptimum& a = out.rho_sigma;
  a.alpha = std::sqrt(2.0 * delta0 * L * one_d) / (std::sqrt(K) * rs);
  a.gamma = std::pow(delta0, 0.75) /
            (std::pow(2.0, 0.25) * std::pow(K, 0.75) * std::pow(L, 0.25) * std::sqrt(rs) * std::pow(one_d, 0.25));
  a.rate_dominant = dominant(rs);
  a.rate_higher_order =
      std::sqrt(2.0) * rs * rs / (std::sqrt(K) * (1.0 - delta) * std::sqrt(delta0 * L * one_d)) +
      (7.0 + 3.0 * delta) * std::pow(L, 0.75) * std::pow(delta0, 0.75) * std::pow(one_d, 0.75) /
          (std::pow(2.0, 1.25) * std::pow(K, 0.75) * (1.0 - delta) * std::sqrt(rs));
  clamp(a);
  return out;
}

double bound_stochastic(double delta0, double K, double gamma, double alpha, double L, double sigma,
                        double rho, double delta) {
  check_delta(delta);
  check_positive(K, "K");
  check_positive(gamma, "gamma");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in (0, 1]");
  return (delta0 / (K * gamma) + 2.0 * rho * sigma * (1.0 / (alpha * K) + std::sqrt(alpha)) +
          L * gamma * ((7.0 + 3.0 * delta) / 2.0 + 2.0 * (1.0 + delta) / alpha)) /
         (1.0 - delta);
}

double adaptive_bound_det(const std::vector<double>& deltas, double L, double delta0) {
  if (deltas.empty()) throw ValidationError("delta sequence must be nonempty");
  double w = 0.0;
  for (double d : deltas) {
    check_delta(d);
    w += 1.0 / ratio_sq(d);
  }
  return 2.0 * L * delta0 / w;
}

double adaptive_rate_constant(double delta, double L, double delta0, double K) {
  check_delta(delta);
  check_positive(K, "K");
  return (1.0 + delta) / (1.0 - delta) * std::sqrt(2.0 * L * delta0 / K);
}

double adaptive_descent(double grad_dual, double L, double delta) {
  check_delta(delta);
  return grad_dual * grad_dual / (2.0 * L * ratio_sq(delta));
}

std::uint64_t complexity_glsmooth(double delta0, double L0, double L1, double eps, double delta) {
  check_delta(delta);
  check_positive(eps, "eps");
  return safe_ceil(2.0 * delta0 * ratio_sq(delta) * (L0 / (eps * eps) + L1 / eps));
}

LayerwiseComplexity complexity_layerwise(double delta0, double eps, const std::vector<double>& deltas) {
  if (deltas.empty()) throw ValidationError("need at least one layer");
  check_positive(eps, "eps");
  LayerwiseComplexity out;
  out.factor = -1.0;
  for (std::size_t j = 0; j < deltas.size(); ++j) {
    check_delta(deltas[j]);
    const double f = ratio_sq(deltas[j]);
    if (f > out.factor) {
      out.factor = f;
      out.bottleneck = j;
    }
  }
  out.iterations = safe_ceil(2.0 * delta0 / (eps * eps) * out.factor);
  return out;
}

double momentum_error_bound(std::size_t k, double rho, double sigma, double alpha, double L,
                            double gamma, double delta) {
  return std::pow(1.0 - alpha, static_cast<double>(k + 1)) * rho * sigma +
         momentum_error_steady_state(rho, sigma, alpha, L, gamma, delta);
}

double momentum_error_steady_state(double rho, double sigma, double alpha, double L, double gamma,
                                   double delta) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in (0, 1]");
  return rho * sigma * std::sqrt(alpha) / std::sqrt(2.0 - alpha) + L * gamma * (1.0 + delta) / alpha;
}

BoundReport make_report(std::string name, double theoretical, double empirical, bool advisory,
                        std::string note) {
  BoundReport r;
  r.name = std::move(name);
  r.theoretical = theoretical;
  r.empirical = empirical;
  r.margin = theoretical - empirical;
  r.satisfied = empirical <= theoretical + kTol * std::max(1.0, std::abs(theoretical));
  r.advisory = advisory;
  r.note = std::move(note);
  return r;
}

std::vector<BoundReport> verify_bounds(const std::vector<TraceRecord>& trace, const Problem& problem,
                                       const OptimizerConfig& config, std::optional<double> final_loss) {
  std::vector<BoundReport> out;
  if (trace.empty()) return out;
  const auto pairs = step_pairs(trace, final_loss);
  if (pairs.empty()) return out;
  const double delta0 = trace.front().loss - problem.f_star();
  const auto& blocks = problem.blocks();

  if (config.variant == Variant::Stochastic) {
    const auto L = problem.smoothness();
    const auto* cg = std::get_if<ConstantStep>(&config.step);
    const auto* cm = std::get_if<ConstantMomentum>(&config.momentum);
    if (!L || blocks.size() != 1) {
      throw MissingCertificate(problem.name() + ": stochastic bounds need a single block with certified L");
    }
    const double rho = norm_compat_rho(blocks[0].norm, blocks[0].rows, blocks[0].cols);
    double dmax = 0.0, gsum = 0.0, esum = 0.0;
    std::size_t gn = 0, en = 0;
    const std::size_t K = pairs.size();
    for (const auto& p : pairs) {
      dmax = std::max(dmax, record_delta(*p.rec));
      if (!std::isnan(p.rec->grad_dual_norm)) {
        gsum += p.rec->grad_dual_norm;
        ++gn;
      }
      if (p.rec->momentum_err_dual && p.rec->step >= K / 2) {
        esum += *p.rec->momentum_err_dual;
        ++en;
      }
    }
    if (cg && cm && gn > 0 && dmax < 1.0) {
      out.push_back(make_report(
          "avg_grad_expectation",
          bound_stochastic(delta0, static_cast<double>(K), cg->gamma, cm->alpha, *L, problem.sigma(), rho, dmax),
          gsum / static_cast<double>(gn), true, "expectation bound, single sample path"));
    }
    if (cg && cm && en > 0) {
      out.push_back(make_report(
          "momentum_error_steady_state",
          momentum_error_steady_state(rho, problem.sigma(), cm->alpha, *L, cg->gamma, dmax),
          esum / static_cast<double>(en), true, "mean over second half vs steady state"));
    }
    return out;
  }

  if (blocks.size() > 1 || config.variant == Variant::Layerwise) {
    const bool have_L = std::all_of(pairs.begin(), pairs.end(), [&](const StepPair& p) {
      return p.rec->blocks.size() == blocks.size() &&
             std::all_of(p.rec->blocks.begin(), p.rec->blocks.end(),
                         [](const BlockMetrics& b) { return b.L > 0.0 || b.gamma == 0.0; });
    });
    if (have_L) {
      if (auto r = per_step_report("layerwise_descent_per_step", pairs, [](const TraceRecord& rec) {
            double dec = 0.0;
            for (const auto& b : rec.blocks) {
              if (b.gamma > 0.0) dec += adaptive_descent(b.grad_dual, b.L, b.delta_used);
            }
            return dec;
          })) {
        out.push_back(*r);
      }
    }
    if (auto r = per_step_report("monotone_descent", pairs, [](const TraceRecord&) { return 0.0; })) {
      out.push_back(*r);
    }
    return out;
  }

  std::optional<double> L = problem.smoothness();
  if (const auto* a = std::get_if<AdaptiveSmoothStep>(&config.step); a && a->L) L = a->L;

  std::vector<double> gammas, deltas;
  double min_grad = std::numeric_limits<double>::infinity();
  for (const auto& p : pairs) {
    gammas.push_back(p.rec->gamma_k);
    deltas.push_back(record_delta(*p.rec));
    min_grad = std::min(min_grad, p.rec->grad_dual_norm);
  }

  if (L) {
    out.push_back(make_report("min_grad_bound", bound_det_general(gammas, deltas, *L, delta0), min_grad, false,
                              "K=" + std::to_string(pairs.size())));
    const double Lv = *L;
    if (auto r = per_step_report("descent_lemma_per_step", pairs, [&](const TraceRecord& rec) {
          const double d = record_delta(rec), g = rec.gamma_k;
          return g * rec.grad_dual_norm * (1.0 - d) - 0.5 * Lv * g * g * (1.0 + d) * (1.0 + d);
        })) {
      out.push_back(*r);
    }
    if (std::holds_alternative<AdaptiveSmoothStep>(config.step)) {
      if (auto r = per_step_report("adaptive_descent_per_step", pairs, [&](const TraceRecord& rec) {
            return adaptive_descent(rec.grad_dual_norm, Lv, record_delta(rec));
          })) {
        out.push_back(*r);
      }
      out.push_back(make_report("adaptive_min_grad_sq", adaptive_bound_det(deltas, Lv, delta0), min_grad * min_grad,
                                false, "K=" + std::to_string(pairs.size())));
    }
  }

  if (const auto* a = std::get_if<AdaptiveGeneralizedStep>(&config.step)) {
    const auto gs = problem.generalized_smoothness();
    if ((a->L0 && a->L1) || gs) {
      const double L0 = a->L0 ? *a->L0 : gs->L0;
      const double L1 = a->L1 ? *a->L1 : gs->L1;
      if (auto r = per_step_report("glsmooth_descent_per_step", pairs, [&](const TraceRecord& rec) {
            return adaptive_descent(rec.grad_dual_norm, L0 + L1 * rec.grad_dual_norm, record_delta(rec));
          })) {
        out.push_back(*r);
      }
    }
  }

  if (out.empty()) throw MissingCertificate(problem.name() + ": no smoothness certificate for this policy");
  return out;
}

}  // namespace imuon
