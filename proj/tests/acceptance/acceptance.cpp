// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.
#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "imuon/errors.hpp"
#include "imuon/harness/config.hpp"
#include "imuon/harness/csv.hpp"
#include "imuon/harness/experiments.hpp"
#include "imuon/lmo.hpp"
#include "imuon/optimizer.hpp"
#include "imuon/random.hpp"
#include "imuon/theory.hpp"

using namespace imuon;
using namespace imuon::harness;

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Mat to_eigen(const Tensor& t) {
  return Eigen::Map<const Mat>(t.data().data(), static_cast<Eigen::Index>(t.rows()),
                               static_cast<Eigen::Index>(t.cols()));
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failed = 0;

void criterion(int id, const std::string& title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < budget_s;
  const bool ok = o.pass && in_time;
  if (!ok) ++g_failed;
  std::ostringstream line;
  line << (ok ? "PASS" : "FAIL") << " criterion " << std::setw(2) << id << ": " << title << " [" << std::fixed
       << std::setprecision(2) << secs << " s / " << budget_s << " s]";
  if (!in_time) line << " over time budget";
  if (!o.detail.empty()) line << " -- " << o.detail;
  std::cout << line.str() << std::endl;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(4) << v;
  return s.str();
}

// worst blockwise relative error of central differences
double fd_error(const Problem& p, const Params& x) {
  const Params g = p.gradient(x);
  double worst = 0.0;
  for (std::size_t b = 0; b < x.size(); ++b) {
    std::vector<double> fd(x[b].size());
    for (std::size_t k = 0; k < x[b].size(); ++k) {
      const double h = 1e-5 * std::max(1.0, std::abs(x[b][k]));
      auto at = [&](double s) {
        Params y = x;
        std::vector<double> d = y[b].data();
        d[k] += s;
        y[b] = Tensor(y[b].rows(), y[b].cols(), std::move(d));
        return p.value(y);
      };
      fd[k] = (at(h) - at(-h)) / (2 * h);
    }
    worst = std::max(worst, frobenius(Tensor(x[b].rows(), x[b].cols(), fd) - g[b]) / std::max(frobenius(g[b]), 1e-8));
  }
  return worst;
}

Outcome c1_gradients() {
  std::vector<std::unique_ptr<Problem>> ps;
  ps.push_back(make_matrix_quadratic(6, 4, 1));
  ps.push_back(make_logistic(10, 50, 2));
  ps.push_back(make_logistic({.dim = 8, .samples = 40, .classes = 4, .seed = 3}));
  ps.push_back(make_matrix_factorization(6, 2, 4));
  ps.push_back(make_quartic(8, 5));
  Rng rng = make_rng(1001);
  double worst = 0.0;
  for (const auto& p : ps) {
    for (int t = 0; t < 100; ++t) {
      Params x = p->initial_point();
      for (auto& v : x) v = v + random_gaussian(v.rows(), v.cols(), rng);
      worst = std::max(worst, fd_error(*p, x));
    }
  }
  return {worst <= 1e-6, "5 problems x 100 points, worst relative error " + fmt(worst)};
}

Outcome c2_exact_lmo() {
  Rng rng = make_rng(1002);
  std::uniform_int_distribution<std::size_t> rows(1, 64), cols(1, 48);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t r = t == 0 ? 64 : rows(rng), c = t == 0 ? 48 : cols(rng);
    const Tensor g = random_gaussian(r, c, rng);
    const Tensor d = lmo_spectral_exact(g).direction;
    Eigen::JacobiSVD<Mat> svd(to_eigen(g), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Mat ref = -svd.matrixU() * svd.matrixV().transpose();
    const Mat diff = to_eigen(d) - ref;
    worst = std::max(worst, Eigen::JacobiSVD<Mat>(diff).singularValues()(0));
  }
  return {worst <= 1e-8, "100 matrices up to 64x48, worst spectral error " + fmt(worst)};
}

Outcome c3_delta_monotone() {
  MeasureDeltaSpec spec;
  spec.rows = spec.cols = 32;
  spec.smin = 0.1;
  spec.smax = 1.0;
  spec.trials = 50;
  spec.seed = 3;
  spec.kind = "newton_schulz";
  spec.normalization = "spectral";
  spec.iterations = {1, 3, 5, 8};
  const auto r = measure_delta_table(spec);
  std::vector<double> m;
  for (const auto& row : r.rows)
    if (row.scheme != "exact") m.push_back(row.mean_delta);
  bool strict = m.size() == 4;
  for (std::size_t i = 1; i < m.size(); ++i) strict = strict && m[i] < m[i - 1];
  const bool ratio = m.size() == 4 && m[3] < 0.1 * m[0];
  std::string d = "mean delta NS-1/3/5/8 =";
  for (double v : m) d += " " + fmt(v);
  return {strict && ratio, d};
}

Outcome c4_det_bound() {
  auto p = make_matrix_quadratic(8, 6, 4);
  const double L = *p->smoothness();
  double worst = 1e300;
  int runs = 0;
  for (double gamma : {0.003, 0.01, 0.03, 0.1, 0.3}) {
    for (const BlockOracle& o : std::vector<BlockOracle>{ExactOracle{}, newton_schulz(1), newton_schulz(5)}) {
      OptimizerConfig c;
      c.step = ConstantStep{gamma};
      c.oracle.default_oracle = o;
      const auto r = run(c, *p, 100);
      std::vector<double> gs, ds;
      double min_grad = 1e300;
      for (const auto& rec : r.records) {
        gs.push_back(rec.gamma_k);
        ds.push_back(*rec.delta_measured);
        min_grad = std::min(min_grad, rec.grad_dual_norm);
      }
      const double bound = bound_det_general(gs, ds, L, r.records.front().loss - p->f_star());
      worst = std::min(worst, bound - min_grad);
      ++runs;
    }
  }
  return {worst >= -1e-9 && runs == 15, "15 runs, smallest margin " + fmt(worst)};
}

Outcome c5_adaptive_descent() {
  auto p = make_matrix_quadratic(8, 6, 4);
  const double L = *p->smoothness();
  double worst = 1e300;
  std::size_t steps = 0;
  for (const BlockOracle& o : std::vector<BlockOracle>{ExactOracle{}, newton_schulz(1), newton_schulz(3),
                                                       newton_schulz(5), newton_schulz(8), muon_quintic(5),
                                                       polar_express(1), polar_express(5)}) {
    OptimizerConfig c;
    c.step = AdaptiveSmoothStep{};
    c.oracle.default_oracle = o;
    const auto r = run(c, *p, 100);
    for (std::size_t k = 0; k < r.records.size(); ++k) {
      const auto& rec = r.records[k];
      if (rec.status != RunStatus::Ok) continue;
      const double next = k + 1 < r.records.size() ? r.records[k + 1].loss : r.final_loss;
      const double d = *rec.delta_measured, g = rec.grad_dual_norm;
      const double allowed = rec.loss - g * g * (1 - d) * (1 - d) / (2 * L * (1 + d) * (1 + d));
      worst = std::min(worst, allowed + 1e-9 - next);
      ++steps;
    }
  }
  return {worst >= 0.0, std::to_string(steps) + " steps over 8 oracle settings, smallest slack " + fmt(worst)};
}

Outcome c6_delta_zero() {
  bool ok = true;
  double worst = 0.0;
  for (double K : {10.0, 100.0, 1000.0}) {
    for (double L : {0.5, 2.0}) {
      const double d0 = 1.7;
      const auto o = optimal_gamma_det(d0, K, L, 0.0);
      const double rate = bound_det_constant(d0, static_cast<std::size_t>(K), o.gamma, L, 0.0);
      worst = std::max({worst, std::abs(o.gamma - std::sqrt(2 * d0 / (K * L))), std::abs(o.rate - std::sqrt(2 * d0 * L / K)),
                        std::abs(rate - std::sqrt(2 * d0 * L / K))});
    }
  }
  ok = worst <= 1e-12;

  // momentum with alpha = 1 and no noise is the deterministic method, bit for bit
  auto p = make_matrix_quadratic(6, 5, 2);
  bool bitwise = true;
  for (const BlockOracle& o : std::vector<BlockOracle>{ExactOracle{}, newton_schulz(3)}) {
    OptimizerConfig det;
    det.step = ConstantStep{0.05};
    det.oracle.default_oracle = o;
    OptimizerConfig sto = det;
    sto.variant = Variant::Stochastic;
    sto.momentum = ConstantMomentum{1.0};
    const auto a = run(det, *p, 50), b = run(sto, *p, 50);
    bitwise = bitwise && a.final_params == b.final_params && a.records.size() == b.records.size();
    for (std::size_t k = 0; bitwise && k < a.records.size(); ++k) {
      bitwise = a.records[k].loss == b.records[k].loss && a.records[k].gamma_k == b.records[k].gamma_k;
    }
  }
  return {ok && bitwise, "formula error " + fmt(worst) + ", momentum alpha=1 trajectory " +
                             (bitwise ? "bitwise identical" : "differs")};
}

Outcome c7_golden() {
  const auto s = optimal_params_stochastic(1, 16, 1, 1, 1, 0);
  const bool a = s.primary.gamma == 0.125 && s.primary.alpha == 0.25;
  const double bs = bound_stochastic(1, 100, 0.1, 0.5, 1, 1, 1, 0);
  const double expect = 0.1 + 2 * (1.0 / 50 + std::sqrt(0.5)) + 0.1 * (3.5 + 4);
  const bool b = std::abs(bs - expect) <= 1e-9;
  const auto c0 = complexity_glsmooth(1, 1, 1, 0.1, 0), c1 = complexity_glsmooth(1, 1, 1, 0.1, 1.0 / 3);
  const bool c = c0 == 220 && c1 == 880;
  return {a && b && c, "(gamma, alpha) = (" + fmt(s.primary.gamma) + ", " + fmt(s.primary.alpha) +
                           "), stochastic bound " + fmt(bs) + ", complexity " + std::to_string(c0) + " / " +
                           std::to_string(c1)};
}

SweepSpec coupling_spec(const std::string& kind) {
  SweepSpec s;
  RunConfig& b = s.base;
  b.problem.name = "logistic";
  b.problem.classes = 10;
  b.problem.dim = 50;
  b.problem.samples = 500;
  b.problem.batch = 1;
  b.problem.seed = 0;
  b.variant = "stochastic";
  b.step.kind = "constant";
  b.momentum = "constant";
  b.oracle.kind = kind;
  b.measure_delta_every = 10;
  b.eval_every = 500;
  b.K = 2000;
  s.gammas = parse_double_list("geomspace(0.001, 0.1, 8)");
  s.alphas = {0.05, 0.1, 0.2, 0.5};
  s.oracle_iters = {1, 5};
  s.seeds = {0, 1, 2, 3, 4};
  return s;
}

std::string describe(const CouplingReport& r) {
  std::string d;
  for (const auto& l : r.levels) {
    d += (d.empty() ? "" : ", ") + std::to_string(l.oracle_iters) + " it: delta " + fmt(l.delta) + " best gamma " +
         fmt(l.best_gamma) + " alpha " + fmt(l.best_alpha);
  }
  if (r.uninformative) d += " (uninformative)";
  return d;
}

Outcome c8_coupling() {
  const auto spec = coupling_spec("polar_express");
  const auto problem = make_problem(spec.base.problem);
  const auto r = coupling_verdict(execute_sweep(spec, worker_count()).rows);
  return {r.pass, "PolarExpress 1 vs 5, sigma " + fmt(problem->sigma()) + "; " + describe(r)};
}

void c8_informational() {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const auto r = coupling_verdict(execute_sweep(coupling_spec("newton_schulz"), worker_count()).rows);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "INFO criterion  8 with classical cubic Newton-Schulz 1 vs 5: " << (r.pass ? "PASS" : "FAIL")
              << " [" << std::fixed << std::setprecision(2) << secs << " s] -- " << describe(r) << std::endl;
  } catch (const std::exception& e) {
    std::cout << "INFO criterion  8 with classical cubic Newton-Schulz: exception " << e.what() << std::endl;
  }
}

std::vector<double> finals_at(const Problem& p, double gamma) {
  std::vector<double> finals;
  for (int it : {1, 3, 5, 8}) {
    OptimizerConfig c;
    c.step = ConstantStep{gamma};
    c.oracle.default_oracle = newton_schulz(it);
    finals.push_back(run(c, p, 50).final_loss);
  }
  return finals;
}

bool nonincreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1]) return false;
  return true;
}

std::string list(const std::vector<double>& v) {
  std::string d;
  for (double x : v) d += " " + fmt(x);
  return d;
}

// gamma tuned on the exact oracle, then held fixed
Outcome c9_degradation() {
  auto p = make_matrix_quadratic(16, 16, 9);
  double gamma = 0.0, best = INFINITY;
  for (double g : parse_double_list("geomspace(0.001, 1, 13)")) {
    OptimizerConfig c;
    c.step = ConstantStep{g};
    const double f = run(c, *p, 50).final_loss;
    if (f < best) best = f, gamma = g;
  }
  const auto finals = finals_at(*p, gamma);
  return {nonincreasing(finals), "tuned gamma " + fmt(gamma) + ", final loss NS-1/3/5/8 =" + list(finals)};
}

void c9_informational() {
  auto p = make_matrix_quadratic(16, 16, 9);
  const double d0 = p->value(p->initial_point()) - p->f_star();
  const double gamma = optimal_gamma_det(d0, 50, *p->smoothness(), 0.0).gamma;
  const auto finals = finals_at(*p, gamma);
  std::cout << "INFO criterion  9 at theory-optimal gamma " << fmt(gamma) << ": "
            << (nonincreasing(finals) ? "PASS" : "FAIL") << " -- final loss NS-1/3/5/8 =" << list(finals) << std::endl;
}

Outcome c10_time_varying() {
  auto p = make_logistic(20, 200, 10);
  const std::vector<std::size_t> checkpoints{100, 1000, 10000};
  std::vector<std::vector<double>> mins(checkpoints.size());
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    OptimizerConfig c;
    c.variant = Variant::Stochastic;
    c.step = TimeVaryingStep{0.1};
    c.momentum = TimeVaryingMomentum{1.0};
    c.seed = seed;
    c.eval_every = 10;
    const auto r = run(c, *p, checkpoints.back());
    double best = INFINITY;
    std::size_t ci = 0;
    for (std::size_t k = 0; k < r.records.size() && ci < checkpoints.size(); ++k) {
      if (!std::isnan(r.records[k].grad_dual_norm)) best = std::min(best, r.records[k].grad_dual_norm);
      if (k + 1 == checkpoints[ci]) mins[ci++].push_back(best);
    }
  }
  std::vector<double> med;
  for (auto& m : mins) med.push_back(median(m));
  bool strict = true;
  for (std::size_t i = 1; i < med.size(); ++i) strict = strict && med[i] < med[i - 1];
  return {strict, "median running-min dual gradient at K=1e2/1e3/1e4: " + fmt(med[0]) + " " + fmt(med[1]) + " " +
                      fmt(med[2])};
}

Outcome c11_layerwise() {
  auto p = make_matrix_factorization(12, 3, 11);
  bool mono = true, bottleneck_ok = true;
  int mixes = 0;
  for (auto [ou, ov] : std::vector<std::pair<BlockOracle, BlockOracle>>{
           {ExactOracle{}, ExactOracle{}},
           {newton_schulz(1), ExactOracle{}},
           {ExactOracle{}, newton_schulz(1)},
           {newton_schulz(1), newton_schulz(5)},
           {newton_schulz(3), newton_schulz(1)},
           {polar_express(2), muon_quintic(5)}}) {
    OptimizerConfig c;
    c.variant = Variant::Layerwise;
    c.step = AdaptiveSmoothStep{};
    c.oracle.per_block = {{"U", ou}, {"V", ov}};
    const auto r = run(c, *p, 200);
    for (std::size_t k = 0; k + 1 < r.records.size(); ++k) mono = mono && r.records[k + 1].loss <= r.records[k].loss;
    mono = mono && r.final_loss <= r.records.back().loss;

    std::vector<double> worst(2, 0.0);
    for (const auto& rec : r.records)
      for (std::size_t i = 0; i < rec.blocks.size(); ++i) worst[i] = std::max(worst[i], rec.blocks[i].delta_used);
    auto factor = [](double d) { return (1 + d) * (1 + d) / ((1 - d) * (1 - d)); };
    const std::size_t expect = factor(worst[1]) > factor(worst[0]) ? 1 : 0;
    bottleneck_ok = bottleneck_ok && complexity_layerwise(r.records.front().loss, 1e-2, worst).bottleneck == expect;
    ++mixes;
  }
  return {mono && bottleneck_ok, std::to_string(mixes) + " oracle mixes x 200 steps, monotone " + (mono ? "yes" : "no") +
                                     ", bottleneck " + (bottleneck_ok ? "matches" : "mismatch")};
}

Outcome c12_reproducibility() {
  const RunConfig rc = parse_run_config(R"(
[run]
K = 300
seeds = 0, 1, 2, 3
run_id = repro
[problem]
name = logistic
dim = 20
samples = 100
classes = 4
[optimizer]
variant = stochastic
step = constant
gamma = 0.02
momentum = constant
alpha = 0.2
[oracle]
kind = polar_express
iterations = 3
)");
  auto trace = [&](std::size_t w) {
    std::ostringstream o;
    write_trace(o, execute_run(rc, w));
    return o.str();
  };
  SweepSpec s;
  s.base = rc;
  s.base.K = 100;
  s.gammas = {0.01, 0.05};
  s.alphas = {0.1, 1.0};
  s.oracle_iters = {0, 1, 5};
  s.seeds = {0, 1};
  auto sweep = [&](std::size_t w) {
    const auto r = execute_sweep(s, w);
    std::ostringstream o;
    write_sweep_csv(o, r.rows);
    write_aggregate_csv(o, r.aggregates);
    return o.str();
  };
  const bool a = trace(1) == trace(8) && trace(1) == trace(1);
  const bool b = sweep(1) == sweep(8);
  return {a && b, std::string("trace ") + (a ? "identical" : "differs") + ", sweep " + (b ? "identical" : "differs")};
}

}  // namespace

int main() {
  criterion(1, "analytic gradients match central differences", 10, c1_gradients);
  criterion(2, "exact spectral LMO matches an independent SVD", 30, c2_exact_lmo);
  criterion(3, "measured delta decreases with Newton-Schulz iterations", 60, c3_delta_monotone);
  criterion(4, "deterministic min-gradient bound with measured delta", 60, c4_det_bound);
  criterion(5, "adaptive step per-iteration descent", 30, c5_adaptive_descent);
  criterion(6, "zero-inexactness reduction", 10, c6_delta_zero);
  criterion(7, "formula golden values", 1, c7_golden);
  criterion(8, "step size / oracle precision coupling", 600, c8_coupling);
  c8_informational();
  criterion(9, "final loss nonincreasing in oracle iterations", 30, c9_degradation);
  c9_informational();
  criterion(10, "time-varying schedule running minimum", 300, c10_time_varying);
  criterion(11, "layer-wise descent and bottleneck layer", 60, c11_layerwise);
  criterion(12, "byte-identical output for 1 and 8 workers", 60, c12_reproducibility);
  std::cout << (g_failed == 0 ? "all criteria passed" : std::to_string(g_failed) + " criteria failed") << std::endl;
  return g_failed == 0 ? 0 : 1;
}
