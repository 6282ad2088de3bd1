#include "imuon/harness/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>
#include <tuple>

#include "imuon/errors.hpp"
#include "imuon/lmo.hpp"
#include "imuon/random.hpp"

namespace imuon::harness {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool nearly_equal(double a, double b) {
  if (a == b) return true;
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

std::size_t worker_count() {
  if (const char* env = std::getenv("IMUON_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first) first = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

std::vector<SeedRun> execute_run(const RunConfig& c, std::size_t workers) {
  const auto problem = make_problem(c.problem);
  std::vector<SeedRun> out(c.seeds.size());
  // build everything up front so config errors surface before any work
  std::vector<OptimizerConfig> opts;
  for (auto s : c.seeds) opts.push_back(build_optimizer(c, s));
  parallel_for(c.seeds.size(), workers, [&](std::size_t i) {
    out[i].seed = c.seeds[i];
    out[i].run_id = c.seeds.size() == 1 ? c.run_id : c.run_id + "_s" + std::to_string(c.seeds[i]);
    out[i].result = run(opts[i], *problem, c.K);
  });
  return out;
}

void write_trace(std::ostream& out, const std::vector<SeedRun>& runs) {
  write_trace_header(out);
  for (const auto& r : runs) write_trace_rows(out, r.run_id, r.result.records);
}

std::string cell_id(double gamma, double alpha, int oracle_iters) {
  return "g" + format_double(gamma) + "_a" + format_double(alpha) + "_o" + std::to_string(oracle_iters);
}

RunConfig cell_config(const RunConfig& base, double gamma, double alpha, int oracle_iters) {
  RunConfig c = base;
  c.step.gamma = gamma;
  c.alpha = alpha;
  if (oracle_iters == 0) {
    c.oracle.kind = "exact";
  } else {
    c.oracle.iterations = oracle_iters;
  }
  return c;
}

SweepRow summarize(const RunResult& r, double gamma, double alpha, int oracle_iters, std::uint64_t seed) {
  SweepRow row;
  row.cell_id = cell_id(gamma, alpha, oracle_iters);
  row.gamma = gamma;
  row.alpha = alpha;
  row.oracle_iters = oracle_iters;
  row.seed = seed;
  row.status = r.status;
  row.final_loss = r.status == RunStatus::Diverged ? kInf : r.final_loss;
  double mg = kInf, dsum = 0.0;
  std::size_t dn = 0;
  for (const auto& rec : r.records) {
    if (!std::isnan(rec.grad_dual_norm)) mg = std::min(mg, rec.grad_dual_norm);
    if (rec.delta_measured) {
      dsum += *rec.delta_measured;
      ++dn;
    }
  }
  row.min_grad_dual = mg;
  if (dn) row.mean_delta = dsum / static_cast<double>(dn);
  return row;
}

SweepResult execute_sweep(const SweepSpec& spec, std::size_t workers) {
  struct Job {
    double gamma, alpha;
    int iters;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (int it : spec.oracle_iters)
    for (double g : spec.gammas)
      for (double a : spec.alphas)
        for (auto s : spec.seeds) jobs.push_back({g, a, it, s});

  const auto problem = make_problem(spec.base.problem);
  std::vector<OptimizerConfig> opts;
  opts.reserve(jobs.size());
  for (const auto& j : jobs) opts.push_back(build_optimizer(cell_config(spec.base, j.gamma, j.alpha, j.iters), j.seed));

  std::vector<SweepRow> rows(jobs.size());
  parallel_for(jobs.size(), workers, [&](std::size_t i) {
    const Job& j = jobs[i];
    try {
      rows[i] = summarize(run(opts[i], *problem, spec.base.K), j.gamma, j.alpha, j.iters, j.seed);
    } catch (const Error&) {
      RunResult failed;
      failed.status = RunStatus::Diverged;
      rows[i] = summarize(failed, j.gamma, j.alpha, j.iters, j.seed);
      rows[i].min_grad_dual = std::nan("");
    }
  });

  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.oracle_iters, a.gamma, a.alpha, a.seed) < std::tie(b.oracle_iters, b.gamma, b.alpha, b.seed);
  });
  return {rows, aggregate(rows)};
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2) return v[n / 2];
  const double a = v[n / 2 - 1], b = v[n / 2];
  if (std::isinf(a) || std::isinf(b)) return std::isinf(a) ? a : b;
  return 0.5 * (a + b);
}

std::vector<AggregateRow> aggregate(const std::vector<SweepRow>& rows) {
  std::map<std::tuple<int, double, double>, std::vector<const SweepRow*>> cells;
  for (const auto& r : rows) cells[{r.oracle_iters, r.gamma, r.alpha}].push_back(&r);
  std::vector<AggregateRow> out;
  for (const auto& [key, rs] : cells) {
    AggregateRow a;
    a.oracle_iters = std::get<0>(key);
    a.gamma = std::get<1>(key);
    a.alpha = std::get<2>(key);
    a.cell_id = cell_id(a.gamma, a.alpha, a.oracle_iters);
    std::vector<double> losses, grads, deltas;
    for (const auto* r : rs) {
      const bool ok = r->status != RunStatus::Diverged && std::isfinite(r->final_loss);
      losses.push_back(ok ? r->final_loss : kInf);
      grads.push_back(std::isnan(r->min_grad_dual) ? kInf : r->min_grad_dual);
      if (r->mean_delta) deltas.push_back(*r->mean_delta);
      if (ok) ++a.n_ok;
    }
    a.n_seeds = rs.size();
    a.median_final_loss = median(losses);
    a.median_min_grad_dual = median(grads);
    if (!deltas.empty()) a.median_mean_delta = median(deltas);
    out.push_back(a);
  }
  return out;
}

CouplingReport coupling_verdict(const std::vector<SweepRow>& rows) {
  const auto agg = aggregate(rows);
  std::map<int, std::vector<const AggregateRow*>> by_level;
  for (const auto& a : agg) by_level[a.oracle_iters].push_back(&a);
  if (by_level.size() < 2) throw InsufficientGrid("coupling needs at least two oracle precision levels");

  CouplingReport rep;
  std::vector<double> shared_gammas;
  bool all_delta = true;
  std::vector<double> all_losses;
  for (const auto& [iters, cells] : by_level) {
    CouplingLevel lv;
    lv.oracle_iters = iters;
    std::map<double, std::pair<double, double>> best;  // gamma -> (loss, alpha)
    std::vector<double> deltas;
    for (const auto* c : cells) {
      auto it = best.find(c->gamma);
      if (it == best.end() || c->median_final_loss < it->second.first) best[c->gamma] = {c->median_final_loss, c->alpha};
      if (c->median_mean_delta) deltas.push_back(*c->median_mean_delta);
      all_losses.push_back(c->median_final_loss);
    }
    lv.delta = deltas.empty() ? (iters == 0 ? 0.0 : std::nan("")) : median(deltas);
    if (std::isnan(lv.delta)) all_delta = false;
    lv.best_loss = kInf;
    bool first = true;
    for (const auto& [g, la] : best) {
      lv.gammas.push_back(g);
      lv.loss_per_gamma.push_back(la.first);
      if (first || la.first < lv.best_loss) {
        lv.best_loss = la.first;
        lv.best_gamma = g;
        lv.best_alpha = la.second;
        first = false;
      }
    }
    if (shared_gammas.empty()) {
      shared_gammas = lv.gammas;
    } else if (shared_gammas != lv.gammas) {
      throw InsufficientGrid("precision levels do not share a gamma grid");
    }
    rep.levels.push_back(std::move(lv));
  }
  if (shared_gammas.size() < 2) throw InsufficientGrid("coupling needs at least two gamma values");

  // most precise first: by measured delta when every level has one,
  // otherwise exact, then more iterations before fewer
  std::stable_sort(rep.levels.begin(), rep.levels.end(), [&](const CouplingLevel& a, const CouplingLevel& b) {
    if (all_delta) return a.delta < b.delta;
    const int ka = a.oracle_iters == 0 ? std::numeric_limits<int>::max() : a.oracle_iters;
    const int kb = b.oracle_iters == 0 ? std::numeric_limits<int>::max() : b.oracle_iters;
    return ka > kb;
  });

  rep.pass = true;
  for (std::size_t i = 1; i < rep.levels.size(); ++i) {
    if (rep.levels[i].best_gamma > rep.levels[i - 1].best_gamma) rep.pass = false;
  }
  rep.uninformative = std::all_of(all_losses.begin(), all_losses.end(),
                                  [&](double v) { return nearly_equal(v, all_losses.front()); });

  {
    std::vector<double> alphas;
    for (const auto& r : rows) alphas.push_back(r.alpha);
    std::sort(alphas.begin(), alphas.end());
    alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());
    if (alphas.size() > 1) {
      bool ok = true;
      for (std::size_t i = 1; i < rep.levels.size(); ++i) {
        if (rep.levels[i].best_alpha < rep.levels[i - 1].best_alpha) ok = false;
      }
      rep.alpha_direction_ok = ok;
    }
  }
  return rep;
}

void print_coupling(std::ostream& out, const CouplingReport& r) {
  out << "oracle_iters,median_delta,best_gamma,best_alpha,best_median_final_loss\n";
  for (const auto& lv : r.levels) {
    out << lv.oracle_iters << ',' << (std::isnan(lv.delta) ? std::string() : format_double(lv.delta)) << ','
        << format_double(lv.best_gamma) << ',' << format_double(lv.best_alpha) << ',' << format_double(lv.best_loss)
        << '\n';
  }
  out << "verdict: " << (r.pass ? "PASS" : "FAIL");
  if (r.uninformative) out << " (uninformative: all losses equal)";
  out << '\n';
  if (r.alpha_direction_ok) {
    out << "alpha direction (best alpha nondecreasing as precision drops): " << (*r.alpha_direction_ok ? "yes" : "no")
        << '\n';
  }
}

MeasureDeltaResult measure_delta_table(const MeasureDeltaSpec& spec) {
  if (spec.trials == 0) throw ConfigError("measure-delta: trials must be positive");
  if (!(spec.smin > 0.0 && spec.smin <= spec.smax)) throw ConfigError("measure-delta: need 0 < smin <= smax");
  if (spec.kind == "exact") throw ConfigError("measure-delta: the exact oracle row is always included");
  OracleConfig oc;
  oc.kind = spec.kind;
  oc.normalization = spec.normalization;
  oc.table = spec.table;
  const bool spectral = spec.normalization == "spectral";
  if (spectral) oc.spectrum_floor = spec.smin / spec.smax;

  std::vector<int> iters = spec.iterations;
  std::sort(iters.begin(), iters.end());
  iters.erase(std::unique(iters.begin(), iters.end()), iters.end());
  std::vector<PolarScheme> schemes;
  for (int it : iters) {
    if (it < 1) throw ConfigError("measure-delta: iteration counts must be positive");
    oc.iterations = it;
    schemes.push_back(std::get<PolarScheme>(build_oracle(oc)));
  }

  std::vector<std::vector<double>> deltas(schemes.size() + 1, std::vector<double>(spec.trials));
  for (std::size_t t = 0; t < spec.trials; ++t) {
    Rng rng = make_rng(spec.seed, t, 0);
    const Tensor m = matrix_with_spectrum(spec.rows, spec.cols, spec.smin, spec.smax, rng);
    LmoResult ex = lmo_spectral_exact(m);
    deltas[0][t] = measure_delta(m, ex, NormKind::Spectral);
    for (std::size_t s = 0; s < schemes.size(); ++s) {
      LmoResult r = lmo_spectral_approx(m, schemes[s]);
      deltas[s + 1][t] = measure_delta(m, r, NormKind::Spectral);
    }
  }

  auto row_of = [&](const std::string& name, int it, const std::vector<double>& d) {
    DeltaRow r;
    r.scheme = name;
    r.iterations = it;
    double sum = 0.0, mx = 0.0;
    for (double x : d) {
      sum += x;
      mx = std::max(mx, x);
    }
    r.mean_delta = sum / static_cast<double>(d.size());
    r.max_delta = mx;
    return r;
  };

  MeasureDeltaResult res;
  if (spec.include_exact) {
    DeltaRow r = row_of("exact", 0, deltas[0]);
    r.apriori_bound = 0.0;
    res.rows.push_back(r);
  }
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    DeltaRow r = row_of(spec.kind, iters[s], deltas[s + 1]);
    r.apriori_bound = declared_delta(schemes[s]);
    res.rows.push_back(r);
    if (s > 0 && !(r.mean_delta < res.rows[res.rows.size() - 2].mean_delta)) res.monotone = false;
  }
  return res;
}

void write_delta_csv(std::ostream& out, const MeasureDeltaResult& r) {
  out << "scheme,iterations,mean_delta,max_delta,apriori_bound\n";
  for (const auto& row : r.rows) {
    out << row.scheme << ',' << row.iterations << ',' << format_double(row.mean_delta) << ','
        << format_double(row.max_delta) << ',' << (row.apriori_bound ? format_double(*row.apriori_bound) : "")
        << '\n';
  }
}

}  // namespace imuon::harness
