#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "imuon/harness/config.hpp"
#include "imuon/harness/csv.hpp"
#include "imuon/optimizer.hpp"

namespace imuon::harness {

// IMUON_WORKERS if set and positive, else hardware concurrency (at least 1).
std::size_t worker_count();

// Runs fn(i) for i in [0, n) on up to `workers` threads. The first
// exception thrown by any task is rethrown after all threads join.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

struct SeedRun {
  std::uint64_t seed = 0;
  std::string run_id;
  RunResult result;
};

std::vector<SeedRun> execute_run(const RunConfig& c, std::size_t workers);
void write_trace(std::ostream& out, const std::vector<SeedRun>& runs);

std::string cell_id(double gamma, double alpha, int oracle_iters);
RunConfig cell_config(const RunConfig& base, double gamma, double alpha, int oracle_iters);
SweepRow summarize(const RunResult& r, double gamma, double alpha, int oracle_iters, std::uint64_t seed);

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<AggregateRow> aggregates;
};

SweepResult execute_sweep(const SweepSpec& spec, std::size_t workers);

// Median over seeds per cell; failed or diverged seeds count as +inf loss.
std::vector<AggregateRow> aggregate(const std::vector<SweepRow>& rows);

double median(std::vector<double> v);

struct CouplingLevel {
  int oracle_iters = 0;
  // median measured delta, NaN when the sweep recorded none
  double delta = 0.0;
  double best_gamma = 0.0;
  double best_alpha = 0.0;
  double best_loss = 0.0;
  std::vector<double> gammas;
  std::vector<double> loss_per_gamma;  // best over alpha
};

struct CouplingReport {
  // most precise first
  std::vector<CouplingLevel> levels;
  bool pass = false;
  bool uninformative = false;
  std::optional<bool> alpha_direction_ok;
};

// PASS when the best step size never increases as the oracle gets less precise.
CouplingReport coupling_verdict(const std::vector<SweepRow>& rows);
void print_coupling(std::ostream& out, const CouplingReport& r);

struct MeasureDeltaSpec {
  std::size_t rows = 32;
  std::size_t cols = 32;
  double smin = 0.1;
  double smax = 1.0;
  std::size_t trials = 50;
  std::uint64_t seed = 0;
  std::string kind = "newton_schulz";
  std::vector<int> iterations{1, 3, 5, 8};
  std::string normalization = "spectral";
  std::string table;
  bool include_exact = true;
};

struct DeltaRow {
  std::string scheme;
  int iterations = 0;
  double mean_delta = 0.0;
  double max_delta = 0.0;
  std::optional<double> apriori_bound;
};

struct MeasureDeltaResult {
  std::vector<DeltaRow> rows;
  // mean delta strictly decreasing over the iterative rows
  bool monotone = true;
};

MeasureDeltaResult measure_delta_table(const MeasureDeltaSpec& spec);
void write_delta_csv(std::ostream& out, const MeasureDeltaResult& r);

}  // namespace imuon::harness
