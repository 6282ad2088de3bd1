#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "imuon/optimizer.hpp"

namespace imuon::harness {

inline constexpr std::array<std::string_view, 10> kTraceColumns = {
    "run_id", "step", "loss", "grad_dual_norm", "momentum_err_dual",
    "delta_measured", "gamma_k", "alpha_k", "oracle_matmuls", "status"};

inline constexpr std::array<std::string_view, 9> kSweepColumns = {
    "cell_id", "gamma", "alpha", "oracle_iters", "seed", "final_loss", "min_grad_dual", "mean_delta", "status"};

inline constexpr std::array<std::string_view, 9> kAggregateColumns = {
    "cell_id", "gamma", "alpha", "oracle_iters", "median_final_loss", "median_min_grad_dual",
    "median_mean_delta", "n_ok", "n_seeds"};

struct TraceRow {
  std::string run_id;
  TraceRecord record;
};

struct SweepRow {
  std::string cell_id;
  double gamma = 0.0;
  double alpha = 0.0;
  int oracle_iters = 0;
  std::uint64_t seed = 0;
  double final_loss = 0.0;
  double min_grad_dual = 0.0;
  std::optional<double> mean_delta;
  RunStatus status = RunStatus::Ok;
};

struct AggregateRow {
  std::string cell_id;
  double gamma = 0.0;
  double alpha = 0.0;
  int oracle_iters = 0;
  double median_final_loss = 0.0;
  double median_min_grad_dual = 0.0;
  std::optional<double> median_mean_delta;
  std::size_t n_ok = 0;
  std::size_t n_seeds = 0;
};

std::string header_line(const std::string_view* cols, std::size_t n);

void write_trace_header(std::ostream& out);
void write_trace_rows(std::ostream& out, const std::string& run_id, const std::vector<TraceRecord>& rows);
std::vector<TraceRow> read_trace_csv(std::istream& in);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(std::istream& in);

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows);

}  // namespace imuon::harness
