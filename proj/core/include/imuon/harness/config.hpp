#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "imuon/optimizer.hpp"
#include "imuon/problems.hpp"

namespace imuon::harness {

// Config grammar (INI, '#' or ';' comments, one key per line):
//
//   [run]        K, seeds, run_id, output, eval_every
//   [problem]    name = quadratic | logistic | factorization | quartic
//                seed, sigma, L (declared certificate override) and per-problem sizes:
//                quadratic: rows, cols, norm, target = random|zero, init = zero|identity|random
//                logistic: dim, samples, classes, batch, margin, teacher_scale
//                factorization: rows (n), cols (r), target_rank, init_scale
//                quartic: dim, x0_norm
//   [optimizer]  variant = deterministic | stochastic | layerwise
//                step = constant | adaptive | glsmooth | timevarying
//                gamma, L, L0, L1, momentum = none | constant | timevarying, alpha,
//                momentum_init = first_gradient | zero
//   [oracle]     kind = exact | newton_schulz | muon | polar_express | table | svd
//                iterations, normalization = frobenius | spectral, table (path),
//                spectrum_floor, scale_margin, measure_delta_every
//   [block.NAME] step, gamma, L, L0, L1 and the [oracle] keys, per parameter block
//   [sweep]      gamma, alpha, oracle_iters, seeds, max_cells, output, aggregate_output
//
// Lists are comma separated or geomspace(a, b, n) / linspace(a, b, n).
// oracle_iters = 0 selects the exact oracle.

struct ProblemSpec {
  std::string name = "quadratic";
  std::size_t rows = 4;
  std::size_t cols = 4;
  std::size_t dim = 10;
  std::size_t samples = 100;
  std::size_t classes = 2;
  std::size_t batch = 1;
  std::size_t target_rank = 0;  // 0: same as cols
  std::uint64_t seed = 0;
  double sigma = 0.0;
  std::string norm = "spectral";
  std::string target = "random";
  std::string init = "zero";
  double init_scale = 0.5;
  double x0_norm = 10.0;
  double margin = 0.1;
  double teacher_scale = 1.0;
  std::optional<double> L;
};

struct StepConfig {
  std::string kind = "constant";
  double gamma = 0.01;
  std::optional<double> L;
  std::optional<double> L0;
  std::optional<double> L1;
};

struct OracleConfig {
  std::string kind = "exact";
  int iterations = 5;
  std::string normalization = "frobenius";
  std::string table;
  std::optional<double> spectrum_floor;
  std::optional<double> scale_margin;
};

struct BlockConfig {
  std::optional<StepConfig> step;
  std::optional<OracleConfig> oracle;
};

struct RunConfig {
  ProblemSpec problem;
  std::string variant = "deterministic";
  StepConfig step;
  std::string momentum = "none";
  double alpha = 0.1;
  std::string momentum_init = "first_gradient";
  OracleConfig oracle;
  std::size_t measure_delta_every = 1;
  std::map<std::string, BlockConfig> blocks;
  std::size_t K = 100;
  std::vector<std::uint64_t> seeds{0};
  std::string run_id = "run";
  std::string output;
  std::size_t eval_every = 1;
};

struct SweepSpec {
  RunConfig base;
  std::vector<double> gammas;
  std::vector<double> alphas;
  std::vector<int> oracle_iters;
  std::vector<std::uint64_t> seeds{0};
  std::size_t max_cells = 10000;
  std::string output;
  std::string aggregate_output;

  std::size_t cell_count() const { return gammas.size() * alphas.size() * oracle_iters.size(); }
};

// Relative table paths are resolved against base_dir.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
SweepSpec parse_sweep_spec(std::string_view text, const std::filesystem::path& base_dir = {});
SweepSpec load_sweep_spec(const std::filesystem::path& path);

std::string to_ini(const RunConfig& c);
std::string to_ini(const SweepSpec& s);

std::vector<double> parse_double_list(std::string_view text);

std::unique_ptr<Problem> make_problem(const ProblemSpec& spec);
StepPolicy build_step(const StepConfig& s);
BlockOracle build_oracle(const OracleConfig& o);
OptimizerConfig build_optimizer(const RunConfig& c, std::uint64_t seed);

// Shortest decimal string that reads back to the same double.
std::string format_double(double v);

}  // namespace imuon::harness
