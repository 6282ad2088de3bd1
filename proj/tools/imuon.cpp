#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "imuon/harness/commands.hpp"

namespace fs = std::filesystem;
using namespace imuon::harness;

namespace {

std::optional<fs::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"imuon: inexact LMO optimizers, sweeps and bound checks"};
  app.require_subcommand(1);

  std::string config, output, aggregate, trace, report, sweep_csv;
  std::optional<std::size_t> workers;

  auto* run = app.add_subcommand("run", "run a config and write the trace CSV");
  run->add_option("config", config, "run config (INI)")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", output, "trace CSV path (default: config output, else stdout)");
  run->add_option("-j,--workers", workers, "worker threads");

  auto* sweep = app.add_subcommand("sweep", "run a hyperparameter grid");
  sweep->add_option("spec", config, "sweep spec (INI)")->required()->check(CLI::ExistingFile);
  sweep->add_option("-o,--output", output, "per-seed summary CSV");
  sweep->add_option("-a,--aggregate", aggregate, "per-cell median CSV");
  sweep->add_option("-j,--workers", workers, "worker threads");

  auto* coupling = app.add_subcommand("coupling", "step size / precision coupling verdict");
  coupling->add_option("sweep_csv", sweep_csv, "sweep summary CSV")->required()->check(CLI::ExistingFile);

  MeasureDeltaSpec md;
  std::string iters;
  auto* measure = app.add_subcommand("measure-delta", "measured oracle error over random matrices");
  measure->add_option("--rows", md.rows)->capture_default_str();
  measure->add_option("--cols", md.cols)->capture_default_str();
  measure->add_option("--smin", md.smin)->capture_default_str();
  measure->add_option("--smax", md.smax)->capture_default_str();
  measure->add_option("--trials", md.trials)->capture_default_str();
  measure->add_option("--seed", md.seed)->capture_default_str();
  measure->add_option("--kind", md.kind, "newton_schulz | muon | polar_express | table")->capture_default_str();
  measure->add_option("--iterations", iters, "comma separated, default 1,3,5,8");
  measure->add_option("--normalization", md.normalization)->capture_default_str();
  measure->add_option("--table", md.table, "coefficient table for kind=table");
  measure->add_option("-o,--output", output);

  auto* verify = app.add_subcommand("verify", "check a trace against the bounds");
  verify->add_option("config", config)->required()->check(CLI::ExistingFile);
  verify->add_option("trace", trace)->required()->check(CLI::ExistingFile);
  verify->add_option("-r,--report", report, "bound report CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  if (*run) return cmd_run(config, opt_path(output), std::cout, std::cerr, workers);
  if (*sweep) return cmd_sweep(config, opt_path(output), opt_path(aggregate), std::cout, std::cerr, workers);
  if (*coupling) return cmd_coupling(sweep_csv, std::cout, std::cerr);
  if (*measure) {
    if (!iters.empty()) {
      md.iterations.clear();
      std::size_t pos = 0;
      try {
        while (pos <= iters.size()) {
          const auto next = iters.find(',', pos);
          md.iterations.push_back(std::stoi(iters.substr(pos, next - pos)));
          if (next == std::string::npos) break;
          pos = next + 1;
        }
      } catch (const std::exception&) {
        std::cerr << "config error: bad --iterations list '" << iters << "'\n";
        return kExitConfig;
      }
    }
    return cmd_measure_delta(md, opt_path(output), std::cout, std::cerr);
  }
  if (*verify) return cmd_verify(config, trace, opt_path(report), std::cout, std::cerr);
  return kExitConfig;
}
