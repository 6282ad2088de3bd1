#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "imuon/harness/experiments.hpp"

namespace imuon::harness {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerifyFailed = 1,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitMissingCertificate = 4,
};

// Each command reports problems on `err` and returns an ExitCode.
// Empty output paths fall back to the config's output, then to `out`.

int cmd_run(const std::filesystem::path& config, const std::optional<std::filesystem::path>& output,
            std::ostream& out, std::ostream& err, std::optional<std::size_t> workers = std::nullopt);

int cmd_sweep(const std::filesystem::path& sweep, const std::optional<std::filesystem::path>& output,
              const std::optional<std::filesystem::path>& aggregate_output, std::ostream& out, std::ostream& err,
              std::optional<std::size_t> workers = std::nullopt);

// Exit 1 on a FAIL verdict.
int cmd_coupling(const std::filesystem::path& sweep_csv, std::ostream& out, std::ostream& err);

int cmd_measure_delta(const MeasureDeltaSpec& spec, const std::optional<std::filesystem::path>& output,
                      std::ostream& out, std::ostream& err);

int cmd_verify(const std::filesystem::path& config, const std::filesystem::path& trace_csv,
               const std::optional<std::filesystem::path>& report_csv, std::ostream& out, std::ostream& err);

}  // namespace imuon::harness
