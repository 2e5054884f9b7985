#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "irhc/config.hpp"

namespace irhc {

// Exit codes: 0 success, 2 configuration error, 3 solver/controller failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

/// Runs the configured controller on the configured plant and writes
/// trace.csv + summary.json into out_dir.
int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed = std::nullopt);

/// Empirical stabilizability certification; writes certificate.json.
int cmd_certify(const std::string& config_path, const std::string& out_dir,
                std::optional<std::uint64_t> seed = std::nullopt);

/// Runs the seven benchmark cells (static feedback; RHC and IRHC at
/// N = 4, 5) and writes table1.csv + table1.md next to per-cell traces.
int cmd_table1(const std::string& config_path, const std::string& out_dir,
               std::optional<std::uint64_t> seed = std::nullopt);

/// Replays a trace against a certificate and writes bounds_report.json.
int cmd_check_bounds(const std::string& config_path, const std::string& out_dir,
                     std::optional<std::uint64_t> seed = std::nullopt);

/// Closed-loop run for any configured controller mode (shared by
/// simulate and table1).
RunRecord run_experiment(const ExperimentConfig& cfg);

}  // namespace irhc
