#pragma once

// Subcommands of the `mfg` tool. Exit codes: 0 success, 1 usage or config
// error, 2 numerical failure (or a failed check in `verify`).

#include "mfg/io.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mfg::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_failure = 2;

struct CommandOptions {
    std::string config_path;
    std::optional<std::string> out_dir; // overrides output.directory
    std::optional<int> jobs;
    std::optional<std::uint64_t> seed;  // overrides config seed
    bool dump_matrix = false;
    std::string u_path; // verify
    std::string m_path; // verify
};

/// Reads MFG_LOG (error, info, debug; default error) and routes logs to stderr.
void configure_logging();

int cmd_solve(const CommandOptions& opts);
int cmd_verify(const CommandOptions& opts);
int cmd_mms(const CommandOptions& opts);
int cmd_jacobian_check(const CommandOptions& opts);
int cmd_sweep(const CommandOptions& opts);

struct VerifyRow {
    std::string check;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::string note;
};

/// Diagnostics of stored fields as table rows (used by `verify`). Fields that
/// solve only the lambda = 0 system are checked at lambda = 0, all others at 1.
std::vector<VerifyRow> verify_state(const RunConfig& config, const State& state);

/// Allowed defect for identities that hold only up to O(h^2):
/// max(1e-8, 5 h^2 scale).
double identity_budget(const GridSpec& grid, double scale);

struct SweepCell {
    double alpha = 0.0;
    double kappa = 0.0;
    double drift_amplitude = 1.0;
    bool success = false;
    double reached_lambda = 0.0;
    double min_m = 0.0;
    double sup_u = 0.0;
    double final_residual = 0.0;
    int iterations = 0;
    std::string failure;
};

/// Runs every (alpha, kappa, drift amplitude) cell on `jobs` worker threads.
/// Results are returned in row-major cell order regardless of scheduling.
std::vector<SweepCell> run_sweep(const RunConfig& config, int jobs);

} // namespace mfg::cli
