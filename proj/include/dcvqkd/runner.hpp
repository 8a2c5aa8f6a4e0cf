#pragma once

// Batch orchestration behind the command-line subcommands. Each run writes
// <name>_results.csv and <name>_report.txt into the output directory.

#include "dcvqkd/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace dcvqkd {

/// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 2,
    kExitRuntime = 3,
};

struct RunOptions {
    std::filesystem::path out_dir = ".";
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;  ///< overrides montecarlo.seed
};

struct RunOutcome {
    int exit_code = kExitOk;
    std::filesystem::path csv;
    std::filesystem::path report;
    std::string summary;  ///< the report text
};

/// Distance sweep(s) of key rate and mode matching, one curve per configured beta2.
RunOutcome run_simulate(const Scenario& s, const RunOptions& opt);
/// Monte Carlo shot-noise calibration; exit code 0 iff |z| < 3.
RunOutcome run_calibrate(const Scenario& s, const RunOptions& opt);
/// Ranks the scenario's kernels by eta (descending, ties by name).
RunOutcome run_compare_kernels(const Scenario& s, const RunOptions& opt);
/// Sweeps the variable named in the sweep block.
RunOutcome run_sweep(const Scenario& s, const RunOptions& opt);

/// Receiver output time: the configured t_j or the eta-optimal one.
double resolve_sample_time(const Scenario& s, const BuiltScenario& b);

/// Formats with 12 significant digits ("%.12g").
std::string format_number(double v);

} // namespace dcvqkd
