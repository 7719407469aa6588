#pragma once

// Subcommands of the gridsync tool. Each returns the process exit code:
// 0 success, 1 invalid input or usage, 2 I/O failure.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gridsync::cli {

enum ExitCode : int { kOk = 0, kInvalid = 1, kIoError = 2 };

/// Environment variable that, when set, prefixes relative --out paths.
inline constexpr const char* kOutputRootEnv = "GRIDSYNC_OUTPUT_ROOT";

std::filesystem::path resolve_output_dir(const std::string& out);

/// Seed of sweep row `index`: base seed XOR splitmix64(index).
std::uint64_t sweep_seed(std::uint64_t base_seed, std::size_t index);

struct RunOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
};

/// Writes trace.csv, report.csv, resolved.config (and dispersion.csv for
/// washer runs) into out_dir.
int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);

struct SweepOptions {
    std::string config_path;
    std::string param;
    std::vector<std::string> values;
    std::string out_dir = "out";
    unsigned jobs = 1;
};

/// One run per value in <out>/<param>=<value>/, plus <out>/sweep.csv.
int cmd_sweep(const SweepOptions& opts, std::ostream& out, std::ostream& err);

struct AnalyzeOptions {
    std::string input_path;
    int bin_width = 1;
    std::optional<int> period;
    std::string out_dir = "out";
};

/// Writes <out>/profile.csv; prints the periodic-deviation score when a
/// period is given.
int cmd_analyze(const AnalyzeOptions& opts, std::ostream& out, std::ostream& err);

/// Full argv entry point (CLI11).
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace gridsync::cli
