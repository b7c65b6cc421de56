#pragma once

#include <string>
#include <vector>

#include "fc/harness.hpp"

namespace fc {

enum class OutputFormat { Csv, Svg, Both };

struct CliConfig {
    RunConfig run;
    std::string out_prefix = "fc_run";
    OutputFormat format = OutputFormat::Both;
    bool log_scale = true;
    long sweep_seeds = 0; // 0 = single run
    bool help = false;
};

// Parses the flag list; unknown flags, missing values, and out-of-range
// values are all collected and reported together in one UsageError.
CliConfig parse_args(const std::vector<std::string>& args);

std::string usage_text();

// exit codes
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDegenerateInit = 3;
inline constexpr int kExitIo = 4;

// Full command-line entry point; never throws.
int run_cli(int argc, const char* const* argv);

} // namespace fc
