#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace modediag::cli {

struct Options {
    std::string config;
    std::optional<std::string> out;        ///< overrides the config's output directory
    std::optional<std::uint64_t> seed;
    std::optional<int> runs;
    int jobs = 0;                          ///< 0: machine parallelism
    std::optional<double> tol;
};

enum ExitCode : int { kSuccess = 0, kValidation = 1, kNumerical = 2 };

/// Commands: check, synthesize, thresholds, simulate, montecarlo, invalidate.
int run(const std::string& command, const Options& options, std::ostream& out, std::ostream& err);

}  // namespace modediag::cli
