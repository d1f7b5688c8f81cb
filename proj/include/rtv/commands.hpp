#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rtv/config.hpp"

namespace rtv {

struct CommandOptions {
    std::string out_dir;  ///< overrides output.directory when non-empty
    int threads = 0;      ///< 0 = hardware concurrency
    std::uint64_t seed = 1;
};

struct DispersionRow {
    double k = 0.0;
    int n = 0;
    double lambda_n = 0.0;
    double residual = 0.0;
    double coercivity_margin = 0.0;
    int N_eps_star = 0;
};

std::vector<DispersionRow> dispersion_rows(const RunConfig& config, double k);

struct VerifyCheck {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

/// Invariant suite for one wavenumber.
std::vector<VerifyCheck> verify_checks(const RunConfig& config, double k, std::uint64_t seed);

/// Writes text to path through a temporary file and a rename.
void write_atomic(const std::string& path, const std::string& text);

const std::vector<std::string>& command_names();

/// Dispatches one command; returns the process exit code (errors propagate as exceptions).
int run_command(const std::string& command, const RunConfig& config, const CommandOptions& options,
                std::ostream& out);

}  // namespace rtv
