#pragma once
#include <string>

#include "vp/config.hpp"

namespace vp {

// Exit codes: 0 success, 1 configuration error, 2 invariant/assertion
// violation, 3 solver failure.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInvariant = 2;
constexpr int kExitSolver = 3;

// Dispatch a validated configuration: writes the manifest plus the mode's
// CSV/JSON artifacts into the output directory and returns an exit code.
int run_config(const RunConfig& config);

// Convenience wrapper mapping exceptions (including ConfigError from parsing)
// onto exit codes; messages go to stderr.
int run_config_file(const std::string& config_path, const std::string& mode_override,
                    const std::string& out_dir_override, int workers_override,
                    long seed_override);

}  // namespace vp
