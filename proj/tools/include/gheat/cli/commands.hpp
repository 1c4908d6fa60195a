#pragma once

// The solve, converge and gexp commands. Results go to `out` as single-line
// JSON, failures to `err` as single-line JSON; the exit code is the only
// failure-class channel.

#include <functional>
#include <iosfwd>

#include "gheat/cli/run_config.hpp"

namespace gheat::cli {

enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_iteration_cap = 2, exit_config = 3 };

/// Marches the configured problem; writes slice_n<step>.csv for each
/// requested time level, series.csv and run.json into the output directory.
int run_solve(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Convergence study over config.levels against the exact solution, or a
/// cached reference solution when none is known; writes convergence.csv.
int run_converge(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Upper and lower G-expectation of the configured payoff.
int run_gexp(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Runs `body`, translating exceptions into an exit code and a JSON error.
int guarded(const std::function<int()>& body, std::ostream& err);

}  // namespace gheat::cli
