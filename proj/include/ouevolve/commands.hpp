// SPDX-License-Identifier: MIT
#pragma once

#include <string>

#include "ouevolve/config.hpp"

namespace ouevolve {

// Process exit codes.
inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// U, g and Q_{t,s} at the configured (t, s) plus the constants scan.
/// Writes propagator.json, U.csv, Q_ts.csv and g.csv.
int cmd_propagator(const RunConfig& cfg, const std::string& out_dir);

/// system: wholespace, bounded or exterior. Writes initial.csv,
/// solution.csv and diagnostics.json.
int cmd_evolve(const RunConfig& cfg, const std::string& system, const std::string& out_dir);

/// suite: law, residuals, rates, lemma32, montecarlo or all. Writes
/// verify.json (and rates_*.csv for the rates suite); returns kExitPass only
/// when every check passes.
int cmd_verify(const RunConfig& cfg, const std::string& suite, const std::string& out_dir);

/// Full command line handling, including the mapping of errors to exit codes.
int run_cli(int argc, const char* const* argv);

}  // namespace ouevolve
