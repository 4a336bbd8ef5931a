// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Commands: validate, pmf, simulate, survival,
// regime, limits, verify. Exit status 0 on success, 1 when a verification
// or numerical check fails, 2 on a configuration error.
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gwi {

inline constexpr const char* kVersion = "0.1.0";

/// Runs one command line; `args` excludes the program name. Primary output
/// goes to `out` (or the --out file), diagnostics and the manifest, when
/// there is no --out, to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gwi
