// SPDX-License-Identifier: Apache-2.0
//
// The invariant suite behind `gwi verify`: exact identities, oracle
// agreement between renewal, DP and Monte Carlo, and sampler checks on the
// standard regime grid. Output depends on the seed only, never on threads.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gwi {

struct VerifyOptions {
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::uint64_t reps = 20000;   // Monte Carlo replicates per parameter set
    long horizon = 20;            // generations for DP and Monte Carlo
    long dp_cap = 1024;           // DP state-space truncation M
};

struct VerifyCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

std::vector<VerifyCheck> run_invariant_suite(const VerifyOptions& opt);

}  // namespace gwi
