// SPDX-License-Identifier: Apache-2.0
//
// Exact evolution of the population law on the truncated state space
// {0, ..., M}. One step maps π to
//
//   λ = Σ_w π(w) P^{*w}      (offspring of w individuals, truncated)
//   π' = model rule applied to λ and the immigration p.m.f. b
//
// with P^{*w} precomputed for all w <= M. Mass pushed above M is dropped and
// counted. Since a population of x > M individuals must have all of its
// lines die out before the chain can be zero, the dropped mass can return
// to state 0 by generation n only with probability at most
// (n - m) F_{n-m}(0)^{M+1}; this gives a rigorous survival bracket far
// tighter than the raw dropped mass.
#pragma once

#include "gwi/laws.hpp"
#include "gwi/simulator.hpp"

#include <Eigen/Core>

#include <vector>

namespace gwi {

struct DpDistribution {
    Model model = Model::StoppedZ;
    Eigen::Index cap = 0;           // M
    std::vector<Eigen::VectorXd> pi;  // π_n over {0..M}, n = 0..horizon
    std::vector<double> lost_mass;  // cumulative dropped mass by generation n
    std::vector<double> dropped;    // mass dropped at generation n
    std::vector<double> leak;       // bound on dropped mass that is at 0 at generation n

    struct Bracket {
        double lower = 0;
        double upper = 0;
    };
    /// Rigorous bracket for P(X_n > 0), padded by kDpRoundoff.
    Bracket survival(Eigen::Index n) const;
};

/// Absolute allowance for floating-point error in the DP sums.
inline constexpr double kDpRoundoff = 1e-10;
/// Leak bound above which the cap is rejected.
inline constexpr double kDpLeakLimit = 1e-3;

class DpOracle {
public:
    /// M must be a power of two >= 64. Memory is (M+1)^2 doubles.
    DpOracle(const LawParams& params, Eigen::Index cap);

    /// Generations 0..n. The initial law is conditioned on X_0 > 0.
    /// Throws CapTooSmall when the leak bound exceeds kDpLeakLimit.
    DpDistribution run(Model model, Eigen::Index n, bool condition_positive = true) const;

    Eigen::Index cap() const noexcept { return cap_; }

private:
    LawParams params_;
    Eigen::Index cap_;
    Eigen::MatrixXd powers_;   // column w: P^{*w} on {0..M}
    Eigen::VectorXd immig_;    // b on {0..M}
    Eigen::VectorXd initial_;  // g on {0..M}
    double initial_tail_ = 0;  // mass of g above M
};

DpDistribution dp_distribution(const LawParams& params, Model model, Eigen::Index n, Eigen::Index cap);

struct SurvivalInterval {
    double lower = 0;
    double upper = 0;
    double lost_mass = 0;
    double leak = 0;
};

/// P(X_n > 0 | X_0 > 0) bracketed through the DP.
SurvivalInterval u_exact_dp(const LawParams& params, Model model, Eigen::Index n, Eigen::Index cap);

}  // namespace gwi
