// SPDX-License-Identifier: Apache-2.0
//
// Exact simulation of the process with immigration in three variants:
//
//   UnstoppedZ  Z_n = Σ_{i≤Z_{n-1}} ξ_{ni} + Y_n, never stopped
//   StoppedZ    the same chain absorbed at its first zero
//   GatedW      W_n = 0 if Λ_n = 0, else Λ_n + Y_n, with Λ_n the offspring
//               of W_{n-1}; absorbed at zero
//
// Replicate r of a batch always uses Stream::derive(seed, r), and batch
// results are merged in replicate order, so outputs do not depend on the
// number of threads.
#pragma once

#include "gwi/laws.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gwi {

enum class Model { UnstoppedZ, StoppedZ, GatedW };

const char* to_string(Model m) noexcept;
/// Accepts "z", "stopped", "gated" (and the enum spellings).
std::optional<Model> parse_model(const std::string& s);

enum class LifeStatus { Died, CensoredHorizon, CensoredCap };

inline constexpr std::uint64_t kDefaultCap = 1'000'000'000;

struct Trajectory {
    Model model = Model::StoppedZ;
    std::vector<std::uint64_t> values;  // X_0.. up to the horizon or the cap event
    Eigen::Index life = -1;             // first n with X_n = 0; -1 if none observed
    LifeStatus status = LifeStatus::CensoredHorizon;
    Eigen::Index cap_time = -1;         // generation at which the cap was exceeded
};

Trajectory simulate(const LawSamplers& laws, Model model, Eigen::Index horizon, std::uint64_t cap,
                    Stream& rng);
inline Trajectory simulate(const LawParams& params, Model model, Eigen::Index horizon, std::uint64_t cap,
                           Stream& rng) {
    return simulate(LawSamplers(params), model, horizon, cap, rng);
}

struct BatchStats {
    Model model = Model::StoppedZ;
    std::uint64_t seed = 0;
    std::uint64_t reps = 0;
    Eigen::Index horizon = 0;
    std::uint64_t cap = kDefaultCap;
    // Per generation n = 0..horizon:
    std::vector<std::uint64_t> positive;        // X_n > 0, observed below the cap
    std::vector<std::uint64_t> censored_by;     // cap exceeded at some m <= n
    std::vector<std::uint64_t> life_exceeds;    // no zero among X_0..X_n (censored count here)
    std::uint64_t censored = 0;                 // total cap-censored replicates

    /// Cap-censored replicates are counted as alive.
    std::uint64_t survival_count(Eigen::Index n) const { return positive[n] + censored_by[n]; }
    double survival(Eigen::Index n) const;
    double survival_se(Eigen::Index n) const;
    double life_tail(Eigen::Index n) const;
    double life_tail_se(Eigen::Index n) const;
    /// reps - positive - censored; zero-valued (dead or, for UnstoppedZ, empty) replicates.
    std::uint64_t zero_count(Eigen::Index n) const { return reps - positive[n] - censored_by[n]; }
};

struct BatchOptions {
    std::uint64_t reps = 100000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::uint64_t cap = kDefaultCap;
};

BatchStats estimate_survival(const LawParams& params, Model model, Eigen::Index horizon,
                             const BatchOptions& opt);

/// Upper bound on the probability that a replicate censored at the cap
/// would have been at zero at some generation <= horizon: a population of
/// more than `cap` individuals reaches zero within m generations with
/// probability at most m F_m(0)^{cap+1}. Counting censored replicates as
/// alive therefore biases survival by at most this amount.
double censoring_bias_bound(const LawParams& params, Eigen::Index horizon, std::uint64_t cap);

struct McEstimate {
    double value = 0;
    double se = 0;
    std::uint64_t conditioning_count = 0;  // replicates with X_n > 0
    std::uint64_t censored = 0;
};

/// E[exp(-scale X_n) | X_n > 0]. Replicates censored at the cap are
/// positive and contribute exp(-scale X_n) <= exp(-scale cap), taken as 0.
/// Throws DegenerateConditioning when no replicate is positive at n.
McEstimate conditional_laplace_mc(const LawParams& params, Model model, Eigen::Index n, double scale,
                                  const BatchOptions& opt);

/// One estimate per scale from the same replicates.
std::vector<McEstimate> conditional_laplace_mc(const LawParams& params, Model model, Eigen::Index n,
                                               const std::vector<double>& scales, const BatchOptions& opt);

struct LifeTable {
    std::uint64_t reps = 0;
    std::vector<double> tail;            // empirical P(ζ > n), n = 0..horizon
    std::vector<double> se;
    std::vector<std::uint64_t> censored; // cap-censored by generation n
};

/// Empirical tail of the life period ζ = min{n >= 0 : X_n = 0}.
LifeTable sample_life_period(const LawParams& params, Model model, std::uint64_t reps, Eigen::Index horizon,
                             std::uint64_t seed, unsigned threads = 1);

}  // namespace gwi
