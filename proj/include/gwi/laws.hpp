// SPDX-License-Identifier: Apache-2.0
//
// The three distribution families of the model:
//
//   offspring    F(s)  = s + κ1 (1 - s)^{1+ν}
//   immigration  B(s)  = exp(-κ2 (1 - s)^θ)
//   initial      G0(s) = 1 - κ0 (1 - s)^δ
//
// with exact coefficient tables and exact samplers for each.
#pragma once

#include "gwi/rng.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace gwi {

struct LawParams {
    double nu = 1.0;
    double theta = 1.0;
    double delta = 1.0;
    double kappa0 = 1.0;
    double kappa1 = 0.5;
    double kappa2 = 1.0;

    /// κ2 / (κ1 ν).
    double sigma() const noexcept { return kappa2 / (kappa1 * nu); }
};

/// Certifies a raw parameter set. Throws ParamError naming the first
/// violated constraint: OutOfRange for the box constraints, NonPmf when
/// p1 = 1 - κ1(1+ν) < 0.
LawParams validate_params(double nu, double theta, double delta, double kappa0, double kappa1,
                          double kappa2);
inline LawParams validate_params(const LawParams& p) {
    return validate_params(p.nu, p.theta, p.delta, p.kappa0, p.kappa1, p.kappa2);
}

/// Truncated probability mass function. Entries at index >= tail_start obey
/// probs[k+1] = probs[k] * ratio_rule(k); families without a closed-form
/// successor ratio leave tail_start == size() and ratio_rule empty.
struct PmfTable {
    Eigen::ArrayXd probs;
    Eigen::Index tail_start = 0;
    std::function<double(Eigen::Index)> ratio_rule;
    double truncation_mass = 0.0;

    Eigen::Index size() const noexcept { return probs.size(); }
    double operator[](Eigen::Index k) const { return probs[k]; }
};

PmfTable offspring_pmf(const LawParams& params, Eigen::Index n_max);
PmfTable immigration_pmf(const LawParams& params, Eigen::Index n_max);
PmfTable initial_pmf(const LawParams& params, Eigen::Index n_max);

/// P(ξ > k) for the offspring law.
double offspring_survival(const LawParams& params, double k);
/// P(Y > k) for the Sibuya(δ) law, ∏_{j≤k} (1 - δ/j).
double sibuya_survival(double delta, double k);

/// Saturation value returned by samplers whose exact draw exceeds 2^64 - 1.
inline constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

inline std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) noexcept {
    return a > kSaturated - b ? kSaturated : a + b;
}

/// Inverse-survival sampler for a law supported on {0, 1, ...} whose
/// survival function S(k) = P(X > k) is known in closed form with a power
/// tail S(k) ~ C k^{-p}. S is cached up to the 1 - 1e-12 quantile (or a
/// table cap); beyond that the draw is located from the asymptotic inverse
/// and corrected with exact values of S.
class PowerTailSampler {
public:
    /// `table` holds S(0..K) computed by the family's exact recurrence;
    /// `log_survival(k)` must be exact for k > K, and `tail_const`,
    /// `tail_power` give the starting guess k ≈ (C / v)^{1/p}.
    PowerTailSampler(std::vector<double> table, std::function<double(double)> log_survival,
                     double tail_const, double tail_power);

    /// min{k : S(k) <= v} for v in (0, 1). `from` is a known lower bound
    /// on the answer (S(from - 1) > v).
    std::uint64_t invert(double v, std::size_t from = 0) const;
    std::uint64_t operator()(Stream& rng) const { return invert(rng.uniform_open()); }

    /// S(k) for k inside the cached table, exact evaluation beyond.
    double survival(std::uint64_t k) const;
    std::size_t table_size() const noexcept { return surv_.size(); }

private:
    std::vector<double> surv_;
    std::function<double(double)> log_survival_fn_;
    double tail_const_;
    double tail_power_;
};

class OffspringSampler {
public:
    explicit OffspringSampler(const LawParams& params);

    std::uint64_t operator()(Stream& rng) const { return inv_(rng); }

    /// Exact draw of the sum of `count` i.i.d. offspring. Large counts are
    /// split atom by atom (k = 0, 1, ...) by conditional binomials while a
    /// split is cheaper than drawing the survivors one by one; those left
    /// are drawn from the tail beyond the last atom.
    std::uint64_t sum(std::uint64_t count, Stream& rng) const;

    const PowerTailSampler& inverse() const noexcept { return inv_; }

private:
    PowerTailSampler inv_;
    std::vector<double> split_prob_;  // p_k / S(k-1)
};

class InitialSampler {
public:
    explicit InitialSampler(const LawParams& params);
    std::uint64_t operator()(Stream& rng) const;

private:
    double kappa0_;
    PowerTailSampler sibuya_;
};

class ImmigrationSampler {
public:
    explicit ImmigrationSampler(const LawParams& params);
    std::uint64_t operator()(Stream& rng) const;

private:
    double theta_;
    double kappa2_;
    double rate_scale_;  // κ2^{1/θ}
};

/// Poisson(rate) draw. Rates above 2^40 are split into exact Poisson
/// pieces; rates above 1e18 saturate.
std::uint64_t poisson_draw(double rate, Stream& rng);

/// Positive θ-stable variate with E exp(-λS) = exp(-λ^θ), 0 < θ < 1, by
/// Kanter's representation. Throws DegenerateTheta for θ >= 1.
double stable_positive(double theta, Stream& rng);

/// Samplers for all three families, built once per parameter set.
struct LawSamplers {
    explicit LawSamplers(const LawParams& p) : params(p), offspring(p), immigration(p), initial(p) {}
    LawParams params;
    OffspringSampler offspring;
    ImmigrationSampler immigration;
    InitialSampler initial;
};

// One-shot conveniences; they rebuild the cached tables on every call.
std::uint64_t sample_offspring(const LawParams& params, Stream& rng);
std::uint64_t sample_immigration(const LawParams& params, Stream& rng);
std::uint64_t sample_initial(const LawParams& params, Stream& rng);

}  // namespace gwi
