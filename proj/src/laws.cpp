// SPDX-License-Identifier: Apache-2.0
#include "gwi/laws.hpp"
#include "gwi/errors.hpp"
#include "gwi/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace gwi {

namespace {

constexpr double kTableQuantile = 1e-12;
constexpr std::size_t kTableCap = 1u << 16;
constexpr std::uint64_t kSmallSum = 24;
// A binomial split costs about as much as this many single draws.
constexpr std::uint64_t kSplitCost = 16;

bool in_unit_interval(double x) { return x > 0.0 && x <= 1.0; }

// S(0..K) of the offspring law by S(1) = κ1ν, S(k+1) = S(k)(k-ν)/(k+1).
std::vector<double> offspring_survival_table(const LawParams& p) {
    std::vector<double> s{1.0 - p.kappa1};
    double cur = p.kappa1 * p.nu;
    for (std::size_t k = 1; s.size() < kTableCap; ++k) {
        s.push_back(cur);
        if (cur <= kTableQuantile) break;
        cur *= (static_cast<double>(k) - p.nu) / static_cast<double>(k + 1);
    }
    return s;
}

std::vector<double> sibuya_survival_table(double delta) {
    std::vector<double> s{1.0};
    double cur = 1.0;
    for (std::size_t k = 1; s.size() < kTableCap; ++k) {
        cur *= 1.0 - delta / static_cast<double>(k);
        s.push_back(cur);
        if (cur <= kTableQuantile) break;
    }
    return s;
}

}  // namespace

LawParams validate_params(double nu, double theta, double delta, double kappa0, double kappa1,
                          double kappa2) {
    using K = ParamErrorKind;
    if (!in_unit_interval(nu)) throw ParamError(K::OutOfRange, "nu", "(0, 1]");
    if (!in_unit_interval(theta)) throw ParamError(K::OutOfRange, "theta", "(0, 1]");
    if (!in_unit_interval(delta)) throw ParamError(K::OutOfRange, "delta", "(0, 1]");
    if (!in_unit_interval(kappa0)) throw ParamError(K::OutOfRange, "kappa0", "(0, 1]");
    if (!(kappa1 > 0.0) || !std::isfinite(kappa1)) throw ParamError(K::OutOfRange, "kappa1", "> 0");
    if (!(kappa2 > 0.0) || !std::isfinite(kappa2)) throw ParamError(K::OutOfRange, "kappa2", "> 0");
    if (1.0 - kappa1 * (1.0 + nu) < 0.0) throw ParamError(K::NonPmf, "kappa1", "<= 1/(1+nu)");

    LawParams p{nu, theta, delta, kappa0, kappa1, kappa2};
    // Numerical certificate: the first 10^3 offspring coefficients are
    // nonnegative and the partial means stay below 1.
    const PmfTable off = offspring_pmf(p, 1000);
    CompensatedSum<> mean;
    for (Eigen::Index k = 0; k < off.size(); ++k) {
        if (off[k] < 0.0) throw ParamError(K::NonPmf, "p_" + std::to_string(k), ">= 0");
        mean.add(static_cast<double>(k) * off[k]);
    }
    if (mean.value() > 1.0 + 1e-12) throw ParamError(K::NonPmf, "mean", "<= 1");
    return p;
}

double offspring_survival(const LawParams& p, double k) {
    if (k < 1.0) return 1.0 - p.kappa1;
    if (p.nu >= 1.0) return k < 2.0 ? p.kappa1 : 0.0;
    return p.kappa1 * p.nu * std::exp(log_gamma_ratio(std::floor(k), -p.nu, 1.0) - std::lgamma(1.0 - p.nu));
}

double sibuya_survival(double delta, double k) {
    if (k < 1.0) return 1.0;
    if (delta >= 1.0) return 0.0;
    return std::exp(log_gamma_ratio(std::floor(k), 1.0 - delta, 1.0) - std::lgamma(1.0 - delta));
}

PmfTable offspring_pmf(const LawParams& p, Eigen::Index n_max) {
    PmfTable t;
    t.probs = Eigen::ArrayXd::Zero(n_max + 1);
    t.probs[0] = p.kappa1;
    double surv_prev = 1.0 - p.kappa1;  // S(k-1)
    for (Eigen::Index k = 1; k <= n_max; ++k) {
        double surv;
        if (k == 1) {
            t.probs[1] = 1.0 - p.kappa1 * (1.0 + p.nu);
            surv = p.kappa1 * p.nu;
        } else {
            t.probs[k] = surv_prev * (1.0 + p.nu) / static_cast<double>(k);
            surv = surv_prev * (static_cast<double>(k - 1) - p.nu) / static_cast<double>(k);
        }
        surv_prev = surv;
    }
    t.truncation_mass = n_max == 0 ? 1.0 - p.kappa1 : std::max(0.0, surv_prev);
    t.tail_start = std::min<Eigen::Index>(2, n_max + 1);
    const double nu = p.nu;
    t.ratio_rule = [nu](Eigen::Index k) {
        return (static_cast<double>(k) - 1.0 - nu) / static_cast<double>(k + 1);
    };
    return t;
}

PmfTable immigration_pmf(const LawParams& p, Eigen::Index n_max) {
    // exp(c(s)) with c(s) = -κ2 (1-s)^θ = -κ2 + Σ_{k≥1} c_k s^k, c_k ≥ 0;
    // n b_n = Σ_{k=1}^n k c_k b_{n-k}.
    Eigen::ArrayXd kc(n_max + 1);
    kc[0] = 0.0;
    double c = p.kappa2 * p.theta;
    for (Eigen::Index k = 1; k <= n_max; ++k) {
        kc[k] = static_cast<double>(k) * c;
        c *= (static_cast<double>(k) - p.theta) / static_cast<double>(k + 1);
    }
    PmfTable t;
    t.probs = Eigen::ArrayXd::Zero(n_max + 1);
    t.probs[0] = std::exp(-p.kappa2);
    for (Eigen::Index n = 1; n <= n_max; ++n) {
        CompensatedSum<> acc;
        for (Eigen::Index k = 1; k <= n; ++k) {
            if (kc[k] == 0.0) break;
            acc.add(kc[k] * t.probs[n - k]);
        }
        t.probs[n] = acc.value() / static_cast<double>(n);
    }
    t.truncation_mass = std::max(0.0, 1.0 - compensated_sum(t.probs));
    t.tail_start = n_max + 1;
    return t;
}

PmfTable initial_pmf(const LawParams& p, Eigen::Index n_max) {
    PmfTable t;
    t.probs = Eigen::ArrayXd::Zero(n_max + 1);
    t.probs[0] = 1.0 - p.kappa0;
    double surv = 1.0;  // Sibuya P(Y > k-1)
    for (Eigen::Index k = 1; k <= n_max; ++k) {
        t.probs[k] = p.kappa0 * surv * p.delta / static_cast<double>(k);
        surv *= 1.0 - p.delta / static_cast<double>(k);
    }
    t.truncation_mass = n_max == 0 ? p.kappa0 : std::max(0.0, p.kappa0 * surv);
    t.tail_start = std::min<Eigen::Index>(1, n_max + 1);
    const double delta = p.delta;
    t.ratio_rule = [delta](Eigen::Index k) {
        return (static_cast<double>(k) - delta) / static_cast<double>(k + 1);
    };
    return t;
}

// ---------------------------------------------------------------------------

PowerTailSampler::PowerTailSampler(std::vector<double> table, std::function<double(double)> log_survival,
                                   double tail_const, double tail_power)
    : surv_(std::move(table)), log_survival_fn_(std::move(log_survival)),
      tail_const_(tail_const), tail_power_(tail_power) {}

double PowerTailSampler::survival(std::uint64_t k) const {
    if (k < surv_.size()) return surv_[k];
    return std::exp(log_survival_fn_(static_cast<double>(k)));
}

std::uint64_t PowerTailSampler::invert(double v, std::size_t from) const {
    if (v >= surv_.back()) {
        // Galloping search from `from`; most draws end within a few steps.
        std::size_t lo = from, hi = from, step = 1;
        while (hi < surv_.size() && surv_[hi] > v) {
            lo = hi + 1;
            hi += step;
            step <<= 1;
        }
        hi = std::min(hi, surv_.size() - 1);
        auto it = std::partition_point(surv_.begin() + static_cast<std::ptrdiff_t>(lo),
                                       surv_.begin() + static_cast<std::ptrdiff_t>(hi),
                                       [v](double s) { return s > v; });
        return static_cast<std::uint64_t>(it - surv_.begin());
    }
    // Tail: the answer exceeds K = table_size() - 1.
    const double log_v = std::log(v);
    const double k_min = static_cast<double>(surv_.size());
    double guess = std::pow(tail_const_ / v, 1.0 / tail_power_);
    if (!(guess >= k_min)) guess = k_min;
    constexpr double kExactLimit = 0x1.0p52;
    if (guess > kExactLimit) {
        return guess >= 1.8e19 ? kSaturated : static_cast<std::uint64_t>(std::llround(guess));
    }
    auto above = [&](double k) { return log_survival_fn_(k) > log_v; };  // S(k) > v
    // Bracket: S(lo) > v >= S(hi), then bisect.
    double lo = std::max(k_min - 1.0, std::floor(guess) - 1.0);
    double hi = std::floor(guess);
    double step = 1.0;
    while (lo >= k_min && !above(lo)) {
        hi = lo;
        lo = std::max(k_min - 1.0, lo - step);
        step *= 2.0;
    }
    step = 1.0;
    while (above(hi)) {
        lo = hi;
        hi += step;
        step *= 2.0;
        if (hi > kExactLimit) return static_cast<std::uint64_t>(hi);
    }
    while (hi - lo > 1.0) {
        const double mid = std::floor(0.5 * (lo + hi));
        if (mid >= k_min && above(mid))
            lo = mid;
        else if (mid < k_min)
            lo = mid;
        else
            hi = mid;
    }
    return static_cast<std::uint64_t>(hi);
}

OffspringSampler::OffspringSampler(const LawParams& p)
    : inv_(offspring_survival_table(p),
           [p](double k) {
               return std::log(p.kappa1 * p.nu) + log_gamma_ratio(k, -p.nu, 1.0) - std::lgamma(1.0 - p.nu);
           },
           p.nu < 1.0 ? p.kappa1 * p.nu / std::tgamma(1.0 - p.nu) : 0.0, 1.0 + p.nu) {
    // P(ξ = k | ξ >= k): κ1, then p1 / (1 - κ1), then (1+ν)/k.
    split_prob_.push_back(p.kappa1);
    split_prob_.push_back((1.0 - p.kappa1 * (1.0 + p.nu)) / (1.0 - p.kappa1));
    for (std::size_t k = 2; k < inv_.table_size(); ++k)
        split_prob_.push_back(std::min(1.0, (1.0 + p.nu) / static_cast<double>(k)));
}

std::uint64_t OffspringSampler::sum(std::uint64_t count, Stream& rng) const {
    std::uint64_t total = 0;
    if (count <= kSmallSum) {
        for (std::uint64_t i = 0; i < count; ++i) total = saturating_add(total, inv_(rng));
        return total;
    }
    std::uint64_t remaining = count;
    std::size_t k = 0;
    for (; k < split_prob_.size() && remaining > kSmallSum && remaining > kSplitCost * k; ++k) {
        const double prob = split_prob_[k];
        std::uint64_t c;
        if (prob >= 1.0) {
            c = remaining;
        } else if (prob <= 0.0) {
            c = 0;
        } else {
            std::binomial_distribution<std::uint64_t> bin(remaining, prob);
            c = bin(rng);
        }
        if (c > 0 && k > 0) total = saturating_add(total, c > kSaturated / k ? kSaturated : c * k);
        remaining -= c;
    }
    if (remaining > 0) {
        // ξ >= k for the leftovers: invert S on (0, S(k-1)).
        const double tail = inv_.survival(k - 1);
        for (std::uint64_t i = 0; i < remaining; ++i)
            total = saturating_add(total, inv_.invert(rng.uniform_open() * tail, k));
    }
    return total;
}

InitialSampler::InitialSampler(const LawParams& p)
    : kappa0_(p.kappa0),
      sibuya_(sibuya_survival_table(p.delta),
              [d = p.delta](double k) { return log_gamma_ratio(k, 1.0 - d, 1.0) - std::lgamma(1.0 - d); },
              p.delta < 1.0 ? 1.0 / std::tgamma(1.0 - p.delta) : 0.0, p.delta) {}

std::uint64_t InitialSampler::operator()(Stream& rng) const {
    const double v = rng.uniform_open();
    if (v >= kappa0_) return 0;
    return sibuya_.invert(v / kappa0_);
}

ImmigrationSampler::ImmigrationSampler(const LawParams& p)
    : theta_(p.theta), kappa2_(p.kappa2), rate_scale_(std::pow(p.kappa2, 1.0 / p.theta)) {}

std::uint64_t ImmigrationSampler::operator()(Stream& rng) const {
    if (theta_ >= 1.0) return poisson_draw(kappa2_, rng);
    return poisson_draw(rate_scale_ * stable_positive(theta_, rng), rng);
}

std::uint64_t poisson_draw(double rate, Stream& rng) {
    if (!(rate > 0.0)) return 0;
    if (rate > 1e18) return kSaturated;
    constexpr double kPiece = 0x1.0p40;
    std::uint64_t total = 0;
    while (rate > kPiece) {
        std::poisson_distribution<long long> d(kPiece);
        total += static_cast<std::uint64_t>(d(rng));
        rate -= kPiece;
    }
    std::poisson_distribution<long long> d(rate);
    return total + static_cast<std::uint64_t>(d(rng));
}

double stable_positive(double theta, Stream& rng) {
    if (theta >= 1.0)
        throw NumericError(ErrorCode::DegenerateTheta, "theta = 1 is the degenerate law S = 1; use Poisson directly");
    if (!(theta > 0.0)) throw NumericError(ErrorCode::InvalidArgument, "theta must lie in (0, 1)");
    const double u = std::numbers::pi * rng.uniform_open();
    const double e = -std::log(rng.uniform_open());
    const double r = (1.0 - theta) / theta;
    const double log_s = std::log(std::sin(theta * u)) + r * std::log(std::sin((1.0 - theta) * u)) -
                         std::log(std::sin(u)) / theta - r * std::log(e);
    const double s = std::exp(log_s);
    return std::isfinite(s) ? s : std::numeric_limits<double>::max();
}

std::uint64_t sample_offspring(const LawParams& params, Stream& rng) { return OffspringSampler(params)(rng); }
std::uint64_t sample_immigration(const LawParams& params, Stream& rng) { return ImmigrationSampler(params)(rng); }
std::uint64_t sample_initial(const LawParams& params, Stream& rng) { return InitialSampler(params)(rng); }

}  // namespace gwi
