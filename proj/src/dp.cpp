// SPDX-License-Identifier: Apache-2.0
#include "gwi/dp.hpp"
#include "gwi/errors.hpp"
#include "gwi/numerics.hpp"
#include "gwi/pgf.hpp"

#include <algorithm>
#include <cmath>

namespace gwi {

namespace {

bool is_power_of_two(Eigen::Index m) { return m > 0 && (m & (m - 1)) == 0; }

}  // namespace

DpOracle::DpOracle(const LawParams& params, Eigen::Index cap) : params_(params), cap_(cap) {
    if (!is_power_of_two(cap) || cap < 64)
        throw NumericError(ErrorCode::InvalidArgument, "DP cap must be a power of two >= 64");
    const Eigen::Index width = cap + 1;
    const Eigen::VectorXd off = offspring_pmf(params, cap).probs.matrix();
    immig_ = immigration_pmf(params, cap).probs.matrix();
    const PmfTable init = initial_pmf(params, cap);
    initial_ = init.probs.matrix();
    initial_tail_ = init.truncation_mass;

    powers_.resize(width, width);
    powers_.col(0).setZero();
    powers_(0, 0) = 1.0;
    powers_.col(1) = off;
    FftConvolver fft;
    for (Eigen::Index w = 2; w < width; ++w) {
        const Eigen::Index h = w / 2;
        powers_.col(w) = fft.convolve(powers_.col(h), powers_.col(w - h), width);
    }
}

DpDistribution DpOracle::run(Model model, Eigen::Index n, bool condition_positive) const {
    if (n < 0) throw NumericError(ErrorCode::InvalidArgument, "DP horizon must be >= 0");
    const Eigen::Index width = cap_ + 1;
    DpDistribution out;
    out.model = model;
    out.cap = cap_;

    Eigen::VectorXd pi = initial_;
    double dropped0 = initial_tail_;
    if (condition_positive) {
        pi[0] = 0.0;
        pi /= params_.kappa0;
        dropped0 /= params_.kappa0;
    }
    out.pi.push_back(pi);
    out.dropped.push_back(dropped0);

    FftConvolver fft;
    for (Eigen::Index step = 1; step <= n; ++step) {
        const double mass_in = pi.sum();
        double absorbed = 0.0;
        Eigen::VectorXd v = pi;
        if (model != Model::UnstoppedZ) {
            absorbed = v[0];
            v[0] = 0.0;
        }
        Eigen::VectorXd lambda = powers_ * v;
        double gated_zero = 0.0;
        if (model == Model::GatedW) {
            gated_zero = lambda[0];
            lambda[0] = 0.0;
        }
        Eigen::VectorXd next = fft.convolve(lambda, immig_, width);
        next[0] += absorbed + gated_zero;
        out.dropped.push_back(std::max(0.0, mass_in - next.sum()));
        pi = std::move(next);
        out.pi.push_back(pi);
    }

    // F_k(0)^{M+1} for k = 0..n
    const auto tr = q_iterate<double>(params_, 0.0, n);
    std::vector<double> die(static_cast<std::size_t>(n) + 1);
    for (Eigen::Index k = 0; k <= n; ++k)
        die[static_cast<std::size_t>(k)] = std::exp(static_cast<double>(width) * std::log1p(-tr.q[k]));

    double lost = 0.0;
    for (Eigen::Index g = 0; g <= n; ++g) {
        lost += out.dropped[static_cast<std::size_t>(g)];
        out.lost_mass.push_back(lost);
        double leak = 0.0;
        for (Eigen::Index m = 0; m < g; ++m) {
            const double reach = static_cast<double>(g - m) * die[static_cast<std::size_t>(g - m)];
            leak += out.dropped[static_cast<std::size_t>(m)] * std::min(1.0, reach);
        }
        out.leak.push_back(leak);
        if (leak > kDpLeakLimit)
            throw NumericError(ErrorCode::CapTooSmall,
                               "mass above the cap can return to zero with probability up to " +
                                   std::to_string(leak) + " by generation " + std::to_string(g));
    }
    return out;
}

DpDistribution::Bracket DpDistribution::survival(Eigen::Index n) const {
    const std::size_t i = static_cast<std::size_t>(n);
    const double zero = pi[i][0];
    Bracket b;
    b.upper = std::min(1.0, 1.0 - zero + kDpRoundoff);
    b.lower = std::max(0.0, 1.0 - zero - leak[i] - kDpRoundoff);
    return b;
}

DpDistribution dp_distribution(const LawParams& params, Model model, Eigen::Index n, Eigen::Index cap) {
    return DpOracle(params, cap).run(model, n);
}

SurvivalInterval u_exact_dp(const LawParams& params, Model model, Eigen::Index n, Eigen::Index cap) {
    const DpDistribution d = dp_distribution(params, model, n, cap);
    const auto b = d.survival(n);
    return {b.lower, b.upper, d.lost_mass.back(), d.leak.back()};
}

}  // namespace gwi
