// SPDX-License-Identifier: Apache-2.0
//
// Reference computations used only by the tests: they share no code path
// with the library routines they check.
#pragma once

#include "gwi/laws.hpp"
#include "gwi/rng.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace gwi::oracle {

struct Interval {
    double lower = 0;
    double upper = 0;
    bool contains(double x) const { return lower <= x && x <= upper; }
};

// P(Z1 > 0, Z2 > 0 | Z0 = 1) by summing over the first generation z1 = ξ + Y.
// Only exact for δ = 1, where Z0 > 0 forces Z0 = 1. The mass of z1 > K is
// bracketed using P(Z2 > 0 | z1) ∈ [1 - F(0)^{K+1} B(0), 1].
inline Interval two_step_survival(const LawParams& p, int K = 2000) {
    if (p.delta != 1.0) throw std::invalid_argument("two_step_survival needs delta = 1");
    const auto off = offspring_pmf(p, K).probs;
    const auto imm = immigration_pmf(p, K).probs;
    const double f0 = off[0], b0 = imm[0];
    double inside = 0.0, mass = 0.0;
    for (int z = 0; z <= K; ++z) {
        double pz = 0.0;
        for (int i = 0; i <= z; ++i) pz += off[i] * imm[z - i];
        mass += pz;
        if (z > 0) inside += pz * (1.0 - std::pow(f0, z) * b0);
    }
    const double tail = std::max(0.0, 1.0 - mass);
    const double eps = 1e-14;
    return {inside + tail * (1.0 - std::pow(f0, K + 1) * b0) - eps, inside + tail + eps};
}

// Counts of draws on {0..k_max}; the last slot collects everything above.
inline std::vector<std::uint64_t> histogram(const std::function<std::uint64_t(Stream&)>& draw,
                                            std::uint64_t n, int k_max, std::uint64_t seed) {
    std::vector<std::uint64_t> h(static_cast<std::size_t>(k_max) + 2, 0);
    for (std::uint64_t i = 0; i < n; ++i) {
        Stream rng = Stream::derive(seed, i);
        const std::uint64_t x = draw(rng);
        ++h[x > static_cast<std::uint64_t>(k_max) ? static_cast<std::size_t>(k_max) + 1 : x];
    }
    return h;
}

// Total variation between the empirical law and `exact` on {0..k_max},
// with the mass above k_max lumped into one cell.
inline double tv_distance(const std::vector<std::uint64_t>& h, const Eigen::ArrayXd& exact) {
    const int k_max = static_cast<int>(h.size()) - 2;
    double n = 0;
    for (auto c : h) n += static_cast<double>(c);
    double tv = 0.0, exact_in = 0.0;
    for (int k = 0; k <= k_max; ++k) {
        tv += std::abs(static_cast<double>(h[k]) / n - exact[k]);
        exact_in += exact[k];
    }
    tv += std::abs(static_cast<double>(h.back()) / n - std::max(0.0, 1.0 - exact_in));
    return 0.5 * tv;
}

// Pearson chi-square p-value, pooling cells with expected count below 5.
inline double chi_square_pvalue(const std::vector<std::uint64_t>& h, const Eigen::ArrayXd& exact) {
    const int k_max = static_cast<int>(h.size()) - 2;
    double n = 0;
    for (auto c : h) n += static_cast<double>(c);
    std::vector<double> obs, expct;
    double pool_o = 0, pool_e = 0, exact_in = 0;
    for (int k = 0; k <= k_max + 1; ++k) {
        const double pk = k <= k_max ? exact[k] : std::max(0.0, 1.0 - exact_in);
        if (k <= k_max) exact_in += exact[k];
        pool_o += static_cast<double>(h[k]);
        pool_e += n * pk;
        if (pool_e >= 5.0) {
            obs.push_back(pool_o);
            expct.push_back(pool_e);
            pool_o = pool_e = 0;
        }
    }
    if (!obs.empty()) {
        obs.back() += pool_o;
        expct.back() += pool_e;
    }
    double stat = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) stat += (obs[i] - expct[i]) * (obs[i] - expct[i]) / expct[i];
    const double dof = static_cast<double>(obs.size()) - 1.0;
    return boost::math::gamma_q(dof / 2.0, stat / 2.0);
}

}  // namespace gwi::oracle
