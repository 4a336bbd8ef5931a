// SPDX-License-Identifier: Apache-2.0
#include "gwi/dp.hpp"
#include "gwi/numerics.hpp"
#include "gwi/pgf.hpp"
#include "gwi/simulator.hpp"

#include <doctest.h>

#include <cmath>

using namespace gwi;

namespace {
const LawParams kR1{1.0, 1.0, 1.0, 1.0, 0.5, 1.0};
}

TEST_CASE("q iteration by hand") {
    const auto tr = q_iterate<double>(kR1, 0.0, 3);
    CHECK(tr.q[0] == 1.0);
    CHECK(tr.q[1] == 0.5);
    CHECK(tr.q[2] == 0.375);
    CHECK(tr.q[3] == 0.3046875);
    const auto fixed = q_iterate<double>(kR1, 1.0, 10);
    CHECK(fixed.q.maxCoeff() == 0.0);
}

TEST_CASE("orbit gap and its rate") {
    CHECK(theorem21_gap(kR1, 0.0, 3) == doctest::Approx(0.5 - (1.0 / 0.3046875 - 1.0) / 3.0).epsilon(1e-14));
    CHECK(theorem21_gap(kR1, 0.0, 3) == doctest::Approx(-0.260684).epsilon(1e-6));
    for (double t : {0.0, 0.5, 0.9, 0.99}) {
        CHECK(std::abs(theorem21_gap(kR1, t, 100000)) < std::abs(theorem21_gap(kR1, t, 1000)));
    }
    const double n = 1e6;
    for (double nu : {1.0, 0.5}) {
        LawParams p = kR1;
        p.nu = nu;
        CHECK(std::abs(theorem21_gap(p, 0.0, 1000000)) < 10.0 * std::log(n) / n);
    }
}

TEST_CASE("epsilon by hand and via both formulas") {
    CHECK(epsilon_nt(kR1, 0.0, 1) == doctest::Approx(-0.25).epsilon(1e-15));
    CHECK(epsilon_nt(kR1, 0.0, 3) == doctest::Approx(-0.23828125).epsilon(1e-15));
    for (Eigen::Index n : {10, 1000, 100000})
        CHECK(epsilon_nt(kR1, 0.3, n) == doctest::Approx(epsilon_nt_direct(kR1, 0.3, n)).epsilon(1e-8));
}

TEST_CASE("Theta is nondecreasing, below Xi, and tends to zero") {
    for (double nu : {1.0, 0.5, 0.25}) {
        LawParams p = kR1;
        p.nu = nu;
        p.kappa1 = 1.0 / (1.0 + nu);
        double prev = -1e300;
        for (int i = 0; i < 2000; ++i) {
            const double t = i / 2000.0;
            const double th = theta_func<double>(p, t);
            CHECK(th >= prev - 1e-15);
            CHECK(th <= xi_func<double>(p, t) + 1e-15);
            CHECK(th <= 1e-15);
            prev = th;
        }
        // Θ vanishes like -κ1 x (ν(1-ν)/2 + 2ν²) with x = κ1 q^ν.
        const double lead = nu * (1 - nu) / 2 + 2 * nu * nu;
        double last = 1.0;
        for (double q : {1e-3, 1e-6, 1e-9, 1e-12, 1e-15}) {
            const double th = std::abs(theta_func<double>(p, 1.0 - q));
            CHECK(th < last);
            last = th;
        }
        const double q = 1.0 - (1.0 - 1e-15);
        const double x = p.kappa1 * std::pow(q, nu);
        CHECK(std::abs(theta_func<double>(p, 1.0 - 1e-15) / (-p.kappa1 * x * lead) - 1.0) < 1e-2);
    }
}

TEST_CASE("Xi telescopes along the orbit") {
    using L = long double;
    for (double nu : {1.0, 0.5}) {
        LawParams p = kR1;
        p.nu = nu;
        for (double t : {0.0, 0.9}) {
            const Eigen::Index n = 5000;
            const auto tr = q_iterate<L>(p, static_cast<L>(t), n);
            const L direct = static_cast<L>(p.kappa1 * nu) * n - std::pow(tr.q[n], -static_cast<L>(nu)) +
                             std::pow(tr.q[0], -static_cast<L>(nu));
            const L sum = upsilon_sum<L>(p, tr, n);
            CHECK(static_cast<double>(std::abs(sum - direct) / std::abs(direct)) < 1e-10);
        }
    }
}

TEST_CASE("gamma products") {
    const auto g = gamma_sequences<double>(kR1, 0.0, 2);
    CHECK(g.gamma0(1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(g.gamma0(2) == doctest::Approx(std::exp(-1.5)).epsilon(1e-15));
    const auto one = gamma_sequences<double>(kR1, 1.0, 20);
    for (Eigen::Index k = 0; k <= 20; ++k) CHECK(one.gamma0(k) == 1.0);
}

TEST_CASE("H_n values and the DP law of Z_n") {
    CHECK(h_n(kR1, 0.5, 1) == doctest::Approx(0.625 * std::exp(-0.5)).epsilon(1e-15));
    CHECK(h_n(kR1, 0.5, 1) == doctest::Approx(0.3790816623).epsilon(1e-9));
    for (Eigen::Index n : {1, 7, 30}) CHECK(h_n(kR1, 1.0, n) == 1.0);

    const LawParams p{0.5, 0.5, 0.5, 0.8, 0.5, 0.7};
    const DpDistribution d = DpOracle(p, 1024).run(Model::UnstoppedZ, 15, false);
    for (Eigen::Index n : {1, 5, 15})
        CHECK(std::abs(h_n(p, 0.0, n) - d.pi[n][0]) <= d.lost_mass[n] + 1e-12);
}

TEST_CASE("Laplace transform of Z_n") {
    CHECK(laplace_zn(kR1, 0.0, 10) == 1.0);
    CHECK(laplace_zn(kR1, 60.0, 10) == doctest::Approx(h_n(kR1, 0.0, 10)).epsilon(1e-12));
    // Monte Carlo of e^{-0.1 Z_20} for the unstopped chain.
    const LawSamplers laws(kR1);
    CompensatedSum<> s, s2;
    const int reps = 100000;
    for (int r = 0; r < reps; ++r) {
        Stream rng = Stream::derive(61, static_cast<std::uint64_t>(r));
        const Trajectory tr = simulate(laws, Model::UnstoppedZ, 20, kDefaultCap, rng);
        const double v = std::exp(-0.1 * static_cast<double>(tr.values.back()));
        s.add(v);
        s2.add(v * v);
    }
    const double m = s.value() / reps;
    const double se = std::sqrt((s2.value() / reps - m * m) / (reps - 1.0));
    CHECK(std::abs(m - laplace_zn(kR1, 0.1, 20)) < 3 * se);
}
