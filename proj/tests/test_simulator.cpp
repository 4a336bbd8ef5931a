// SPDX-License-Identifier: Apache-2.0
#include "gwi/errors.hpp"
#include "gwi/limits.hpp"
#include "gwi/pgf.hpp"
#include "gwi/renewal.hpp"
#include "gwi/simulator.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace gwi;

namespace {

const LawParams kR1{1.0, 1.0, 1.0, 1.0, 0.5, 1.0};

BatchOptions options(std::uint64_t reps, std::uint64_t seed, unsigned threads = 1) {
    BatchOptions o;
    o.reps = reps;
    o.seed = seed;
    o.threads = threads;
    return o;
}

double z_score(const BatchStats& st, Eigen::Index n, double expected) {
    return (st.survival(n) - expected) / st.survival_se(n);
}

}  // namespace

TEST_CASE("one-step enumeration of the three variants") {
    const BatchStats gated = estimate_survival(kR1, Model::GatedW, 1, options(1000000, 71));
    CHECK(std::abs(z_score(gated, 1, 0.5)) < 3);
    CHECK(gated.survival(0) == 1.0);

    const BatchStats stopped = estimate_survival(kR1, Model::StoppedZ, 2, options(1000000, 72));
    CHECK(std::abs(z_score(stopped, 1, 1.0 - 0.5 * std::exp(-1.0))) < 3);
    const double u2 = 1.0 - 0.5 * std::exp(-1.0) - std::exp(-1.0) * (0.625 * std::exp(-0.5) - 0.5 * std::exp(-1.0));
    CHECK(std::abs(z_score(stopped, 2, u2)) < 3);

    // With Z0 = 1 the offspring are 0 or 2, so Z1 = 1 only through Λ = 0, Y = 1.
    const LawSamplers laws(kR1);
    std::uint64_t ones = 0;
    const std::uint64_t reps = 1000000;
    for (std::uint64_t r = 0; r < reps; ++r) {
        Stream rng = Stream::derive(73, r);
        const Trajectory tr = simulate(laws, Model::UnstoppedZ, 1, kDefaultCap, rng);
        REQUIRE(tr.values[0] == 1);
        ones += tr.values[1] == 1;
    }
    const double p1 = 0.5 * std::exp(-1.0);
    CHECK(std::abs(static_cast<double>(ones) / reps - p1) < 3 * std::sqrt(p1 * (1 - p1) / reps));
}

TEST_CASE("fraction alive at generation zero is kappa0") {
    const LawParams p{1.0, 1.0, 0.5, 0.4, 0.5, 1.0};
    const BatchStats st = estimate_survival(p, Model::StoppedZ, 3, options(200000, 74));
    CHECK(std::abs(z_score(st, 0, 0.4)) < 3);
    const LifeTable life = sample_life_period(p, Model::StoppedZ, 200000, 3, 74);
    CHECK(life.tail[0] == st.survival(0));
    for (std::size_t n = 1; n < life.tail.size(); ++n) CHECK(life.tail[n] <= life.tail[n - 1]);
}

TEST_CASE("gated chain: survival ratio at one step") {
    const BatchStats st = estimate_survival(kR1, Model::GatedW, 1, options(1000000, 75));
    const double ratio = st.survival(1) / st.survival(0);
    CHECK(std::abs(ratio - 0.5) < 3 * st.survival_se(1));
}

TEST_CASE("gating never raises survival beyond Monte Carlo noise") {
    const LawParams p{0.5, 1.0, 0.5, 0.8, 0.5, 0.5};
    const BatchStats gated = estimate_survival(p, Model::GatedW, 40, options(100000, 82));
    const BatchStats stopped = estimate_survival(p, Model::StoppedZ, 40, options(100000, 83));
    for (Eigen::Index n = 0; n <= 40; ++n)
        CHECK(gated.survival(n) <= stopped.survival(n) + 3 * (gated.survival_se(n) + stopped.survival_se(n)));
    CHECK(gated.survival(40) < stopped.survival(40));
}

TEST_CASE("stopped chain survival follows the renewal solution") {
    const LawParams p{1.0, 1.0, 0.5, 0.7, 0.5, 0.25};
    const RenewalTable ren = build_renewal(p, 50);
    const BatchStats st = estimate_survival(p, Model::StoppedZ, 50, options(200000, 76));
    double worst = 0.0;
    for (Eigen::Index n = 1; n <= 50; ++n) worst = std::max(worst, std::abs(z_score(st, n, p.kappa0 * ren.u[n])));
    CHECK(worst < 3);
}

TEST_CASE("life period tail at two generations") {
    const LifeTable life = sample_life_period(kR1, Model::StoppedZ, 400000, 2, 77);
    const auto exact = oracle::two_step_survival(kR1);
    CHECK(std::abs(life.tail[0] - 1.0) == 0.0);
    CHECK(std::abs(life.tail[2] - 0.5 * (exact.lower + exact.upper)) < 3 * life.se[2]);
}

TEST_CASE("batch results do not depend on the number of threads") {
    const LawParams p{0.5, 1.0, 0.25, 1.0, 0.5, 1.0};
    BatchOptions a = options(20000, 78, 1), b = options(20000, 78, 4);
    a.cap = b.cap = 100000;
    const BatchStats x = estimate_survival(p, Model::StoppedZ, 30, a);
    const BatchStats y = estimate_survival(p, Model::StoppedZ, 30, b);
    CHECK(x.positive == y.positive);
    CHECK(x.censored_by == y.censored_by);
    CHECK(x.life_exceeds == y.life_exceeds);
    const auto cx = conditional_laplace_mc(p, Model::StoppedZ, 10, std::vector<double>{0.01, 0.1}, a);
    const auto cy = conditional_laplace_mc(p, Model::StoppedZ, 10, std::vector<double>{0.01, 0.1}, b);
    CHECK(cx[0].value == cy[0].value);
    CHECK(cx[1].se == cy[1].se);
    const BatchStats w = estimate_survival(p, Model::StoppedZ, 30, [&] {
        BatchOptions c = a;
        c.threads = 8;
        return c;
    }());
    CHECK(w.positive == x.positive);
    CHECK(w.censored_by == x.censored_by);
}

TEST_CASE("cap censoring is counted as survival and bounded") {
    BatchOptions o = options(5000, 79);
    o.cap = 10;
    const BatchStats st = estimate_survival(kR1, Model::StoppedZ, 20, o);
    CHECK(st.censored > 0);
    CHECK(st.censored_by.back() == st.censored);
    for (Eigen::Index n = 0; n <= 20; ++n) CHECK(st.survival_count(n) + st.zero_count(n) == st.reps);

    Stream rng = Stream::derive(80, 0);
    Trajectory tr;
    for (std::uint64_t i = 0; tr.cap_time < 0 && i < 1000; ++i) {
        rng = Stream::derive(80, i);
        tr = simulate(kR1, Model::UnstoppedZ, 200, 10, rng);
    }
    CHECK(tr.cap_time > 0);
    CHECK(tr.values.size() == static_cast<std::size_t>(tr.cap_time));

    CHECK(censoring_bias_bound(kR1, 50, 10) > censoring_bias_bound(kR1, 50, 1000));
    CHECK(censoring_bias_bound(kR1, 50, 100000) < 1e-100);
    CHECK(censoring_bias_bound(kR1, 0, 1) == 0.0);
}

TEST_CASE("conditional Laplace transform by Monte Carlo") {
    BatchOptions o = options(100000, 81);
    const auto zero = conditional_laplace_mc(kR1, Model::StoppedZ, 5, 0.0, o);
    CHECK(zero.value == 1.0);

    const RenewalTable ren = build_renewal(kR1, 200);
    const Eigen::Index n = 200;
    const double qn = ren.q[n];
    const auto est = conditional_laplace_mc(kR1, Model::StoppedZ, n, std::vector<double>{0.5 * qn, qn, 2 * qn}, o);
    const double exact = conditional_laplace_exact(kR1, ren, n, 1.0, Scaling::ByQn);
    CHECK(std::abs(est[1].value - exact) < 3 * est[1].se);
    CHECK(est[0].value > est[1].value);
    CHECK(est[1].value > est[2].value);

    // A chain with no immigration and no initial mass above zero never conditions.
    const LawParams dead{1.0, 1.0, 1.0, 1e-9, 0.5, 1e-9};
    CHECK_THROWS_AS(conditional_laplace_mc(dead, Model::StoppedZ, 3, 1.0, options(100, 1)), NumericError);
}
