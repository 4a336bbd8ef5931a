// SPDX-License-Identifier: Apache-2.0
#include "gwi/errors.hpp"
#include "gwi/laws.hpp"
#include "gwi/numerics.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace gwi;

namespace {

LawParams params(double nu, double theta, double delta, double k0, double k1, double k2) {
    return LawParams{nu, theta, delta, k0, k1, k2};
}

constexpr std::uint64_t kDraws = 1000000;

double bernoulli_se(double p, std::uint64_t n) { return std::sqrt(p * (1 - p) / static_cast<double>(n)); }

}  // namespace

TEST_CASE("validate_params accepts the boundary and rejects non-pmf offspring") {
    CHECK_NOTHROW(validate_params(1, 1, 1, 1, 0.5, 1));
    CHECK_NOTHROW(validate_params(0.5, 0.5, 0.5, 0.5, 0.5, 2));
    try {
        validate_params(1, 1, 1, 1, 0.6, 1);
        FAIL("expected NonPmf");
    } catch (const ParamError& e) {
        CHECK(e.kind() == ParamErrorKind::NonPmf);
        CHECK(e.field() == "kappa1");
    }
}

TEST_CASE("validate_params names the first out-of-range field") {
    auto field_of = [](auto&& call) {
        try {
            call();
        } catch (const ParamError& e) {
            CHECK(e.kind() == ParamErrorKind::OutOfRange);
            return e.field();
        }
        return std::string("none");
    };
    CHECK(field_of([] { validate_params(1.5, 1, 1, 1, 0.3, 1); }) == "nu");
    CHECK(field_of([] { validate_params(1, 0, 1, 1, 0.5, 1); }) == "theta");
    CHECK(field_of([] { validate_params(1, 1, 1.2, 1, 0.5, 1); }) == "delta");
    CHECK(field_of([] { validate_params(1, 1, 1, 1.1, 0.5, 1); }) == "kappa0");
    CHECK(field_of([] { validate_params(1, 1, 1, 1, 0.5, -1); }) == "kappa2");
    CHECK(field_of([] { validate_params(1, 1, 1, 1, std::nan(""), 1); }) == "kappa1");
}

TEST_CASE("offspring pmf: closed forms") {
    const PmfTable a = offspring_pmf(params(1, 1, 1, 1, 0.5, 1), 6);
    CHECK(a[0] == 0.5);
    CHECK(a[1] == 0.0);
    CHECK(a[2] == doctest::Approx(0.5).epsilon(1e-15));
    for (int k = 3; k <= 6; ++k) CHECK(a[k] == doctest::Approx(0.0).epsilon(1e-15));

    const PmfTable b = offspring_pmf(params(0.5, 1, 1, 1, 0.5, 1), 3);
    CHECK(b[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(b[1] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(b[2] == doctest::Approx(0.1875).epsilon(1e-15));
    CHECK(b[3] == doctest::Approx(0.03125).epsilon(1e-15));
}

TEST_CASE("offspring mean increases to one") {
    const LawParams p = params(0.5, 1, 1, 1, 0.5, 1);
    double prev = 0.0;
    for (Eigen::Index n : {100, 10000, 1000000}) {
        const PmfTable t = offspring_pmf(p, n);
        CompensatedSum<> mean;
        for (Eigen::Index k = 1; k <= n; ++k) mean.add(static_cast<double>(k) * t[k]);
        CHECK(mean.value() > prev);
        CHECK(mean.value() <= 1.0 + 1e-12);
        prev = mean.value();
    }
    CHECK(prev > 0.99);
    CHECK(compensated_sum(offspring_pmf(p, 1000).probs) + offspring_pmf(p, 1000).truncation_mass ==
          doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("immigration pmf: Poisson at theta = 1 and the first two terms in general") {
    const PmfTable pois = immigration_pmf(params(1, 1, 1, 1, 0.5, 1), 10);
    CHECK(pois[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(pois[1] == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(pois[4] == doctest::Approx(std::exp(-1.0) / 24.0).epsilon(1e-14));
    const PmfTable half = immigration_pmf(params(1, 0.5, 1, 1, 0.5, 1), 10);
    CHECK(half[1] == doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-15));
    CHECK(immigration_pmf(params(1, 0.3, 1, 1, 0.5, 2.5), 3)[0] == doctest::Approx(std::exp(-2.5)).epsilon(1e-15));
}

TEST_CASE("initial pmf: Sibuya mixture") {
    const PmfTable one = initial_pmf(params(1, 1, 1, 1, 0.5, 1), 5);
    CHECK(one[0] == 0.0);
    CHECK(one[1] == 1.0);
    CHECK(one[2] == 0.0);
    const PmfTable half = initial_pmf(params(1, 1, 0.5, 1, 0.5, 1), 3);
    CHECK(half[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(half[2] == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(half[3] == doctest::Approx(0.0625).epsilon(1e-15));
    CHECK(initial_pmf(params(1, 1, 0.5, 0.4, 0.5, 1), 2)[0] == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("survival functions match the pmf tables") {
    const LawParams p = params(0.5, 1, 0.25, 1, 0.5, 1);
    const PmfTable off = offspring_pmf(p, 200);
    const PmfTable ini = initial_pmf(p, 200);
    CHECK(offspring_survival(p, 200) == doctest::Approx(off.truncation_mass).epsilon(1e-12));
    CHECK(p.kappa0 * sibuya_survival(p.delta, 200) == doctest::Approx(ini.truncation_mass).epsilon(1e-12));
}

TEST_CASE("offspring sampler frequencies") {
    const OffspringSampler light(params(1, 1, 1, 1, 0.5, 1));
    const auto h = oracle::histogram([&](Stream& r) { return light(r); }, kDraws, 50, 11);
    CHECK(std::abs(static_cast<double>(h[0]) / kDraws - 0.5) < 0.002);
    double mean = 0, sq = 0;
    for (int k = 0; k <= 50; ++k) {
        mean += k * static_cast<double>(h[k]);
        sq += k * k * static_cast<double>(h[k]);
    }
    mean /= kDraws;
    const double se = std::sqrt((sq / kDraws - mean * mean) / kDraws);
    CHECK(std::abs(mean - 1.0) < 3 * se);

    const LawParams heavy = params(0.5, 1, 1, 1, 0.5, 1);
    const OffspringSampler heavy_sampler(heavy);
    const auto hh = oracle::histogram([&](Stream& r) { return heavy_sampler(r); }, kDraws, 50, 12);
    const PmfTable exact = offspring_pmf(heavy, 50);
    CHECK(oracle::tv_distance(hh, exact.probs) < 5e-3);
    CHECK(oracle::chi_square_pvalue(hh, exact.probs) > 1e-4);
}

TEST_CASE("offspring sums follow the convolution power") {
    // Sums of `count` draws against P^{*count}; large counts go through the
    // atom-splitting path.
    const LawParams p = params(0.5, 1, 1, 1, 0.5, 1);
    const OffspringSampler sampler(p);
    const Eigen::Index K = 8192;
    const Eigen::VectorXd base = offspring_pmf(p, K).probs.matrix();
    FftConvolver fft;
    for (std::uint64_t count : {std::uint64_t{7}, std::uint64_t{300}}) {
        Eigen::VectorXd power = Eigen::VectorXd::Zero(K + 1);
        power[0] = 1.0;
        Eigen::VectorXd sq = base;
        for (std::uint64_t c = count; c; c >>= 1) {
            if (c & 1) power = fft.convolve(power, sq, K + 1);
            sq = fft.convolve(sq, sq, K + 1);
        }
        const int k_max = static_cast<int>(std::min<Eigen::Index>(K, 3 * static_cast<Eigen::Index>(count) + 50));
        const auto h = oracle::histogram([&](Stream& r) { return sampler.sum(count, r); }, 200000, k_max,
                                         100 + count);
        const Eigen::ArrayXd exact = power.head(k_max + 1).array();
        CHECK(oracle::chi_square_pvalue(h, exact) > 1e-4);
    }
}

TEST_CASE("immigration sampler frequencies") {
    const LawParams pois = params(1, 1, 1, 1, 0.5, 1);
    const ImmigrationSampler pois_sampler(pois);
    const auto h = oracle::histogram([&](Stream& r) { return pois_sampler(r); }, kDraws, 50, 21);
    CHECK(std::abs(static_cast<double>(h[0]) / kDraws - std::exp(-1.0)) < 0.002);

    const LawParams half = params(1, 0.5, 1, 1, 0.5, 1);
    const ImmigrationSampler half_sampler(half);
    const auto hh = oracle::histogram([&](Stream& r) { return half_sampler(r); }, kDraws, 50, 22);
    const double b0 = std::exp(-1.0);
    CHECK(std::abs(static_cast<double>(hh[0]) / kDraws - b0) < 3 * bernoulli_se(b0, kDraws));
    const PmfTable exact = immigration_pmf(half, 50);
    CHECK(oracle::tv_distance(hh, exact.probs) < 5e-3);
    CHECK(oracle::chi_square_pvalue(hh, exact.probs) > 1e-4);
}

TEST_CASE("initial sampler frequencies") {
    const LawParams one = params(1, 1, 1, 1, 0.5, 1);
    Stream rng = Stream::derive(31, 0);
    for (int i = 0; i < 1000; ++i) CHECK(sample_initial(one, rng) == 1);

    const LawParams half = params(1, 1, 0.5, 1, 0.5, 1);
    const InitialSampler half_sampler(half);
    const auto h = oracle::histogram([&](Stream& r) { return half_sampler(r); }, kDraws, 50, 32);
    CHECK(std::abs(static_cast<double>(h[1]) / kDraws - 0.5) < 0.002);

    const LawParams mixed = params(1, 1, 0.5, 0.4, 0.5, 1);
    const InitialSampler mixed_sampler(mixed);
    const auto hm = oracle::histogram([&](Stream& r) { return mixed_sampler(r); }, kDraws, 50, 33);
    CHECK(std::abs(static_cast<double>(hm[0]) / kDraws - 0.6) < 3 * bernoulli_se(0.6, kDraws));
    CHECK(oracle::tv_distance(hm, initial_pmf(mixed, 50).probs) < 5e-3);
}

TEST_CASE("positive stable sampler matches its Laplace transform") {
    auto laplace_z = [](double theta, double lambda, std::uint64_t seed) {
        CompensatedSum<> s, s2;
        for (std::uint64_t i = 0; i < kDraws; ++i) {
            Stream rng = Stream::derive(seed, i);
            const double v = std::exp(-lambda * stable_positive(theta, rng));
            s.add(v);
            s2.add(v * v);
        }
        const double m = s.value() / kDraws;
        const double se = std::sqrt((s2.value() / kDraws - m * m) / (kDraws - 1.0));
        return (m - std::exp(-std::pow(lambda, theta))) / se;
    };
    CHECK(std::abs(laplace_z(0.5, 1.0, 41)) < 3);
    CHECK(std::abs(laplace_z(0.5, 4.0, 42)) < 3);
    CHECK(std::abs(laplace_z(0.9, 1.0, 43)) < 3);
    Stream rng = Stream::derive(1, 0);
    CHECK_THROWS_AS(stable_positive(1.0, rng), NumericError);
}

TEST_CASE("poisson draws at very large rates") {
    const double rate = 1e13;
    CompensatedSum<> s;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        Stream rng = Stream::derive(51, static_cast<std::uint64_t>(i));
        s.add(static_cast<double>(poisson_draw(rate, rng)) - rate);
    }
    const double z = (s.value() / n) / std::sqrt(rate / n);
    CHECK(std::abs(z) < 4);
    Stream rng = Stream::derive(52, 0);
    CHECK(poisson_draw(1e30, rng) == kSaturated);
}
