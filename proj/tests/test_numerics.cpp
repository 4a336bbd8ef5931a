// SPDX-License-Identifier: Apache-2.0
#include "gwi/numerics.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <random>

using namespace gwi;

TEST_CASE("compensated sum keeps small terms next to a large one") {
    CompensatedSum<> s;
    s.add(1.0);
    for (int i = 0; i < 10; ++i) s.add(1e-16);
    CHECK(s.value() == doctest::Approx(1.0 + 1e-15).epsilon(1e-16));
    CHECK(s.value() > 1.0);
}

TEST_CASE("log gamma ratio agrees with lgamma where that is accurate") {
    for (double x : {0.5, 3.0, 40.0}) {
        const double ref = std::lgamma(x + 0.25) - std::lgamma(x + 1.5);
        CHECK(log_gamma_ratio(x, 0.25, 1.5) == doctest::Approx(ref).epsilon(1e-12));
    }
    // For huge x the ratio approaches (a - b) log x.
    const double x = 1e15;
    CHECK(log_gamma_ratio(x, 0.25, 1.5) == doctest::Approx(-1.25 * std::log(x)).epsilon(1e-12));
}

TEST_CASE("FFT convolution matches direct convolution") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Eigen::VectorXd a(300), b(5000);
    for (auto& v : a) v = U(gen);
    for (auto& v : b) v = U(gen) * 1e-3;
    FftConvolver fft;
    const Eigen::VectorXd got = fft.convolve(a, b, 4000);
    const Eigen::VectorXd ref = convolve_direct(a, b, 4000);
    REQUIRE(got.size() == 4000);
    CHECK((got - ref).cwiseAbs().maxCoeff() < 1e-12);
    // Small inputs take the direct route and must agree too.
    const Eigen::VectorXd small = fft.convolve(a.head(5), b.head(7), 11);
    CHECK((small - convolve_direct(a.head(5), b.head(7), 11)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("tanh-sinh handles an endpoint singularity") {
    CHECK(tanh_sinh_01([](double x) { return 1.0 / std::sqrt(x); }) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(tanh_sinh_01([](double x) { return std::sin(x); }) == doctest::Approx(1.0 - std::cos(1.0)).epsilon(1e-13));
}

TEST_CASE("linear fit recovers an exact line") {
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(50, 0.0, 10.0);
    Eigen::VectorXd y = 2.5 * x.array() - 1.0;
    const LinearFit f = linear_fit(x, y);
    CHECK(f.slope == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(f.rss < 1e-20);
}

TEST_CASE("parallel_for_chunks visits every chunk once") {
    for (unsigned threads : {1u, 3u}) {
        std::vector<std::atomic<int>> seen(97);
        parallel_for_chunks(seen.size(), threads, [&](std::size_t c) { ++seen[c]; });
        for (auto& s : seen) CHECK(s.load() == 1);
    }
}
