// SPDX-License-Identifier: Apache-2.0
#include "gwi/numerics.hpp"
#include "gwi/errors.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

namespace gwi {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::DegenerateTheta: return "DegenerateTheta";
        case ErrorCode::DegenerateConditioning: return "DegenerateConditioning";
        case ErrorCode::WrongRegime: return "WrongRegime";
        case ErrorCode::MissingK5: return "MissingK5";
        case ErrorCode::MissingRenewal: return "MissingRenewal";
        case ErrorCode::InsufficientLength: return "InsufficientLength";
        case ErrorCode::TolUnreachable: return "TolUnreachable";
        case ErrorCode::CapTooSmall: return "CapTooSmall";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

namespace {

// Bernoulli polynomials B_2 .. B_6.
double bernoulli_poly(int n, double a) {
    const double a2 = a * a, a3 = a2 * a, a4 = a3 * a, a5 = a4 * a, a6 = a5 * a;
    switch (n) {
        case 2: return a2 - a + 1.0 / 6.0;
        case 3: return a3 - 1.5 * a2 + 0.5 * a;
        case 4: return a4 - 2.0 * a3 + a2 - 1.0 / 30.0;
        case 5: return a5 - 2.5 * a4 + (5.0 / 3.0) * a3 - a / 6.0;
        case 6: return a6 - 3.0 * a5 + 2.5 * a4 - 0.5 * a2 + 1.0 / 42.0;
        default: return 0.0;
    }
}

}  // namespace

double log_gamma_ratio(double x, double a, double b) {
    if (x < 1000.0) return std::lgamma(x + a) - std::lgamma(x + b);
    // log Γ(x+a) ~ (x+a-1/2) log x - x + log(2π)/2 + Σ (-1)^{n+1} B_{n+1}(a) / (n(n+1) x^n)
    double result = (a - b) * std::log(x);
    double xpow = x;
    for (int n = 1; n <= 5; ++n) {
        const double sign = (n % 2 == 1) ? 1.0 : -1.0;
        result += sign * (bernoulli_poly(n + 1, a) - bernoulli_poly(n + 1, b)) / (n * (n + 1) * xpow);
        xpow *= x;
    }
    return result;
}

struct FftConvolver::Impl {
    Eigen::FFT<double> fft;
    std::vector<double> ta, tb, out;
    std::vector<std::complex<double>> fa, fb;
    Impl() { fft.SetFlag(Eigen::FFT<double>::HalfSpectrum); }
};

FftConvolver::FftConvolver() : impl_(new Impl) {}
FftConvolver::~FftConvolver() { delete impl_; }

Eigen::VectorXd FftConvolver::convolve(const Eigen::Ref<const Eigen::VectorXd>& a,
                                       const Eigen::Ref<const Eigen::VectorXd>& b,
                                       Eigen::Index out_len, bool clamp_nonnegative) {
    Eigen::VectorXd result = Eigen::VectorXd::Zero(out_len);
    if (a.size() == 0 || b.size() == 0 || out_len == 0) return result;
    const Eigen::Index na = std::min(a.size(), out_len);
    const Eigen::Index nb = std::min(b.size(), out_len);
    const Eigen::Index full = na + nb - 1;
    if (na * nb <= 4096) {
        for (Eigen::Index i = 0; i < na; ++i)
            for (Eigen::Index j = 0; j < nb && i + j < out_len; ++j) result[i + j] += a[i] * b[j];
        return result;
    }
    Eigen::Index nfft = 1;
    while (nfft < full) nfft <<= 1;
    auto& im = *impl_;
    im.ta.assign(static_cast<std::size_t>(nfft), 0.0);
    im.tb.assign(static_cast<std::size_t>(nfft), 0.0);
    std::copy(a.data(), a.data() + na, im.ta.begin());
    std::copy(b.data(), b.data() + nb, im.tb.begin());
    im.fft.fwd(im.fa, im.ta);
    im.fft.fwd(im.fb, im.tb);
    for (std::size_t i = 0; i < im.fa.size(); ++i) im.fa[i] *= im.fb[i];
    im.fft.inv(im.out, im.fa, nfft);
    const Eigen::Index n_out = std::min(out_len, full);
    for (Eigen::Index i = 0; i < n_out; ++i) {
        const double v = im.out[static_cast<std::size_t>(i)];
        result[i] = (clamp_nonnegative && v < 0.0) ? 0.0 : v;
    }
    return result;
}

Eigen::VectorXd convolve_direct(const Eigen::Ref<const Eigen::VectorXd>& a,
                                const Eigen::Ref<const Eigen::VectorXd>& b, Eigen::Index out_len) {
    Eigen::VectorXd result = Eigen::VectorXd::Zero(out_len);
    for (Eigen::Index i = 0; i < std::min(a.size(), out_len); ++i)
        for (Eigen::Index j = 0; j < b.size() && i + j < out_len; ++j) result[i + j] += a[i] * b[j];
    return result;
}

double tanh_sinh_01(const std::function<double(double)>& f, double tol) {
    constexpr double kHalfPi = std::numbers::pi / 2.0;
    constexpr double kTMax = 4.0;
    // x(t) = (1 + tanh(π/2 sinh t)) / 2, written with exp to keep 1 - x exact near x = 1
    auto node = [&](double t, double& x, double& w) {
        const double u = kHalfPi * std::sinh(t);
        const double e = std::exp(-2.0 * std::abs(u));
        const double small = e / (1.0 + e);  // distance to the nearer endpoint
        x = u >= 0 ? 1.0 - small : small;
        const double ch = std::cosh(u);
        w = 0.5 * kHalfPi * std::cosh(t) / (ch * ch);
    };
    double h = 0.5;
    double sum = 0.0;
    {
        double x, w;
        node(0.0, x, w);
        sum = w * f(x);
        for (double t = h; t <= kTMax; t += h) {
            node(t, x, w);
            sum += w * f(x);
            node(-t, x, w);
            sum += w * f(x);
        }
    }
    double estimate = h * sum;
    for (int level = 0; level < 12; ++level) {
        h *= 0.5;
        for (double t = h; t <= kTMax; t += 2.0 * h) {
            double x, w;
            node(t, x, w);
            sum += w * f(x);
            node(-t, x, w);
            sum += w * f(x);
        }
        const double next = h * sum;
        if (std::abs(next - estimate) <= tol * std::max(1.0, std::abs(next)) && level >= 2) return next;
        estimate = next;
    }
    return estimate;
}

LinearFit linear_fit(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw NumericError(ErrorCode::InvalidArgument, "linear_fit needs two or more paired points");
    const double mx = x.mean(), my = y.mean();
    const Eigen::ArrayXd dx = x.array() - mx, dy = y.array() - my;
    LinearFit fit;
    fit.slope = (dx * dy).sum() / (dx * dx).sum();
    fit.intercept = my - fit.slope * mx;
    fit.rss = (dy - fit.slope * dx).square().sum();
    return fit;
}

void parallel_for_chunks(std::size_t n_chunks, unsigned threads, const std::function<void(std::size_t)>& body) {
    threads = std::max(1u, threads);
    if (threads == 1 || n_chunks <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) body(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    const unsigned n_workers = static_cast<unsigned>(std::min<std::size_t>(threads, n_chunks));
    for (unsigned w = 0; w < n_workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t c = next++; c < n_chunks; c = next++) {
                if (failed.load()) return;
                try {
                    body(c);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace gwi
